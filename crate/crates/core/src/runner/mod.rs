//! Experiment orchestration: config loading, the dataset → partition →
//! federation → metrics pipeline, and cross-run comparison tables.

pub mod compare;
pub mod config;
pub mod experiment;

pub use compare::{compare, compare_dirs, Comparison};
pub use config::{load_config, write_config, ExperimentConfig};
pub use experiment::{
    collapse_threshold, prepare_trial, run_experiment, run_single, ExperimentReport, TrialData,
};
