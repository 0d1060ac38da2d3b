//! Deterministic federated-learning simulator.
//!
//! The crate implements four aggregation strategies over a small MLP:
//! FedAvg, FedCM (fixed client momentum), FedWCM (score-weighted
//! aggregation with adaptive momentum) and FedWCM-X (FedWCM with learning
//! rate and weight corrections for quantity-skewed partitions). Around the
//! engine sit long-tailed non-IID partitioning, an additively homomorphic
//! protocol for gathering the global class distribution, neuron
//! concentration diagnostics, and an experiment runner.

pub mod data;
pub mod error;
pub mod federation;
pub mod metrics;
pub mod nn;
pub mod privacy;
pub mod runner;
pub mod scoring;
pub mod seed;
pub mod tensor;

pub use error::{Error, Result};
