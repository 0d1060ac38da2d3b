use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, ClassDistribution, ClientShard, Dataset};
use crate::error::{Error, Result};
use crate::federation::{Algorithm, Simulation};
use crate::metrics::{self, RoundRecord};
use crate::nn::ModelParams;
use crate::privacy;
use crate::runner::config::{write_config, DatasetSection, ExperimentConfig};
use crate::seed;

/// Everything one trial's runs share: data, shards and the global distribution.
#[derive(Debug, Clone)]
pub struct TrialData {
    pub seed: u64,
    pub train: Dataset,
    pub test: Dataset,
    pub shards: Vec<ClientShard>,
    pub global: ClassDistribution,
}

pub fn prepare_trial(cfg: &ExperimentConfig, trial_seed: u64) -> Result<TrialData> {
    let balanced = data::synth_blobs(
        &cfg.dataset.train_blobs(),
        seed::derive(trial_seed, &[seed::STREAM_TRAIN_DATA]),
    )?;
    let counts = data::longtail_counts(
        &ClassDistribution::from_counts(balanced.class_counts())?,
        cfg.partition.imbalance_factor,
    )?;
    let train = balanced.take_per_class(counts.counts())?;
    let shards = data::partition(&train, &cfg.partition.spec(trial_seed))?;
    let test = data::synth_blobs(
        &cfg.dataset.test_blobs(),
        seed::derive(trial_seed, &[seed::STREAM_TEST_DATA]),
    )?;
    let global = if cfg.privacy.encrypted_distribution {
        privacy::run_protocol(&shards, cfg.privacy.security_bits, trial_seed)?.0
    } else {
        data::global_distribution(&shards)?
    };
    Ok(TrialData {
        seed: trial_seed,
        train,
        test,
        shards,
        global,
    })
}

pub fn initial_model(cfg: &ExperimentConfig, trial_seed: u64) -> Result<ModelParams> {
    ModelParams::init(
        &cfg.layer_sizes(),
        &mut seed::rng_for(trial_seed, &[seed::STREAM_MODEL_INIT]),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub records: Vec<RoundRecord>,
}

impl RunOutcome {
    pub fn final_accuracy(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.test_accuracy)
    }

    pub fn final_min_recall(&self) -> f64 {
        self.records.last().map_or(0.0, |r| r.min_class_recall)
    }
}

/// Trains one algorithm on prepared trial data, evaluating every round.
pub fn run_single(
    cfg: &ExperimentConfig,
    algorithm: Algorithm,
    trial: usize,
    data: &TrialData,
) -> Result<RunOutcome> {
    let run_cfg = cfg.run.run_config(algorithm, data.seed);
    let target = ClassDistribution::uniform(cfg.dataset.classes);
    let sim = Simulation::with_global(&data.train, &data.shards, &data.global, &target, run_cfg)?;
    let mut state = sim.initial_state(initial_model(cfg, data.seed)?);
    let mut records = Vec::with_capacity(cfg.run.rounds);
    for _ in 0..cfg.run.rounds {
        let (next, record) = sim.run_round(&state, &data.test)?;
        if !next.model.is_finite() {
            return Err(Error::Input(format!(
                "{algorithm} diverged at round {}",
                record.round
            )));
        }
        records.push(record);
        state = next;
    }
    Ok(RunOutcome {
        algorithm,
        trial,
        records,
    })
}

/// Final-accuracy threshold below which a run counts as collapsed.
pub fn collapse_threshold(num_classes: usize) -> f64 {
    1.5 / num_classes as f64
}

pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmSummary {
    pub algorithm: Algorithm,
    /// Final-round accuracy per completed trial.
    pub final_accuracy: Vec<f64>,
    pub final_min_recall: Vec<f64>,
    pub mean: f64,
    pub std: f64,
    pub collapsed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub algorithm: Algorithm,
    pub trial: usize,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub dataset: DatasetSection,
    pub imbalance_factor: f64,
    pub beta: f64,
    pub clients: usize,
    pub partition_mode: data::PartitionMode,
    pub rounds: usize,
    pub trials: usize,
    pub seed: u64,
    pub algorithms: Vec<AlgorithmSummary>,
    pub failures: Vec<RunFailure>,
}

impl ExperimentReport {
    pub fn summary(&self, algorithm: Algorithm) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|s| s.algorithm == algorithm)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(SUMMARY_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Serialization(format!("{}: {e}", path.display())))
    }
}

pub const SUMMARY_FILE: &str = "summary.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const ROUNDS_FILE: &str = "rounds.csv";

pub fn run_dir(out: &Path, algorithm: Algorithm, trial: usize) -> PathBuf {
    out.join(algorithm.name()).join(format!("trial_{trial}"))
}

fn write_run(cfg: &ExperimentConfig, out: &Path, outcome: &RunOutcome) -> Result<()> {
    let dir = run_dir(out, outcome.algorithm, outcome.trial);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    write_config(cfg, &dir.join(CONFIG_FILE))?;
    metrics::emit_csv(
        &outcome.records,
        cfg.dataset.classes,
        cfg.model.hidden.len(),
        &dir.join(ROUNDS_FILE),
    )
}

/// Runs every algorithm × trial and, when `out` is given, writes per-run
/// CSVs, the resolved config and `summary.json`. A failing run is recorded
/// in the report and does not stop its siblings.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    out: Option<&Path>,
) -> Result<(ExperimentReport, Vec<RunOutcome>)> {
    cfg.validate()?;
    if let Some(out) = out {
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        write_config(cfg, &out.join(CONFIG_FILE))?;
    }

    let trials: Vec<Result<TrialData>> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| prepare_trial(cfg, cfg.seed + t as u64))
        .collect();

    let jobs: Vec<(Algorithm, usize)> = cfg
        .algorithms
        .iter()
        .flat_map(|&a| (0..cfg.trials).map(move |t| (a, t)))
        .collect();

    let results: Vec<Result<RunOutcome>> = jobs
        .par_iter()
        .map(|&(algorithm, trial)| {
            let data = trials[trial]
                .as_ref()
                .map_err(|e| Error::Input(e.to_string()))?;
            let outcome = run_single(cfg, algorithm, trial, data)?;
            if let Some(out) = out {
                write_run(cfg, out, &outcome)?;
            }
            Ok(outcome)
        })
        .collect();

    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for (&(algorithm, trial), result) in jobs.iter().zip(results) {
        match result {
            Ok(o) => outcomes.push(o),
            Err(e) => {
                log::warn!("{algorithm} trial {trial} failed: {e}");
                failures.push(RunFailure {
                    algorithm,
                    trial,
                    error: e.to_string(),
                });
            }
        }
    }

    let threshold = collapse_threshold(cfg.dataset.classes);
    let algorithms = cfg
        .algorithms
        .iter()
        .map(|&algorithm| {
            let runs: Vec<&RunOutcome> = outcomes
                .iter()
                .filter(|o| o.algorithm == algorithm)
                .collect();
            let final_accuracy: Vec<f64> = runs.iter().map(|o| o.final_accuracy()).collect();
            let final_min_recall = runs.iter().map(|o| o.final_min_recall()).collect();
            let (mean, std) = mean_std(&final_accuracy);
            AlgorithmSummary {
                algorithm,
                collapsed: !final_accuracy.is_empty() && mean < threshold,
                final_accuracy,
                final_min_recall,
                mean,
                std,
            }
        })
        .collect();

    let report = ExperimentReport {
        dataset: cfg.dataset.clone(),
        imbalance_factor: cfg.partition.imbalance_factor,
        beta: cfg.partition.beta,
        clients: cfg.partition.clients,
        partition_mode: cfg.partition.mode,
        rounds: cfg.run.rounds,
        trials: cfg.trials,
        seed: cfg.seed,
        algorithms,
        failures,
    };
    if let Some(out) = out {
        let path = out.join(SUMMARY_FILE);
        std::fs::write(&path, report.to_json()).map_err(|e| Error::io(&path, e))?;
    }
    Ok((report, outcomes))
}
