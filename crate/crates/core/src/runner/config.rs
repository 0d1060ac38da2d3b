//! Strict TOML experiment configuration.
//!
//! Unknown keys are rejected. Every missing key except `dataset.classes`
//! and `partition.imbalance_factor` has a default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::data::{BlobSpec, PartitionMode, PartitionSpec, DEFAULT_NOISE, DEFAULT_SEPARATION};
use crate::error::{Error, Result};
use crate::federation::{Algorithm, RunConfig};
use crate::privacy;
use crate::scoring::MomentumNorm;

mod defaults {
    use super::*;

    pub fn per_class_max() -> usize {
        300
    }
    pub fn dim() -> usize {
        20
    }
    pub fn separation() -> f64 {
        DEFAULT_SEPARATION
    }
    pub fn noise() -> f64 {
        DEFAULT_NOISE
    }
    pub fn test_per_class() -> usize {
        100
    }
    pub fn beta() -> f64 {
        0.1
    }
    pub fn clients() -> usize {
        100
    }
    pub fn mode() -> PartitionMode {
        PartitionMode::EqualQuantity
    }
    pub fn hidden() -> Vec<usize> {
        vec![64, 32]
    }
    pub fn algorithms() -> Vec<Algorithm> {
        vec![Algorithm::FedAvg, Algorithm::FedCm, Algorithm::FedWcm]
    }
    pub fn trials() -> usize {
        3
    }
    pub fn output_dir() -> PathBuf {
        PathBuf::from("runs")
    }
    pub fn security_bits() -> u64 {
        privacy::DEFAULT_SECURITY_BITS
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSection {
    pub classes: usize,
    #[serde(default = "defaults::per_class_max")]
    pub per_class_max: usize,
    #[serde(default = "defaults::dim")]
    pub dim: usize,
    #[serde(default = "defaults::separation")]
    pub separation: f64,
    #[serde(default = "defaults::noise")]
    pub noise: f64,
    #[serde(default = "defaults::test_per_class")]
    pub test_per_class: usize,
}

impl DatasetSection {
    pub fn train_blobs(&self) -> BlobSpec {
        BlobSpec {
            num_classes: self.classes,
            per_class: self.per_class_max,
            dim: self.dim,
            separation: self.separation,
            noise: self.noise,
        }
    }

    pub fn test_blobs(&self) -> BlobSpec {
        BlobSpec {
            per_class: self.test_per_class,
            ..self.train_blobs()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    pub imbalance_factor: f64,
    #[serde(default = "defaults::beta")]
    pub beta: f64,
    #[serde(default = "defaults::clients")]
    pub clients: usize,
    #[serde(default = "defaults::mode")]
    pub mode: PartitionMode,
}

impl PartitionSection {
    pub fn spec(&self, seed: u64) -> PartitionSpec {
        PartitionSpec {
            beta: self.beta,
            imbalance_factor: self.imbalance_factor,
            num_clients: self.clients,
            mode: self.mode,
            seed,
        }
    }
}

/// Training hyperparameters shared by every algorithm of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainingSection {
    pub eta_l: f64,
    pub eta_g: f64,
    pub rounds: usize,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub sample_rate: f64,
    pub fedcm_alpha: f64,
    pub t0: f64,
    pub momentum_norm: MomentumNorm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_batches: Option<usize>,
}

impl Default for TrainingSection {
    fn default() -> Self {
        let r = RunConfig::default();
        Self {
            eta_l: r.eta_l,
            eta_g: r.eta_g,
            rounds: r.rounds,
            local_epochs: r.local_epochs,
            batch_size: r.batch_size,
            sample_rate: r.sample_rate,
            fedcm_alpha: r.fedcm_alpha,
            t0: r.t0,
            momentum_norm: r.momentum_norm,
            standard_batches: r.standard_batches,
        }
    }
}

impl TrainingSection {
    pub fn run_config(&self, algorithm: Algorithm, seed: u64) -> RunConfig {
        RunConfig {
            eta_l: self.eta_l,
            eta_g: self.eta_g,
            rounds: self.rounds,
            local_epochs: self.local_epochs,
            batch_size: self.batch_size,
            sample_rate: self.sample_rate,
            algorithm,
            seed,
            standard_batches: self.standard_batches,
            fedcm_alpha: self.fedcm_alpha,
            t0: self.t0,
            momentum_norm: self.momentum_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "defaults::hidden")]
    pub hidden: Vec<usize>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden: defaults::hidden(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrivacySection {
    /// Gather the global class distribution through the encrypted protocol.
    #[serde(default)]
    pub encrypted_distribution: bool,
    #[serde(default = "defaults::security_bits")]
    pub security_bits: u64,
}

impl Default for PrivacySection {
    fn default() -> Self {
        Self {
            encrypted_distribution: false,
            security_bits: defaults::security_bits(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "defaults::algorithms")]
    pub algorithms: Vec<Algorithm>,
    #[serde(default = "defaults::trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    pub dataset: DatasetSection,
    pub partition: PartitionSection,
    #[serde(default)]
    pub run: TrainingSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub privacy: PrivacySection,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(vec![e.message().to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Every range violation, empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.trials == 0 {
            v.push("trials must be >= 1".into());
        }
        if self.algorithms.is_empty() {
            v.push("algorithms must not be empty".into());
        }
        let d = &self.dataset;
        if d.classes < 2 {
            v.push(format!("dataset.classes = {} must be >= 2", d.classes));
        }
        if d.per_class_max == 0 {
            v.push("dataset.per_class_max must be >= 1".into());
        }
        if d.dim == 0 {
            v.push("dataset.dim must be >= 1".into());
        }
        if d.test_per_class == 0 {
            v.push("dataset.test_per_class must be >= 1".into());
        }
        if !(d.noise >= 0.0 && d.noise.is_finite()) {
            v.push(format!("dataset.noise = {} must be >= 0", d.noise));
        }
        if !d.separation.is_finite() {
            v.push("dataset.separation must be finite".into());
        }
        let p = &self.partition;
        if !(p.imbalance_factor > 0.0 && p.imbalance_factor <= 1.0) {
            v.push(format!(
                "partition.imbalance_factor = {} outside (0, 1]",
                p.imbalance_factor
            ));
        }
        if !(p.beta > 0.0 && p.beta.is_finite()) {
            v.push(format!("partition.beta = {} must be > 0", p.beta));
        }
        if p.clients == 0 {
            v.push("partition.clients must be >= 1".into());
        }
        v.extend(
            self.run
                .run_config(Algorithm::FedWcm, 0)
                .violations()
                .into_iter()
                .map(|m| format!("run.{m}")),
        );
        if self.model.hidden.contains(&0) {
            v.push("model.hidden widths must be >= 1".into());
        }
        if self.privacy.security_bits < privacy::MIN_SECURITY_BITS {
            v.push(format!(
                "privacy.security_bits = {} below {}",
                self.privacy.security_bits,
                privacy::MIN_SECURITY_BITS
            ));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(v))
        }
    }

    /// Layer widths `[dim, hidden.., classes]`.
    pub fn layer_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![self.dataset.dim];
        sizes.extend(&self.model.hidden);
        sizes.push(self.dataset.classes);
        sizes
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml_str(&text)
}

pub fn write_config(cfg: &ExperimentConfig, path: &Path) -> Result<()> {
    std::fs::write(path, cfg.to_toml_string()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[dataset]\nclasses = 10\n\n[partition]\nimbalance_factor = 0.1\n";

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_toml_str(MINIMAL).unwrap();
        assert_eq!(cfg.run.batch_size, 50);
        assert_eq!(cfg.run.eta_l, 0.1);
        assert_eq!(cfg.run.eta_g, 1.0);
        assert_eq!(cfg.run.local_epochs, 5);
        assert_eq!(cfg.run.sample_rate, 0.1);
        assert_eq!(cfg.partition.beta, 0.1);
        assert_eq!(cfg.partition.clients, 100);
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.model.hidden, vec![64, 32]);
        assert_eq!(cfg.layer_sizes(), vec![20, 64, 32, 10]);
    }

    #[test]
    fn zero_imbalance_factor_is_rejected() {
        let err = ExperimentConfig::from_toml_str(
            "[dataset]\nclasses = 10\n[partition]\nimbalance_factor = 0.0\n",
        )
        .unwrap_err();
        assert!(err.to_string().contains("imbalance_factor"), "{err}");
    }

    #[test]
    fn unknown_keys_are_fatal() {
        let err = ExperimentConfig::from_toml_str(
            "[dataset]\nclasses = 10\nclases = 3\n[partition]\nimbalance_factor = 0.1\n",
        )
        .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err =
            ExperimentConfig::from_toml_str(&format!("{MINIMAL}[run]\netal = 0.2\n")).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        let err =
            ExperimentConfig::from_toml_str(&format!("algorithms = [\"scaffold\"]\n{MINIMAL}"))
                .unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn every_violation_is_listed() {
        let text = "trials = 0\n[dataset]\nclasses = 1\n[partition]\nimbalance_factor = 2.0\nbeta = -1.0\n[run]\nsample_rate = 0.0\n";
        let Error::Config(list) = ExperimentConfig::from_toml_str(text).unwrap_err() else {
            panic!("expected config error");
        };
        assert_eq!(list.len(), 5, "{list:?}");
    }

    #[test]
    fn write_back_round_trips() {
        let cfg = ExperimentConfig::from_toml_str(
            "algorithms = [\"fedcm\", \"fedwcm_x\"]\nseed = 9\n[dataset]\nclasses = 4\n[partition]\nimbalance_factor = 0.5\nmode = \"quantity-skew\"\n[run]\nstandard_batches = 3\nmomentum_norm = \"temperature\"\n",
        )
        .unwrap();
        let echoed = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(echoed, cfg);
    }
}
