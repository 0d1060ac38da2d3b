//! Client scarcity scores, softmax aggregation weights, the weighting
//! temperature, and the adaptive momentum value.

use serde::{Deserialize, Serialize};

use crate::data::{ClassDistribution, ClientShard};
use crate::error::{Error, Result};

/// Lower bound of the momentum value, also its initial value.
pub const ALPHA_BASE: f64 = 0.1;
/// Upper clamp keeping `1 - alpha` away from zero.
pub const ALPHA_MAX: f64 = 0.99;
/// Added to the temperature denominator.
pub const TEMPERATURE_EPS: f64 = 1e-8;

/// Count-weighted mean of `|target_c - global_c|` over the shard's samples.
pub fn client_score(
    shard_counts: &[u64],
    global: &ClassDistribution,
    target: &ClassDistribution,
) -> Result<f64> {
    let classes = global.num_classes();
    if shard_counts.len() != classes || target.num_classes() != classes {
        return Err(Error::Dimension(format!(
            "score over {} / {} / {} classes",
            shard_counts.len(),
            classes,
            target.num_classes()
        )));
    }
    let total: u64 = shard_counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyShard);
    }
    let weighted: f64 = shard_counts
        .iter()
        .zip(global.proportions().iter().zip(target.proportions()))
        .map(|(&n, (&p, &p_hat))| (p_hat - p).abs() * n as f64)
        .sum();
    Ok(weighted / total as f64)
}

/// `sum_c |target_c - global_c|`.
pub fn total_discrepancy(global: &ClassDistribution, target: &ClassDistribution) -> f64 {
    global
        .proportions()
        .iter()
        .zip(target.proportions())
        .map(|(p, p_hat)| (p_hat - p).abs())
        .sum()
}

/// `t0 / (C · sum_c |target_c - global_c| + eps)`.
pub fn compute_temperature(
    global: &ClassDistribution,
    target: &ClassDistribution,
    t0: f64,
) -> Result<f64> {
    if !(t0 > 0.0 && t0.is_finite()) {
        return Err(Error::Parameter(format!("t0 = {t0} must be positive")));
    }
    let classes = global.num_classes() as f64;
    Ok(t0 / (classes * total_discrepancy(global, target) + TEMPERATURE_EPS))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoreTable {
    scores: Vec<f64>,
    mean: f64,
}

impl ScoreTable {
    /// Scores every shard once against the global and target distributions.
    pub fn compute(
        shards: &[ClientShard],
        global: &ClassDistribution,
        target: &ClassDistribution,
    ) -> Result<Self> {
        let scores = shards
            .iter()
            .map(|s| client_score(&s.class_counts, global, target))
            .collect::<Result<Vec<_>>>()?;
        Self::from_scores(scores)
    }

    pub fn from_scores(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::Input("empty score table".into()));
        }
        if scores.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Input("scores must be finite and nonnegative".into()));
        }
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        Ok(Self { scores, mean })
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, client: usize) -> f64 {
        self.scores[client]
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightVector {
    pub weights: Vec<f64>,
    pub temperature: f64,
}

impl WeightVector {
    pub fn uniform(len: usize) -> Self {
        Self {
            weights: vec![1.0 / len as f64; len],
            temperature: f64::INFINITY,
        }
    }

    pub fn entropy(&self) -> f64 {
        weight_entropy(&self.weights)
    }

    pub fn min(&self) -> f64 {
        self.weights.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.weights
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Shannon entropy in nats.
pub fn weight_entropy(weights: &[f64]) -> f64 {
    -weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|&w| w * w.ln())
        .sum::<f64>()
}

/// `exp(s_k / T) / sum_j exp(s_j / T)`, shifted by the max score.
pub fn softmax_weights(round_scores: &[f64], temperature: f64) -> Result<WeightVector> {
    softmax_weights_scaled(round_scores, temperature, None)
}

/// Softmax weights multiplied by positive per-client `factors` and
/// renormalized. With all factors equal to one this is bitwise identical to
/// [`softmax_weights`].
pub fn softmax_weights_scaled(
    round_scores: &[f64],
    temperature: f64,
    factors: Option<&[f64]>,
) -> Result<WeightVector> {
    if round_scores.is_empty() {
        return Err(Error::Parameter("softmax over no scores".into()));
    }
    if temperature.is_nan() || temperature <= 0.0 {
        return Err(Error::Parameter(format!(
            "temperature {temperature} must be positive"
        )));
    }
    if let Some(f) = factors {
        if f.len() != round_scores.len() || f.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::Parameter(
                "weight factors must be positive, one per score".into(),
            ));
        }
    }
    let max = round_scores
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let mut raw: Vec<f64> = round_scores
        .iter()
        .map(|s| ((s - max) / temperature).exp())
        .collect();
    if let Some(f) = factors {
        raw.iter_mut().zip(f).for_each(|(r, v)| *r *= v);
    }
    let total: f64 = raw.iter().sum();
    Ok(WeightVector {
        weights: raw.into_iter().map(|r| r / total).collect(),
        temperature,
    })
}

/// How the temperature enters the momentum exponent.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumNorm {
    /// `|T| / K` with K the total client count.
    #[default]
    TemperatureOverClients,
    /// `|T|`.
    Temperature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumValue {
    pub alpha: f64,
    pub q_ratio: f64,
}

impl MomentumValue {
    pub fn base() -> Self {
        Self {
            alpha: ALPHA_BASE,
            q_ratio: 1.0,
        }
    }

    pub fn fixed(alpha: f64) -> Self {
        Self {
            alpha,
            q_ratio: 1.0,
        }
    }
}

/// `0.1 + 0.9 · (1 - exp(-|T|/K)) · q_r`, clamped to `[0.1, 0.99]`, where
/// `q_r` is the sampled clients' mean score over the population mean score.
pub fn adaptive_alpha(
    table: &ScoreTable,
    sampled: &[usize],
    temperature: f64,
    num_clients: usize,
    norm: MomentumNorm,
) -> Result<MomentumValue> {
    if sampled.is_empty() {
        return Err(Error::Parameter("no sampled clients".into()));
    }
    if num_clients == 0 {
        return Err(Error::Parameter("K must be positive".into()));
    }
    if let Some(&bad) = sampled.iter().find(|&&k| k >= table.len()) {
        return Err(Error::Input(format!("client {bad} has no score")));
    }
    if table.mean() <= 0.0 {
        return Ok(MomentumValue::base());
    }
    let sampled_mean = sampled.iter().map(|&k| table.score(k)).sum::<f64>() / sampled.len() as f64;
    let q_ratio = sampled_mean / table.mean();
    let exponent = match norm {
        MomentumNorm::TemperatureOverClients => temperature.abs() / num_clients as f64,
        MomentumNorm::Temperature => temperature.abs(),
    };
    let raw = ALPHA_BASE + (1.0 - ALPHA_BASE) * (1.0 - (-exponent).exp()) * q_ratio;
    Ok(MomentumValue {
        alpha: raw.clamp(ALPHA_BASE, ALPHA_MAX),
        q_ratio,
    })
}
