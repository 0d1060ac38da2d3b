//! Test accuracy, per-class recall, and neuron concentration.
//!
//! Neuron concentration is a class-selectivity statistic over hidden
//! activations: for neuron `j` with class-conditional mean activation
//! `a[j][c]` on a balanced probe set, `concentration_j = max_c a[j][c] /
//! sum_c a[j][c]`. It is `1/C` for a neuron that fires equally for every
//! class and `1` for a neuron that fires for one class only. Dead neurons
//! report the `1/C` floor. The value for a layer is the mean over its
//! neurons and the model value is the mean over hidden layers.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::nn::{self, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// Recall per class; `None` when the class has no test samples.
    pub per_class: Vec<Option<f64>>,
}

impl Evaluation {
    pub fn min_recall(&self) -> f64 {
        self.per_class
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Argmax classification accuracy and per-class recall.
pub fn evaluate(model: &ModelParams, test: &Dataset) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::Input("empty test set".into()));
    }
    let classes = test.num_classes();
    if model.output_dim() != classes {
        return Err(Error::Dimension(format!(
            "model emits {} logits for {classes} classes",
            model.output_dim()
        )));
    }
    let logits = nn::forward(model, test.features())?;
    let mut hits = vec![0u64; classes];
    let mut totals = vec![0u64; classes];
    for (i, &y) in test.labels().iter().enumerate() {
        totals[y] += 1;
        if logits.argmax_row(i) == y {
            hits[y] += 1;
        }
    }
    let correct: u64 = hits.iter().sum();
    let accuracy = correct as f64 / test.len() as f64;
    let per_class: Vec<Option<f64>> = hits
        .iter()
        .zip(&totals)
        .map(|(&h, &t)| (t > 0).then(|| h as f64 / t as f64))
        .collect();

    debug_assert!({
        let weighted: f64 = per_class
            .iter()
            .zip(&totals)
            .filter_map(|(r, &t)| r.map(|r| r * t as f64))
            .sum::<f64>()
            / test.len() as f64;
        (weighted - accuracy).abs() < 1e-12
    });
    Ok(Evaluation {
        accuracy,
        per_class,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Concentration {
    pub per_layer: Vec<f64>,
    pub mean: f64,
}

fn neuron_value(class_means: &[f64]) -> f64 {
    let floor = 1.0 / class_means.len() as f64;
    let total: f64 = class_means.iter().sum();
    if total <= 1e-12 {
        return floor;
    }
    let max = class_means.iter().copied().fold(0.0, f64::max);
    (max / total).clamp(floor, 1.0)
}

/// Mean concentration of each hidden layer's neurons on `probe`.
pub fn neuron_concentration(model: &ModelParams, probe: &Dataset) -> Result<Concentration> {
    if probe.is_empty() {
        return Err(Error::Input("empty probe set".into()));
    }
    let trace = nn::forward_trace(model, probe.features())?;
    let counts = probe.class_counts();
    let present: Vec<usize> = (0..counts.len()).filter(|&c| counts[c] > 0).collect();
    let floor = 1.0 / present.len() as f64;

    let per_layer: Vec<f64> = trace
        .post
        .iter()
        .map(|acts| {
            let width = acts.cols();
            let mut sums = vec![0.0; width * counts.len()];
            for (i, &y) in probe.labels().iter().enumerate() {
                for (j, &a) in acts.row(i).iter().enumerate() {
                    sums[j * counts.len() + y] += a;
                }
            }
            let mut class_means = vec![0.0; present.len()];
            let total: f64 = (0..width)
                .map(|j| {
                    for (slot, &c) in class_means.iter_mut().zip(&present) {
                        *slot = sums[j * counts.len() + c] / counts[c] as f64;
                    }
                    neuron_value(&class_means)
                })
                .sum();
            if width == 0 {
                floor
            } else {
                total / width as f64
            }
        })
        .collect();
    let mean = if per_layer.is_empty() {
        floor
    } else {
        per_layer.iter().sum::<f64>() / per_layer.len() as f64
    };
    Ok(Concentration { per_layer, mean })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: usize,
    pub test_accuracy: f64,
    pub per_class_accuracy: Vec<Option<f64>>,
    pub min_class_recall: f64,
    /// Momentum value the clients trained with this round.
    pub alpha_used: f64,
    pub mean_concentration: f64,
    pub layer_concentration: Vec<f64>,
    /// Entropy of this round's aggregation weights, in nats.
    pub weight_entropy: f64,
}

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV text for a run: `round, acc, acc_class_*, min_recall, alpha,
/// concentration_mean, concentration_layer_*, weight_entropy`.
pub fn records_csv(records: &[RoundRecord], num_classes: usize, num_layers: usize) -> String {
    let mut out = String::from("round,acc");
    for c in 0..num_classes {
        let _ = write!(out, ",acc_class_{c}");
    }
    out.push_str(",min_recall,alpha,concentration_mean");
    for l in 0..num_layers {
        let _ = write!(out, ",concentration_layer_{l}");
    }
    out.push_str(",weight_entropy\n");
    for r in records {
        let _ = write!(out, "{},{}", r.round, fmt_f64(r.test_accuracy));
        for c in 0..num_classes {
            out.push(',');
            if let Some(Some(v)) = r.per_class_accuracy.get(c) {
                out.push_str(&fmt_f64(*v));
            }
        }
        let _ = write!(
            out,
            ",{},{},{}",
            fmt_f64(r.min_class_recall),
            fmt_f64(r.alpha_used),
            fmt_f64(r.mean_concentration)
        );
        for l in 0..num_layers {
            out.push(',');
            if let Some(v) = r.layer_concentration.get(l) {
                out.push_str(&fmt_f64(*v));
            }
        }
        let _ = writeln!(out, ",{}", fmt_f64(r.weight_entropy));
    }
    out
}

pub fn emit_csv(
    records: &[RoundRecord],
    num_classes: usize,
    num_layers: usize,
    path: &Path,
) -> Result<()> {
    std::fs::write(path, records_csv(records, num_classes, num_layers))
        .map_err(|e| Error::io(path, e))
}
