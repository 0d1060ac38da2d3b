use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::federation::Algorithm;
use crate::runner::experiment::{collapse_threshold, mean_std, ExperimentReport};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cell {
    pub imbalance_factor: f64,
    pub beta: f64,
    pub algorithm: Algorithm,
    pub mean: f64,
    pub std: f64,
    pub trials: usize,
    pub collapsed: bool,
}

/// Final-accuracy table with rows keyed by `(IF, beta)` and one column per
/// algorithm. Missing combinations have no cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<(f64, f64)>,
    pub algorithms: Vec<Algorithm>,
    pub cells: Vec<Cell>,
}

impl Comparison {
    pub fn cell(&self, imbalance_factor: f64, beta: f64, algorithm: Algorithm) -> Option<&Cell> {
        self.cells.iter().find(|c| {
            c.imbalance_factor == imbalance_factor && c.beta == beta && c.algorithm == algorithm
        })
    }

    /// Plain-text table. Collapsed cells are wrapped in underscores.
    pub fn to_text(&self) -> String {
        let mut out = format!("{:<10} {:<8}", "IF", "beta");
        for a in &self.algorithms {
            let _ = write!(out, " {:>17}", a.name());
        }
        out.push('\n');
        for &(imf, beta) in &self.rows {
            let _ = write!(out, "{imf:<10} {beta:<8}");
            for &a in &self.algorithms {
                let text = match self.cell(imf, beta, a) {
                    Some(c) => {
                        let body = format!("{:.2}±{:.2}", 100.0 * c.mean, 100.0 * c.std);
                        if c.collapsed {
                            format!("_{body}_")
                        } else {
                            body
                        }
                    }
                    None => "-".into(),
                };
                let _ = write!(out, " {text:>17}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("imbalance_factor,beta,algorithm,mean,std,trials,collapsed\n");
        for c in &self.cells {
            let _ = writeln!(
                out,
                "{},{},{},{:.16e},{:.16e},{},{}",
                c.imbalance_factor,
                c.beta,
                c.algorithm.name(),
                c.mean,
                c.std,
                c.trials,
                c.collapsed
            );
        }
        out
    }
}

/// Pools final accuracies of matching `(IF, beta, algorithm)` entries across
/// reports. All reports must share the dataset, client count and partition mode.
pub fn compare(reports: &[ExperimentReport]) -> Result<Comparison> {
    let first = reports
        .first()
        .ok_or_else(|| Error::Comparison("no reports to compare".into()))?;
    for (i, r) in reports.iter().enumerate().skip(1) {
        if r.dataset != first.dataset {
            return Err(Error::Comparison(format!(
                "report {i} uses a different dataset"
            )));
        }
        if r.clients != first.clients || r.partition_mode != first.partition_mode {
            return Err(Error::Comparison(format!(
                "report {i} uses a different partition ({} clients, {:?})",
                r.clients, r.partition_mode
            )));
        }
    }

    let key = |imf: f64, beta: f64| (imf.to_bits(), beta.to_bits());
    let mut pooled: BTreeMap<((u64, u64), Algorithm), Vec<f64>> = BTreeMap::new();
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut algorithms: Vec<Algorithm> = Vec::new();
    for r in reports {
        if !rows.contains(&(r.imbalance_factor, r.beta)) {
            rows.push((r.imbalance_factor, r.beta));
        }
        for s in &r.algorithms {
            if !algorithms.contains(&s.algorithm) {
                algorithms.push(s.algorithm);
            }
            pooled
                .entry((key(r.imbalance_factor, r.beta), s.algorithm))
                .or_default()
                .extend(&s.final_accuracy);
        }
    }
    rows.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    algorithms.sort_by_key(|a| Algorithm::ALL.iter().position(|x| x == a));

    let threshold = collapse_threshold(first.dataset.classes);
    let mut cells = Vec::new();
    for &(imf, beta) in &rows {
        for &a in &algorithms {
            if let Some(values) = pooled.get(&(key(imf, beta), a)) {
                if values.is_empty() {
                    continue;
                }
                let (mean, std) = mean_std(values);
                cells.push(Cell {
                    imbalance_factor: imf,
                    beta,
                    algorithm: a,
                    mean,
                    std,
                    trials: values.len(),
                    collapsed: mean < threshold,
                });
            }
        }
    }
    Ok(Comparison {
        rows,
        algorithms,
        cells,
    })
}

pub fn compare_dirs<P: AsRef<Path>>(dirs: &[P]) -> Result<Comparison> {
    let reports = dirs
        .iter()
        .map(|d| ExperimentReport::load(d.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    compare(&reports)
}
