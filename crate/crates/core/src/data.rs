//! Synthetic datasets, long-tail subsampling, and non-IID client partitions.

use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::{self, Rng};
use crate::tensor::Tensor2;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Tensor2,
    labels: Vec<usize>,
    num_classes: usize,
}

impl Dataset {
    pub fn new(features: Tensor2, labels: Vec<usize>, num_classes: usize) -> Result<Self> {
        if features.rows() == 0 || features.cols() == 0 {
            return Err(Error::Input("dataset needs N > 0 and d > 0".into()));
        }
        if labels.len() != features.rows() {
            return Err(Error::Dimension(format!(
                "{} labels for {} rows",
                labels.len(),
                features.rows()
            )));
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= num_classes) {
            return Err(Error::Input(format!(
                "label {bad} outside [0, {num_classes})"
            )));
        }
        Ok(Self {
            features,
            labels,
            num_classes,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn features(&self) -> &Tensor2 {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.num_classes];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    /// Features and labels for the given sample indices.
    pub fn batch(&self, indices: &[usize]) -> (Tensor2, Vec<usize>) {
        (
            self.features.select_rows(indices),
            indices.iter().map(|&i| self.labels[i]).collect(),
        )
    }

    /// Keeps the first `counts[c]` samples of every class `c`, preserving order.
    pub fn take_per_class(&self, counts: &[u64]) -> Result<Dataset> {
        if counts.len() != self.num_classes {
            return Err(Error::Dimension(format!(
                "{} counts for {} classes",
                counts.len(),
                self.num_classes
            )));
        }
        let available = self.class_counts();
        if let Some(c) = (0..counts.len()).find(|&c| counts[c] > available[c]) {
            return Err(Error::Input(format!(
                "class {c}: want {} samples, have {}",
                counts[c], available[c]
            )));
        }
        let mut taken = vec![0u64; self.num_classes];
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| {
                let y = self.labels[i];
                if taken[y] < counts[y] {
                    taken[y] += 1;
                    true
                } else {
                    false
                }
            })
            .collect();
        let (features, labels) = self.batch(&keep);
        Dataset::new(features, labels, self.num_classes)
    }
}

/// Isotropic Gaussian blobs. Class means sit on scaled simplex vertices when
/// `dim >= num_classes`, otherwise evenly on a circle in the first two axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlobSpec {
    pub num_classes: usize,
    pub per_class: usize,
    pub dim: usize,
    /// Distance of every class mean from the origin.
    pub separation: f64,
    /// Per-coordinate noise standard deviation.
    pub noise: f64,
}

pub const DEFAULT_SEPARATION: f64 = 3.0;
pub const DEFAULT_NOISE: f64 = 1.0;

impl BlobSpec {
    pub fn new(num_classes: usize, per_class: usize, dim: usize) -> Self {
        Self {
            num_classes,
            per_class,
            dim,
            separation: DEFAULT_SEPARATION,
            noise: DEFAULT_NOISE,
        }
    }

    pub fn class_mean(&self, class: usize) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim];
        if self.dim >= self.num_classes {
            mean[class] = self.separation;
        } else if self.dim >= 2 {
            let angle = std::f64::consts::TAU * class as f64 / self.num_classes as f64;
            mean[0] = self.separation * angle.cos();
            mean[1] = self.separation * angle.sin();
        } else {
            mean[0] = self.separation * class as f64;
        }
        mean
    }

    fn validate(&self) -> Result<()> {
        if self.num_classes < 2 {
            return Err(Error::InvalidSpec("need at least 2 classes".into()));
        }
        if self.per_class == 0 || self.dim == 0 {
            return Err(Error::InvalidSpec(
                "per_class and dim must be positive".into(),
            ));
        }
        if !(self.separation.is_finite() && self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::InvalidSpec(
                "separation/noise must be finite, noise >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Balanced blobs, `per_class` samples per class, interleaved by class.
pub fn synth_blobs(spec: &BlobSpec, seed: u64) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = seed::rng(seed);
    let means: Vec<Vec<f64>> = (0..spec.num_classes).map(|c| spec.class_mean(c)).collect();
    let n = spec.num_classes * spec.per_class;
    let mut data = Vec::with_capacity(n * spec.dim);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..spec.per_class {
        for (c, mean) in means.iter().enumerate() {
            for &m in mean {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(m + spec.noise * z);
            }
            labels.push(c);
        }
    }
    Dataset::new(
        Tensor2::from_vec(n, spec.dim, data)?,
        labels,
        spec.num_classes,
    )
}

/// Balanced blobs with the default geometry.
pub fn synth_dataset(
    num_classes: usize,
    per_class_max: usize,
    dim: usize,
    seed: u64,
) -> Result<Dataset> {
    synth_blobs(&BlobSpec::new(num_classes, per_class_max, dim), seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    counts: Vec<u64>,
    proportions: Vec<f64>,
}

impl ClassDistribution {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(Error::Input("class distribution with zero total".into()));
        }
        let proportions = counts.iter().map(|&n| n as f64 / total as f64).collect();
        Ok(Self {
            counts,
            proportions,
        })
    }

    pub fn uniform(num_classes: usize) -> Self {
        Self::from_counts(vec![1; num_classes.max(1)]).expect("nonzero total")
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn proportions(&self) -> &[f64] {
        &self.proportions
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Exponential long-tail profile: `n_c = round(n_1 · IF^(c/(C-1)))`, floored at one sample.
pub fn longtail_counts(
    balanced: &ClassDistribution,
    imbalance_factor: f64,
) -> Result<ClassDistribution> {
    if !(imbalance_factor > 0.0 && imbalance_factor <= 1.0) {
        return Err(Error::InvalidSpec(format!(
            "imbalance factor {imbalance_factor} outside (0, 1]"
        )));
    }
    let counts = balanced.counts();
    let classes = counts.len();
    if counts.windows(2).any(|w| w[0] != w[1]) {
        return Err(Error::InvalidSpec("longtail input must be balanced".into()));
    }
    if classes == 1 {
        if imbalance_factor < 1.0 {
            return Err(Error::InvalidSpec(
                "one class cannot carry an imbalance".into(),
            ));
        }
        return Ok(balanced.clone());
    }
    let head = counts[0] as f64;
    let out = (0..classes)
        .map(|c| {
            let exponent = c as f64 / (classes - 1) as f64;
            ((head * imbalance_factor.powf(exponent)).round() as u64).max(1)
        })
        .collect();
    ClassDistribution::from_counts(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClientShard {
    pub client_id: usize,
    pub sample_indices: Vec<usize>,
    pub class_counts: Vec<u64>,
}

impl ClientShard {
    pub fn len(&self) -> usize {
        self.sample_indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample_indices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PartitionMode {
    /// Equal shard sizes, per-client Dirichlet class mix.
    EqualQuantity,
    /// Per-class Dirichlet split across clients; shard sizes vary widely.
    QuantitySkew,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub beta: f64,
    pub imbalance_factor: f64,
    pub num_clients: usize,
    pub mode: PartitionMode,
    pub seed: u64,
}

impl PartitionSpec {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            problems.push(format!("beta {} must be > 0", self.beta));
        }
        if !(self.imbalance_factor > 0.0 && self.imbalance_factor <= 1.0) {
            problems.push(format!(
                "imbalance factor {} outside (0, 1]",
                self.imbalance_factor
            ));
        }
        if self.num_clients == 0 {
            problems.push("need at least one client".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(problems.join("; ")))
        }
    }
}

pub(crate) fn sample_dirichlet(beta: f64, len: usize, rng: &mut Rng) -> Vec<f64> {
    let gamma = Gamma::new(beta, 1.0).expect("beta validated positive");
    let mut draws: Vec<f64> = (0..len).map(|_| gamma.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    if total > 0.0 && total.is_finite() {
        draws.iter_mut().for_each(|v| *v /= total);
    } else {
        // Every gamma draw underflowed; the limit puts all mass on one coordinate.
        draws.iter_mut().for_each(|v| *v = 0.0);
        draws[rng.random_range(0..len)] = 1.0;
    }
    draws
}

/// Largest-remainder apportionment of `total` units by nonnegative weights.
/// Falls back to an even split when every weight is zero.
pub(crate) fn apportion(weights: &[f64], total: u64) -> Vec<u64> {
    let sum: f64 = weights.iter().sum();
    let shares: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w / sum * total as f64).collect()
    } else {
        vec![total as f64 / weights.len() as f64; weights.len()]
    };
    let mut out: Vec<u64> = shares.iter().map(|s| s.floor() as u64).collect();
    let assigned: u64 = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let fa = shares[a] - shares[a].floor();
        let fb = shares[b] - shares[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &i in order.iter().take(total.saturating_sub(assigned) as usize) {
        out[i] += 1;
    }
    out
}

fn weighted_pick(weights: &[f64], rng: &mut Rng) -> usize {
    let total: f64 = weights.iter().sum();
    let mut target = rng.random::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        last = i;
        if target < w {
            return i;
        }
        target -= w;
    }
    last
}

/// Splits `dataset` into client shards according to `spec`.
pub fn partition(dataset: &Dataset, spec: &PartitionSpec) -> Result<Vec<ClientShard>> {
    spec.validate()?;
    let n = dataset.len();
    let k = spec.num_clients;
    if k > n {
        return Err(Error::InfeasiblePartition {
            clients: k,
            samples: n,
        });
    }
    let mut rng = seed::rng_for(spec.seed, &[seed::STREAM_PARTITION]);
    let classes = dataset.num_classes();

    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); classes];
    for (i, &y) in dataset.labels().iter().enumerate() {
        by_class[y].push(i);
    }
    for list in &mut by_class {
        list.shuffle(&mut rng);
    }
    let supply: Vec<u64> = by_class.iter().map(|l| l.len() as u64).collect();

    let assigned = match spec.mode {
        PartitionMode::EqualQuantity => equal_quantity_counts(&supply, k, spec.beta, &mut rng),
        PartitionMode::QuantitySkew => quantity_skew_counts(&supply, k, spec.beta, &mut rng),
    };

    let mut cursor = vec![0usize; classes];
    let shards = assigned
        .into_iter()
        .enumerate()
        .map(|(client_id, class_counts)| {
            let mut sample_indices = Vec::with_capacity(class_counts.iter().sum::<u64>() as usize);
            for (c, &count) in class_counts.iter().enumerate() {
                let start = cursor[c];
                cursor[c] += count as usize;
                sample_indices.extend_from_slice(&by_class[c][start..cursor[c]]);
            }
            sample_indices.sort_unstable();
            ClientShard {
                client_id,
                sample_indices,
                class_counts,
            }
        })
        .collect();
    Ok(shards)
}

/// Per-client class counts for the equal-quantity scheme.
///
/// Each client draws a class mix from Dirichlet(beta) and asks for its
/// capacity in that mix. Oversubscribed classes are split among the
/// requesters in proportion to their requests. Remaining capacity is then
/// filled one sample at a time, round-robin over clients, drawing the class
/// from the client's own mix renormalized over classes that still have
/// supply.
fn equal_quantity_counts(
    supply: &[u64],
    clients: usize,
    beta: f64,
    rng: &mut Rng,
) -> Vec<Vec<u64>> {
    let classes = supply.len();
    let total: u64 = supply.iter().sum();
    let base = total / clients as u64;
    let extra = (total % clients as u64) as usize;
    let caps: Vec<u64> = (0..clients).map(|k| base + u64::from(k < extra)).collect();

    let mixes: Vec<Vec<f64>> = (0..clients)
        .map(|_| sample_dirichlet(beta, classes, rng))
        .collect();
    let mut assigned: Vec<Vec<u64>> = mixes
        .iter()
        .zip(&caps)
        .map(|(mix, &cap)| apportion(mix, cap))
        .collect();

    let mut leftover = supply.to_vec();
    for c in 0..classes {
        let requested: u64 = assigned.iter().map(|a| a[c]).sum();
        if requested > supply[c] {
            let requests: Vec<f64> = assigned.iter().map(|a| a[c] as f64).collect();
            let granted = apportion(&requests, supply[c]);
            for (a, g) in assigned.iter_mut().zip(granted) {
                a[c] = g;
            }
        }
        leftover[c] -= assigned.iter().map(|a| a[c]).sum::<u64>();
    }

    let mut deficit: Vec<u64> = assigned
        .iter()
        .zip(&caps)
        .map(|(a, &cap)| cap - a.iter().sum::<u64>())
        .collect();
    let mut remaining: u64 = deficit.iter().sum();
    let mut weights = vec![0.0; classes];
    while remaining > 0 {
        for kk in 0..clients {
            if deficit[kk] == 0 {
                continue;
            }
            for c in 0..classes {
                weights[c] = if leftover[c] > 0 { mixes[kk][c] } else { 0.0 };
            }
            if weights.iter().all(|&w| w <= 0.0) {
                for c in 0..classes {
                    weights[c] = leftover[c] as f64;
                }
            }
            let c = weighted_pick(&weights, rng);
            assigned[kk][c] += 1;
            leftover[c] -= 1;
            deficit[kk] -= 1;
            remaining -= 1;
        }
    }
    assigned
}

/// Per-client class counts for the quantity-skew scheme: every class is
/// split across clients by its own Dirichlet(beta) draw, then empty clients
/// receive one sample donated by the currently largest shard.
fn quantity_skew_counts(supply: &[u64], clients: usize, beta: f64, rng: &mut Rng) -> Vec<Vec<u64>> {
    let classes = supply.len();
    let mut assigned = vec![vec![0u64; classes]; clients];
    for (c, &n_c) in supply.iter().enumerate() {
        let share = sample_dirichlet(beta, clients, rng);
        for (kk, count) in apportion(&share, n_c).into_iter().enumerate() {
            assigned[kk][c] = count;
        }
    }
    loop {
        let sizes: Vec<u64> = assigned.iter().map(|a| a.iter().sum()).collect();
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            break;
        };
        let donor = (0..clients)
            .max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))
            .expect("at least one client");
        let class = (0..classes)
            .max_by(|&a, &b| assigned[donor][a].cmp(&assigned[donor][b]).then(b.cmp(&a)))
            .expect("at least one class");
        assigned[donor][class] -= 1;
        assigned[empty][class] += 1;
    }
    assigned
}

/// Sum of the shards' class counts.
pub fn global_distribution(shards: &[ClientShard]) -> Result<ClassDistribution> {
    let first = shards
        .first()
        .ok_or_else(|| Error::Input("no shards".into()))?;
    let mut counts = vec![0u64; first.class_counts.len()];
    for shard in shards {
        if shard.class_counts.len() != counts.len() {
            return Err(Error::Dimension("shards disagree on class count".into()));
        }
        for (acc, &n) in counts.iter_mut().zip(&shard.class_counts) {
            *acc += n;
        }
    }
    ClassDistribution::from_counts(counts)
}

/// `client,class,count` rows, one per (client, class) pair.
pub fn partition_csv(shards: &[ClientShard]) -> String {
    let mut out = String::from("client,class,count\n");
    for shard in shards {
        for (c, n) in shard.class_counts.iter().enumerate() {
            let _ = writeln!(out, "{},{},{}", shard.client_id, c, n);
        }
    }
    out
}

pub fn write_partition_csv(shards: &[ClientShard], path: &Path) -> Result<()> {
    std::fs::write(path, partition_csv(shards)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn longtail_dataset(classes: usize, per_class: usize, imbalance: f64, seed: u64) -> Dataset {
        let balanced = synth_dataset(classes, per_class, 4, seed).unwrap();
        let counts = longtail_counts(
            &ClassDistribution::from_counts(balanced.class_counts()).unwrap(),
            imbalance,
        )
        .unwrap();
        balanced.take_per_class(counts.counts()).unwrap()
    }

    fn spec(beta: f64, k: usize, mode: PartitionMode) -> PartitionSpec {
        PartitionSpec {
            beta,
            imbalance_factor: 1.0,
            num_clients: k,
            mode,
            seed: 17,
        }
    }

    #[test]
    fn synth_two_classes() {
        let d = synth_dataset(2, 10, 3, 1).unwrap();
        assert_eq!(d.len(), 20);
        assert_eq!(d.class_counts(), vec![10, 10]);
        let again = synth_dataset(2, 10, 3, 1).unwrap();
        assert_eq!(d, again);
        assert_ne!(d, synth_dataset(2, 10, 3, 2).unwrap());
    }

    #[test]
    fn synth_rejects_single_class() {
        assert!(synth_dataset(1, 10, 3, 1).is_err());
    }

    #[test]
    fn longtail_identity_at_one() {
        let b = ClassDistribution::from_counts(vec![50; 4]).unwrap();
        assert_eq!(
            longtail_counts(&b, 1.0).unwrap().counts(),
            &[50, 50, 50, 50]
        );
    }

    #[test]
    fn longtail_closed_form() {
        let b = ClassDistribution::from_counts(vec![100; 10]).unwrap();
        let lt = longtail_counts(&b, 0.1).unwrap();
        assert_eq!(lt.counts()[0], 100);
        assert_eq!(lt.counts()[9], 10);

        let b = ClassDistribution::from_counts(vec![90; 3]).unwrap();
        assert_eq!(longtail_counts(&b, 0.01).unwrap().counts(), &[90, 9, 1]);
    }

    #[test]
    fn longtail_rejects_bad_inputs() {
        let one = ClassDistribution::from_counts(vec![10]).unwrap();
        assert!(longtail_counts(&one, 0.5).is_err());
        assert!(longtail_counts(&one, 1.0).is_ok());
        let b = ClassDistribution::from_counts(vec![10, 10]).unwrap();
        assert!(longtail_counts(&b, 0.0).is_err());
        assert!(longtail_counts(&b, 1.5).is_err());
        let unbalanced = ClassDistribution::from_counts(vec![10, 9]).unwrap();
        assert!(longtail_counts(&unbalanced, 0.5).is_err());
    }

    #[test]
    fn apportion_is_exact() {
        assert_eq!(apportion(&[0.5, 0.25, 0.25], 7), vec![3, 2, 2]);
        assert_eq!(apportion(&[0.0, 0.0], 3), vec![2, 1]);
        assert_eq!(apportion(&[1.0, 0.0, 0.0], 5), vec![5, 0, 0]);
    }

    #[test]
    fn large_beta_matches_global_mix() {
        let d = longtail_dataset(5, 400, 1.0, 3);
        let shards = partition(&d, &spec(1e6, 10, PartitionMode::EqualQuantity)).unwrap();
        for shard in &shards {
            for &n in &shard.class_counts {
                let p = n as f64 / shard.len() as f64;
                assert!(
                    (p - 0.2).abs() <= 0.05,
                    "shard {} proportion {p}",
                    shard.client_id
                );
            }
        }
    }

    #[test]
    fn shards_partition_the_dataset() {
        for mode in [PartitionMode::EqualQuantity, PartitionMode::QuantitySkew] {
            let d = longtail_dataset(6, 200, 0.1, 9);
            let shards = partition(&d, &spec(0.1, 13, mode)).unwrap();
            let mut all: Vec<usize> = shards
                .iter()
                .flat_map(|s| s.sample_indices.clone())
                .collect();
            all.sort_unstable();
            assert_eq!(all, (0..d.len()).collect::<Vec<_>>());
            for shard in &shards {
                let mut counts = vec![0u64; 6];
                for &i in &shard.sample_indices {
                    counts[d.labels()[i]] += 1;
                }
                assert_eq!(counts, shard.class_counts);
            }
        }
    }

    #[test]
    fn equal_quantity_sizes_within_one() {
        let d = longtail_dataset(10, 300, 0.05, 4);
        let shards = partition(&d, &spec(0.1, 20, PartitionMode::EqualQuantity)).unwrap();
        let sizes: Vec<usize> = shards.iter().map(ClientShard::len).collect();
        let spread = sizes.iter().max().unwrap() - sizes.iter().min().unwrap();
        assert!(spread <= 1, "sizes {sizes:?}");
    }

    #[test]
    fn quantity_skew_leaves_no_client_empty() {
        let d = longtail_dataset(10, 100, 0.01, 5);
        let shards = partition(&d, &spec(0.1, 100, PartitionMode::QuantitySkew)).unwrap();
        assert!(shards.iter().all(|s| !s.is_empty()));
    }

    #[test]
    fn too_many_clients_is_infeasible() {
        let d = synth_dataset(2, 3, 2, 1).unwrap();
        assert!(matches!(
            partition(&d, &spec(0.5, 7, PartitionMode::EqualQuantity)),
            Err(Error::InfeasiblePartition { .. })
        ));
    }

    #[test]
    fn global_distribution_examples() {
        let a = ClientShard {
            client_id: 0,
            sample_indices: vec![],
            class_counts: vec![10, 0],
        };
        let b = ClientShard {
            client_id: 1,
            sample_indices: vec![],
            class_counts: vec![0, 10],
        };
        let g = global_distribution(&[a.clone(), b]).unwrap();
        assert_eq!(g.counts(), &[10, 10]);
        assert_eq!(g.proportions(), &[0.5, 0.5]);
        let single = global_distribution(std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.proportions(), &[1.0, 0.0]);

        let empty = ClientShard {
            client_id: 0,
            sample_indices: vec![],
            class_counts: vec![0, 0],
        };
        assert!(global_distribution(&[empty]).is_err());
        assert!(global_distribution(&[]).is_err());
    }

    #[test]
    fn csv_has_row_per_client_class() {
        let d = longtail_dataset(3, 20, 1.0, 1);
        let shards = partition(&d, &spec(0.5, 4, PartitionMode::EqualQuantity)).unwrap();
        let csv = partition_csv(&shards);
        assert_eq!(csv.lines().count(), 1 + 4 * 3);
        assert!(csv.starts_with("client,class,count\n0,0,"));
    }
}
