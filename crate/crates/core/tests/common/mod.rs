//! Oracles shared by the integration tests and the acceptance suite. They
//! recompute quantities independently of the library code under test.

#![allow(dead_code)]

use fedwcm::data::{self, ClassDistribution, ClientShard, Dataset, PartitionMode, PartitionSpec};
use fedwcm::federation::{self, Algorithm, LocalOptions, RunConfig, Simulation};
use fedwcm::nn::{self, ModelParams};
use fedwcm::scoring;
use fedwcm::seed;
use fedwcm::tensor::Tensor2;
use rand::Rng;

/// Worst norm-relative error between the analytic gradient and central
/// differences with step `h`, over one random (model, batch) instance.
pub fn gradient_check(instance: u64, h: f64) -> f64 {
    let mut rng = seed::rng_for(0x6772_6164, &[instance]);
    let dim = rng.random_range(2..6);
    let classes = rng.random_range(2..5);
    let depth = rng.random_range(0..3);
    let mut sizes = vec![dim];
    for _ in 0..depth {
        sizes.push(rng.random_range(3..7));
    }
    sizes.push(classes);
    let model = ModelParams::init(&sizes, &mut rng).unwrap();
    let n = rng.random_range(1..8);
    let x: Vec<f64> = (0..n * dim).map(|_| rng.random_range(-2.0..2.0)).collect();
    let x = Tensor2::from_vec(n, dim, x).unwrap();
    let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..classes)).collect();

    let (_, grad) = nn::loss_and_grad(&model, &x, &y).unwrap();
    let analytic = grad.to_flat();
    let mut numeric = vec![0.0; analytic.len()];
    let mut probe = model.clone();
    for (i, slot) in numeric.iter_mut().enumerate() {
        let v = model.flat_get(i);
        probe.flat_set(i, v + h);
        let up = nn::loss(&probe, &x, &y).unwrap();
        probe.flat_set(i, v - h);
        let down = nn::loss(&probe, &x, &y).unwrap();
        probe.flat_set(i, v);
        *slot = (up - down) / (2.0 * h);
    }
    let diff: f64 = analytic
        .iter()
        .zip(&numeric)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let na: f64 = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nn_: f64 = numeric.iter().map(|a| a * a).sum::<f64>().sqrt();
    let scale = na.max(nn_);
    if scale < 1e-12 {
        diff
    } else {
        diff / scale
    }
}

/// Three equal-size clients over four classes, 12 samples each.
pub fn toy_federation() -> (Dataset, Vec<ClientShard>) {
    let spec = data::BlobSpec::new(4, 9, 3);
    let train = data::synth_blobs(&spec, 11).unwrap();
    let mut idx: Vec<Vec<usize>> = vec![Vec::new(); 3];
    for (i, &y) in train.labels().iter().enumerate() {
        // Skewed but equal-size: client k favours classes k and k+1.
        let k = (y + i / 4) % 3;
        idx[k].push(i);
    }
    let shards = idx
        .into_iter()
        .enumerate()
        .map(|(k, sample_indices)| {
            let mut class_counts = vec![0u64; 4];
            for &i in &sample_indices {
                class_counts[train.labels()[i]] += 1;
            }
            ClientShard {
                client_id: k,
                sample_indices,
                class_counts,
            }
        })
        .collect::<Vec<_>>();
    assert!(shards.iter().all(|s| s.len() == 12));
    (train, shards)
}

pub fn toy_config(algorithm: Algorithm) -> RunConfig {
    RunConfig {
        eta_l: 0.05,
        eta_g: 1.0,
        rounds: 2,
        local_epochs: 2,
        batch_size: 5,
        sample_rate: 1.0,
        algorithm,
        seed: 5,
        ..RunConfig::default()
    }
}

pub fn toy_model() -> ModelParams {
    ModelParams::init(&[3, 6, 4], &mut seed::rng(77)).unwrap()
}

/// Runs `rounds` rounds of `sim` and returns the final model.
pub fn run_rounds(sim: &Simulation, model: ModelParams, rounds: usize) -> ModelParams {
    let mut state = sim.initial_state(model);
    for _ in 0..rounds {
        state = sim.step_round(&state).unwrap().0;
    }
    state.model
}

/// Reference model averaging: every client trains from the current model
/// with plain SGD and the server takes the mean of the final models.
pub fn reference_model_average(
    train: &Dataset,
    shards: &[ClientShard],
    cfg: &RunConfig,
    model: ModelParams,
    rounds: usize,
) -> ModelParams {
    let mut x = model;
    let zero = x.zeros_like();
    for r in 0..rounds {
        let mut finals = Vec::new();
        for shard in shards {
            let opts = LocalOptions {
                lr: cfg.eta_l,
                local_epochs: cfg.local_epochs,
                batch_size: cfg.batch_size,
            };
            let s = seed::derive(
                cfg.seed,
                &[seed::STREAM_LOCAL, r as u64, shard.client_id as u64],
            );
            let u = federation::local_train(&x, &zero, 1.0, shard, train, &opts, s)
                .unwrap()
                .unwrap();
            finals.push(nn::axpy(1.0, &u.delta, &x).unwrap());
        }
        let flat: Vec<Vec<f64>> = finals.iter().map(ModelParams::to_flat).collect();
        let mut next = x.clone();
        for i in 0..next.num_params() {
            let mean = flat.iter().map(|f| f[i]).sum::<f64>() / flat.len() as f64;
            next.flat_set(i, mean);
        }
        x = next;
    }
    x
}

pub fn max_relative_difference(a: &ModelParams, b: &ModelParams) -> f64 {
    a.to_flat()
        .iter()
        .zip(b.to_flat())
        .map(|(x, y)| (x - y).abs() / x.abs().max(y.abs()).max(1e-300))
        .fold(0.0, f64::max)
}

/// A weighted-deviation instance: client gradient means offset from the
/// full-data gradient along one direction by non-negative amounts, with
/// softmax weights from scores that fall as the offset grows. Returns
/// `(weighted, unweighted)` deviations.
pub fn lemma_instance(instance: u64) -> (f64, f64) {
    let mut rng = seed::rng_for(0x006c_656d_6d61, &[instance]);
    let sizes = [rng.random_range(1..5), rng.random_range(2..5)];
    let mut global = ModelParams::zeros(&sizes).unwrap();
    let mut dir = global.zeros_like();
    for i in 0..global.num_params() {
        global.flat_set(i, rng.random_range(-1.0..1.0));
        dir.flat_set(i, rng.random_range(-1.0..1.0));
    }
    let norm = dir.norm_l2();
    dir.scale_inplace(1.0 / norm);
    let clients = rng.random_range(2..12);
    let offsets: Vec<f64> = (0..clients).map(|_| rng.random_range(0.0..3.0)).collect();
    let max = offsets.iter().copied().fold(0.0, f64::max);
    let scores: Vec<f64> = offsets.iter().map(|d| max - d).collect();
    let temperature = rng.random_range(0.05..5.0);
    let weights = scoring::softmax_weights(&scores, temperature)
        .unwrap()
        .weights;
    let means: Vec<ModelParams> = offsets
        .iter()
        .map(|&d| nn::axpy(d, &dir, &global).unwrap())
        .collect();
    let uniform = vec![1.0 / clients as f64; clients];
    (
        federation::weighted_deviation(&global, &means, &weights).unwrap(),
        federation::weighted_deviation(&global, &means, &uniform).unwrap(),
    )
}

/// Random non-empty shards with class counts in `0..max` over `classes`.
pub fn random_shards(
    seed_value: u64,
    clients: usize,
    classes: usize,
    max: u64,
) -> Vec<ClientShard> {
    let mut rng = seed::rng(seed_value);
    (0..clients)
        .map(|k| {
            let mut counts: Vec<u64> = (0..classes).map(|_| rng.random_range(0..max)).collect();
            if counts.iter().all(|&c| c == 0) {
                counts[k % classes] = 1;
            }
            ClientShard {
                client_id: k,
                sample_indices: Vec::new(),
                class_counts: counts,
            }
        })
        .collect()
}

pub fn longtail_dataset(
    classes: usize,
    per_class: usize,
    imbalance_factor: f64,
    seed_value: u64,
) -> Dataset {
    let balanced =
        data::synth_blobs(&data::BlobSpec::new(classes, per_class, 4), seed_value).unwrap();
    let counts = data::longtail_counts(
        &ClassDistribution::from_counts(balanced.class_counts()).unwrap(),
        imbalance_factor,
    )
    .unwrap();
    balanced.take_per_class(counts.counts()).unwrap()
}

pub fn partition_spec(
    beta: f64,
    imbalance_factor: f64,
    clients: usize,
    mode: PartitionMode,
    seed: u64,
) -> PartitionSpec {
    PartitionSpec {
        beta,
        imbalance_factor,
        num_clients: clients,
        mode,
        seed,
    }
}
