//! Round-based federated training with momentum-corrected local updates.
//!
//! Every strategy shares one loop. Each sampled client starts from the
//! global model `x_r` and runs `B_k` mini-batch steps of
//!
//! ```text
//! x ← x − η_l · (α_r · ∇F(x; batch) + (1 − α_r) · Δ_r)
//! ```
//!
//! returning its model displacement `Δ_k = x_final − x_r`. The server turns
//! the displacements into the next global momentum, a pseudo-gradient
//!
//! ```text
//! Δ_{r+1} = − Σ_k w_k · Δ_k / (η_l · B_k)
//! ```
//!
//! and steps `x_{r+1} = x_r − η_g · Δ_{r+1}`. The strategies differ only in
//! the weights `w_k`, the momentum value `α_r`, the normalizer and whether
//! the local learning rate is rescaled:
//!
//! | strategy  | weights                    | α_r            | normalizer |
//! |-----------|----------------------------|----------------|------------|
//! | FedAvg    | uniform                    | 1              | 1          |
//! | FedCM     | uniform                    | fixed          | η_l·B_k    |
//! | FedWCM    | softmax(s_k / T)           | adaptive       | η_l·B_k    |
//! | FedWCM-X  | softmax(s_k / T) · n_k     | adaptive       | η_l·B̂      |
//!
//! FedWCM-X additionally trains with `η_l · B̂ / B_k`.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{self, ClassDistribution, ClientShard, Dataset};
use crate::error::{Error, Result};
use crate::metrics::{self, RoundRecord};
use crate::nn::{self, Gradient, ModelParams};
use crate::scoring::{self, MomentumNorm, MomentumValue, ScoreTable, WeightVector};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    #[serde(rename = "fedavg")]
    FedAvg,
    #[serde(rename = "fedcm")]
    FedCm,
    #[serde(rename = "fedwcm")]
    FedWcm,
    #[serde(rename = "fedwcm_x")]
    FedWcmX,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::FedAvg,
        Algorithm::FedCm,
        Algorithm::FedWcm,
        Algorithm::FedWcmX,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::FedAvg => "fedavg",
            Algorithm::FedCm => "fedcm",
            Algorithm::FedWcm => "fedwcm",
            Algorithm::FedWcmX => "fedwcm_x",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.name() == name)
    }

    pub fn strategy(self, fedcm_alpha: f64) -> Strategy {
        match self {
            Algorithm::FedAvg => Strategy {
                weighting: Weighting::Uniform,
                momentum: MomentumRule::Off,
                normalization: Normalization::ModelAverage,
                rescale_lr: false,
            },
            Algorithm::FedCm => Strategy {
                weighting: Weighting::Uniform,
                momentum: MomentumRule::Fixed(fedcm_alpha),
                normalization: Normalization::LocalSteps,
                rescale_lr: false,
            },
            Algorithm::FedWcm => Strategy {
                weighting: Weighting::Softmax,
                momentum: MomentumRule::Adaptive,
                normalization: Normalization::LocalSteps,
                rescale_lr: false,
            },
            Algorithm::FedWcmX => Strategy {
                weighting: Weighting::SoftmaxVolume,
                momentum: MomentumRule::Adaptive,
                normalization: Normalization::StandardSteps,
                rescale_lr: true,
            },
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Weighting {
    Uniform,
    /// Softmax of client scores at the run temperature.
    Softmax,
    /// Softmax weights times client sample counts, renormalized.
    SoftmaxVolume,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentumRule {
    /// α ≡ 1: plain local SGD.
    Off,
    Fixed(f64),
    /// Starts at the base value and follows the score ratio of each round's sample.
    Adaptive,
}

impl MomentumRule {
    fn initial(self) -> MomentumValue {
        match self {
            MomentumRule::Off => MomentumValue::fixed(1.0),
            MomentumRule::Fixed(a) => MomentumValue::fixed(a),
            MomentumRule::Adaptive => MomentumValue::base(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Normalization {
    /// Δ_{r+1} = −Σ w_k Δ_k, so η_g = 1 averages client models.
    ModelAverage,
    /// Divide each client's displacement by η_l · B_k.
    LocalSteps,
    /// Divide by η_l · B̂.
    StandardSteps,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Strategy {
    pub weighting: Weighting,
    pub momentum: MomentumRule,
    pub normalization: Normalization,
    pub rescale_lr: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub eta_l: f64,
    pub eta_g: f64,
    pub rounds: usize,
    pub local_epochs: usize,
    pub batch_size: usize,
    pub sample_rate: f64,
    pub algorithm: Algorithm,
    pub seed: u64,
    /// B̂ for FedWCM-X; derived from an even split when absent.
    pub standard_batches: Option<usize>,
    pub fedcm_alpha: f64,
    /// Temperature scale `t0`.
    pub t0: f64,
    pub momentum_norm: MomentumNorm,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            eta_l: 0.1,
            eta_g: 1.0,
            rounds: 500,
            local_epochs: 5,
            batch_size: 50,
            sample_rate: 0.1,
            algorithm: Algorithm::FedWcm,
            seed: 0,
            standard_batches: None,
            fedcm_alpha: scoring::ALPHA_BASE,
            t0: 1.0,
            momentum_norm: MomentumNorm::default(),
        }
    }
}

impl RunConfig {
    /// Every range violation, empty when valid.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.eta_l > 0.0 && self.eta_l.is_finite()) {
            v.push(format!("eta_l = {} must be > 0", self.eta_l));
        }
        if !(self.eta_g > 0.0 && self.eta_g.is_finite()) {
            v.push(format!("eta_g = {} must be > 0", self.eta_g));
        }
        if !(self.sample_rate > 0.0 && self.sample_rate <= 1.0) {
            v.push(format!("sample_rate = {} outside (0, 1]", self.sample_rate));
        }
        if self.local_epochs == 0 {
            v.push("local_epochs must be >= 1".into());
        }
        if self.batch_size == 0 {
            v.push("batch_size must be >= 1".into());
        }
        if !(self.fedcm_alpha > 0.0 && self.fedcm_alpha <= 1.0) {
            v.push(format!("fedcm_alpha = {} outside (0, 1]", self.fedcm_alpha));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            v.push(format!("t0 = {} must be > 0", self.t0));
        }
        if self.standard_batches == Some(0) {
            v.push("standard_batches must be >= 1".into());
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

    pub fn strategy(&self) -> Strategy {
        self.algorithm.strategy(self.fedcm_alpha)
    }

    pub fn clients_per_round(&self, num_clients: usize) -> usize {
        ((self.sample_rate * num_clients as f64).ceil() as usize).clamp(1, num_clients.max(1))
    }

    pub fn batches_for(&self, samples: usize) -> usize {
        self.local_epochs * samples.div_ceil(self.batch_size)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederationState {
    pub round: usize,
    pub model: ModelParams,
    pub momentum: Gradient,
    pub alpha: MomentumValue,
}

impl FederationState {
    /// Round 0 with zero global momentum.
    pub fn new(model: ModelParams, alpha: MomentumValue) -> Self {
        let momentum = model.zeros_like();
        Self {
            round: 0,
            model,
            momentum,
            alpha,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClientUpdate {
    pub client_id: usize,
    pub delta: Gradient,
    pub batches_run: usize,
    pub samples: usize,
    pub local_losses: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOptions {
    pub lr: f64,
    pub local_epochs: usize,
    pub batch_size: usize,
}

/// Local momentum-corrected SGD on one shard. Returns `None` for an empty
/// shard, which the round treats as a skipped client.
pub fn local_train(
    global: &ModelParams,
    momentum: &Gradient,
    alpha: f64,
    shard: &ClientShard,
    data: &Dataset,
    opts: &LocalOptions,
    seed: u64,
) -> Result<Option<ClientUpdate>> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha = {alpha} outside (0, 1]")));
    }
    if shard.is_empty() {
        return Ok(None);
    }
    if opts.batch_size == 0 {
        return Err(Error::Parameter("batch_size must be positive".into()));
    }
    if !global.same_shape(momentum) {
        return Err(Error::Dimension("momentum does not match model".into()));
    }
    let mut rng = seed::rng(seed);
    let mut order = shard.sample_indices.clone();
    let mut x = global.clone();
    let mut losses = Vec::new();
    for _ in 0..opts.local_epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(opts.batch_size) {
            let (bx, by) = data.batch(batch);
            let (loss, grad) = nn::loss_and_grad(&x, &bx, &by)?;
            let mut step = grad.scaled(alpha);
            step.axpy_inplace(1.0 - alpha, momentum)?;
            x.axpy_inplace(-opts.lr, &step)?;
            losses.push(loss);
        }
    }
    Ok(Some(ClientUpdate {
        client_id: shard.client_id,
        delta: x.sub(global)?,
        batches_run: losses.len(),
        samples: shard.len(),
        local_losses: losses,
    }))
}

/// Next global momentum `−Σ_k w_k Δ_k / norm_k`, reduced in update order.
pub fn aggregate(
    updates: &[ClientUpdate],
    weights: &WeightVector,
    normalization: Normalization,
    eta_l: f64,
    standard_batches: usize,
) -> Result<Gradient> {
    if updates.is_empty() {
        return Err(Error::Aggregation("no client updates".into()));
    }
    if weights.weights.len() != updates.len() {
        return Err(Error::Aggregation(format!(
            "{} weights for {} updates",
            weights.weights.len(),
            updates.len()
        )));
    }
    let mut out = updates[0].delta.zeros_like();
    for (update, &w) in updates.iter().zip(&weights.weights) {
        let norm = match normalization {
            Normalization::ModelAverage => 1.0,
            Normalization::LocalSteps => eta_l * update.batches_run as f64,
            Normalization::StandardSteps => eta_l * standard_batches as f64,
        };
        if norm.is_nan() || norm <= 0.0 {
            return Err(Error::Aggregation(format!(
                "non-positive normalizer for client {}",
                update.client_id
            )));
        }
        out.axpy_inplace(-w / norm, &update.delta)?;
    }
    Ok(out)
}

/// `x_{r+1} = x_r − η_g Δ_{r+1}`; stores `Δ_{r+1}` and advances the round.
pub fn global_step(
    state: &FederationState,
    next_momentum: Gradient,
    eta_g: f64,
) -> Result<FederationState> {
    let mut model = state.model.clone();
    model.axpy_inplace(-eta_g, &next_momentum)?;
    Ok(FederationState {
        round: state.round + 1,
        model,
        momentum: next_momentum,
        alpha: state.alpha,
    })
}

/// `‖Σ_i w_i g_i − g‖₂`: distance of a weighted average of client gradient
/// means from the full-data gradient.
pub fn weighted_deviation(
    global: &Gradient,
    client_means: &[Gradient],
    weights: &[f64],
) -> Result<f64> {
    if client_means.len() != weights.len() || client_means.is_empty() {
        return Err(Error::Aggregation(
            "weights do not match client gradients".into(),
        ));
    }
    let mut avg = global.zeros_like();
    for (g, &w) in client_means.iter().zip(weights) {
        avg.axpy_inplace(w, g)?;
    }
    Ok(avg.sub(global)?.norm_l2())
}

/// Per-round quantities that are not model metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundInfo {
    pub round: usize,
    pub sampled: Vec<usize>,
    pub weights: WeightVector,
    pub alpha_used: f64,
    pub next_alpha: MomentumValue,
}

/// Immutable per-run context: training data, shards, scores, temperature.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    train: &'a Dataset,
    shards: &'a [ClientShard],
    scores: ScoreTable,
    temperature: f64,
    standard_batches: usize,
    cfg: RunConfig,
    strategy: Strategy,
}

impl<'a> Simulation<'a> {
    /// Scores are computed once, against `target` (uniform when `None`).
    pub fn new(
        train: &'a Dataset,
        shards: &'a [ClientShard],
        target: Option<&ClassDistribution>,
        cfg: RunConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        if shards.is_empty() {
            return Err(Error::Input("no client shards".into()));
        }
        let global = data::global_distribution(shards)?;
        let uniform;
        let target = match target {
            Some(t) => t,
            None => {
                uniform = ClassDistribution::uniform(global.num_classes());
                &uniform
            }
        };
        Self::with_global(train, shards, &global, target, cfg)
    }

    /// Like [`Simulation::new`] with an externally gathered global distribution.
    pub fn with_global(
        train: &'a Dataset,
        shards: &'a [ClientShard],
        global: &ClassDistribution,
        target: &ClassDistribution,
        cfg: RunConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let scores = ScoreTable::compute(shards, global, target)?;
        let temperature = scoring::compute_temperature(global, target, cfg.t0)?;
        let total: usize = shards.iter().map(ClientShard::len).sum();
        let standard_batches = cfg
            .standard_batches
            .unwrap_or_else(|| cfg.batches_for(total.div_ceil(shards.len())));
        let strategy = cfg.strategy();
        Ok(Self {
            train,
            shards,
            scores,
            temperature,
            standard_batches,
            cfg,
            strategy,
        })
    }

    /// Replaces the strategy implied by the configured algorithm.
    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.strategy = strategy;
        self
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn scores(&self) -> &ScoreTable {
        &self.scores
    }

    pub fn temperature(&self) -> f64 {
        self.temperature
    }

    pub fn standard_batches(&self) -> usize {
        self.standard_batches
    }

    pub fn initial_state(&self, model: ModelParams) -> FederationState {
        FederationState::new(model, self.strategy.momentum.initial())
    }

    /// Seeded uniform sample without replacement, in ascending client order.
    pub fn sample_clients(&self, round: usize) -> Vec<usize> {
        let k = self.shards.len();
        let m = self.cfg.clients_per_round(k);
        let mut rng = seed::rng_for(self.cfg.seed, &[seed::STREAM_SAMPLING, round as u64]);
        let mut picked = rand::seq::index::sample(&mut rng, k, m).into_vec();
        picked.sort_unstable();
        picked
    }

    /// One round without evaluation.
    pub fn step_round(&self, state: &FederationState) -> Result<(FederationState, RoundInfo)> {
        let round = state.round;
        let sampled = self.sample_clients(round);
        let alpha = state.alpha.alpha;

        let updates: Vec<ClientUpdate> = sampled
            .par_iter()
            .map(|&k| {
                let shard = &self.shards[k];
                let batches = self.cfg.batches_for(shard.len());
                let lr = if self.strategy.rescale_lr && batches > 0 {
                    self.cfg.eta_l * (self.standard_batches as f64 / batches as f64)
                } else {
                    self.cfg.eta_l
                };
                let opts = LocalOptions {
                    lr,
                    local_epochs: self.cfg.local_epochs,
                    batch_size: self.cfg.batch_size,
                };
                let seed =
                    seed::derive(self.cfg.seed, &[seed::STREAM_LOCAL, round as u64, k as u64]);
                local_train(
                    &state.model,
                    &state.momentum,
                    alpha,
                    shard,
                    self.train,
                    &opts,
                    seed,
                )
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        if updates.is_empty() {
            return Err(Error::Aggregation(format!(
                "round {round}: every sampled client was empty"
            )));
        }
        let participants: Vec<usize> = updates.iter().map(|u| u.client_id).collect();

        let weights = match self.strategy.weighting {
            Weighting::Uniform => WeightVector::uniform(updates.len()),
            Weighting::Softmax | Weighting::SoftmaxVolume => {
                let round_scores: Vec<f64> =
                    participants.iter().map(|&k| self.scores.score(k)).collect();
                let factors: Option<Vec<f64>> =
                    (self.strategy.weighting == Weighting::SoftmaxVolume).then(|| {
                        let mean = updates.iter().map(|u| u.samples as f64).sum::<f64>()
                            / updates.len() as f64;
                        updates.iter().map(|u| u.samples as f64 / mean).collect()
                    });
                scoring::softmax_weights_scaled(
                    &round_scores,
                    self.temperature,
                    factors.as_deref(),
                )?
            }
        };

        let next_alpha = match self.strategy.momentum {
            MomentumRule::Off => MomentumValue::fixed(1.0),
            MomentumRule::Fixed(a) => MomentumValue::fixed(a),
            MomentumRule::Adaptive => scoring::adaptive_alpha(
                &self.scores,
                &participants,
                self.temperature,
                self.shards.len(),
                self.cfg.momentum_norm,
            )?,
        };

        let next_momentum = aggregate(
            &updates,
            &weights,
            self.strategy.normalization,
            self.cfg.eta_l,
            self.standard_batches,
        )?;
        // FedAvg is plain model averaging; the server rate only scales momentum methods.
        let eta_g = match self.strategy.normalization {
            Normalization::ModelAverage => 1.0,
            _ => self.cfg.eta_g,
        };
        let mut next = global_step(state, next_momentum, eta_g)?;
        next.alpha = next_alpha;

        log::debug!(
            "round={} T={:.6e} q={:.4} alpha_next={:.4} w_min={:.4} w_max={:.4}",
            round,
            self.temperature,
            next_alpha.q_ratio,
            next_alpha.alpha,
            weights.min(),
            weights.max()
        );
        Ok((
            next,
            RoundInfo {
                round,
                sampled: participants,
                weights,
                alpha_used: alpha,
                next_alpha,
            },
        ))
    }

    /// One round followed by evaluation of the new global model on `test`.
    pub fn run_round(
        &self,
        state: &FederationState,
        test: &Dataset,
    ) -> Result<(FederationState, RoundRecord)> {
        let (next, info) = self.step_round(state)?;
        let record = evaluate_round(&next.model, test, &info)?;
        Ok((next, record))
    }
}

pub fn evaluate_round(
    model: &ModelParams,
    test: &Dataset,
    info: &RoundInfo,
) -> Result<RoundRecord> {
    let eval = metrics::evaluate(model, test)?;
    let conc = metrics::neuron_concentration(model, test)?;
    Ok(RoundRecord {
        round: info.round,
        test_accuracy: eval.accuracy,
        min_class_recall: eval.min_recall(),
        per_class_accuracy: eval.per_class,
        alpha_used: info.alpha_used,
        mean_concentration: conc.mean,
        layer_concentration: conc.per_layer,
        weight_entropy: info.weights.entropy(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Layer;
    use crate::tensor::Tensor2;

    fn scalar_params(w: f64, b: f64) -> ModelParams {
        ModelParams::new(vec![Layer {
            weight: Tensor2::from_vec(1, 1, vec![w]).unwrap(),
            bias: Tensor2::from_vec(1, 1, vec![b]).unwrap(),
        }])
        .unwrap()
    }

    fn update(id: usize, delta: ModelParams, batches: usize) -> ClientUpdate {
        ClientUpdate {
            client_id: id,
            delta,
            batches_run: batches,
            samples: 10,
            local_losses: vec![],
        }
    }

    #[test]
    fn algorithm_names_round_trip() {
        for a in Algorithm::ALL {
            assert_eq!(Algorithm::parse(a.name()), Some(a));
        }
        assert_eq!(Algorithm::parse("scaffold"), None);
    }

    #[test]
    fn aggregate_single_client() {
        let d = scalar_params(0.3, -0.6);
        let w = WeightVector::uniform(1);
        let out = aggregate(
            &[update(0, d.clone(), 4)],
            &w,
            Normalization::LocalSteps,
            0.1,
            0,
        )
        .unwrap();
        let expected = d.scaled(-1.0 / (0.1 * 4.0));
        for (a, b) in out.to_flat().iter().zip(expected.to_flat()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn aggregate_identical_deltas() {
        let d = scalar_params(1.0, 2.0);
        let w = WeightVector {
            weights: vec![0.3, 0.7],
            temperature: 1.0,
        };
        let both = aggregate(
            &[update(0, d.clone(), 5), update(1, d.clone(), 5)],
            &w,
            Normalization::LocalSteps,
            0.1,
            0,
        )
        .unwrap();
        let one = aggregate(
            &[update(0, d, 5)],
            &WeightVector::uniform(1),
            Normalization::LocalSteps,
            0.1,
            0,
        )
        .unwrap();
        for (a, b) in both.to_flat().iter().zip(one.to_flat()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_hand_weights() {
        let d = scalar_params(3.0, -1.5);
        let w = WeightVector {
            weights: vec![1.0 / 3.0, 2.0 / 3.0],
            temperature: 1.0,
        };
        let out = aggregate(
            &[update(0, d.clone(), 2), update(1, d.scaled(2.0), 2)],
            &w,
            Normalization::LocalSteps,
            0.5,
            0,
        )
        .unwrap();
        // −(5/3) d / (η_l B)
        let expected = d.scaled(-(5.0 / 3.0) / (0.5 * 2.0));
        for (a, b) in out.to_flat().iter().zip(expected.to_flat()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn aggregate_rejects_mismatched_weights() {
        let d = scalar_params(1.0, 1.0);
        let w = WeightVector::uniform(2);
        assert!(matches!(
            aggregate(&[update(0, d, 1)], &w, Normalization::LocalSteps, 0.1, 0),
            Err(Error::Aggregation(_))
        ));
    }

    #[test]
    fn global_step_examples() {
        let state = FederationState::new(scalar_params(2.0, 5.0), MomentumValue::base());
        let zero = state.model.zeros_like();
        let next = global_step(&state, zero, 1.0).unwrap();
        assert_eq!(next.model, state.model);
        assert_eq!(next.round, 1);

        let unit = scalar_params(1.0, 0.0);
        let next = global_step(&state, unit.clone(), 0.0).unwrap();
        assert_eq!(next.model, state.model);
        assert_eq!(next.momentum, unit);

        let next = global_step(&state, unit, 1.0).unwrap();
        assert_eq!(next.model.to_flat(), vec![1.0, 5.0]);
    }

    #[test]
    fn initial_momentum_is_zero() {
        let state = FederationState::new(scalar_params(2.0, 5.0), MomentumValue::base());
        assert_eq!(state.momentum.norm_l2(), 0.0);
        assert_eq!(state.alpha.alpha, 0.1);
    }

    #[test]
    fn config_violations_are_all_listed() {
        let cfg = RunConfig {
            eta_l: 0.0,
            sample_rate: 1.5,
            batch_size: 0,
            ..RunConfig::default()
        };
        assert_eq!(cfg.violations().len(), 3);
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn clients_per_round_rounds_up() {
        let cfg = RunConfig {
            sample_rate: 0.1,
            ..RunConfig::default()
        };
        assert_eq!(cfg.clients_per_round(100), 10);
        assert_eq!(cfg.clients_per_round(5), 1);
        assert_eq!(cfg.clients_per_round(15), 2);
        assert_eq!(cfg.batches_for(51), 10);
    }
}
