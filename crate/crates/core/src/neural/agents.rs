//! Agents built on the feedforward network: greedy and ε-greedy, dropout
//! Thompson, bootstrapped ensembles, parameter noise and neural linear.

use std::collections::VecDeque;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bandit::{Agent, Context, HistoryBuffer, Observation, SimRng};
use crate::error::{param, Result};
use crate::linear::{CovarianceApproximation, LinearModelKind, NigPrior, PerActionLinearModel};
use crate::stats::argmax;

use super::mlp::{Architecture, DropoutMasks, Mlp};
use super::train::{Trainer, TrainingSchedule};

/// ε-greedy over the network's predictions. No randomness is drawn when
/// `epsilon == 0`.
pub fn neural_greedy_choose(net: &Mlp, x: &[f64], epsilon: f64, rng: &mut SimRng) -> usize {
    let k = net.arch().output_dim();
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return rng.random_range(0..k);
    }
    argmax(net.arch().predict(net.params(), x).iter().copied())
}

/// One forward pass under fresh inverted-dropout masks, then argmax.
/// `p_keep == 1` is the deterministic forward pass.
pub fn dropout_choose(net: &Mlp, x: &[f64], p_keep: f64, rng: &mut SimRng) -> usize {
    if p_keep >= 1.0 {
        return neural_greedy_choose(net, x, 0.0, rng);
    }
    let arch = net.arch();
    let masks = DropoutMasks::sample(arch, 1, p_keep, rng);
    let input = DMatrix::from_column_slice(x.len(), 1, x);
    let pass = arch.forward(net.params(), &input, Some(&masks));
    argmax(pass.output.column(0).iter().copied())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Exploration {
    Greedy,
    /// `epsilon` is multiplied by `decay` after every context.
    EpsilonGreedy { epsilon: f64, decay: f64 },
    /// Dropout at training and decision time with keep probability `p_keep`.
    Dropout { p_keep: f64 },
}

impl Exploration {
    fn validate(&self) -> Result<()> {
        match *self {
            Exploration::Greedy => Ok(()),
            Exploration::EpsilonGreedy { epsilon, decay } => {
                if !(0.0..=1.0).contains(&epsilon) || !(0.0..=1.0).contains(&decay) {
                    return Err(param("epsilon and its decay must lie in [0, 1]"));
                }
                Ok(())
            }
            Exploration::Dropout { p_keep } => {
                if !(p_keep > 0.0 && p_keep <= 1.0) {
                    return Err(param(format!("dropout keep probability must lie in (0, 1], got {p_keep}")));
                }
                Ok(())
            }
        }
    }

    /// Keep probability applied during training, if any.
    fn train_dropout(&self) -> Option<f64> {
        match *self {
            Exploration::Dropout { p_keep } if p_keep < 1.0 => Some(p_keep),
            _ => None,
        }
    }
}

/// A single network trained on the full history, acting greedily, ε-greedily
/// or through dropout.
#[derive(Debug, Clone)]
pub struct NeuralGreedyAgent {
    name: String,
    net: Mlp,
    trainer: Trainer,
    buffer: HistoryBuffer,
    exploration: Exploration,
    epsilon: f64,
    rng: SimRng,
}

impl NeuralGreedyAgent {
    /// `rng` initializes the network and then drives mini-batch sampling.
    pub fn new(
        name: impl Into<String>,
        arch: Architecture,
        schedule: TrainingSchedule,
        exploration: Exploration,
        mut rng: SimRng,
    ) -> Result<Self> {
        exploration.validate()?;
        let net = Mlp::new(arch, &mut rng);
        let trainer = Trainer::new(schedule, net.arch().num_params())?;
        let epsilon = match exploration {
            Exploration::EpsilonGreedy { epsilon, .. } => epsilon,
            _ => 0.0,
        };
        Ok(NeuralGreedyAgent {
            name: name.into(),
            buffer: HistoryBuffer::new(net.arch().output_dim()),
            net,
            trainer,
            exploration,
            epsilon,
            rng,
        })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl Agent for NeuralGreedyAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_actions(&self) -> usize {
        self.net.arch().output_dim()
    }

    fn choose(&mut self, context: &Context, rng: &mut SimRng) -> usize {
        let x = context.as_slice();
        match self.exploration {
            Exploration::Greedy => neural_greedy_choose(&self.net, x, 0.0, rng),
            Exploration::EpsilonGreedy { decay, .. } => {
                let a = neural_greedy_choose(&self.net, x, self.epsilon, rng);
                self.epsilon *= decay;
                a
            }
            Exploration::Dropout { p_keep } => dropout_choose(&self.net, x, p_keep, rng),
        }
    }

    fn observe(&mut self, obs: &Observation) {
        self.buffer.push(obs.clone());
    }

    fn maybe_train(&mut self, decision_step: usize) {
        let dropout = self.exploration.train_dropout();
        self.trainer
            .scheduled_train(&mut self.net, &self.buffer, decision_step, dropout, &mut self.rng);
    }
}

#[derive(Debug, Clone)]
struct BootstrapMember {
    net: Mlp,
    trainer: Trainer,
    buffer: HistoryBuffer,
    rng: SimRng,
}

/// `q` independently initialized networks, each trained on its own random
/// subset of the history.
#[derive(Debug, Clone)]
pub struct BootstrapAgent {
    name: String,
    members: Vec<BootstrapMember>,
    inclusion: f64,
    mask_rng: SimRng,
    global: HistoryBuffer,
}

impl BootstrapAgent {
    /// One RNG per member (initialization and mini-batches) and a separate
    /// RNG for the inclusion coins.
    pub fn new(
        name: impl Into<String>,
        arch: Architecture,
        schedule: TrainingSchedule,
        inclusion: f64,
        member_rngs: Vec<SimRng>,
        mask_rng: SimRng,
    ) -> Result<Self> {
        if member_rngs.is_empty() {
            return Err(param("bootstrap ensemble needs at least one network"));
        }
        if !(0.0..=1.0).contains(&inclusion) {
            return Err(param(format!("inclusion probability must lie in [0, 1], got {inclusion}")));
        }
        let k = arch.output_dim();
        let members = member_rngs
            .into_iter()
            .map(|mut rng| -> Result<BootstrapMember> {
                let net = Mlp::new(arch.clone(), &mut rng);
                Ok(BootstrapMember {
                    trainer: Trainer::new(schedule.clone(), net.arch().num_params())?,
                    net,
                    buffer: HistoryBuffer::new(k),
                    rng,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BootstrapAgent {
            name: name.into(),
            members,
            inclusion,
            mask_rng,
            global: HistoryBuffer::new(k),
        })
    }

    pub fn ensemble_size(&self) -> usize {
        self.members.len()
    }

    pub fn member_buffer(&self, i: usize) -> &HistoryBuffer {
        &self.members[i].buffer
    }

    pub fn member_net(&self, i: usize) -> &Mlp {
        &self.members[i].net
    }

    pub fn member_net_mut(&mut self, i: usize) -> &mut Mlp {
        &mut self.members[i].net
    }

    pub fn global_buffer(&self) -> &HistoryBuffer {
        &self.global
    }

    /// Appends `obs` to the global history and to each member's history
    /// independently with the inclusion probability.
    pub fn bootstrap_observe(&mut self, obs: &Observation) {
        for m in &mut self.members {
            if self.inclusion >= 1.0 || self.mask_rng.random::<f64>() < self.inclusion {
                m.buffer.push(obs.clone());
            }
        }
        self.global.push(obs.clone());
    }

    /// Greedy action of a uniformly chosen member.
    pub fn bootstrap_choose(&self, x: &[f64], rng: &mut SimRng) -> usize {
        let q = self.members.len();
        let i = if q == 1 { 0 } else { rng.random_range(0..q) };
        neural_greedy_choose(&self.members[i].net, x, 0.0, rng)
    }
}

impl Agent for BootstrapAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_actions(&self) -> usize {
        self.global.num_actions()
    }

    fn choose(&mut self, context: &Context, rng: &mut SimRng) -> usize {
        self.bootstrap_choose(context.as_slice(), rng)
    }

    fn observe(&mut self, obs: &Observation) {
        self.bootstrap_observe(obs);
    }

    fn maybe_train(&mut self, decision_step: usize) {
        for m in &mut self.members {
            m.trainer
                .scheduled_train(&mut m.net, &m.buffer, decision_step, None, &mut m.rng);
        }
    }
}

pub const PARAM_NOISE_ADAPT_FACTOR: f64 = 1.01;
pub const PARAM_NOISE_PROBE_WINDOW: usize = 32;

/// Perturbation scale and its adaptation target.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamNoiseState {
    pub sigma: f64,
    /// Target mismatch at the first decision; decays linearly to 0 at `horizon`.
    pub initial_target: f64,
    pub horizon: usize,
    pub adapt_factor: f64,
    pub probe_window: usize,
}

impl ParamNoiseState {
    pub fn new(sigma: f64, initial_target: f64, horizon: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(param(format!("initial perturbation scale must be positive, got {sigma}")));
        }
        if !(initial_target >= 0.0 && initial_target.is_finite()) {
            return Err(param("mismatch target must be nonnegative"));
        }
        Ok(ParamNoiseState {
            sigma,
            initial_target,
            horizon,
            adapt_factor: PARAM_NOISE_ADAPT_FACTOR,
            probe_window: PARAM_NOISE_PROBE_WINDOW,
        })
    }

    pub fn target_at(&self, step: usize) -> f64 {
        if self.horizon == 0 {
            return 0.0;
        }
        self.initial_target * (1.0 - step as f64 / self.horizon as f64).max(0.0)
    }

    /// Shrinks `sigma` when the measured mismatch exceeds `target`, grows it otherwise.
    pub fn adjust(&mut self, mismatch: f64, target: f64) {
        if mismatch > target {
            self.sigma /= self.adapt_factor;
        } else {
            self.sigma *= self.adapt_factor;
        }
    }
}

/// `params + sigma·ν` with `ν ~ N(0, I)` over every parameter.
pub fn perturb(params: &[f64], sigma: f64, rng: &mut impl Rng) -> Vec<f64> {
    params
        .iter()
        .map(|&p| p + sigma * rng.sample::<f64, _>(StandardNormal))
        .collect()
}

/// Greedy action under one fresh perturbation of the weights.
pub fn param_noise_choose(net: &Mlp, state: &ParamNoiseState, x: &[f64], rng: &mut SimRng) -> usize {
    let noisy = perturb(net.params(), state.sigma, rng);
    argmax(net.arch().predict(&noisy, x).iter().copied())
}

/// Measures how often one fresh perturbation changes the greedy action on
/// the probe contexts, adjusts `sigma` toward `target`, and returns the
/// measured mismatch fraction.
pub fn param_noise_adapt(
    state: &mut ParamNoiseState,
    net: &Mlp,
    probes: &[Context],
    target: f64,
    rng: &mut SimRng,
) -> Option<f64> {
    if probes.is_empty() {
        return None;
    }
    let arch = net.arch();
    let noisy = perturb(net.params(), state.sigma, rng);
    let inputs = DMatrix::from_fn(arch.input_dim(), probes.len(), |r, c| probes[c].as_slice()[r]);
    let clean = arch.forward(net.params(), &inputs, None).output;
    let perturbed = arch.forward(&noisy, &inputs, None).output;
    let changed = (0..probes.len())
        .filter(|&j| argmax(clean.column(j).iter().copied()) != argmax(perturbed.column(j).iter().copied()))
        .count();
    let mismatch = changed as f64 / probes.len() as f64;
    state.adjust(mismatch, target);
    Some(mismatch)
}

/// Layer-normalized network acting greedily under adaptively scaled weight
/// perturbations.
#[derive(Debug, Clone)]
pub struct ParamNoiseAgent {
    name: String,
    net: Mlp,
    trainer: Trainer,
    buffer: HistoryBuffer,
    state: ParamNoiseState,
    recent: VecDeque<Context>,
    rng: SimRng,
}

impl ParamNoiseAgent {
    pub fn new(
        name: impl Into<String>,
        arch: Architecture,
        schedule: TrainingSchedule,
        state: ParamNoiseState,
        mut rng: SimRng,
    ) -> Result<Self> {
        if !arch.has_layer_norm() {
            return Err(param("parameter-noise networks need layer normalization"));
        }
        let net = Mlp::new(arch, &mut rng);
        Ok(ParamNoiseAgent {
            name: name.into(),
            trainer: Trainer::new(schedule, net.arch().num_params())?,
            buffer: HistoryBuffer::new(net.arch().output_dim()),
            net,
            state,
            recent: VecDeque::new(),
            rng,
        })
    }

    pub fn state(&self) -> &ParamNoiseState {
        &self.state
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }
}

impl Agent for ParamNoiseAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_actions(&self) -> usize {
        self.net.arch().output_dim()
    }

    fn choose(&mut self, context: &Context, rng: &mut SimRng) -> usize {
        if self.recent.len() == self.state.probe_window {
            self.recent.pop_front();
        }
        self.recent.push_back(context.clone());
        param_noise_choose(&self.net, &self.state, context.as_slice(), rng)
    }

    fn observe(&mut self, obs: &Observation) {
        self.buffer.push(obs.clone());
    }

    fn maybe_train(&mut self, decision_step: usize) {
        if self
            .trainer
            .scheduled_train(&mut self.net, &self.buffer, decision_step, None, &mut self.rng)
        {
            let probes: Vec<Context> = self.recent.iter().cloned().collect();
            let target = self.state.target_at(self.buffer.len());
            param_noise_adapt(&mut self.state, &self.net, &probes, target, &mut self.rng);
        }
    }
}

/// Bayesian linear regression per action on the network's last hidden layer.
#[derive(Debug, Clone)]
pub struct NeuralLinearAgent {
    name: String,
    net: Mlp,
    trainer: Trainer,
    buffer: HistoryBuffer,
    model: PerActionLinearModel,
    rng: SimRng,
}

impl NeuralLinearAgent {
    pub fn new(
        name: impl Into<String>,
        arch: Architecture,
        schedule: TrainingSchedule,
        prior: NigPrior,
        bias_feature: bool,
        mut rng: SimRng,
    ) -> Result<Self> {
        let net = Mlp::new(arch, &mut rng);
        Self::with_network(name, net, schedule, prior, bias_feature, rng)
    }

    /// Wraps an existing network, e.g. a frozen embedding.
    pub fn with_network(
        name: impl Into<String>,
        net: Mlp,
        schedule: TrainingSchedule,
        prior: NigPrior,
        bias_feature: bool,
        rng: SimRng,
    ) -> Result<Self> {
        let arch = net.arch();
        let model = PerActionLinearModel::new(
            arch.representation_dim(),
            arch.output_dim(),
            LinearModelKind::Nig(prior),
            CovarianceApproximation::Exact,
            bias_feature,
        )?;
        Ok(NeuralLinearAgent {
            name: name.into(),
            trainer: Trainer::new(schedule, arch.num_params())?,
            buffer: HistoryBuffer::new(arch.output_dim()),
            net,
            model,
            rng,
        })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn model(&self) -> &PerActionLinearModel {
        &self.model
    }

    pub fn buffer(&self) -> &HistoryBuffer {
        &self.buffer
    }

    fn features(&self, x: &[f64]) -> Vec<f64> {
        let input = DMatrix::from_column_slice(x.len(), 1, x);
        self.net
            .arch()
            .representation(self.net.params(), &input)
            .as_slice()
            .to_vec()
    }

    /// Thompson step over the representation of `x`.
    pub fn neural_linear_choose(&self, x: &[f64], rng: &mut SimRng) -> usize {
        self.model.thompson_choose(&self.features(x), rng)
    }

    /// Re-fits every per-action posterior from the prior on freshly computed
    /// representations of the whole history.
    pub fn neural_linear_refresh(&mut self) -> Result<()> {
        let arch = self.net.arch();
        let n = self.buffer.len();
        let mut inputs = DMatrix::zeros(arch.input_dim(), n);
        for (j, o) in self.buffer.iter().enumerate() {
            inputs.column_mut(j).copy_from_slice(o.context.as_slice());
        }
        let z = arch.representation(self.net.params(), &inputs).transpose();
        let actions: Vec<usize> = self.buffer.iter().map(|o| o.action).collect();
        let rewards: Vec<f64> = self.buffer.iter().map(|o| o.reward).collect();
        self.model.refit(&z, &actions, &rewards)
    }
}

impl Agent for NeuralLinearAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_actions(&self) -> usize {
        self.model.num_actions()
    }

    fn choose(&mut self, context: &Context, rng: &mut SimRng) -> usize {
        self.neural_linear_choose(context.as_slice(), rng)
    }

    fn observe(&mut self, obs: &Observation) {
        let z = self.features(obs.context.as_slice());
        if let Err(e) = self.model.update(&z, obs.action, obs.reward) {
            log::warn!("{}: skipped posterior update: {e}", self.name);
        }
        self.buffer.push(obs.clone());
    }

    fn maybe_train(&mut self, decision_step: usize) {
        if self
            .trainer
            .scheduled_train(&mut self.net, &self.buffer, decision_step, None, &mut self.rng)
        {
            if let Err(e) = self.neural_linear_refresh() {
                log::warn!("{}: representation refresh failed: {e}", self.name);
            }
        }
    }
}
