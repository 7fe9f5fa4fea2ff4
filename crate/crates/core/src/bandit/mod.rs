//! The Thompson-sampling decision loop, agent and environment contracts,
//! trial and experiment runners, and regret metrics.

mod metrics;
mod runner;
mod uniform;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub use metrics::{
    cumulative_regret, normalize_report, simple_regret, ExperimentReport, NormalizedReport,
    DEFAULT_SIMPLE_REGRET_WINDOW,
};
pub use runner::{run_experiment, run_trial, ExperimentOptions, RegretTrace, TraceStep};
pub use uniform::UniformAgent;

/// The RNG used throughout a trial. ChaCha streams give independent,
/// reproducible sequences from one trial seed.
pub type SimRng = ChaCha8Rng;

/// Seed for one trial, split into independent RNG streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TrialSeed(pub u64);

impl TrialSeed {
    const CONTEXTS: u64 = 0;
    const REWARDS: u64 = 1;
    const DECISIONS: u64 = 2;
    const AGENT_INTERNAL: u64 = 16;

    pub fn stream(self, stream: u64) -> SimRng {
        let mut rng = SimRng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }

    /// Environment construction: contexts, arm parameters, shuffles.
    pub fn env_rng(self) -> SimRng {
        self.stream(Self::CONTEXTS)
    }

    /// Reward noise drawn by `realize_reward`.
    pub fn reward_rng(self) -> SimRng {
        self.stream(Self::REWARDS)
    }

    /// Passed to `Agent::choose`.
    pub fn decision_rng(self) -> SimRng {
        self.stream(Self::DECISIONS)
    }

    /// Streams owned by the agent itself (initialization, mini-batch
    /// sampling, bootstrap masks). `index` distinguishes sub-models.
    pub fn agent_rng(self, index: u64) -> SimRng {
        self.stream(Self::AGENT_INTERNAL + index)
    }
}

/// A d-dimensional feature vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct Context(Vec<f64>);

impl Context {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("context"));
        }
        Ok(Context(values))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl AsRef<[f64]> for Context {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// One bandit interaction: the context shown, the action taken and the reward
/// realized.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub context: Context,
    pub action: usize,
    pub reward: f64,
}

/// Append-only history with a per-action index.
#[derive(Debug, Clone, Default)]
pub struct HistoryBuffer {
    observations: Vec<Observation>,
    per_action: Vec<Vec<usize>>,
}

impl HistoryBuffer {
    pub fn new(num_actions: usize) -> Self {
        HistoryBuffer {
            observations: Vec::new(),
            per_action: vec![Vec::new(); num_actions],
        }
    }

    pub fn push(&mut self, obs: Observation) {
        if obs.action >= self.per_action.len() {
            self.per_action.resize(obs.action + 1, Vec::new());
        }
        self.per_action[obs.action].push(self.observations.len());
        self.observations.push(obs);
    }

    pub fn num_actions(&self) -> usize {
        self.per_action.len()
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn get(&self, index: usize) -> &Observation {
        &self.observations[index]
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    /// Indices of the observations where `action` was chosen, in insertion order.
    pub fn indices_for(&self, action: usize) -> &[usize] {
        self.per_action.get(action).map_or(&[], Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Observation> {
        self.observations.iter()
    }
}

/// Shape of a bandit problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnvDims {
    pub context_dim: usize,
    pub num_actions: usize,
    pub horizon: usize,
}

/// A contextual bandit environment for a single trial.
///
/// Contexts are fixed when the environment is built from its trial seed; only
/// reward noise consumes the RNG passed to [`Environment::realize_reward`].
pub trait Environment: Send {
    fn name(&self) -> &str;

    fn dims(&self) -> EnvDims;

    fn context_at(&self, t: usize) -> &Context;

    fn expected_reward(&self, t: usize, action: usize) -> f64;

    fn realize_reward(&self, t: usize, action: usize, rng: &mut SimRng) -> f64;

    fn optimal_expected_reward(&self, t: usize) -> f64 {
        (0..self.dims().num_actions)
            .map(|a| self.expected_reward(t, a))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A bandit policy. The runner calls `choose`, then `observe`, then
/// `maybe_train` once per step.
pub trait Agent: Send {
    fn name(&self) -> &str;

    fn num_actions(&self) -> usize;

    fn choose(&mut self, context: &Context, rng: &mut SimRng) -> usize;

    fn observe(&mut self, obs: &Observation);

    /// `decision_step` counts post-warmup decisions made so far, including the
    /// current one. It is 0 throughout warmup, so periodic training starts
    /// after the round-robin phase.
    fn maybe_train(&mut self, _decision_step: usize) {}
}
