//! Contextual bandits with Thompson sampling over exact and approximate
//! posteriors.
//!
//! The crate is organised around the decision loop in [`bandit`]: an
//! [`Environment`] presents contexts, an [`Agent`] picks actions and learns
//! from the realized rewards, and the runner records a [`RegretTrace`].
//!
//! Agent families:
//! - [`linear`]: conjugate Bayesian linear regression (Normal-Inverse-Gamma or
//!   known noise), with diagonal covariance approximations and greedy baselines.
//! - [`neural`]: a small feedforward network trained with RMSProp, used by the
//!   greedy, dropout, bootstrap, parameter-noise and neural-linear agents.
//! - [`samplers`]: SGFS, constant-SGD and Bayes-by-Backprop over the same
//!   network.
//!
//! Environments live in [`envs`]; named hyperparameter presets in [`catalog`].

pub mod bandit;
pub mod catalog;
pub mod envs;
pub mod error;
pub mod linear;
pub mod neural;
pub mod samplers;
pub mod stats;

pub use bandit::{
    cumulative_regret, normalize_report, run_experiment, run_trial, simple_regret, Agent, Context,
    EnvDims, Environment, ExperimentReport, HistoryBuffer, Observation, RegretTrace, SimRng,
    TrialSeed, UniformAgent,
};
pub use error::{Error, Result};
