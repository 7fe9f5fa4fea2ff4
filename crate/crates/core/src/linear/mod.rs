//! Bayesian linear regression agents: the joint Normal-Inverse-Gamma
//! posterior, a known-noise Gaussian posterior, diagonal covariance
//! approximations, and greedy / ε-greedy ridge baselines.

mod agent;
mod posterior;

pub use agent::{LinearAgent, LinearModelKind, LinearPolicy, PerActionLinearModel};
pub use posterior::{
    CovarianceApproximation, GaussianLinearPosterior, NigPosterior, NigPrior, RidgeStats,
    SamplingFactor,
};
