//! Posterior samplers over network weights: diagonal SGFS, constant-SGD and
//! Bayes-by-Backprop.

mod agents;
mod bbb;
mod fisher;

pub use agents::{
    posterior_sample_choose, BbbAgent, BbbSchedule, FisherSamplerAgent, FisherSamplerKind,
    SamplerSchedule,
};
pub use bbb::{gaussian_kl, softplus, softplus_inverse, BbbGradient, VariationalNet};
pub use fisher::{const_sgd_rates, const_sgd_step, sgfs_step, FisherEma, SgfsConfig, FISHER_FLOOR};
