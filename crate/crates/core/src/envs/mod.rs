//! Synthetic and dataset-backed environments.

mod dataset;
mod linear;
mod wheel;

pub use dataset::{
    equal_count_buckets, shuffle_for_trial, DatasetBandit, DatasetSpec, DatasetView, RewardRule,
    MUSHROOM_EAT, MUSHROOM_SKIP,
};
pub use linear::{LinearBandit, LinearBanditSpec};
pub use wheel::{
    wheel_context, wheel_expected_reward, wheel_quadrant_action, wheel_realize, WheelBandit,
    WheelConfig,
};

use crate::bandit::{Context, EnvDims, Environment, SimRng};
use crate::error::Result;

/// Appends a constant 1 to every context of the wrapped environment.
pub struct BiasFeature {
    inner: Box<dyn Environment>,
    contexts: Vec<Context>,
    name: String,
}

impl BiasFeature {
    pub fn new(inner: Box<dyn Environment>) -> Result<Self> {
        let horizon = inner.dims().horizon;
        let contexts = (0..horizon)
            .map(|t| {
                let mut x = inner.context_at(t).as_slice().to_vec();
                x.push(1.0);
                Context::new(x)
            })
            .collect::<Result<Vec<_>>>()?;
        let name = format!("{}+bias", inner.name());
        Ok(BiasFeature {
            inner,
            contexts,
            name,
        })
    }
}

impl Environment for BiasFeature {
    fn name(&self) -> &str {
        &self.name
    }

    fn dims(&self) -> EnvDims {
        let d = self.inner.dims();
        EnvDims {
            context_dim: d.context_dim + 1,
            ..d
        }
    }

    fn context_at(&self, t: usize) -> &Context {
        &self.contexts[t]
    }

    fn expected_reward(&self, t: usize, action: usize) -> f64 {
        self.inner.expected_reward(t, action)
    }

    fn realize_reward(&self, t: usize, action: usize, rng: &mut SimRng) -> f64 {
        self.inner.realize_reward(t, action, rng)
    }

    fn optimal_expected_reward(&self, t: usize) -> f64 {
        self.inner.optimal_expected_reward(t)
    }
}
