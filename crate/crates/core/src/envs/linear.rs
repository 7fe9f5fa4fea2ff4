use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::bandit::{Context, EnvDims, Environment, SimRng};
use crate::error::{param, Result};

/// Linear bandit: `β_i ~ N(0, λ I)`, reward `xᵀβ_i + N(0, σ_i²)`.
///
/// Contexts are Gaussian with zero mean, unit variances and a common
/// pairwise correlation `context_correlation` (0 gives `N(0, I)`).
#[derive(Debug, Clone, PartialEq)]
pub struct LinearBanditSpec {
    pub d: usize,
    pub k: usize,
    pub prior_lambda: f64,
    pub noise_sigmas: Vec<f64>,
    pub context_correlation: f64,
    pub horizon: usize,
}

impl LinearBanditSpec {
    /// Every arm with noise standard deviation `sigma`.
    pub fn uniform_noise(d: usize, k: usize, prior_lambda: f64, sigma: f64, horizon: usize) -> Self {
        LinearBanditSpec {
            d,
            k,
            prior_lambda,
            noise_sigmas: vec![sigma; k],
            context_correlation: 0.0,
            horizon,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.k == 0 {
            return Err(param("linear bandit needs d >= 1 and k >= 1"));
        }
        if !(self.prior_lambda > 0.0 && self.prior_lambda.is_finite()) {
            return Err(param("linear bandit prior variance must be positive"));
        }
        if self.noise_sigmas.len() != self.k {
            return Err(param(format!(
                "expected {} noise levels, got {}",
                self.k,
                self.noise_sigmas.len()
            )));
        }
        if self.noise_sigmas.iter().any(|s| !(*s >= 0.0 && s.is_finite())) {
            return Err(param("noise levels must be nonnegative"));
        }
        if !(0.0..1.0).contains(&self.context_correlation) {
            return Err(param("context correlation must lie in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LinearBandit {
    spec: LinearBanditSpec,
    /// Column `i` holds `β_i`.
    betas: DMatrix<f64>,
    contexts: Vec<Context>,
    /// Row `t` holds the expected reward of every arm.
    expected: DMatrix<f64>,
}

impl LinearBandit {
    /// Draws the arm parameters, then the contexts, from `rng`.
    pub fn generate(spec: LinearBanditSpec, rng: &mut SimRng) -> Result<Self> {
        spec.validate()?;
        let scale = spec.prior_lambda.sqrt();
        let betas = DMatrix::from_fn(spec.d, spec.k, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
        let mut contexts = Vec::with_capacity(spec.horizon);
        let mut expected = DMatrix::zeros(spec.horizon, spec.k);
        let own = (1.0 - spec.context_correlation).sqrt();
        let shared = spec.context_correlation.sqrt();
        for t in 0..spec.horizon {
            let mut x = DVector::from_fn(spec.d, |_, _| own * rng.sample::<f64, _>(StandardNormal));
            if shared > 0.0 {
                x.add_scalar_mut(shared * rng.sample::<f64, _>(StandardNormal));
            }
            let means = betas.tr_mul(&x);
            expected.row_mut(t).copy_from(&means.transpose());
            contexts.push(Context::new(x.as_slice().to_vec())?);
        }
        Ok(LinearBandit {
            spec,
            betas,
            contexts,
            expected,
        })
    }

    pub fn spec(&self) -> &LinearBanditSpec {
        &self.spec
    }

    pub fn beta(&self, arm: usize) -> DVector<f64> {
        self.betas.column(arm).into_owned()
    }
}

impl Environment for LinearBandit {
    fn name(&self) -> &str {
        "linear"
    }

    fn dims(&self) -> EnvDims {
        EnvDims {
            context_dim: self.spec.d,
            num_actions: self.spec.k,
            horizon: self.spec.horizon,
        }
    }

    fn context_at(&self, t: usize) -> &Context {
        &self.contexts[t]
    }

    fn expected_reward(&self, t: usize, action: usize) -> f64 {
        self.expected[(t, action)]
    }

    fn realize_reward(&self, t: usize, action: usize, rng: &mut SimRng) -> f64 {
        let sigma = self.spec.noise_sigmas[action];
        let mean = self.expected[(t, action)];
        if sigma == 0.0 {
            mean
        } else {
            mean + sigma * rng.sample::<f64, _>(StandardNormal)
        }
    }
}
