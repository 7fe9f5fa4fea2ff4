use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::posterior::{
    CovarianceApproximation, GaussianLinearPosterior, NigPosterior, NigPrior, SamplingFactor,
};
use crate::bandit::{Agent, Context, Observation, SimRng};
use crate::error::{Error, Result};
use crate::stats::argmax;

/// The per-action posterior family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearModelKind {
    /// Joint posterior over weights and noise.
    Nig(NigPrior),
    /// Known noise variance; `noise_var == 0` is a point mass.
    Gaussian { lambda: f64, noise_var: f64 },
}

#[derive(Debug, Clone)]
enum Posterior {
    Nig(NigPosterior),
    Gaussian(GaussianLinearPosterior),
}

impl Posterior {
    fn fit(kind: LinearModelKind, x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Self> {
        Ok(match kind {
            LinearModelKind::Nig(prior) => Posterior::Nig(NigPosterior::batch(x, y, prior)?),
            LinearModelKind::Gaussian { lambda, noise_var } => {
                Posterior::Gaussian(GaussianLinearPosterior::batch(x, y, lambda, noise_var)?)
            }
        })
    }

    fn update(&mut self, x: &[f64], y: f64) -> Result<()> {
        match self {
            Posterior::Nig(p) => p.update(x, y),
            Posterior::Gaussian(p) => p.update(x, y),
        }
    }

    fn stats(&self) -> &super::RidgeStats {
        match self {
            Posterior::Nig(p) => p.stats(),
            Posterior::Gaussian(p) => p.stats(),
        }
    }

    fn sample(&self, factor: &SamplingFactor, rng: &mut SimRng) -> DVector<f64> {
        match self {
            Posterior::Nig(p) => p.sample_with(factor, rng).0,
            Posterior::Gaussian(p) => p.sample_with(factor, rng),
        }
    }
}

/// Independent linear posteriors, one per action, sharing prior
/// hyperparameters. Sampling factors are cached and refreshed only for the
/// action that was updated.
#[derive(Debug, Clone)]
pub struct PerActionLinearModel {
    kind: LinearModelKind,
    posteriors: Vec<Posterior>,
    factors: Vec<SamplingFactor>,
    approx: CovarianceApproximation,
    intercept: bool,
    context_dim: usize,
}

impl PerActionLinearModel {
    pub fn new(
        context_dim: usize,
        num_actions: usize,
        kind: LinearModelKind,
        approx: CovarianceApproximation,
        intercept: bool,
    ) -> Result<Self> {
        if num_actions == 0 {
            return Err(Error::param("linear model needs at least one action"));
        }
        let dim = context_dim + usize::from(intercept);
        let empty = DMatrix::zeros(0, dim);
        let posteriors = (0..num_actions)
            .map(|_| Posterior::fit(kind, &empty, &DVector::zeros(0)))
            .collect::<Result<Vec<_>>>()?;
        let factors = posteriors
            .iter()
            .map(|p| SamplingFactor::new(p.stats(), approx))
            .collect();
        Ok(PerActionLinearModel {
            kind,
            posteriors,
            factors,
            approx,
            intercept,
            context_dim,
        })
    }

    pub fn num_actions(&self) -> usize {
        self.posteriors.len()
    }

    pub fn approximation(&self) -> CovarianceApproximation {
        self.approx
    }

    fn features(&self, x: &[f64]) -> DVector<f64> {
        let mut f = DVector::zeros(self.context_dim + usize::from(self.intercept));
        f.rows_mut(0, x.len()).copy_from_slice(x);
        if self.intercept {
            f[self.context_dim] = 1.0;
        }
        f
    }

    pub fn update(&mut self, x: &[f64], action: usize, reward: f64) -> Result<()> {
        if x.len() != self.context_dim {
            return Err(Error::DimensionMismatch {
                expected: self.context_dim,
                actual: x.len(),
            });
        }
        let f = self.features(x);
        let post = &mut self.posteriors[action];
        post.update(f.as_slice(), reward)?;
        self.factors[action] = SamplingFactor::new(post.stats(), self.approx);
        Ok(())
    }

    /// Resets every posterior to the prior and fits it in one batch on the
    /// rows of `x` (n×context_dim) whose action matches.
    pub fn refit(&mut self, x: &DMatrix<f64>, actions: &[usize], rewards: &[f64]) -> Result<()> {
        if x.ncols() != self.context_dim {
            return Err(Error::DimensionMismatch {
                expected: self.context_dim,
                actual: x.ncols(),
            });
        }
        let dim = self.context_dim + usize::from(self.intercept);
        let mut posteriors = Vec::with_capacity(self.num_actions());
        for a in 0..self.num_actions() {
            let rows: Vec<usize> = (0..actions.len()).filter(|&i| actions[i] == a).collect();
            let design = DMatrix::from_fn(rows.len(), dim, |r, c| {
                if c < self.context_dim {
                    x[(rows[r], c)]
                } else {
                    1.0
                }
            });
            let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| rewards[i]));
            posteriors.push(Posterior::fit(self.kind, &design, &y)?);
        }
        self.factors = posteriors
            .iter()
            .map(|p| SamplingFactor::new(p.stats(), self.approx))
            .collect();
        self.posteriors = posteriors;
        Ok(())
    }

    /// Posterior mean prediction `xᵀμ_a` for every action.
    pub fn predicted_means(&self, x: &[f64]) -> Vec<f64> {
        let f = self.features(x);
        self.posteriors.iter().map(|p| p.stats().mean().dot(&f)).collect()
    }

    /// Thompson step: one weight draw per action, act greedily on the draws.
    pub fn thompson_choose(&self, x: &[f64], rng: &mut SimRng) -> usize {
        let f = self.features(x);
        argmax(
            self.posteriors
                .iter()
                .zip(&self.factors)
                .map(|(p, factor)| p.sample(factor, rng).dot(&f)),
        )
    }

    /// With probability `epsilon` a uniform action, otherwise the argmax of
    /// the posterior means.
    pub fn greedy_choose(&self, x: &[f64], epsilon: f64, rng: &mut SimRng) -> usize {
        if epsilon > 0.0 && rng.random::<f64>() < epsilon {
            return rng.random_range(0..self.num_actions());
        }
        argmax(self.predicted_means(x))
    }

    pub fn nig(&self, action: usize) -> Option<&NigPosterior> {
        match &self.posteriors[action] {
            Posterior::Nig(p) => Some(p),
            Posterior::Gaussian(_) => None,
        }
    }

    pub fn stats(&self, action: usize) -> &super::RidgeStats {
        self.posteriors[action].stats()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LinearPolicy {
    Thompson,
    Greedy { epsilon: f64 },
}

/// Linear agent: Thompson sampling or (ε-)greedy over per-action ridge
/// posteriors, updated after every observation.
#[derive(Debug, Clone)]
pub struct LinearAgent {
    name: String,
    model: PerActionLinearModel,
    policy: LinearPolicy,
}

impl LinearAgent {
    pub fn new(name: impl Into<String>, model: PerActionLinearModel, policy: LinearPolicy) -> Result<Self> {
        if let LinearPolicy::Greedy { epsilon } = policy {
            if !(0.0..=1.0).contains(&epsilon) {
                return Err(Error::param(format!("epsilon must lie in [0, 1], got {epsilon}")));
            }
        }
        Ok(LinearAgent {
            name: name.into(),
            model,
            policy,
        })
    }

    pub fn model(&self) -> &PerActionLinearModel {
        &self.model
    }
}

impl Agent for LinearAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_actions(&self) -> usize {
        self.model.num_actions()
    }

    fn choose(&mut self, context: &Context, rng: &mut SimRng) -> usize {
        match self.policy {
            LinearPolicy::Thompson => self.model.thompson_choose(context.as_slice(), rng),
            LinearPolicy::Greedy { epsilon } => self.model.greedy_choose(context.as_slice(), epsilon, rng),
        }
    }

    fn observe(&mut self, obs: &Observation) {
        if let Err(e) = self.model.update(obs.context.as_slice(), obs.action, obs.reward) {
            // Keep the previous posterior; a failed refactorization leaves the
            // cached factor valid.
            log::warn!("{}: skipped update for action {}: {e}", self.name, obs.action);
        }
    }
}
