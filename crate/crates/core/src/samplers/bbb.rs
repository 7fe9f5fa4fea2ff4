use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Result};
use crate::neural::{Architecture, Batch};

pub fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

pub fn softplus_inverse(y: f64) -> f64 {
    if y > 30.0 {
        y
    } else {
        y.exp_m1().ln()
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// `KL(N(μ, σ_q²) ‖ N(0, σ_p²))` for one weight.
pub fn gaussian_kl(mu: f64, sigma_q: f64, sigma_p: f64) -> f64 {
    (sigma_p / sigma_q).ln() + (sigma_q * sigma_q + mu * mu) / (2.0 * sigma_p * sigma_p) - 0.5
}

/// Mean-field Gaussian over every network parameter.
#[derive(Debug, Clone)]
pub struct VariationalNet {
    arch: Architecture,
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
    prior_sigma: f64,
    noise_sigma: f64,
}

/// Objective value and gradients with respect to `μ` and `ρ`.
#[derive(Debug, Clone)]
pub struct BbbGradient {
    pub loss: f64,
    pub kl: f64,
    pub grad_mu: Vec<f64>,
    pub grad_rho: Vec<f64>,
}

impl VariationalNet {
    /// Means from the network's usual initialization, spreads at 5% of the
    /// prior standard deviation.
    pub fn new<R: Rng + ?Sized>(arch: Architecture, prior_sigma: f64, noise_sigma: f64, rng: &mut R) -> Result<Self> {
        let mu = arch.init_params(rng);
        let rho = vec![softplus_inverse(0.05 * prior_sigma); mu.len()];
        Self::from_parts(arch, mu, rho, prior_sigma, noise_sigma)
    }

    pub fn from_parts(
        arch: Architecture,
        mu: Vec<f64>,
        rho: Vec<f64>,
        prior_sigma: f64,
        noise_sigma: f64,
    ) -> Result<Self> {
        if !(prior_sigma > 0.0 && noise_sigma > 0.0) {
            return Err(param("prior and likelihood standard deviations must be positive"));
        }
        if mu.len() != arch.num_params() || rho.len() != arch.num_params() {
            return Err(param("variational parameters do not match the architecture"));
        }
        Ok(VariationalNet {
            arch,
            mu,
            rho,
            prior_sigma,
            noise_sigma,
        })
    }

    pub fn arch(&self) -> &Architecture {
        &self.arch
    }
    pub fn prior_sigma(&self) -> f64 {
        self.prior_sigma
    }
    pub fn noise_sigma(&self) -> f64 {
        self.noise_sigma
    }

    pub fn sigma(&self, i: usize) -> f64 {
        softplus(self.rho[i])
    }

    pub fn draw_noise<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..self.mu.len()).map(|_| rng.sample(StandardNormal)).collect()
    }

    /// `w = μ + softplus(ρ)·ν` for a given standard-normal vector.
    pub fn weights_with(&self, nu: &[f64]) -> Vec<f64> {
        self.mu
            .iter()
            .zip(&self.rho)
            .zip(nu)
            .map(|((m, r), n)| m + softplus(*r) * n)
            .collect()
    }

    pub fn sample_weights<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let nu = self.draw_noise(rng);
        self.weights_with(&nu)
    }

    /// Closed-form `KL(q ‖ N(0, σ_p² I))` summed over all weights.
    pub fn kl(&self) -> f64 {
        self.mu
            .iter()
            .zip(&self.rho)
            .map(|(m, r)| gaussian_kl(*m, softplus(*r), self.prior_sigma))
            .sum()
    }

    /// `KL/N + mean_i (y_i − ŷ_i)² / (2σ²)` at the weights given by `nu`.
    pub fn loss_and_grads_with(&self, batch: &Batch, total_count: usize, nu: &[f64]) -> BbbGradient {
        let n = total_count.max(1) as f64;
        let w = self.weights_with(nu);
        let g = self.arch.loss_and_gradient(&w, batch, None, false);
        let nll_scale = 1.0 / (2.0 * self.noise_sigma * self.noise_sigma);
        let sp2 = self.prior_sigma * self.prior_sigma;
        let mut grad_mu = Vec::with_capacity(w.len());
        let mut grad_rho = Vec::with_capacity(w.len());
        for i in 0..w.len() {
            let gw = g.grad[i] * nll_scale;
            let sq = softplus(self.rho[i]);
            grad_mu.push(gw + self.mu[i] / sp2 / n);
            let dkl_dsq = -1.0 / sq + sq / sp2;
            grad_rho.push((gw * nu[i] + dkl_dsq / n) * sigmoid(self.rho[i]));
        }
        let kl = self.kl();
        BbbGradient {
            loss: kl / n + g.loss * nll_scale,
            kl,
            grad_mu,
            grad_rho,
        }
    }

    /// Single-sample reparameterized estimate with a fresh noise draw.
    pub fn loss_and_grads<R: Rng + ?Sized>(&self, batch: &Batch, total_count: usize, rng: &mut R) -> BbbGradient {
        let nu = self.draw_noise(rng);
        self.loss_and_grads_with(batch, total_count, &nu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kl_closed_form_cases() {
        assert_eq!(gaussian_kl(0.0, 1.3, 1.3), 0.0);
        assert!((gaussian_kl(1.0, 1.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn softplus_roundtrip() {
        for y in [1e-3, 0.05, 1.0, 7.0, 45.0] {
            assert!((softplus(softplus_inverse(y)) - y).abs() < 1e-12 * y.max(1.0));
        }
        assert!(softplus(-40.0) < 1e-17);
        assert!(softplus(-40.0) > 0.0);
    }
}
