use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{param, Result};

/// Floor applied to Fisher entries before they are inverted.
pub const FISHER_FLOOR: f64 = 1e-10;

/// Exponential moving average of the diagonal empirical Fisher.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherEma {
    diag: Vec<f64>,
    decay: f64,
}

impl FisherEma {
    pub fn new(num_params: usize, decay: f64) -> Result<Self> {
        if !(decay > 0.0 && decay < 1.0) {
            return Err(param(format!("EMA decay must lie in (0, 1), got {decay}")));
        }
        Ok(FisherEma {
            diag: vec![0.0; num_params],
            decay,
        })
    }

    /// A state with the given diagonal, e.g. a known curvature.
    pub fn from_diag(diag: Vec<f64>, decay: f64) -> Result<Self> {
        if diag.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(param("Fisher entries must be finite and nonnegative"));
        }
        let mut ema = FisherEma::new(diag.len(), decay)?;
        ema.diag = diag;
        Ok(ema)
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn decay(&self) -> f64 {
        self.decay
    }

    /// `diag ← decay·diag + (1−decay)·g∘g`.
    pub fn update(&mut self, grad: &[f64]) {
        assert_eq!(grad.len(), self.diag.len());
        for (d, g) in self.diag.iter_mut().zip(grad) {
            *d = self.decay * *d + (1.0 - self.decay) * g * g;
        }
    }

    /// Same average, fed with already-squared values (per-example means).
    pub fn update_squared(&mut self, squared: &[f64]) {
        assert_eq!(squared.len(), self.diag.len());
        for (d, s) in self.diag.iter_mut().zip(squared) {
            *d = self.decay * *d + (1.0 - self.decay) * s;
        }
    }

    fn floored(&self, i: usize) -> f64 {
        self.diag[i].max(FISHER_FLOOR)
    }
}

/// Settings of a Fisher-preconditioned sampler.
#[derive(Debug, Clone, PartialEq)]
pub struct SgfsConfig {
    /// Step size ε.
    pub lr: f64,
    /// Lifetime steps taken before noise is injected.
    pub burn_in: usize,
    pub ema_decay: f64,
    /// Multiplier on the injected noise.
    pub noise_scale: f64,
    /// Dataset size.
    pub n: usize,
    /// Mini-batch size.
    pub s: usize,
}

impl SgfsConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(param("sampler step size must be positive"));
        }
        if !(self.noise_scale >= 0.0 && self.noise_scale.is_finite()) {
            return Err(param("noise scale must be nonnegative"));
        }
        if !(self.ema_decay > 0.0 && self.ema_decay < 1.0) {
            return Err(param("EMA decay must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// One diagonal SGFS step with `H = 2 / (N (1+ε) diag)`:
/// `θ ← θ − ε H∘g + noise_scale·√ε H∘(√diag∘ν)`, no noise during burn-in.
/// `grad` is the gradient of the loss summed over the dataset.
pub fn sgfs_step<R: Rng + ?Sized>(
    theta: &mut [f64],
    grad: &[f64],
    ema: &FisherEma,
    cfg: &SgfsConfig,
    step_index: usize,
    rng: &mut R,
) {
    assert_eq!(theta.len(), grad.len());
    assert_eq!(theta.len(), ema.diag.len());
    let eps = cfg.lr;
    let n = cfg.n.max(1) as f64;
    let noisy = step_index >= cfg.burn_in && cfg.noise_scale > 0.0;
    let noise_mult = cfg.noise_scale * eps.sqrt();
    for i in 0..theta.len() {
        let d = ema.floored(i);
        let h = 2.0 / (n * (1.0 + eps) * d);
        let mut delta = -eps * h * grad[i];
        if noisy {
            let nu: f64 = rng.sample(StandardNormal);
            delta += noise_mult * h * d.sqrt() * nu;
        }
        theta[i] += delta;
    }
}

/// Per-parameter constant step sizes `ε_i = 2 (S/N) / diag_i`.
pub fn const_sgd_rates(ema: &FisherEma, s: usize, n: usize) -> Vec<f64> {
    let ratio = s as f64 / n.max(1) as f64;
    (0..ema.diag.len()).map(|i| 2.0 * ratio / ema.floored(i)).collect()
}

/// `θ_i ← θ_i − ε_i g_i` with `g` the mean mini-batch gradient, plus an
/// optional Gaussian term of standard deviation `noise_scale·√ε_i` once burn-in
/// is over.
pub fn const_sgd_step<R: Rng + ?Sized>(
    theta: &mut [f64],
    grad: &[f64],
    ema: &FisherEma,
    cfg: &SgfsConfig,
    step_index: usize,
    rng: &mut R,
) {
    assert_eq!(theta.len(), grad.len());
    let rates = const_sgd_rates(ema, cfg.s, cfg.n);
    let noisy = step_index >= cfg.burn_in && cfg.noise_scale > 0.0;
    for ((t, g), e) in theta.iter_mut().zip(grad).zip(rates) {
        *t -= e * g;
        if noisy {
            let nu: f64 = rng.sample(StandardNormal);
            *t += cfg.noise_scale * e.sqrt() * nu;
        }
    }
}
