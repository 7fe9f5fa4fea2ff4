use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::bandit::{Context, EnvDims, Environment, SimRng};
use crate::error::{param, Result};

/// Wheel bandit parameters. Action 0 is the safe arm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelConfig {
    pub delta: f64,
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub sigma: f64,
    pub horizon: usize,
}

impl Default for WheelConfig {
    fn default() -> Self {
        WheelConfig {
            delta: 0.95,
            mu1: 1.2,
            mu2: 1.0,
            mu3: 50.0,
            sigma: 0.01,
            horizon: 2000,
        }
    }
}

impl WheelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(param(format!("wheel delta must lie in (0, 1), got {}", self.delta)));
        }
        if !(self.mu3 > self.mu1 && self.mu1 > self.mu2) {
            return Err(param("wheel means must satisfy mu3 > mu1 > mu2"));
        }
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(param("wheel noise must be nonnegative"));
        }
        Ok(())
    }
}

/// Uniform draw from the unit disk.
pub fn wheel_context<R: Rng + ?Sized>(rng: &mut R) -> [f64; 2] {
    let r = rng.random::<f64>().sqrt();
    let theta = rng.random::<f64>() * std::f64::consts::TAU;
    [r * theta.cos(), r * theta.sin()]
}

/// Action (1–4) whose quadrant contains `x`; a zero coordinate counts as positive.
pub fn wheel_quadrant_action(x: [f64; 2]) -> usize {
    match (x[0] >= 0.0, x[1] >= 0.0) {
        (true, true) => 1,
        (true, false) => 2,
        (false, false) => 3,
        (false, true) => 4,
    }
}

pub fn wheel_expected_reward(cfg: &WheelConfig, x: [f64; 2], action: usize) -> f64 {
    if action == 0 {
        return cfg.mu1;
    }
    let norm = x[0].hypot(x[1]);
    if norm > cfg.delta && action == wheel_quadrant_action(x) {
        cfg.mu3
    } else {
        cfg.mu2
    }
}

pub fn wheel_realize<R: Rng + ?Sized>(cfg: &WheelConfig, x: [f64; 2], action: usize, rng: &mut R) -> f64 {
    let mean = wheel_expected_reward(cfg, x, action);
    if cfg.sigma == 0.0 {
        return mean;
    }
    mean + Normal::new(0.0, cfg.sigma).expect("finite sigma").sample(rng)
}

/// Wheel bandit with a context stream fixed at construction.
#[derive(Debug, Clone)]
pub struct WheelBandit {
    cfg: WheelConfig,
    contexts: Vec<Context>,
    points: Vec<[f64; 2]>,
}

impl WheelBandit {
    pub fn new(cfg: WheelConfig, rng: &mut SimRng) -> Result<Self> {
        cfg.validate()?;
        let points: Vec<[f64; 2]> = (0..cfg.horizon).map(|_| wheel_context(rng)).collect();
        let contexts = points
            .iter()
            .map(|p| Context::new(p.to_vec()))
            .collect::<Result<Vec<_>>>()?;
        Ok(WheelBandit {
            cfg,
            contexts,
            points,
        })
    }

    pub fn config(&self) -> &WheelConfig {
        &self.cfg
    }
}

impl Environment for WheelBandit {
    fn name(&self) -> &str {
        "wheel"
    }

    fn dims(&self) -> EnvDims {
        EnvDims {
            context_dim: 2,
            num_actions: 5,
            horizon: self.cfg.horizon,
        }
    }

    fn context_at(&self, t: usize) -> &Context {
        &self.contexts[t]
    }

    fn expected_reward(&self, t: usize, action: usize) -> f64 {
        wheel_expected_reward(&self.cfg, self.points[t], action)
    }

    fn realize_reward(&self, t: usize, action: usize, rng: &mut SimRng) -> f64 {
        wheel_realize(&self.cfg, self.points[t], action, rng)
    }
}
