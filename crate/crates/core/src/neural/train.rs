//! RMSProp and the periodic mini-batch training schedule.

use rand::Rng;

use crate::bandit::{HistoryBuffer, SimRng};
use crate::error::{param, Result};

use super::mlp::{Batch, DropoutMasks, Mlp};

pub const RMSPROP_DECAY: f64 = 0.9;
pub const RMSPROP_EPS: f64 = 1e-8;
pub const DEFAULT_BATCH_SIZE: usize = 512;

/// RMSProp with a per-parameter squared-gradient accumulator.
#[derive(Debug, Clone)]
pub struct RmsProp {
    rho: f64,
    eps: f64,
    acc: Vec<f64>,
}

impl RmsProp {
    pub fn new(num_params: usize) -> Self {
        Self::with_constants(num_params, RMSPROP_DECAY, RMSPROP_EPS)
    }

    pub fn with_constants(num_params: usize, rho: f64, eps: f64) -> Self {
        RmsProp {
            rho,
            eps,
            acc: vec![0.0; num_params],
        }
    }

    pub fn accumulator(&self) -> &[f64] {
        &self.acc
    }

    /// One update. A gradient with a non-finite entry is skipped entirely and
    /// `false` is returned.
    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) -> bool {
        assert_eq!(params.len(), grad.len());
        assert_eq!(params.len(), self.acc.len());
        if !grad.iter().all(|g| g.is_finite()) {
            return false;
        }
        for ((p, &g), a) in params.iter_mut().zip(grad).zip(&mut self.acc) {
            *a = self.rho * *a + (1.0 - self.rho) * g * g;
            *p -= lr * g / (*a + self.eps).sqrt();
        }
        true
    }
}

/// How the learning rate evolves across mini-batches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LrPolicy {
    /// `lr_init` for every mini-batch.
    Fixed,
    /// Inverse-time decay over the mini-batches of a period, restarted at
    /// the beginning of each period.
    ResetEachPeriod,
    /// Inverse-time decay over all mini-batches ever taken.
    DecayAcrossPeriods,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSchedule {
    /// Decision steps between training periods.
    pub t_f: usize,
    /// Mini-batches per training period.
    pub t_s: usize,
    pub batch_size: usize,
    pub lr_init: f64,
    pub lr_decay: f64,
    pub policy: LrPolicy,
}

impl TrainingSchedule {
    pub fn validate(&self) -> Result<()> {
        if self.t_f == 0 {
            return Err(param("t_f must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(param("batch_size must be positive"));
        }
        if !(self.lr_init > 0.0 && self.lr_init.is_finite()) {
            return Err(param("learning rate must be positive"));
        }
        if !(self.lr_decay >= 0.0 && self.lr_decay.is_finite()) {
            return Err(param("learning-rate decay must be nonnegative"));
        }
        Ok(())
    }

    /// Whether a training period is due after `decision_step` post-warmup decisions.
    pub fn is_due(&self, decision_step: usize) -> bool {
        decision_step > 0 && decision_step % self.t_f == 0
    }

    /// Learning rate for the given mini-batch counters.
    pub fn learning_rate(&self, batch_in_period: usize, batches_total: usize) -> f64 {
        let counter = match self.policy {
            LrPolicy::Fixed => return self.lr_init,
            LrPolicy::ResetEachPeriod => batch_in_period,
            LrPolicy::DecayAcrossPeriods => batches_total,
        };
        self.lr_init / (1.0 + self.lr_decay * counter as f64)
    }
}

/// A schedule plus the optimizer state and mini-batch counters it drives.
#[derive(Debug, Clone)]
pub struct Trainer {
    schedule: TrainingSchedule,
    optimizer: RmsProp,
    periods: usize,
    batches_total: usize,
}

impl Trainer {
    pub fn new(schedule: TrainingSchedule, num_params: usize) -> Result<Self> {
        schedule.validate()?;
        Ok(Trainer {
            schedule,
            optimizer: RmsProp::new(num_params),
            periods: 0,
            batches_total: 0,
        })
    }

    pub fn schedule(&self) -> &TrainingSchedule {
        &self.schedule
    }

    pub fn periods(&self) -> usize {
        self.periods
    }

    /// Trains `net` if a period is due at `decision_step` and the buffer is
    /// nonempty. Each mini-batch samples uniformly with replacement from the
    /// whole buffer. With `dropout` set, every mini-batch draws fresh masks
    /// with that keep probability. Returns whether a period ran.
    pub fn scheduled_train(
        &mut self,
        net: &mut Mlp,
        buffer: &HistoryBuffer,
        decision_step: usize,
        dropout: Option<f64>,
        rng: &mut SimRng,
    ) -> bool {
        if !self.schedule.is_due(decision_step) || buffer.is_empty() {
            return false;
        }
        self.run_period(net, buffer, self.schedule.t_s, dropout, rng);
        true
    }

    /// Runs `t_s` mini-batches regardless of the schedule's timing.
    pub fn run_period(
        &mut self,
        net: &mut Mlp,
        buffer: &HistoryBuffer,
        t_s: usize,
        dropout: Option<f64>,
        rng: &mut SimRng,
    ) {
        if buffer.is_empty() {
            return;
        }
        for b in 0..t_s {
            let batch = sample_batch(buffer, net.arch().input_dim(), self.schedule.batch_size, rng);
            let masks = dropout.map(|p| DropoutMasks::sample(net.arch(), batch.len(), p, rng));
            let g = net.loss_and_gradient(&batch, masks.as_ref());
            let lr = self.schedule.learning_rate(b, self.batches_total);
            if !self.optimizer.step(net.params_mut(), &g.grad, lr) {
                log::warn!("skipping mini-batch with non-finite gradient");
            }
            self.batches_total += 1;
        }
        self.periods += 1;
    }
}

/// `size` observations drawn uniformly with replacement.
pub fn sample_batch(buffer: &HistoryBuffer, dim: usize, size: usize, rng: &mut impl Rng) -> Batch {
    let n = buffer.len();
    let picks: Vec<usize> = (0..size).map(|_| rng.random_range(0..n)).collect();
    Batch::from_observations(dim, picks.iter().map(|&i| buffer.get(i)))
}
