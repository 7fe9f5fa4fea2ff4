use rand::Rng;

use crate::bandit::{Agent, Context, HistoryBuffer, Observation, SimRng};
use crate::error::{param, Result};
use crate::neural::{sample_batch, Architecture, Mlp, RmsProp};
use crate::stats::argmax;

use super::bbb::VariationalNet;
use super::fisher::{const_sgd_step, sgfs_step, FisherEma, SgfsConfig};

/// When and how much a sampler trains.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerSchedule {
    pub t_f: usize,
    pub t_s: usize,
    pub batch_size: usize,
}

impl SamplerSchedule {
    fn validate(&self) -> Result<()> {
        if self.t_f == 0 || self.batch_size == 0 {
            return Err(param("t_f and batch_size must be positive"));
        }
        Ok(())
    }

    fn is_due(&self, decision_step: usize) -> bool {
        decision_step > 0 && decision_step % self.t_f == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FisherSamplerKind {
    Sgfs,
    ConstSgd,
}

/// Network whose current iterate under SGFS or constant-SGD is treated as
/// a posterior sample and acted on greedily.
#[derive(Debug, Clone)]
pub struct FisherSamplerAgent {
    name: String,
    kind: FisherSamplerKind,
    net: Mlp,
    buffer: HistoryBuffer,
    ema: FisherEma,
    cfg: SgfsConfig,
    schedule: SamplerSchedule,
    steps: usize,
    rng: SimRng,
}

impl FisherSamplerAgent {
    pub fn new(
        name: impl Into<String>,
        kind: FisherSamplerKind,
        arch: Architecture,
        cfg: SgfsConfig,
        schedule: SamplerSchedule,
        mut rng: SimRng,
    ) -> Result<Self> {
        cfg.validate()?;
        schedule.validate()?;
        if arch.has_layer_norm() {
            return Err(param("Fisher samplers use the plain network"));
        }
        let net = Mlp::new(arch, &mut rng);
        Ok(FisherSamplerAgent {
            name: name.into(),
            kind,
            ema: FisherEma::new(net.arch().num_params(), cfg.ema_decay)?,
            buffer: HistoryBuffer::new(net.arch().output_dim()),
            net,
            cfg,
            schedule,
            steps: 0,
            rng,
        })
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    fn train_period(&mut self) {
        let n = self.buffer.len();
        self.cfg.n = n;
        self.cfg.s = self.schedule.batch_size.min(n);
        let dim = self.net.arch().input_dim();
        for _ in 0..self.schedule.t_s {
            let batch = sample_batch(&self.buffer, dim, self.schedule.batch_size, &mut self.rng);
            let g = self
                .net
                .arch()
                .loss_and_gradient(self.net.params(), &batch, None, true);
            let fisher = g.fisher.expect("requested");
            if !g.grad.iter().chain(&fisher).all(|v| v.is_finite()) {
                log::warn!("{}: skipping mini-batch with non-finite gradient", self.name);
                continue;
            }
            self.ema.update_squared(&fisher);
            let mut theta = self.net.params().to_vec();
            match self.kind {
                FisherSamplerKind::Sgfs => {
                    let total: Vec<f64> = g.grad.iter().map(|v| v * n as f64).collect();
                    sgfs_step(&mut theta, &total, &self.ema, &self.cfg, self.steps, &mut self.rng);
                }
                FisherSamplerKind::ConstSgd => {
                    const_sgd_step(&mut theta, &g.grad, &self.ema, &self.cfg, self.steps, &mut self.rng);
                }
            }
            self.steps += 1;
            if theta.iter().all(|v| v.is_finite()) {
                self.net.params_mut().copy_from_slice(&theta);
            } else {
                log::warn!("{}: rejected a non-finite sampler step", self.name);
            }
        }
    }
}

impl Agent for FisherSamplerAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_actions(&self) -> usize {
        self.net.arch().output_dim()
    }

    fn choose(&mut self, context: &Context, _rng: &mut SimRng) -> usize {
        argmax(self.net.arch().predict(self.net.params(), context.as_slice()).iter().copied())
    }

    fn observe(&mut self, obs: &Observation) {
        self.buffer.push(obs.clone());
    }

    fn maybe_train(&mut self, decision_step: usize) {
        if self.schedule.is_due(decision_step) && !self.buffer.is_empty() {
            self.train_period();
        }
    }
}

/// Mini-batches per period for Bayes-by-Backprop: starts at `t_s_initial`
/// and decreases linearly to `t_s` over the first `ramp_periods` periods.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BbbSchedule {
    pub t_f: usize,
    pub t_s: usize,
    pub t_s_initial: usize,
    pub ramp_periods: usize,
    pub batch_size: usize,
    pub lr: f64,
}

impl BbbSchedule {
    pub fn steps_for_period(&self, period: usize) -> usize {
        if period >= self.ramp_periods || self.t_s_initial <= self.t_s {
            return self.t_s;
        }
        let span = (self.t_s_initial - self.t_s) as f64;
        let ramped = self.t_s_initial as f64 - period as f64 * span / self.ramp_periods as f64;
        (ramped.round() as usize).max(self.t_s)
    }
}

/// Variational network; each decision acts greedily under a fresh weight draw.
#[derive(Debug, Clone)]
pub struct BbbAgent {
    name: String,
    vnet: VariationalNet,
    optimizer: RmsProp,
    schedule: BbbSchedule,
    buffer: HistoryBuffer,
    periods: usize,
    rng: SimRng,
}

impl BbbAgent {
    pub fn new(
        name: impl Into<String>,
        arch: Architecture,
        prior_sigma: f64,
        noise_sigma: f64,
        schedule: BbbSchedule,
        mut rng: SimRng,
    ) -> Result<Self> {
        if schedule.t_f == 0 || schedule.batch_size == 0 {
            return Err(param("t_f and batch_size must be positive"));
        }
        if !(schedule.lr > 0.0) {
            return Err(param("learning rate must be positive"));
        }
        let vnet = VariationalNet::new(arch, prior_sigma, noise_sigma, &mut rng)?;
        let p = vnet.arch().num_params();
        Ok(BbbAgent {
            name: name.into(),
            optimizer: RmsProp::new(2 * p),
            buffer: HistoryBuffer::new(vnet.arch().output_dim()),
            vnet,
            schedule,
            periods: 0,
            rng,
        })
    }

    pub fn vnet(&self) -> &VariationalNet {
        &self.vnet
    }

    pub fn vnet_mut(&mut self) -> &mut VariationalNet {
        &mut self.vnet
    }

    fn train_period(&mut self) {
        let steps = self.schedule.steps_for_period(self.periods);
        let n = self.buffer.len();
        let dim = self.vnet.arch().input_dim();
        let p = self.vnet.mu.len();
        let mut params = Vec::with_capacity(2 * p);
        for _ in 0..steps {
            let batch = sample_batch(&self.buffer, dim, self.schedule.batch_size, &mut self.rng);
            let g = self.vnet.loss_and_grads(&batch, n, &mut self.rng);
            params.clear();
            params.extend_from_slice(&self.vnet.mu);
            params.extend_from_slice(&self.vnet.rho);
            let grad: Vec<f64> = g.grad_mu.into_iter().chain(g.grad_rho).collect();
            if self.optimizer.step(&mut params, &grad, self.schedule.lr) {
                self.vnet.mu.copy_from_slice(&params[..p]);
                self.vnet.rho.copy_from_slice(&params[p..]);
            }
        }
        self.periods += 1;
    }
}

impl Agent for BbbAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_actions(&self) -> usize {
        self.vnet.arch().output_dim()
    }

    fn choose(&mut self, context: &Context, rng: &mut SimRng) -> usize {
        posterior_sample_choose(&self.vnet, context.as_slice(), rng)
    }

    fn observe(&mut self, obs: &Observation) {
        self.buffer.push(obs.clone());
    }

    fn maybe_train(&mut self, decision_step: usize) {
        if decision_step > 0 && decision_step % self.schedule.t_f == 0 && !self.buffer.is_empty() {
            self.train_period();
        }
    }
}

/// Greedy action of one network drawn from the variational posterior.
pub fn posterior_sample_choose<R: Rng + ?Sized>(vnet: &VariationalNet, x: &[f64], rng: &mut R) -> usize {
    let w = vnet.sample_weights(rng);
    argmax(vnet.arch().predict(&w, x).iter().copied())
}
