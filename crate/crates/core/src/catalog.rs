//! Named agent presets and per-key overrides.

use crate::bandit::{Agent, EnvDims, TrialSeed, UniformAgent};
use crate::error::{param, Error, Result};
use crate::linear::{
    CovarianceApproximation, LinearAgent, LinearModelKind, LinearPolicy, NigPrior,
    PerActionLinearModel,
};
use crate::neural::{
    Architecture, BootstrapAgent, Exploration, LrPolicy, NeuralGreedyAgent, NeuralLinearAgent,
    ParamNoiseAgent, ParamNoiseState, TrainingSchedule, DEFAULT_BATCH_SIZE,
};
use crate::samplers::{
    BbbAgent, BbbSchedule, FisherSamplerAgent, FisherSamplerKind, SamplerSchedule, SgfsConfig,
};

/// Stream offset for the bootstrap inclusion coins, clear of member streams.
const BOOTSTRAP_MASK_STREAM: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub enum AgentKind {
    Uniform,
    Linear {
        model: LinearModelKind,
        approx: CovarianceApproximation,
        policy: LinearPolicy,
        intercept: bool,
    },
    NeuralGreedy {
        schedule: TrainingSchedule,
        exploration: Exploration,
    },
    Bootstrap {
        schedule: TrainingSchedule,
        q: usize,
        p: f64,
    },
    ParamNoise {
        schedule: TrainingSchedule,
        sigma: f64,
        target: f64,
    },
    NeuralLinear {
        schedule: TrainingSchedule,
        prior: NigPrior,
        bias_feature: bool,
    },
    FisherSampler {
        kind: FisherSamplerKind,
        cfg: SgfsConfig,
        schedule: SamplerSchedule,
        inject_noise: bool,
    },
    Bbb {
        prior_sigma: f64,
        noise_sigma: f64,
        schedule: BbbSchedule,
    },
}

/// A buildable agent description: preset values plus any overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentSpec {
    pub name: String,
    pub kind: AgentKind,
    pub hidden: Vec<usize>,
}

pub const PRESET_NAMES: &[&str] = &[
    "Uniform",
    "LinGreedy",
    "LinGreedy (eps = 0.01)",
    "LinGreedy (eps = 0.05)",
    "LinPost",
    "LinPost-MR",
    "LinPost-SL",
    "LinDiagPost",
    "LinDiagPost-MR",
    "LinDiagPost-SL",
    "LinDiagPrecPost",
    "LinDiagPrecPost-MR",
    "LinDiagPrecPost-SL",
    "LinFullPost",
    "LinFullPost-MR",
    "LinFullPost-SL",
    "LinFullDiagPost",
    "LinFullDiagPost-MR",
    "LinFullDiagPost-SL",
    "LinFullDiagPrecPost",
    "LinFullDiagPrecPost-MR",
    "LinFullDiagPrecPost-SL",
    "RMS1",
    "RMS2",
    "RMS3",
    "RMS",
    "RMS-MR",
    "RMS-SL",
    "EpsGreedyRMS",
    "EpsGreedyRMS-MR",
    "EpsGreedyRMS-SL",
    "Dropout",
    "Dropout-MR",
    "Dropout-SL",
    "BootstrappedNN",
    "BootstrappedNN-MR",
    "BootstrappedNN-SL",
    "ParamNoise",
    "ParamNoise-MR",
    "ParamNoise-SL",
    "NeuralLinear",
    "NeuralLinear-MR",
    "NeuralLinear-SL",
    "SGFS",
    "SGFS-MR",
    "SGFS-SL",
    "ConstSGD",
    "ConstSGD-MR",
    "ConstSGD-SL",
    "BBB",
    "BBB-MR",
    "BBB-SL",
];

fn rms1(t_s: usize, t_f: usize) -> TrainingSchedule {
    TrainingSchedule {
        t_f,
        t_s,
        batch_size: DEFAULT_BATCH_SIZE,
        lr_init: 0.01,
        lr_decay: 0.0,
        policy: LrPolicy::Fixed,
    }
}

fn rms2(t_s: usize, t_f: usize) -> TrainingSchedule {
    TrainingSchedule {
        lr_init: 0.01,
        lr_decay: 0.5,
        policy: LrPolicy::ResetEachPeriod,
        ..rms1(t_s, t_f)
    }
}

fn rms3(t_s: usize, t_f: usize) -> TrainingSchedule {
    TrainingSchedule {
        lr_init: 1.0,
        lr_decay: 0.55,
        policy: LrPolicy::DecayAcrossPeriods,
        ..rms1(t_s, t_f)
    }
}

fn nig(lambda: f64, a0: f64, b0: f64) -> LinearModelKind {
    LinearModelKind::Nig(NigPrior { lambda, a0, b0 })
}

fn gaussian(lambda: f64, noise_var: f64) -> LinearModelKind {
    LinearModelKind::Gaussian { lambda, noise_var }
}

fn linear(model: LinearModelKind, approx: CovarianceApproximation) -> AgentKind {
    AgentKind::Linear {
        model,
        approx,
        policy: LinearPolicy::Thompson,
        intercept: false,
    }
}

fn greedy(epsilon: f64) -> AgentKind {
    AgentKind::Linear {
        model: gaussian(0.25, 0.25),
        approx: CovarianceApproximation::Exact,
        policy: LinearPolicy::Greedy { epsilon },
        intercept: false,
    }
}

fn sgfs(burn_in: usize, lr: f64, ema_decay: f64, noise_scale: f64) -> AgentKind {
    AgentKind::FisherSampler {
        kind: FisherSamplerKind::Sgfs,
        cfg: SgfsConfig {
            lr,
            burn_in,
            ema_decay,
            noise_scale,
            n: 0,
            s: DEFAULT_BATCH_SIZE,
        },
        schedule: SamplerSchedule {
            t_f: 20,
            t_s: 20,
            batch_size: DEFAULT_BATCH_SIZE,
        },
        inject_noise: true,
    }
}

fn const_sgd(burn_in: usize, ema_decay: f64, noise_scale: f64, t_s: usize, t_f: usize) -> AgentKind {
    AgentKind::FisherSampler {
        kind: FisherSamplerKind::ConstSgd,
        cfg: SgfsConfig {
            lr: 1.0,
            burn_in,
            ema_decay,
            noise_scale,
            n: 0,
            s: DEFAULT_BATCH_SIZE,
        },
        schedule: SamplerSchedule {
            t_f,
            t_s,
            batch_size: DEFAULT_BATCH_SIZE,
        },
        inject_noise: false,
    }
}

fn bbb(noise_sigma: f64, prior_sigma: f64, t_s: usize) -> AgentKind {
    AgentKind::Bbb {
        prior_sigma,
        noise_sigma,
        schedule: BbbSchedule {
            t_f: 20,
            t_s,
            t_s_initial: 10_000,
            ramp_periods: 100,
            batch_size: DEFAULT_BATCH_SIZE,
            lr: 0.01,
        },
    }
}

fn eps_rms(epsilon: f64, decay: f64, schedule: TrainingSchedule) -> AgentKind {
    AgentKind::NeuralGreedy {
        schedule,
        exploration: Exploration::EpsilonGreedy { epsilon, decay },
    }
}

fn dropout(p_keep: f64, schedule: TrainingSchedule) -> AgentKind {
    AgentKind::NeuralGreedy {
        schedule,
        exploration: Exploration::Dropout { p_keep },
    }
}

fn neural_greedy(schedule: TrainingSchedule) -> AgentKind {
    AgentKind::NeuralGreedy {
        schedule,
        exploration: Exploration::Greedy,
    }
}

fn neural_linear(a0: f64, b0: f64, lambda: f64, t_s: usize) -> AgentKind {
    AgentKind::NeuralLinear {
        schedule: rms2(t_s, 20),
        prior: NigPrior { lambda, a0, b0 },
        bias_feature: true,
    }
}

fn preset_kind(name: &str) -> Option<AgentKind> {
    use CovarianceApproximation::{Diag, Exact, PrecisionDiag};
    Some(match name {
        "Uniform" => AgentKind::Uniform,
        "LinGreedy" => greedy(0.0),
        "LinGreedy (eps = 0.01)" => greedy(0.01),
        "LinGreedy (eps = 0.05)" => greedy(0.05),
        "LinPost" => linear(gaussian(0.25, 0.25), Exact),
        "LinPost-MR" => linear(gaussian(11.12, 2.0), Exact),
        "LinPost-SL" => linear(gaussian(37.58, 0.037), Exact),
        "LinDiagPost" => linear(gaussian(0.25, 0.25), Diag),
        "LinDiagPost-MR" => linear(gaussian(14.20, 2.49), Diag),
        "LinDiagPost-SL" => linear(gaussian(40.0, 0.011), Diag),
        "LinDiagPrecPost" => linear(gaussian(0.25, 0.25), PrecisionDiag),
        "LinDiagPrecPost-MR" => linear(gaussian(37.35, 0.68), PrecisionDiag),
        "LinDiagPrecPost-SL" => linear(gaussian(13.49, 0.01), PrecisionDiag),
        "LinFullPost" => linear(nig(0.25, 6.0, 6.0), Exact),
        "LinFullPost-MR" => linear(nig(20.0, 30.0, 35.0), Exact),
        "LinFullPost-SL" => linear(nig(20.0, 35.0, 5.0), Exact),
        "LinFullDiagPost" => linear(nig(0.25, 6.0, 6.0), Diag),
        "LinFullDiagPost-MR" => linear(nig(39.95, 22.27, 35.89), Diag),
        "LinFullDiagPost-SL" => linear(nig(39.74, 39.94, 0.03), Diag),
        "LinFullDiagPrecPost" => linear(nig(0.25, 6.0, 6.0), PrecisionDiag),
        "LinFullDiagPrecPost-MR" => linear(nig(2.21, 0.23, 21.23), PrecisionDiag),
        "LinFullDiagPrecPost-SL" => linear(nig(13.07, 4.25, 0.073), PrecisionDiag),
        "RMS1" => neural_greedy(rms1(20, 20)),
        "RMS2" => neural_greedy(rms2(20, 20)),
        "RMS3" => neural_greedy(rms3(20, 20)),
        "RMS" => neural_greedy(rms3(100, 20)),
        "RMS-MR" => neural_greedy(TrainingSchedule {
            lr_decay: 2.5,
            ..rms3(50, 20)
        }),
        "RMS-SL" => neural_greedy(TrainingSchedule {
            lr_init: 1.1,
            lr_decay: 0.4,
            ..rms3(100, 20)
        }),
        "EpsGreedyRMS" => eps_rms(0.01, 0.999, rms3(20, 20)),
        "EpsGreedyRMS-MR" => eps_rms(0.046, 0.93, rms3(50, 20)),
        "EpsGreedyRMS-SL" => eps_rms(0.23, 0.95, rms2(50, 10)),
        "Dropout" => dropout(0.8, rms2(20, 20)),
        "Dropout-MR" => dropout(0.8, rms2(50, 50)),
        "Dropout-SL" => dropout(0.95, rms3(100, 5)),
        "BootstrappedNN" => AgentKind::Bootstrap {
            schedule: rms3(20, 20),
            q: 10,
            p: 1.0,
        },
        "BootstrappedNN-MR" => AgentKind::Bootstrap {
            schedule: rms2(50, 50),
            q: 2,
            p: 0.95,
        },
        "BootstrappedNN-SL" => AgentKind::Bootstrap {
            schedule: rms3(20, 20),
            q: 3,
            p: 0.92,
        },
        "ParamNoise" => AgentKind::ParamNoise {
            schedule: rms2(20, 20),
            sigma: 0.01,
            target: 0.01,
        },
        "ParamNoise-MR" => AgentKind::ParamNoise {
            schedule: rms3(20, 20),
            sigma: 2.6,
            target: 1.5,
        },
        "ParamNoise-SL" => AgentKind::ParamNoise {
            schedule: rms2(20, 50),
            sigma: 1.8,
            target: 2.0,
        },
        "NeuralLinear" => neural_linear(3.0, 3.0, 0.25, 20),
        "NeuralLinear-MR" => neural_linear(12.0, 30.0, 23.0, 50),
        "NeuralLinear-SL" => neural_linear(38.0, 1.0, 1.5, 20),
        "SGFS" => sgfs(500, 0.014, 0.9, 0.75),
        "SGFS-MR" => sgfs(100, 0.19, 0.23, 0.33),
        "SGFS-SL" => sgfs(2000, 0.15, 0.58, 0.34),
        "ConstSGD" => const_sgd(500, 0.9, 0.5, 20, 20),
        "ConstSGD-MR" => const_sgd(50, 0.87, 0.44, 20, 50),
        "ConstSGD-SL" => const_sgd(500, 0.82, 1.05, 20, 10),
        "BBB" => bbb(0.1, 1.0, 100),
        "BBB-MR" => bbb(1.3, 1.48, 50),
        "BBB-SL" => bbb(0.03, 2.86, 100),
        _ => return None,
    })
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| param(format!("invalid value {value:?} for {key}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(param(format!("invalid value {value:?} for {key}"))),
    }
}

fn set_schedule(s: &mut TrainingSchedule, key: &str, value: &str) -> Result<bool> {
    match key {
        "t_f" => s.t_f = parse(key, value)?,
        "t_s" => s.t_s = parse(key, value)?,
        "batch_size" => s.batch_size = parse(key, value)?,
        "lr" => s.lr_init = parse(key, value)?,
        "lr_decay" => s.lr_decay = parse(key, value)?,
        "lr_policy" => {
            s.policy = match value.trim() {
                "fixed" => LrPolicy::Fixed,
                "reset" => LrPolicy::ResetEachPeriod,
                "decay" => LrPolicy::DecayAcrossPeriods,
                other => return Err(param(format!("unknown lr_policy {other:?}"))),
            }
        }
        _ => return Ok(false),
    }
    Ok(true)
}

impl AgentSpec {
    pub fn preset(name: &str) -> Result<Self> {
        let kind = preset_kind(name).ok_or_else(|| Error::UnknownPreset(name.to_string()))?;
        Ok(AgentSpec {
            name: name.to_string(),
            kind,
            hidden: vec![100, 100],
        })
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self.kind, AgentKind::Uniform)
    }

    /// Applies one `key = value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if key == "name" {
            self.name = value.trim().to_string();
            return Ok(());
        }
        if key == "hidden" {
            self.hidden = value
                .split(',')
                .map(|w| parse::<usize>(key, w))
                .collect::<Result<Vec<_>>>()?;
            return Ok(());
        }
        let applied = match &mut self.kind {
            AgentKind::Uniform => false,
            AgentKind::Linear {
                model,
                policy,
                intercept,
                ..
            } => match (key, model) {
                ("lambda", LinearModelKind::Nig(p)) => {
                    p.lambda = parse(key, value)?;
                    true
                }
                ("lambda", LinearModelKind::Gaussian { lambda, .. }) => {
                    *lambda = parse(key, value)?;
                    true
                }
                ("a0", LinearModelKind::Nig(p)) => {
                    p.a0 = parse(key, value)?;
                    true
                }
                ("b0", LinearModelKind::Nig(p)) => {
                    p.b0 = parse(key, value)?;
                    true
                }
                ("noise_var", LinearModelKind::Gaussian { noise_var, .. }) => {
                    *noise_var = parse(key, value)?;
                    true
                }
                ("epsilon", _) => match policy {
                    LinearPolicy::Greedy { epsilon } => {
                        *epsilon = parse(key, value)?;
                        true
                    }
                    LinearPolicy::Thompson => false,
                },
                ("intercept", _) => {
                    *intercept = parse_bool(key, value)?;
                    true
                }
                _ => false,
            },
            AgentKind::NeuralGreedy {
                schedule,
                exploration,
            } => {
                set_schedule(schedule, key, value)?
                    || match (key, exploration) {
                        ("epsilon", Exploration::EpsilonGreedy { epsilon, .. }) => {
                            *epsilon = parse(key, value)?;
                            true
                        }
                        ("epsilon_decay", Exploration::EpsilonGreedy { decay, .. }) => {
                            *decay = parse(key, value)?;
                            true
                        }
                        ("p_keep", Exploration::Dropout { p_keep }) => {
                            *p_keep = parse(key, value)?;
                            true
                        }
                        _ => false,
                    }
            }
            AgentKind::Bootstrap { schedule, q, p } => {
                set_schedule(schedule, key, value)?
                    || match key {
                        "q" => {
                            *q = parse(key, value)?;
                            true
                        }
                        "p" => {
                            *p = parse(key, value)?;
                            true
                        }
                        _ => false,
                    }
            }
            AgentKind::ParamNoise {
                schedule,
                sigma,
                target,
            } => {
                set_schedule(schedule, key, value)?
                    || match key {
                        "sigma" => {
                            *sigma = parse(key, value)?;
                            true
                        }
                        "target_eps" => {
                            *target = parse(key, value)?;
                            true
                        }
                        _ => false,
                    }
            }
            AgentKind::NeuralLinear {
                schedule,
                prior,
                bias_feature,
            } => {
                set_schedule(schedule, key, value)?
                    || match key {
                        "lambda" => {
                            prior.lambda = parse(key, value)?;
                            true
                        }
                        "a0" => {
                            prior.a0 = parse(key, value)?;
                            true
                        }
                        "b0" => {
                            prior.b0 = parse(key, value)?;
                            true
                        }
                        "bias_feature" => {
                            *bias_feature = parse_bool(key, value)?;
                            true
                        }
                        _ => false,
                    }
            }
            AgentKind::FisherSampler {
                kind,
                cfg,
                schedule,
                inject_noise,
            } => match key {
                "t_f" => {
                    schedule.t_f = parse(key, value)?;
                    true
                }
                "t_s" => {
                    schedule.t_s = parse(key, value)?;
                    true
                }
                "batch_size" => {
                    schedule.batch_size = parse(key, value)?;
                    true
                }
                "lr" if *kind == FisherSamplerKind::Sgfs => {
                    cfg.lr = parse(key, value)?;
                    true
                }
                "burn_in" => {
                    cfg.burn_in = parse(key, value)?;
                    true
                }
                "ema_decay" => {
                    cfg.ema_decay = parse(key, value)?;
                    true
                }
                "noise_scale" => {
                    cfg.noise_scale = parse(key, value)?;
                    true
                }
                "inject_noise" => {
                    *inject_noise = parse_bool(key, value)?;
                    true
                }
                _ => false,
            },
            AgentKind::Bbb {
                prior_sigma,
                noise_sigma,
                schedule,
            } => match key {
                "prior_sigma" => {
                    *prior_sigma = parse(key, value)?;
                    true
                }
                "noise_sigma" => {
                    *noise_sigma = parse(key, value)?;
                    true
                }
                "t_f" => {
                    schedule.t_f = parse(key, value)?;
                    true
                }
                "t_s" => {
                    schedule.t_s = parse(key, value)?;
                    true
                }
                "t_s_initial" => {
                    schedule.t_s_initial = parse(key, value)?;
                    true
                }
                "ramp_periods" => {
                    schedule.ramp_periods = parse(key, value)?;
                    true
                }
                "batch_size" => {
                    schedule.batch_size = parse(key, value)?;
                    true
                }
                "lr" => {
                    schedule.lr = parse(key, value)?;
                    true
                }
                _ => false,
            },
        };
        if applied {
            Ok(())
        } else {
            Err(Error::UnknownKey {
                agent: self.name.clone(),
                key: key.to_string(),
            })
        }
    }

    fn architecture(&self, dims: EnvDims, layer_norm: bool) -> Result<Architecture> {
        Architecture::new(dims.context_dim, &self.hidden, dims.num_actions, layer_norm)
    }

    /// Instantiates the agent for one trial.
    pub fn build(&self, seed: TrialSeed, dims: EnvDims) -> Result<Box<dyn Agent>> {
        let name = self.name.clone();
        let rng = seed.agent_rng(0);
        Ok(match &self.kind {
            AgentKind::Uniform => Box::new(UniformAgent::new(dims.num_actions).with_name(name)),
            AgentKind::Linear {
                model,
                approx,
                policy,
                intercept,
            } => {
                let model = match model {
                    LinearModelKind::Nig(p) => LinearModelKind::Nig(NigPrior::new(p.lambda, p.a0, p.b0)?),
                    other => *other,
                };
                let m = PerActionLinearModel::new(dims.context_dim, dims.num_actions, model, *approx, *intercept)?;
                Box::new(LinearAgent::new(name, m, *policy)?)
            }
            AgentKind::NeuralGreedy {
                schedule,
                exploration,
            } => Box::new(NeuralGreedyAgent::new(
                name,
                self.architecture(dims, false)?,
                schedule.clone(),
                *exploration,
                rng,
            )?),
            AgentKind::Bootstrap { schedule, q, p } => {
                let rngs = (0..*q as u64).map(|i| seed.agent_rng(i)).collect();
                Box::new(BootstrapAgent::new(
                    name,
                    self.architecture(dims, false)?,
                    schedule.clone(),
                    *p,
                    rngs,
                    seed.agent_rng(BOOTSTRAP_MASK_STREAM),
                )?)
            }
            AgentKind::ParamNoise {
                schedule,
                sigma,
                target,
            } => Box::new(ParamNoiseAgent::new(
                name,
                self.architecture(dims, true)?,
                schedule.clone(),
                ParamNoiseState::new(*sigma, *target, dims.horizon)?,
                rng,
            )?),
            AgentKind::NeuralLinear {
                schedule,
                prior,
                bias_feature,
            } => Box::new(NeuralLinearAgent::new(
                name,
                self.architecture(dims, false)?,
                schedule.clone(),
                NigPrior::new(prior.lambda, prior.a0, prior.b0)?,
                *bias_feature,
                rng,
            )?),
            AgentKind::FisherSampler {
                kind,
                cfg,
                schedule,
                inject_noise,
            } => {
                let mut cfg = cfg.clone();
                if *kind == FisherSamplerKind::ConstSgd && !inject_noise {
                    cfg.noise_scale = 0.0;
                }
                Box::new(FisherSamplerAgent::new(
                    name,
                    *kind,
                    self.architecture(dims, false)?,
                    cfg,
                    *schedule,
                    rng,
                )?)
            }
            AgentKind::Bbb {
                prior_sigma,
                noise_sigma,
                schedule,
            } => Box::new(BbbAgent::new(
                name,
                self.architecture(dims, false)?,
                *prior_sigma,
                *noise_sigma,
                *schedule,
                rng,
            )?),
        })
    }
}
