//! Runs every configured agent over the shared trial seeds.

use std::sync::Arc;
use std::time::Instant;

use banditlab::bandit::ExperimentReport;
use banditlab::catalog::AgentSpec;
use banditlab::envs::{shuffle_for_trial, BiasFeature, DatasetBandit, LinearBandit, WheelBandit, WheelConfig};
use banditlab::{normalize_report, run_trial, Environment, RegretTrace, TrialSeed};
use rayon::prelude::*;

use crate::config::{EnvKind, ExperimentConfig};
use crate::{BenchError, Result};

/// One line of `summary.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub agent: String,
    pub environment: String,
    pub mean_cum_regret: f64,
    pub stderr_cum: f64,
    pub mean_simple_regret: f64,
    pub stderr_simple: f64,
    pub normalized_cum: f64,
    pub normalized_simple: f64,
    pub wall_time_seconds: f64,
}

#[derive(Debug, Clone)]
pub struct AgentResult {
    pub report: ExperimentReport,
    /// Sum over trials of the time spent building and running the agent.
    pub wall_time_seconds: f64,
}

#[derive(Debug)]
pub struct AgentFailure {
    pub agent: String,
    pub error: banditlab::Error,
}

#[derive(Debug)]
pub struct BenchmarkOutcome {
    /// Successful agents in config order.
    pub results: Vec<AgentResult>,
    pub summary: Vec<SummaryRow>,
    pub failures: Vec<AgentFailure>,
    pub timing: bool,
}

/// Builds trial environments; datasets are read once and reshuffled per trial.
enum EnvFactory {
    Wheel(WheelConfig),
    Linear(banditlab::envs::LinearBanditSpec),
    Dataset(Arc<DatasetBandit>),
}

impl EnvFactory {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let horizon = cfg.run.horizon;
        Ok(match &cfg.env.kind {
            EnvKind::Wheel(w) => EnvFactory::Wheel(WheelConfig { horizon, ..*w }),
            EnvKind::Linear(spec) => {
                let mut spec = spec.clone();
                spec.horizon = horizon;
                EnvFactory::Linear(spec)
            }
            EnvKind::Dataset(spec) => {
                let data = DatasetBandit::load(spec)?;
                if data.len() < horizon {
                    log::warn!(
                        "dataset has {} usable rows; horizon {horizon} is cut to that",
                        data.len()
                    );
                }
                EnvFactory::Dataset(Arc::new(data))
            }
        })
    }

    fn build(&self, seed: TrialSeed, horizon: usize, bias: bool) -> banditlab::Result<Box<dyn Environment>> {
        let env: Box<dyn Environment> = match self {
            EnvFactory::Wheel(cfg) => Box::new(WheelBandit::new(*cfg, &mut seed.env_rng())?),
            EnvFactory::Linear(spec) => Box::new(LinearBandit::generate(spec.clone(), &mut seed.env_rng())?),
            EnvFactory::Dataset(data) => Box::new(shuffle_for_trial(Arc::clone(data), seed).with_horizon(horizon)),
        };
        if bias {
            Ok(Box::new(BiasFeature::new(env)?))
        } else {
            Ok(env)
        }
    }
}

struct TrialOutput {
    environment: String,
    horizon: usize,
    trace: RegretTrace,
    seconds: f64,
}

fn run_one(
    factory: &EnvFactory,
    cfg: &ExperimentConfig,
    spec: &AgentSpec,
    trial: usize,
) -> banditlab::Result<TrialOutput> {
    let seed = TrialSeed(cfg.run.seed.wrapping_add(trial as u64));
    let wrap = |e: banditlab::Error| banditlab::Error::TrialFailed {
        trial,
        source: Box::new(e),
    };
    let env = factory.build(seed, cfg.run.horizon, cfg.env.bias).map_err(wrap)?;
    let start = Instant::now();
    let mut agent = spec.build(seed, env.dims()).map_err(wrap)?;
    let trace = run_trial(env.as_ref(), agent.as_mut(), cfg.run.warmup, seed).map_err(wrap)?;
    let seconds = start.elapsed().as_secs_f64();
    log::debug!("{} trial {trial}: {seconds:.2}s", spec.name);
    Ok(TrialOutput {
        environment: env.name().to_string(),
        horizon: env.dims().horizon,
        trace,
        seconds,
    })
}

/// Runs every agent for `trials` trials. Trial `i` of every agent uses seed
/// `seed + i`, so all agents face the same contexts and reward noise.
///
/// An agent whose trial fails is reported in `failures` and left out of the
/// summary; the others still run. Failure of the uniform baseline is an
/// error because nothing can be normalized without it.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkOutcome> {
    let factory = EnvFactory::new(cfg)?;
    let trials = cfg.run.trials;
    let tasks: Vec<(usize, usize)> = (0..cfg.agents.len())
        .flat_map(|a| (0..trials).map(move |t| (a, t)))
        .collect();
    let work = |&(a, t): &(usize, usize)| run_one(&factory, cfg, &cfg.agents[a], t);

    let outputs: Vec<banditlab::Result<TrialOutput>> = if cfg.run.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.workers)
            .build()
            .map_err(|e| banditlab::Error::InvalidParameter(format!("cannot build worker pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(work).collect())
    } else {
        tasks.iter().map(work).collect()
    };

    let mut per_agent: Vec<Vec<banditlab::Result<TrialOutput>>> = cfg.agents.iter().map(|_| Vec::new()).collect();
    for ((a, _), out) in tasks.iter().zip(outputs) {
        per_agent[*a].push(out);
    }

    let seeds: Vec<u64> = (0..trials).map(|i| cfg.run.seed.wrapping_add(i as u64)).collect();
    let mut results = Vec::new();
    let mut result_index = vec![None; cfg.agents.len()];
    let mut failures = Vec::new();
    for (a, (spec, outs)) in cfg.agents.iter().zip(per_agent).enumerate() {
        match outs.into_iter().collect::<banditlab::Result<Vec<_>>>() {
            Ok(outs) => {
                let environment = outs[0].environment.clone();
                let horizon = outs[0].horizon;
                let wall_time_seconds = outs.iter().map(|o| o.seconds).sum();
                let traces = outs.into_iter().map(|o| o.trace).collect();
                let report = ExperimentReport::from_traces(spec.name.clone(), environment, horizon, seeds.clone(), traces);
                log::info!(
                    "{}: mean cumulative regret {:.2} over {trials} trials",
                    spec.name,
                    report.cumulative_summary.mean
                );
                result_index[a] = Some(results.len());
                results.push(AgentResult {
                    report,
                    wall_time_seconds,
                });
            }
            Err(error) => {
                log::error!("agent {} failed: {error}", spec.name);
                failures.push(AgentFailure {
                    agent: spec.name.clone(),
                    error,
                });
            }
        }
    }

    let uniform_pos = cfg.uniform_index();
    let uniform = match result_index[uniform_pos] {
        Some(i) => &results[i].report,
        None => {
            let failure = failures
                .into_iter()
                .find(|f| f.agent == cfg.agents[uniform_pos].name)
                .expect("uniform agent either succeeded or failed");
            return Err(BenchError::AgentFailed {
                agent: failure.agent,
                source: failure.error,
            });
        }
    };

    let summary = results
        .iter()
        .map(|r| {
            let norm = normalize_report(&r.report, uniform)?;
            Ok(SummaryRow {
                agent: r.report.agent.clone(),
                environment: r.report.environment.clone(),
                mean_cum_regret: r.report.cumulative_summary.mean,
                stderr_cum: r.report.cumulative_summary.stderr,
                mean_simple_regret: r.report.simple_summary.mean,
                stderr_simple: r.report.simple_summary.stderr,
                normalized_cum: norm.cumulative.mean,
                normalized_simple: norm.simple.mean,
                wall_time_seconds: if cfg.run.timing { r.wall_time_seconds } else { 0.0 },
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BenchmarkOutcome {
        results,
        summary,
        failures,
        timing: cfg.run.timing,
    })
}
