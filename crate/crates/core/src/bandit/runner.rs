use rayon::prelude::*;

use super::{Agent, EnvDims, Environment, ExperimentReport, TrialSeed};
use crate::error::{Error, Result};

/// One recorded step of a trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub action: usize,
    pub realized_reward: f64,
    pub optimal_expected_reward: f64,
    pub chosen_expected_reward: f64,
}

impl TraceStep {
    pub fn instantaneous_regret(&self) -> f64 {
        self.optimal_expected_reward - self.chosen_expected_reward
    }
}

/// Per-step record of a trial, plus a digest of the context sequence the
/// agent was shown.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegretTrace {
    pub steps: Vec<TraceStep>,
    pub context_digest: u64,
}

impl RegretTrace {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn actions(&self) -> impl Iterator<Item = usize> + '_ {
        self.steps.iter().map(|s| s.action)
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv_mix(mut hash: u64, values: &[f64]) -> u64 {
    for v in values {
        for byte in v.to_bits().to_le_bytes() {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(FNV_PRIME);
        }
    }
    hash
}

/// Runs one trial of the decision loop.
///
/// The first `num_actions * warmup_pulls` steps pull actions round-robin
/// regardless of context; every later action comes from `agent.choose`.
/// Warmup steps count toward regret and are fed to the agent like any other.
pub fn run_trial(
    env: &dyn Environment,
    agent: &mut dyn Agent,
    warmup_pulls: usize,
    seed: TrialSeed,
) -> Result<RegretTrace> {
    let EnvDims {
        num_actions,
        horizon,
        ..
    } = env.dims();
    if horizon == 0 {
        return Ok(RegretTrace {
            steps: Vec::new(),
            context_digest: FNV_OFFSET,
        });
    }
    let warmup_len = num_actions * warmup_pulls;
    if horizon < warmup_len {
        return Err(Error::param(format!(
            "horizon {horizon} is shorter than the {warmup_len}-step warmup"
        )));
    }

    let mut reward_rng = seed.reward_rng();
    let mut decision_rng = seed.decision_rng();
    let mut steps = Vec::with_capacity(horizon);
    let mut digest = FNV_OFFSET;

    for t in 0..horizon {
        let context = env.context_at(t);
        digest = fnv_mix(digest, context.as_slice());

        let action = if t < warmup_len {
            t % num_actions
        } else {
            agent.choose(context, &mut decision_rng)
        };
        if action >= num_actions {
            return Err(Error::ContractViolation {
                agent: agent.name().to_string(),
                action,
                num_actions,
            });
        }

        let realized_reward = env.realize_reward(t, action, &mut reward_rng);
        steps.push(TraceStep {
            action,
            realized_reward,
            optimal_expected_reward: env.optimal_expected_reward(t),
            chosen_expected_reward: env.expected_reward(t, action),
        });

        agent.observe(&super::Observation {
            context: context.clone(),
            action,
            reward: realized_reward,
        });
        let decision_step = (t + 1).saturating_sub(warmup_len);
        agent.maybe_train(decision_step);
    }

    Ok(RegretTrace {
        steps,
        context_digest: digest,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ExperimentOptions {
    pub trials: usize,
    pub base_seed: u64,
    pub warmup_pulls: usize,
    /// Worker threads for independent trials; 1 runs sequentially.
    pub workers: usize,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            trials: 10,
            base_seed: 0,
            warmup_pulls: 3,
            workers: 1,
        }
    }
}

/// Runs `trials` independent trials. Trial `i` builds both its environment
/// and its agent from seed `base_seed + i`.
pub fn run_experiment<E, A>(
    env_factory: E,
    agent_factory: A,
    opts: ExperimentOptions,
) -> Result<ExperimentReport>
where
    E: Fn(TrialSeed) -> Result<Box<dyn Environment>> + Sync,
    A: Fn(TrialSeed, EnvDims) -> Result<Box<dyn Agent>> + Sync,
{
    if opts.trials == 0 {
        return Err(Error::param("trials must be at least 1"));
    }

    let run_one = |i: usize| -> Result<(String, String, usize, RegretTrace)> {
        let seed = TrialSeed(opts.base_seed.wrapping_add(i as u64));
        let wrap = |e: Error| Error::TrialFailed {
            trial: i,
            source: Box::new(e),
        };
        let env = env_factory(seed).map_err(wrap)?;
        let mut agent = agent_factory(seed, env.dims()).map_err(wrap)?;
        let trace = run_trial(env.as_ref(), agent.as_mut(), opts.warmup_pulls, seed).map_err(wrap)?;
        Ok((
            agent.name().to_string(),
            env.name().to_string(),
            env.dims().horizon,
            trace,
        ))
    };

    let results: Vec<Result<_>> = if opts.workers > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.workers)
            .build()
            .map_err(|e| Error::param(format!("cannot build worker pool: {e}")))?;
        pool.install(|| (0..opts.trials).into_par_iter().map(run_one).collect())
    } else {
        (0..opts.trials).map(run_one).collect()
    };

    let mut traces = Vec::with_capacity(opts.trials);
    let mut meta = None;
    for result in results {
        let (agent, env, horizon, trace) = result?;
        meta.get_or_insert((agent, env, horizon));
        traces.push(trace);
    }
    let (agent, env, horizon) = meta.expect("at least one trial");
    let seeds = (0..opts.trials)
        .map(|i| opts.base_seed.wrapping_add(i as u64))
        .collect();
    Ok(ExperimentReport::from_traces(agent, env, horizon, seeds, traces))
}
