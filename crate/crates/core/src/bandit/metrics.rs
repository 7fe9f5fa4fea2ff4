use super::RegretTrace;
use crate::error::{Error, Result};
use crate::stats::Summary;

pub const DEFAULT_SIMPLE_REGRET_WINDOW: usize = 500;

/// Sum of per-step expected regret.
pub fn cumulative_regret(trace: &RegretTrace) -> f64 {
    trace.steps.iter().map(|s| s.instantaneous_regret()).sum()
}

/// Mean instantaneous regret over the last `window` steps, or over the whole
/// trace when it is shorter.
pub fn simple_regret(trace: &RegretTrace, window: usize) -> f64 {
    let n = trace.len();
    if n == 0 || window == 0 {
        return 0.0;
    }
    if n < window {
        log::debug!("simple regret window {window} exceeds trace length {n}; averaging all steps");
    }
    let tail = &trace.steps[n - n.min(window)..];
    tail.iter().map(|s| s.instantaneous_regret()).sum::<f64>() / tail.len() as f64
}

/// Results of one agent over several trials of one environment.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub agent: String,
    pub environment: String,
    pub horizon: usize,
    pub seeds: Vec<u64>,
    pub cumulative: Vec<f64>,
    pub simple: Vec<f64>,
    pub cumulative_summary: Summary,
    pub simple_summary: Summary,
    pub traces: Vec<RegretTrace>,
}

impl ExperimentReport {
    pub fn from_traces(
        agent: String,
        environment: String,
        horizon: usize,
        seeds: Vec<u64>,
        traces: Vec<RegretTrace>,
    ) -> Self {
        let cumulative: Vec<f64> = traces.iter().map(cumulative_regret).collect();
        let simple: Vec<f64> = traces
            .iter()
            .map(|t| simple_regret(t, DEFAULT_SIMPLE_REGRET_WINDOW))
            .collect();
        ExperimentReport {
            agent,
            environment,
            horizon,
            seeds,
            cumulative_summary: Summary::from_samples(&cumulative),
            simple_summary: Summary::from_samples(&simple),
            cumulative,
            simple,
            traces,
        }
    }

    pub fn trials(&self) -> usize {
        self.cumulative.len()
    }

    /// Set when the standard errors are placeholders (a single trial).
    pub fn stderr_is_placeholder(&self) -> bool {
        self.cumulative_summary.stderr_is_placeholder()
    }
}

/// Regrets rescaled so the uniform baseline scores 100.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalizedReport {
    pub cumulative: Summary,
    pub simple: Summary,
}

fn scale(summary: Summary, baseline: f64) -> Summary {
    // Dividing first makes a report normalized against itself exactly 100.
    Summary {
        mean: 100.0 * (summary.mean / baseline),
        stderr: 100.0 * (summary.stderr / baseline),
        count: summary.count,
    }
}

/// Expresses `report` relative to the uniform agent's mean regret.
/// Cumulative and simple regret are normalized by their own uniform means.
pub fn normalize_report(
    report: &ExperimentReport,
    uniform: &ExperimentReport,
) -> Result<NormalizedReport> {
    if report.horizon != uniform.horizon {
        return Err(Error::param(format!(
            "cannot normalize a horizon-{} report against a horizon-{} baseline",
            report.horizon, uniform.horizon
        )));
    }
    let cum_base = uniform.cumulative_summary.mean;
    let simple_base = uniform.simple_summary.mean;
    if cum_base == 0.0 {
        return Err(Error::NormalizationUndefined("cumulative"));
    }
    if simple_base == 0.0 {
        return Err(Error::NormalizationUndefined("simple"));
    }
    Ok(NormalizedReport {
        cumulative: scale(report.cumulative_summary, cum_base),
        simple: scale(report.simple_summary, simple_base),
    })
}
