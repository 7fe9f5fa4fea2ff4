//! CSV files written after a benchmark.
//!
//! Numbers use Rust's shortest round-trip formatting, so values read back
//! from the files equal the in-memory ones exactly.

use std::fs;
use std::path::{Path, PathBuf};

use banditlab::stats::Summary;

use crate::run::BenchmarkOutcome;
use crate::{BenchError, Result};

pub const SUMMARY_HEADER: [&str; 9] = [
    "agent",
    "environment",
    "mean_cum_regret",
    "stderr_cum",
    "mean_simple_regret",
    "stderr_simple",
    "normalized_cum",
    "normalized_simple",
    "wall_time_seconds",
];

pub const TRACE_HEADER: [&str; 6] = [
    "trial",
    "step",
    "action",
    "realized_reward",
    "optimal_expected_reward",
    "instantaneous_regret",
];

pub const CURVE_HEADER: [&str; 3] = ["step", "mean_cum_regret", "stderr"];

pub const TIMING_HEADER: [&str; 3] = ["agent", "wall_time_seconds", "relative_to_rms"];

/// Agent name as it appears in file names: ASCII letters, digits, `-`, `_`
/// and `.` are kept, anything else becomes `_`.
pub fn sanitize_name(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') {
                c
            } else {
                '_'
            }
        })
        .collect()
}

struct Table {
    path: PathBuf,
    writer: csv::Writer<fs::File>,
}

impl Table {
    fn create(path: PathBuf, header: &[&str]) -> Result<Self> {
        let writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(&path)
            .map_err(|source| BenchError::Csv {
                path: path.clone(),
                source,
            })?;
        let mut table = Table { path, writer };
        table.row(header.iter().map(|s| s.to_string()))?;
        Ok(table)
    }

    fn row(&mut self, fields: impl IntoIterator<Item = String>) -> Result<()> {
        self.writer
            .write_record(fields.into_iter().collect::<Vec<_>>())
            .map_err(|source| BenchError::Csv {
                path: self.path.clone(),
                source,
            })
    }

    fn finish(mut self) -> Result<PathBuf> {
        self.writer.flush().map_err(|source| BenchError::Write {
            path: self.path.clone(),
            source,
        })?;
        Ok(self.path)
    }
}

/// Writes every result file into `out_dir`, creating it if needed, and
/// returns the paths in the order they were written.
pub fn emit_results(outcome: &BenchmarkOutcome, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|source| BenchError::Write {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let mut summary = Table::create(out_dir.join("summary.csv"), &SUMMARY_HEADER)?;
    for r in &outcome.summary {
        summary.row([
            r.agent.clone(),
            r.environment.clone(),
            r.mean_cum_regret.to_string(),
            r.stderr_cum.to_string(),
            r.mean_simple_regret.to_string(),
            r.stderr_simple.to_string(),
            r.normalized_cum.to_string(),
            r.normalized_simple.to_string(),
            r.wall_time_seconds.to_string(),
        ])?;
    }
    written.push(summary.finish()?);

    for result in &outcome.results {
        let report = &result.report;
        let stem = sanitize_name(&report.agent);

        for (trial, trace) in report.traces.iter().enumerate() {
            let path = out_dir.join(format!("trace_{stem}_{trial}.csv"));
            let mut table = Table::create(path, &TRACE_HEADER)?;
            for (step, s) in trace.steps.iter().enumerate() {
                table.row([
                    trial.to_string(),
                    step.to_string(),
                    s.action.to_string(),
                    s.realized_reward.to_string(),
                    s.optimal_expected_reward.to_string(),
                    s.instantaneous_regret().to_string(),
                ])?;
            }
            written.push(table.finish()?);
        }

        let path = out_dir.join(format!("regret_curve_{stem}.csv"));
        let mut table = Table::create(path, &CURVE_HEADER)?;
        let steps = report.traces.iter().map(|t| t.len()).min().unwrap_or(0);
        let mut running = vec![0.0; report.traces.len()];
        for step in 0..steps {
            for (acc, trace) in running.iter_mut().zip(&report.traces) {
                *acc += trace.steps[step].instantaneous_regret();
            }
            let s = Summary::from_samples(&running);
            table.row([step.to_string(), s.mean.to_string(), s.stderr.to_string()])?;
        }
        written.push(table.finish()?);
    }

    if outcome.timing {
        let rms_time = outcome
            .results
            .iter()
            .find(|r| r.report.agent == "RMS")
            .map(|r| r.wall_time_seconds);
        let mut table = Table::create(out_dir.join("timing.csv"), &TIMING_HEADER)?;
        for r in &outcome.results {
            let relative = match rms_time {
                Some(t) if t > 0.0 => (r.wall_time_seconds / t).to_string(),
                _ => String::new(),
            };
            table.row([r.report.agent.clone(), r.wall_time_seconds.to_string(), relative])?;
        }
        written.push(table.finish()?);
    }

    Ok(written)
}
