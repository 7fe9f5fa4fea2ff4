//! Experiment configs, the multi-agent runner and CSV output for the `bench`
//! binary.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, EnvConfig, EnvKind, ExperimentConfig, RunConfig};
pub use output::{emit_results, sanitize_name};
pub use run::{run_benchmark, AgentFailure, AgentResult, BenchmarkOutcome, SummaryRow};

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("cannot read {}: {source}", path.display())]
    ReadConfig {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("writing {}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },

    #[error(transparent)]
    Core(#[from] banditlab::Error),

    #[error("agent `{agent}` failed: {source}")]
    AgentFailed {
        agent: String,
        source: banditlab::Error,
    },
}

impl BenchError {
    /// Process exit code: 1 for configuration problems, 2 for everything that
    /// goes wrong while running or writing results.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config { .. } | BenchError::ReadConfig { .. } => 1,
            _ => 2,
        }
    }
}

pub type Result<T, E = BenchError> = std::result::Result<T, E>;
