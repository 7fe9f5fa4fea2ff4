use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("agent `{agent}` chose action {action} but the environment has {num_actions} actions")]
    ContractViolation {
        agent: String,
        action: usize,
        num_actions: usize,
    },

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("cannot normalize: uniform baseline {0} regret is zero")]
    NormalizationUndefined(&'static str),

    #[error("dataset file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("ragged row at line {line}: expected {expected} fields, found {found}")]
    RaggedRow {
        line: u64,
        expected: usize,
        found: usize,
    },

    #[error("non-numeric value `{value}` in column `{column}` at line {line}")]
    NonNumeric {
        line: u64,
        column: String,
        value: String,
    },

    #[error("unknown reward rule `{0}`")]
    UnknownRule(String),

    #[error("unknown column `{0}`")]
    UnknownColumn(String),

    #[error("dataset does not match rule: {0}")]
    RuleMismatch(String),

    #[error("unknown agent preset `{0}`")]
    UnknownPreset(String),

    #[error("agent `{agent}` has no setting `{key}`")]
    UnknownKey { agent: String, key: String },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("trial {trial} failed: {source}")]
    TrialFailed {
        trial: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::param(msg)
}
