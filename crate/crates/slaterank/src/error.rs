//! Crate-wide error type and exit-code mapping.

use thiserror::Error;

/// All failure modes surfaced by the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration: bad hyperparameters, unresolvable paths,
    /// mismatched model/schema wiring.
    #[error("config error: {0}")]
    Config(String),

    /// Malformed or inconsistent input data. `line` is 1-based when the
    /// error originates from a specific record of a sample file, 0 otherwise.
    #[error("data error (line {line}): {msg}")]
    Data { line: usize, msg: String },

    /// Non-finite values or other numeric breakdowns.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Training aborted (non-finite loss or gradient). Carries the
    /// offending parameter block or slate for diagnostics.
    #[error("training error: {0}")]
    Training(String),

    /// API misuse: empty inputs, out-of-range indices.
    #[error("usage error: {0}")]
    Usage(String),

    /// A metric is undefined on the given input (e.g. single-class AUC).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Every sampling round aborted before a legal list could be filled.
    #[error("list generation exhausted after {rounds} aborted rounds")]
    GenerationExhausted { rounds: usize },

    /// A probability query left the support of the sampling distribution
    /// (log-probability is -inf).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub fn data(line: usize, msg: impl Into<String>) -> Self {
        Error::Data {
            line,
            msg: msg.into(),
        }
    }

    /// Process exit code for this error. 0 is reserved for success;
    /// config, data and numeric failures get distinct codes.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Usage(_) => 2,
            Error::Data { .. } => 3,
            Error::Numeric(_) | Error::Training(_) => 4,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
