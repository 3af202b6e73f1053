use std::path::PathBuf;

use crate::approx::ApproxResult;

/// Errors produced by the estimators, approximation routines and harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid domain [{lo}, {hi}]: need finite lo < hi{extra}")]
    InvalidDomain {
        lo: f64,
        hi: f64,
        extra: &'static str,
    },

    #[error(
        "remez failed to converge for degree {degree} after {iterations} iterations \
         (relative spread {spread:.3e})"
    )]
    NonConvergence {
        degree: usize,
        iterations: usize,
        spread: f64,
        last: Box<ApproxResult>,
    },

    #[error("value {value} is not on the lattice 1/{rate} (rate * value = {scaled})")]
    NonLatticeInput { value: f64, rate: f64, scaled: f64 },

    #[error("dimension mismatch: {left} symbols vs {right} symbols")]
    DimensionMismatch { left: usize, right: usize },

    #[error("per-part rate {rate} is too small; estimators need rate > 1 so that ln(rate) > 0")]
    RateTooSmall { rate: f64 },

    #[error("the P histogram has no observations")]
    EmptyP,

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown estimator `{0}`")]
    UnknownEstimator(String),

    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),

    #[error("insufficient rows for rate fit: {0}")]
    InsufficientRows(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
