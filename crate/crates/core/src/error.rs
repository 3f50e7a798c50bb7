use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported range: {0}")]
    UnsupportedRange(String),
    #[error("zero table does not cover [{lo}, {hi}] (table covers [{cov_lo}, {cov_hi}])")]
    Coverage {
        lo: f64,
        hi: f64,
        cov_lo: f64,
        cov_hi: f64,
    },
    #[error("zero table looks incomplete: found {found} zeros, counting function expects {expected:.2} ({detail})")]
    IncompleteZeros {
        found: usize,
        expected: f64,
        detail: String,
    },
    #[error("ladder infeasible: no level satisfies the cap; smallest feasible kappa is {min_kappa:e}")]
    LadderInfeasible { min_kappa: f64 },
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    #[error("grid too coarse: step {step} exceeds {limit}")]
    GridTooCoarse { step: f64, limit: f64 },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
