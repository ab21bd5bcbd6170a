use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid exponent: p < 1 (got {0})")]
    InvalidExponent(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    /// A numerical solver stopped without meeting its tolerances. `lower` and
    /// `upper` bracket the true value as far as the solver got.
    #[error("solver failure in {context}: value bracketed by [{lower}, {upper}]")]
    SolverFailure {
        context: String,
        lower: f64,
        upper: f64,
    },

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("row {row}: cannot reach the requested tolerance, best oscillation {oscillation}")]
    InsufficientColumns { row: usize, oscillation: f64 },

    #[error("empty point set: {0}")]
    Empty(&'static str),

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn ensure_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}
