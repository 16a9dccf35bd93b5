use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("non-finite value at iteration {iteration}: {message}")]
    Numeric { iteration: usize, message: String },

    #[error("unknown benchmark `{0}`")]
    UnknownBenchmark(String),

    #[error("config error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("no ground truth available: {0}")]
    NoGroundTruth(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
