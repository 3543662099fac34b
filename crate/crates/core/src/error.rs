use thiserror::Error;

/// Errors produced by the sparsification library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A text input could not be parsed. `line` is 1-based.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(
        "iterative solver did not converge in {iterations} iterations \
         (relative residual {residual:e}, tolerance {tolerance:e})"
    )]
    SolverFailure { iterations: usize, residual: f64, tolerance: f64 },

    #[error("internal error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, message: msg.into() }
}
