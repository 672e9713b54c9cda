use thiserror::Error;

/// Errors raised by the simulators, closed forms and trainers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QaoaError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("resource limit: {what} = {requested} exceeds cap {cap}")]
    ResourceLimit {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("solver failure: {0}")]
    SolverFailure(String),
}

pub type Result<T> = std::result::Result<T, QaoaError>;
