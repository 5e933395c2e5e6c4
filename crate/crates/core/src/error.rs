use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A state failed the invariant-domain predicate of its system.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("state outside the invariant domain: {reason}")]
pub struct DomainError {
    pub reason: String,
}

impl DomainError {
    pub fn new(reason: impl Into<String>) -> Self {
        Self {
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    Grid(String),

    #[error(transparent)]
    Domain(#[from] DomainError),

    /// An upstream invariant (e.g. an admissible cell average entering the
    /// limiter) did not hold. Only reachable through a bug or corrupted input.
    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("run aborted: {0}")]
    Aborted(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
