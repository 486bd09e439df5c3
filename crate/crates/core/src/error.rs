use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// None of the proven lifespan bounds covers the requested parameters.
    #[error("no bound applies: {0}")]
    NoBoundApplies(String),

    /// A transcendental bound equation has no root on its monotone branch.
    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("insufficient data: need at least {needed} usable points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Invalid run configuration, detected before any work is done.
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
