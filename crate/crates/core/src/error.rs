use thiserror::Error;

/// Errors surfaced by the simulator, the network engine and the planners.
#[derive(Debug, Error)]
pub enum Error {
    /// A model input is outside the domain it is defined on.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration value violates an invariant.
    #[error("config error: {0}")]
    Config(String),

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An API was called in a state it does not support.
    #[error("usage error: {0}")]
    Usage(String),

    /// The oracle planner exceeded its node budget.
    #[error("search budget exceeded: {0}; shorten the horizon or lower the action count")]
    BudgetExceeded(String),

    /// Checkpoint or data file is malformed.
    #[error("format error: {0}")]
    Format(String),

    /// Training produced a non-finite loss.
    #[error("non-finite loss: {0}")]
    NonFiniteLoss(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
