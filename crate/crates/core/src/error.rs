use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid decision tree: {0}")]
    InvalidTree(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A distribution that cannot be repaired by grid rounding.
    #[error("malformed distribution: {0}")]
    MalformedDistribution(String),

    /// Instance probabilities are not on the 1/(10 n^2) grid required here.
    #[error("probability grid mismatch: {0}")]
    GridMismatch(String),

    /// An enumeration or table would exceed the configured budget.
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
