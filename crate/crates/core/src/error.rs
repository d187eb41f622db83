use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    /// An outcome or instance refers to agents or items that do not exist,
    /// or breaks a structural invariant (overlapping bundles, duplicate ids).
    #[error("structural error: {0}")]
    Structural(String),

    /// Exact enumeration would exceed its configured budget.
    #[error("capacity error: {what} needs {needed} evaluations, enumeration budget is {budget}")]
    Capacity {
        what: &'static str,
        needed: u128,
        budget: u128,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = MarketError> = std::result::Result<T, E>;
