//! Error type shared by all modules.
//!
//! The three variants mirror the failure classes the command-line tool
//! distinguishes: invalid input, a numerical procedure that did not
//! converge, and a search that ran out of budget.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition or invariant.
    #[error("validation error: {0}")]
    Validation(String),
    /// A numerical procedure failed to reach its tolerance.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A scan or expansion exhausted its configured budget.
    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
    pub fn budget(msg: impl Into<String>) -> Self {
        Error::BudgetExhausted(msg.into())
    }
}
