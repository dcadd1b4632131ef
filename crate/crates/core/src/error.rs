use thiserror::Error;

/// Parse failure with source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at {line}:{col}: {message}")]
pub struct ParseError {
    pub line: u32,
    pub col: u32,
    pub message: String,
}

impl ParseError {
    pub fn new(line: u32, col: u32, message: impl Into<String>) -> Self {
        ParseError {
            line,
            col,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("sort error: {0}")]
    Sort(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("evaluation budget exceeded: needs about {needed} steps, budget is {budget}")]
    Budget { needed: u128, budget: u128 },

    /// Two routes that must agree did not. This is always a defect in the
    /// caller's data or in this library, never a recoverable condition.
    #[error("oracle mismatch: {0}")]
    OracleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
