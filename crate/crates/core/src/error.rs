//! Crate-wide error type.
//!
//! Two failure classes matter to callers: bad input (rejected before any
//! computation, CLI exit code 2) and verification failure (a certified
//! postcondition did not hold, CLI exit code 1).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument, file content, or precondition violation.
    #[error("input error: {0}")]
    Input(String),

    /// Syntax error in the event mini-language; `pos` is a byte offset.
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    /// A self-check or certificate failed after computation.
    #[error("verification failure: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn verification(msg: impl Into<String>) -> Self {
        Error::Verification(msg.into())
    }

    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Verification(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
