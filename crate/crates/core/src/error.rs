use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("{rule} expects {expected} bids, got {got}")]
    Arity {
        rule: String,
        expected: String,
        got: usize,
    },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("rule mismatch: {0}")]
    RuleMismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;
