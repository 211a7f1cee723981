use thiserror::Error;

/// Errors raised by the algebraic and numerical routines of this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("degenerate parameter point: {0}")]
    Degenerate(String),

    #[error("variable mismatch: {0} vs {1}")]
    VariableMismatch(usize, usize),

    #[error("series contract violated: {0}")]
    Contract(String),

    #[error("truncation mismatch: {0}")]
    Truncation(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("expansion region violated: {0}")]
    Expansion(String),

    #[error("non-finite state at step {0}")]
    NonFinite(usize),

    #[error("blow-up detected at step {step}: norm {norm}")]
    BlowUp { step: usize, norm: f64 },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
