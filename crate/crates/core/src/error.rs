use thiserror::Error;

/// Errors raised by the numerical layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Evaluation outside the domain of a special function or kernel.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("singular matrix: zero pivot in column {column}")]
    SingularMatrix { column: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
