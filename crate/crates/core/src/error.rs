//! Crate-wide error type.
//!
//! Variants are grouped by how a caller should react: bad inputs
//! ([`Error::Parameter`], [`Error::Format`]), algorithmic failures
//! ([`Error::Numerical`], [`Error::Generation`]), and plain I/O.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A function argument or configuration value is out of range or
    /// inconsistent with the other arguments.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// An iterative routine failed to converge or produced values outside
    /// its guaranteed range.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// The randomized gluing sampler exhausted its retry budget.
    #[error("graph generation failed: {0}")]
    Generation(String),

    /// An input file does not follow its documented format.
    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
