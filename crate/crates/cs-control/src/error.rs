//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Shape or length disagreement between operands.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// Argument outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A structural invariant that should hold by construction was violated.
    #[error("internal error: {0}")]
    Internal(String),

    /// The hypothesis of a bound does not hold, so the bound is undefined.
    #[error("not applicable: {0}")]
    NotApplicable(String),

    /// Exact enumeration would exceed the configured guard.
    #[error("enumeration guard exceeded: {0}")]
    EnumerationGuard(String),

    /// Configuration file could not be parsed or failed validation.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable machine-readable tag, used in the CLI's error line.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::Domain(_) => "domain",
            Error::Internal(_) => "internal",
            Error::NotApplicable(_) => "not-applicable",
            Error::EnumerationGuard(_) => "enumeration-guard",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
