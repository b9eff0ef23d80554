use thiserror::Error;

/// Errors surfaced by constructors and checked operations.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A lattice or simulation parameter is outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A checked operation was called with inputs violating its contract.
    #[error("contract violation: {0}")]
    Contract(String),

    /// The requested law is degenerate for the given skewness.
    #[error("degenerate law: {0}")]
    DegenerateLaw(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }
}
