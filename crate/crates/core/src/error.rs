use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter lies outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// A point lies outside the domain of the objective.
    #[error("point outside domain: {0}")]
    Domain(String),

    /// Vector or matrix dimensions disagree.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A vector contained NaN or infinite entries.
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),

    /// The requested parameter regime has no certified modulus.
    #[error("unsupported regime: {0}")]
    Unsupported(String),

    /// An internal invariant was broken (for example an empty candidate set).
    #[error("internal error: {0}")]
    Internal(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
