use thiserror::Error;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the mathematical domain of the function.
    #[error("domain error: {0}")]
    Domain(String),
    /// Argument inside the domain but outside the range where the routine is accurate.
    #[error("range error: {0}")]
    Range(String),
    /// Invalid configuration, with the offending field.
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },
    /// A numerical procedure failed (divergence, breakdown, lost monotonicity).
    #[error("numeric failure: {0}")]
    Numeric(String),
    /// The request is well-formed but mathematically inadmissible.
    #[error("refused: {0}")]
    Refusal(String),
    /// Caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),
}

impl Error {
    pub(crate) fn config(field: &str, msg: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
