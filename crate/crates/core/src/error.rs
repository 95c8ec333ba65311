use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of the operation is not met.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The work estimate exceeds the configured cap.
    #[error("resource limit exceeded: {what} (estimate {estimate:.3e} > cap {cap:.3e})")]
    ResourceLimit { what: String, estimate: f64, cap: f64 },

    /// Strict mode refuses to evaluate a bound whose hypotheses fail.
    #[error("hypotheses unmet in strict mode: {0}")]
    HypothesesUnmet(String),

    /// A verification step failed (e.g. projection retries exhausted).
    #[error("verification failed: {0}")]
    Verification(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("serialization error: {0}")]
    Serde(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serde(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
