use thiserror::Error;

/// Errors produced anywhere in the witness pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("distribution is not normalized (total mass {0})")]
    NotNormalized(f64),

    #[error("grid captures only {captured:.6} of the probability mass (threshold {threshold})")]
    Truncation { captured: f64, threshold: f64 },

    #[error("invalid pairing: {0}")]
    InvalidPairing(String),

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("{what} did not converge: {detail}")]
    Convergence { what: &'static str, detail: String },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("propagation failed: {discarded} of {replicates} replicates had zero counts")]
    Propagation { discarded: usize, replicates: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
