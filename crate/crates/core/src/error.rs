use thiserror::Error;

/// Errors raised by model construction, numerical routines and the harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A model object violates one of its invariants.
    #[error("invalid model: {0}")]
    Validation(String),

    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The measure does not carry what the operation needs (moment rule, finite support, ...).
    #[error("unsupported measure: {0}")]
    Unsupported(String),

    #[error("quadrature did not converge: achieved {achieved:e}, requested {requested:e}")]
    Quadrature { achieved: f64, requested: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
