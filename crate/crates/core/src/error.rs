use thiserror::Error;

/// Errors surfaced by the inference engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid caller input: bad shapes, out-of-range indices, empty sets,
    /// parameters outside their domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A design whose adjusted intercept is undefined because the quadratic
    /// form `<1,1>_Q` vanishes (e.g. the all-ones vector is annihilated).
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    /// A computation produced a NaN or infinity where a finite number is
    /// required.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// I/O or serialization failure in the harness / CLI layer.
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateDesign(msg.into())
    }
}
