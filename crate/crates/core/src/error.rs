use thiserror::Error;

/// Failure modes shared across the library.
#[derive(Debug, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Problem size exceeds an enumeration or memory guard.
    #[error("size error: {0}")]
    Size(String),

    /// Shapes or lengths of the inputs do not agree.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// An input is singular or ambiguous in a way that admits no unique answer.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A strategy construction failed to reach its target; carries the best
    /// bias achieved so callers can inspect how close it came.
    #[error("construction failed: {message} (best achieved bias {best_bias})")]
    Construction { message: String, best_bias: f64 },

    /// JSON (de)serialization failure.
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
