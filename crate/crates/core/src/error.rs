use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Numerically degenerate input (zero-length axis, rank-deficient
    /// matrix, empty or flat geometry, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A domain invariant was violated (joint angle out of range, malformed
    /// mesh, occlusion bound exceeded, ...).
    #[error("validation error: {0}")]
    Validation(String),

    /// Operand dimensions do not line up.
    #[error("dimension mismatch: expected {expected}, got {got} ({context})")]
    DimensionMismatch {
        expected: usize,
        got: usize,
        context: &'static str,
    },

    /// A collection that must be non-empty was empty.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Bad run configuration (e.g. rejection sampling cannot make progress).
    #[error("configuration error: {0}")]
    Config(String),

    /// Malformed file contents.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::DegenerateInput(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
