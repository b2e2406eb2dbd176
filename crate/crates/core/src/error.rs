//! Crate-wide error type, grouped by how a caller should react.

/// Errors surfaced by validation, solvers, and size guards.
///
/// The grouping mirrors the CLI exit codes: input and validation problems,
/// numerical solver failures, and refusals to start oversized computations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Inconsistent shapes or indices in caller-supplied data.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Data that parses but violates a mathematical invariant.
    #[error("validation failed: {0}")]
    Validation(String),

    /// A request outside the supported parameter range.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// An iterative solver gave up; the message carries final residuals.
    #[error("solver failure: {0}")]
    Solver(String),

    /// The problem would exceed a configured size cap.
    #[error("size cap exceeded: {0}")]
    SizeCap(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension(_)
            | Error::Validation(_)
            | Error::Unsupported(_)
            | Error::Io(_)
            | Error::Json(_) => 1,
            Error::Solver(_) => 2,
            Error::SizeCap(_) => 3,
        }
    }
}
