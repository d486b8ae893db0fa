use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Workbench-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// Bad configuration: unknown env/method/reward name, invalid parameter.
    #[error("config error: {0}")]
    Config(String),

    /// A vector had the wrong length or contained non-finite values.
    #[error("input shape error: {0}")]
    InputShape(String),

    /// An operation was called out of order (e.g. GEP selection before
    /// the bootstrap phase completed).
    #[error("phase error: {0}")]
    Phase(String),

    /// On-disk data did not match the declared format.
    #[error("format error: {0}")]
    Format(String),

    /// A file was structurally valid but internally inconsistent or truncated.
    #[error("corruption error: {0}")]
    Corruption(String),

    /// Training produced a non-finite loss, gradient, or parameter.
    #[error("training diverged at step {step}: {what}")]
    Divergence { step: u64, what: String },

    /// Malformed CSV input; line numbers are 1-based.
    #[error("parse error at {path}:{line}: {what}")]
    Parse {
        path: String,
        line: usize,
        what: String,
    },

    /// Command-line / API misuse.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code for the CLI: usage errors exit 2, everything else 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 2,
            _ => 1,
        }
    }
}
