use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the pipeline.
///
/// Variants are grouped by the process exit code the command line maps them
/// to: usage errors (1), data errors (2) and numerical failures (3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("labels must be 0 or 1, found {0} at position {1}")]
    NonBinaryLabel(u8, usize),

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("cannot balance: {0}")]
    Unbalanceable(String),

    #[error("insufficient population: {0}")]
    InsufficientPopulation(String),

    #[error("attribute `{0}` is absent from the dataset schema")]
    MissingAttribute(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 usage, 2 data, 3 numerical.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_) | Error::MissingAttribute(_) => 1,
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}
