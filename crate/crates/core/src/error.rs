use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("every row has a missing value")]
    AllRowsMissing,

    #[error("dataset contains missing values")]
    MissingValues,

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("training labels contain a single class")]
    SingleClass,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("groups are unbalanced: {0}")]
    Unbalanced(String),

    #[error("config: {0}")]
    Config(String),

    #[error("missing artifact {0}")]
    MissingArtifact(PathBuf),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Numeric failures map to exit code 2; everything else is a user error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numeric(_) => 2,
            _ => 1,
        }
    }
}
