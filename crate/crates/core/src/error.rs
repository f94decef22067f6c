use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("header line {line}: {reason}")]
    HeaderParse { line: usize, reason: String },

    #[error("unsupported signal format `{0}`: only format 212 is supported")]
    UnsupportedFormat(String),

    #[error("truncated format-212 data at byte offset {offset}: need {needed} bytes, got {available}")]
    Truncated212 {
        offset: usize,
        needed: usize,
        available: usize,
    },

    #[error("annotation stream at byte offset {offset}: {reason}")]
    Annotation { offset: usize, reason: String },

    #[error("invalid record: {0}")]
    InvalidRecord(String),

    #[error("missing record `{name}` in {dir}")]
    MissingRecord { name: String, dir: PathBuf },

    #[error("signal too short: {len} samples, need at least {min}")]
    SignalTooShort { len: usize, min: usize },

    #[error("feature extraction: {0}")]
    Feature(String),

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("not initialized: {0}")]
    NotInitialized(String),

    #[error("stale cache: {0}")]
    StaleCache(String),

    #[error("missing artifact {0}; run the preceding pipeline step first")]
    MissingArtifact(PathBuf),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Coarse failure classes, mapped onto process exit codes by the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Usage,
    Data,
    Numeric,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) | Error::InvalidParameter(_) => ErrorKind::Usage,
            Error::DegenerateGeometry(_) | Error::Numeric(_) => ErrorKind::Numeric,
            _ => ErrorKind::Data,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            ErrorKind::Usage => 1,
            ErrorKind::Data => 2,
            ErrorKind::Numeric => 3,
        }
    }
}
