use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("format error at byte {offset}: {message}")]
    Format { offset: u64, message: String },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-finite gradient in tensor `{0}`")]
    NonFinite(String),

    #[error("class `{class}` has {count} records, at least {min} required")]
    ClassTooSmall {
        class: String,
        count: usize,
        min: usize,
    },

    #[error("no foreground component")]
    NoForeground,

    #[error("singular regression system; use a ridge coefficient > 0")]
    SingularSystem,

    #[error("{0}")]
    Data(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    AtPath {
        path: PathBuf,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(offset: usize, message: impl Into<String>) -> Self {
        Error::Format {
            offset: offset as u64,
            message: message.into(),
        }
    }

    /// Attaches a file path to an error unless it already names one.
    pub fn at_path(self, path: impl Into<PathBuf>) -> Self {
        match self {
            e @ (Error::Io { .. } | Error::AtPath { .. }) => e,
            other => Error::AtPath {
                path: path.into(),
                source: Box::new(other),
            },
        }
    }
}
