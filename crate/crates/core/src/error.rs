use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot open {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid split: {0}")]
    Split(String),

    #[error("feature id {id} out of range for vocabulary of size {vocab_size}")]
    FeatureOutOfRange { id: u32, vocab_size: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid training input: {0}")]
    Training(String),

    #[error("invalid metric input: {0}")]
    Metric(String),

    #[error("model format: {0}")]
    Format(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}
