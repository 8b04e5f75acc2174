use std::path::PathBuf;

/// Errors produced by the tracking and evaluation layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("degenerate box: {0}")]
    DegenerateBox(String),
    #[error("degenerate region: {0}")]
    DegenerateRegion(String),
    #[error("empty region: no foreground pixels")]
    EmptyRegion,
    #[error("metric undefined: {0}")]
    UndefinedMetric(String),
    #[error("tracker init failed: {0}")]
    Init(String),
    #[error("format error in {path}:{line}: {msg}")]
    Format {
        path: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(path: impl Into<PathBuf>, line: usize, msg: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            line,
            msg: msg.into(),
        }
    }

    /// True for errors caused by malformed external data rather than API misuse.
    pub fn is_data_error(&self) -> bool {
        matches!(self, Error::Format { .. } | Error::Io { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
