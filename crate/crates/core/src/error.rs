use thiserror::Error;

pub type Result<T> = std::result::Result<T, WaveError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WaveError {
    /// Invalid configuration; `key` is a dotted path into the config tree.
    #[error("configuration error at `{key}`: {msg}")]
    Config { key: String, msg: String },
    #[error("usage error: {0}")]
    Usage(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl WaveError {
    pub fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        WaveError::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }
}

impl From<std::io::Error> for WaveError {
    fn from(e: std::io::Error) -> Self {
        WaveError::Io(e.to_string())
    }
}
