use thiserror::Error;

/// Errors produced by the retrieval engine and its file formats.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("chain too short: {joints} joints, need at least {required}")]
    TooShort { joints: usize, required: usize },

    #[error("empty query ({code}): {message}")]
    EmptyQuery { code: &'static str, message: String },

    #[error("bad magic bytes, not a sketchchain index file")]
    BadMagic,

    #[error("unsupported format version {found} (this build reads version {expected})")]
    VersionMismatch { found: u32, expected: u32 },

    #[error("corrupt index file: {0}")]
    Corrupt(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
