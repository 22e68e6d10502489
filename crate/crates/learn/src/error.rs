use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] suple_core::Error),
    #[error("non-finite {which} loss at update {update}: {dump}")]
    NonFiniteLoss {
        which: &'static str,
        update: u64,
        dump: String,
    },
    #[error("invalid training setting `{key}`: {reason}")]
    Setting { key: String, reason: String },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn setting(key: &str, reason: impl Into<String>) -> Self {
        Error::Setting {
            key: key.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
