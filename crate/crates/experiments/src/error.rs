use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] suple_core::Error),
    #[error(transparent)]
    Learn(#[from] suple_learn::Error),
    #[error("invalid plan setting `{key}`: {reason}")]
    Plan { key: String, reason: String },
    #[error("incompatible curves: {0}")]
    IncompatibleCurves(String),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn plan(key: &str, reason: impl Into<String>) -> Self {
        Error::Plan {
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
