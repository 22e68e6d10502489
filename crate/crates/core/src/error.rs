use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite state: {0}")]
    NonFiniteState(String),

    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("unknown system `{0}` (expected one of pendulum, cartpole, double_pendulum, linear, lorenz)")]
    UnknownSystem(String),

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("degenerate frame: norm of vector {index} is {norm:e}")]
    DegenerateFrame { index: usize, norm: f64 },

    #[error("trajectory blow-up at step {step}")]
    TrajectoryBlowUp { step: usize },

    #[error("singular mass matrix at state {0}")]
    SingularMassMatrix(String),

    #[error("config line {line}: {reason}")]
    Config { line: usize, reason: String },

    #[error("invalid reward spec: {0}")]
    RewardSpec(String),

    #[error("invalid grid spec: {0}")]
    GridSpec(String),

    #[error("{context}: {message}")]
    Io { context: String, message: String },
}

impl Error {
    pub(crate) fn io(context: impl Into<String>, err: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            message: err.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
