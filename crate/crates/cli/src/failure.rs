use suple_core::Error as CoreError;
use suple_experiments::Error as ExpError;
use suple_learn::Error as LearnError;

/// A failed command, split by exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Runtime(String),
}

pub type Outcome<T = ()> = Result<T, Failure>;

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Dimension { .. }
            | CoreError::UnknownSystem(_)
            | CoreError::InvalidParameter { .. }
            | CoreError::Config { .. }
            | CoreError::RewardSpec(_)
            | CoreError::GridSpec(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<LearnError> for Failure {
    fn from(e: LearnError) -> Self {
        match e {
            LearnError::Core(c) => c.into(),
            LearnError::Setting { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<ExpError> for Failure {
    fn from(e: ExpError) -> Self {
        match e {
            ExpError::Core(c) => c.into(),
            ExpError::Learn(l) => l.into(),
            ExpError::Plan { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

pub fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

pub fn runtime(msg: impl Into<String>) -> Failure {
    Failure::Runtime(msg.into())
}
