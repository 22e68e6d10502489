use crate::dynamics::{ControlInput, StateVector};
use crate::error::Error;
use std::fmt;
use std::str::FromStr;

/// How episodes choose their initial state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum ResetMode {
    /// Always the stable rest state (pendulum hanging down).
    #[default]
    FixedStart,
    /// Uniform over the system's reset box.
    RandomStart,
}

impl ResetMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ResetMode::FixedStart => "fixed_start",
            ResetMode::RandomStart => "random_start",
        }
    }
}

impl fmt::Display for ResetMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ResetMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "fixed_start" => Ok(ResetMode::FixedStart),
            "random_start" => Ok(ResetMode::RandomStart),
            other => Err(Error::InvalidParameter {
                key: "reset_mode".into(),
                reason: format!("expected fixed_start or random_start, got `{other}`"),
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transition<F> {
    pub state: StateVector<F>,
    pub action: ControlInput<F>,
    pub reward: F,
    pub next_state: StateVector<F>,
    pub done: bool,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrajectoryMeta {
    pub seed: u64,
    pub reward_kind: String,
    pub reset_mode: ResetMode,
    pub policy_version: u64,
}

/// One episode. Within an episode `next_state` of step `t` is the `state`
/// of step `t + 1`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory<F> {
    pub transitions: Vec<Transition<F>>,
    pub meta: TrajectoryMeta,
}

impl<F: Clone + PartialEq> Trajectory<F> {
    pub fn new(meta: TrajectoryMeta) -> Self {
        Self {
            transitions: Vec::new(),
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.transitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transitions.is_empty()
    }

    pub fn states(&self) -> Vec<StateVector<F>> {
        self.transitions.iter().map(|t| t.state.clone()).collect()
    }

    pub fn rewards(&self) -> Vec<F> {
        self.transitions.iter().map(|t| t.reward.clone()).collect()
    }

    /// Checks the chaining invariant.
    pub fn is_chained(&self) -> bool {
        self.transitions.windows(2).all(|w| w[0].next_state == w[1].state)
    }
}
