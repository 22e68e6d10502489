//! Truncated Lyapunov spectra of controlled dynamical systems and the
//! rewards built from them.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases below fix the scalar to `f64`, which is what the learner, the
//! experiments and the command-line tool use.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod dynamics;
pub mod env;
pub mod error;
pub mod landscape;
pub mod linalg;
pub mod lyapunov;
pub mod rewards;
pub mod scalar;
pub mod trajectory;

pub use config::Config;
pub use dynamics::{make_system, ControlInput, Integrator, Overrides, StateVector, SystemKind, SystemModel};
pub use error::{Error, Result};
pub use lyapunov::{
    gram_schmidt, spectrum_batch, truncated_spectrum, truncated_spectrum_observed, ControlSource, FeedbackPolicy,
    OrthonormalFrame, SpectrumControl, SpectrumSettings, TruncatedSpectrum,
};
pub use rewards::{label_trajectory, maxle, quadratic, sparse, suple, RewardKind, RewardSpec};
pub use scalar::Scalar;
pub use trajectory::{ResetMode, Trajectory, TrajectoryMeta, Transition};

pub type System = SystemModel<f64>;
pub type State = StateVector<f64>;
pub type Action = ControlInput<f64>;
pub type Spectrum = TruncatedSpectrum<f64>;
pub type Reward = RewardSpec<f64>;
pub type Grid = landscape::LandscapeGrid<f64>;
pub type Env = env::Environment<f64>;
pub type Matrix = linalg::Matrix<f64>;
