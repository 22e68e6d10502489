//! Soft actor-critic written from scratch, trained on trajectories labelled
//! by any [`suple_core::RewardSpec`].
//!
//! Networks, optimizers and the training loop are generic over
//! [`suple_core::Scalar`]; the aliases fix `f64`.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adam;
pub mod checkpoint;
pub mod error;
pub mod features;
pub mod nn;
pub mod policy;
pub mod replay;
pub mod rollout;
pub mod sac;
pub mod train;

pub use checkpoint::{config_hash, load_checkpoint, save_checkpoint, Checkpoint};
pub use error::{Error, Result};
pub use nn::Mlp;
pub use policy::SquashedGaussian;
pub use replay::{Batch, ReplayBuffer};
pub use rollout::{collect_rollout, evaluate, EvalCurve, FINAL_WINDOW};
pub use sac::{Sac, SacSettings, UpdateStats};
pub use train::{eval_curve_csv, learning_curve_csv, train, CurvePoint, TrainConfig, TrainOutcome};

pub type Agent = Sac<f64>;
pub type Training = TrainConfig<f64>;
pub type Network = Mlp<f64>;
