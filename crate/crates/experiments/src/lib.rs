//! Reward comparisons over several seeds: training every (reward, seed)
//! pair of a plan, aggregating the learning curves and writing a result tree
//! in which every file carries the build, config and seeds that produced it.

pub mod aggregate;
pub mod error;
pub mod plan;
pub mod provenance;
pub mod run;

pub use aggregate::{aggregate, Aggregate};
pub use error::{Error, Result};
pub use plan::ExperimentPlan;
pub use provenance::GIT_DESCRIBE;
pub use run::{run_comparison, run_comparison_in, ComparisonResult, RewardResult, RunRecord, RunSummary};
