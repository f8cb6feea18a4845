//! Index and posterior-sampling policies for normal multi-armed bandits with
//! unknown means and variances, a replicated regret simulator, closed-form
//! regret bounds, and numerical checks of the supporting probability bounds.

pub mod bounds;
pub mod error;
pub mod instance;
pub mod policy;
pub mod quad;
pub mod report;
pub mod rng;
pub mod sim;
pub mod stats;
pub mod verify;

pub use error::{Error, Result};
pub use instance::{pseudo_regret, summarize, BanditInstance, InstanceSummary};
pub use policy::{select, PolicySpec, PolicyState};
pub use sim::{run_experiment, run_experiment_with_threads, ExperimentConfig, RegretTrace};
pub use stats::ArmStatistics;

/// Library version.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
