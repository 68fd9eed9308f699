//! Experiment configuration, Monte Carlo runner, and statistical checks built
//! on `hermite_qv`.

pub mod config;
pub mod delta;
pub mod experiment;
pub mod limit;

pub use config::{ExperimentConfig, GridPoint, Model, OrderConfig};
pub use delta::{delta_method_check, delta_method_slope, DeltaFn};
pub use experiment::{run_experiment, McSummary, ReplicationRow};
pub use limit::{limit_law_check, LimitLawOptions, LimitLawReport};
