//! Experiment runner for the trifree protocols: configurable sweeps,
//! Monte-Carlo estimates of success rate and cost, log-log fits, CSV output.

pub mod config;
pub mod fit;
pub mod report;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, GridCell, ProtocolId};
pub use fit::{fit_scaling, Fit, FitError};
pub use runner::{run_experiment, Axis, CellSummary, ExperimentResult, RunError, TrialRecord};
