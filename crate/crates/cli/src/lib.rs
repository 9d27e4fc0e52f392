//! Config-driven experiment runner.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{ConfigError, ExperimentConfig};
pub use experiments::{run_experiment, ExperimentError, ReportBundle, Table, CATALOG};
pub use report::{emit_report, Summary};
