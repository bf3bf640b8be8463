//! Experiment runner for discretization-map integrators: configs in, CSV reports out.

pub mod config;
pub mod error;
pub mod experiment;
pub mod presets;
pub mod registry;
pub mod suite;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, Report, ReportRow, RunOptions, CSV_HEADER};
pub use suite::{run_suite, SuiteReport};
