//! Benchmark orchestration: configs, the experiment runner, reports and
//! plots.

pub mod config;
pub mod demo;
pub mod experiment;
pub mod plot;
pub mod report;

pub use config::{Experiment, ExperimentConfig, OUT_DIR_ENV};
pub use experiment::{run_experiment, ExperimentOutput};
pub use report::{report_pareto, ReportOutput};
