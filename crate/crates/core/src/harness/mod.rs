//! Experiment configuration, execution and persistence.

pub mod acceptance;
pub mod config;
pub mod runner;

pub use config::{ExperimentConfig, ExperimentKind, OUT_ENV};
pub use runner::{resume, resume_file, results_csv, run_experiment, EstimandRecord, Manifest};
