//! Experiment harness: TOML configs, task-parallel execution with a resume
//! journal, and deterministic record files.

pub mod config;
pub mod experiments;
pub mod records;
pub mod runner;

pub use config::{ConfigError, ExperimentConfig, ExperimentKind, Sector};
pub use records::{Record, Summary};
pub use runner::{resolve_out_dir, run, RunOptions, RunSummary};
