//! Experiment harness for `shiftlab-core`: configs, scenario generators, the
//! trial runner and report files. The `shiftlab` binary is a thin CLI on top.

pub mod budget;
pub mod config;
pub mod experiment;
pub mod report;
pub mod scenario;

pub use config::{ConfigError, ExperimentConfig, Mode};
pub use experiment::{forster_verdict, run_experiment};
pub use report::Report;
