//! Configuration parsing and experiment orchestration for the `abp` binary.

pub mod config;
pub mod experiment;
mod output;

pub use config::{parse_config, parse_config_str, ConfigError, RunConfig};
pub use experiment::{
    ground_truth_command, metrics_command, run_experiment, sweep_rays_command, verify_gap_command, CommandError,
    RunSummary, SweepRow,
};
pub use output::fmt_float;
