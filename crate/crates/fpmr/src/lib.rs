//! Experiment configs, runners, output files and the command-line front end
//! for the Fokker-Planck magnetic resonance engine in `fpmr-core`.

// `!(x > 0.0)` rejects NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod system;

pub use config::{load_config, ExperimentConfig};
pub use error::Error;
pub use output::{emit_outputs, Table};
pub use runner::{run_experiment, run_with, RunOptions, RunReport, RunResult};
