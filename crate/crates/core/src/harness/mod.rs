//! Experiment harness: config files, repeated runs, parameter sweeps, CSV
//! output and the command-line front end.

pub mod cli;
pub mod config;
pub mod experiment;
pub mod output;
pub mod probe;
pub mod sweep;

pub use config::{CheckConfig, ExperimentConfig, ObjectiveConfig, ProbeConfig, SweepAxes};
pub use experiment::{run_experiment, ExperimentOutcome, ExperimentSummary, RunRecord};
pub use sweep::{run_sweep, SweepCell, SweepSpec, SweepTable};
