//! Command-line plumbing: experiment files, the five commands, and the
//! fixed acceptance suites.
//!
//! Every CSV written here starts with `# key = value` lines holding the
//! resolved configuration and seed, and every JSON file carries the same
//! information in its `config`/`params` fields.

mod commands;
mod config;
mod suites;

pub use commands::{exit_code, run_diagnose, run_levy, run_limit, run_simulate, RunOutcome};
pub use config::{
    DiagnoseSection, ExperimentConfig, LevySection, LimitSection, SimulateSection, Tolerances,
};
pub use suites::{run_reproduce, Check, Suite, SuiteReport, DEFAULT_SEED};
