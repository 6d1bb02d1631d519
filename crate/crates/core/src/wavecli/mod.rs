//! Command-line front end: configuration, presets, runs, comparisons and
//! the invariant suite.

pub mod check;
pub mod compare;
pub mod config;
pub mod presets;
pub mod runner;

pub use check::{check, check_with, CheckLevel, CheckOps, CheckReport};
pub use compare::compare;
pub use config::{parse_config, parse_unresolved, RunConfig};
pub use presets::ScenarioPreset;
pub use runner::{run, ExitStatus, RunReport, RunSummary, OUTPUT_ENV};
