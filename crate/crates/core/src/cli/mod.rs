//! Configuration-driven front end: `mesojj <command> --config <path> [--out <dir>]`.

pub mod config;
pub mod output;
pub mod plot;
mod run;

pub use config::{parse_config, RunConfig};
pub use run::{run, Command, ReportBundle, ReportFile, SWEEP_HEADERS};
