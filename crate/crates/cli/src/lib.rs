//! Scenario runner behind the `hocbf` binary: config loading, the `run`,
//! `compare` and `degree` subcommands, and trajectory output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{
    cmd_compare, cmd_degree, cmd_run, compare, degree, execute, BarrierKind, CompareManifest, CompareReport,
    DegreeManifest, Format, Model, ModeReport, Outcome, RunManifest,
};
pub use config::{parse, resolve, ConfigError, ScenarioSource};
pub use output::{read_csv, rows, write_csv, TrajectoryRow, COLUMNS};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "HOCBF_OUT_DIR";
