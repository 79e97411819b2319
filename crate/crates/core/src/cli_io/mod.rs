//! Configuration loading, CLI subcommands, and CSV serialization.

pub mod commands;
pub mod config;
pub mod csv;

pub use commands::{run_command, Command};
pub use config::{load_config, RunConfiguration, TrajectoryOptions};
pub use csv::{write_csv, write_csv_with_comment, CsvCell, CsvTable};
