//! Front end for `selfsim`: config parsing, the four commands, CSV output.
//!
//! Each command computes all of its tables in memory and only then writes
//! them, so a failed run leaves no output behind.

pub mod config;
mod run;

pub use config::{parse_config, Command, ConfigError, ProblemInput, RunConfig};
pub use run::{read_diffusion_table, run, run_file, CliError, Output};
