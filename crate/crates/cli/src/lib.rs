//! Batch front end of the laboratory: one subcommand per experiment,
//! layered configuration, and report emission.
//!
//! Exit codes: 0 when every gate passed, 2 when a gate failed (the metric
//! is named on stdout), 1 on a runtime error and 64 on a usage error.

pub mod args;
pub mod config;
pub mod error;
pub mod run;

pub use args::{parse_cli, Cli};
pub use config::{Command, RunConfig};
pub use error::CliError;
pub use run::{emit, execute, Emitted};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_GATE: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
