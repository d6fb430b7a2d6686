//! Config-driven experiment runner for the `cuspforge` toolkit.
//!
//! Each subcommand runs one verification, writes its CSV/SVG artifacts to the output
//! directory, and ends with a [`ResultLine`].

mod commands;
pub mod config;
pub mod result;
pub mod run;

pub use config::{parse_config, Command, ConfigError, ConfigErrors, Overrides, RunConfig};
pub use result::{ResultLine, ResultParseError};
pub use run::{run, Report, EXIT_ERROR, EXIT_VERIFICATION_FAILED};
