//! File formats and command implementations for the `nosestretch` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod mesh;
pub mod report;

pub use commands::{run, Output};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
