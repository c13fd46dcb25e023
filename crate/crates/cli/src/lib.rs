//! Command-line front end: CSV ingestion, model files and subcommands.

pub mod commands;
pub mod error;
pub mod ingest;
pub mod model_file;

pub use error::{CliError, ExitCode};
