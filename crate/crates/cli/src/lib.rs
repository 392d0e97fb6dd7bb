//! Configuration, command dispatch and deterministic output for the
//! `spinbath` binary.

pub mod app;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use app::{execute, Cli};
pub use error::{CliError, Result};
