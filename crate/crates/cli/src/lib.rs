//! Command-line driver for the `marchenko` scattering library.

pub mod commands;
pub mod config;
pub mod error;
pub mod formats;

pub use commands::{run, Check, Report};
pub use config::{Mode, RunConfig};
pub use error::{exit, CliError};
