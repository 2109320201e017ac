//! Command line front end: configuration files, CSV output, SVG plots.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod plot;

pub use error::{CliError, Result};
