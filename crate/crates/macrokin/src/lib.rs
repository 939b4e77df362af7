//! Command-line front end for `macrokin-core`: run configuration, output
//! formats, parallel ensembles and the verification suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod parallel;
pub mod registry;
pub mod verify;

pub use error::CliError;
