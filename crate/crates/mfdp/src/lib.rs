//! Command-line and file-format layer over `mfdp-core`: CSV/TSV p-value
//! input, `%.17g` CSV and JSON output, the parallel Monte Carlo driver and
//! the `mfdp` subcommands.

#![warn(missing_docs)]

pub mod analysis;
pub mod cli;
mod error;
pub mod format;
pub mod input;
pub mod montecarlo;
pub mod verify;

pub use error::CliError;
