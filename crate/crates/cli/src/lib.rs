//! Command-line front end for `kautz_core`.
//!
//! Every command renders a complete document into memory before anything
//! is printed, so output is all-or-nothing. Exit codes are listed on
//! [`ExitStatus`].

pub mod args;
pub mod commands;
pub mod doc;
pub mod error;

pub use args::Cli;
pub use commands::{caps, run, Outcome};
pub use error::{CliError, ExitStatus};
