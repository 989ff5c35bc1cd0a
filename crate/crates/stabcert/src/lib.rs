//! File formats, reports and the command-line front end for `stabcert-core`.

pub mod cli;
pub mod csvout;
pub mod error;
pub mod report;
pub mod sweep;
pub mod sysfile;

pub use error::CliError;
