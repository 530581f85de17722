//! File formats, the interactive oracle, CSV logs and the command line for
//! `netal-core`.

pub mod cli;
pub mod error;
pub mod io;
pub mod log;
pub mod oracle;

pub use error::{CliError, InputError};
