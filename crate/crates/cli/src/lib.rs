//! Command-line front end for `tate-diffusion`: run configuration, the six
//! commands, and their JSON/CSV artifacts.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt::Display;
use std::io;

use thiserror::Error;

pub use commands::{cmd_heat, cmd_invert, cmd_simulate, cmd_skeleton, cmd_spectrum, cmd_verify, InvertOptions};
pub use config::{CommonArgs, Format, InitialCondition, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CliError {
    /// 1 for usage and I/O problems, 2 for verification or match failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Verification(_) => 2,
        }
    }
}

pub(crate) fn usage(e: impl Display) -> CliError {
    CliError::Usage(e.to_string())
}

pub(crate) fn internal(e: impl Display) -> CliError {
    CliError::Verification(e.to_string())
}
