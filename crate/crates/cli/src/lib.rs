//! File formats, configuration and command implementations of the
//! `steklov-trace` tool, plus the acceptance runs.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod io;

/// Command failures, each mapped to a process exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("solver failure: {0}")]
    Solver(steklov_core::Error),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Solver(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<steklov_core::Error> for CliError {
    fn from(e: steklov_core::Error) -> Self {
        use steklov_core::Error as E;
        match e {
            E::InvalidArgument(m) | E::InvalidMesh(m) => CliError::Config(m),
            other => CliError::Solver(other),
        }
    }
}
