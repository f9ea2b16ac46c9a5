//! Configuration, file formats and verification suites behind the
//! `loghardy` command-line tool.

pub mod config;
pub mod random;
pub mod runs;
pub mod suites;
pub mod table;

pub use config::RunConfig;

/// Errors surfaced by the command-line layer, each mapped to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] loghardy_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    /// Checks ran to completion but at least one failed.
    #[error("{0}")]
    ChecksFailed(String),
}

impl CliError {
    /// 1 for invalid input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        use loghardy_core::Error as E;
        match self {
            CliError::Config(_) | CliError::Io(_) | CliError::Csv(_) => 1,
            CliError::Core(E::InvalidParams(_) | E::Domain(_) | E::GridTooCoarse { .. }) => 1,
            CliError::Core(_) | CliError::ChecksFailed(_) => 2,
        }
    }
}
