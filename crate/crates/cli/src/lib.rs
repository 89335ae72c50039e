//! Config files, CSV writers, run manifests and subcommand drivers for the
//! `rabi-sense` binary.

pub mod commands;
pub mod config;
pub mod manifest;
pub mod output;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("{0}")]
    Usage(String),

    #[error("i/o: {0}")]
    Io(String),

    #[error(transparent)]
    Core(#[from] rabi_sense::Error),

    #[error("{failed} of {total} sweep points failed")]
    PartialSweep { failed: usize, total: usize },
}

impl CliError {
    /// 1 for rejected input, 2 for numerical failure.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Usage(_) | CliError::Io(_) => 1,
            CliError::Core(e) if e.is_input_error() => 1,
            CliError::Core(_) | CliError::PartialSweep { .. } => 2,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.to_string())
    }
}
