use std::path::PathBuf;

use harvest_core::HarvestError;
use thiserror::Error;

/// Exit status for configuration problems (sysexits `EX_USAGE`/`EX_DATAERR` family).
pub const EXIT_CONFIG: u8 = 64;
/// Exit status for I/O and numerical failures.
pub const EXIT_IO: u8 = 1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),

    #[error("cannot parse config {path}: {source}")]
    ConfigParse { path: PathBuf, source: serde_json::Error },

    #[error("{0}")]
    Model(#[from] HarvestError),

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },

    #[error("serialization failed: {0}")]
    Serialize(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::ConfigParse { .. } => EXIT_CONFIG,
            CliError::Model(
                HarvestError::InvalidParameter { .. }
                | HarvestError::HistoryLength { .. }
                | HarvestError::NoEquilibrium { .. },
            ) => EXIT_CONFIG,
            CliError::Model(_) => EXIT_IO,
            CliError::Io { .. } | CliError::Serialize(_) => EXIT_IO,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
