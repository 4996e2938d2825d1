use std::path::{Path, PathBuf};

use glycoshift::analysis::AnalysisError;
use glycoshift::config::ConfigError;
use glycoshift::dataset::Dialect;
use glycoshift::features::UnknownFeatureName;
use glycoshift::model::checkpoint::CheckpointError;
use glycoshift::model::ModelError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("no such directory: {}", .0.display())]
    MissingPath(PathBuf),
    #[error("data was prepared for dialect {found:?}, not {expected}")]
    DialectMismatch { expected: Dialect, found: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Format(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Feature(#[from] UnknownFeatureName),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub fn category(&self) -> &'static str {
        match self {
            CliError::Usage(_) | CliError::Feature(_) => "usage",
            CliError::MissingPath(_) => "missing-path",
            CliError::DialectMismatch { .. } => "dialect-mismatch",
            CliError::Io { .. } => "io",
            CliError::Format(_) => "format",
            CliError::Config(_) => "config",
            CliError::Model(_) => "model",
            CliError::Checkpoint(_) => "checkpoint",
            CliError::Analysis(_) => "analysis",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Feature(_) | CliError::Config(_) => 2,
            _ => 1,
        }
    }
}
