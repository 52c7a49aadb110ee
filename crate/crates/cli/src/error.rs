use std::path::PathBuf;

use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("no reference solution at {0} and reference computation is disabled")]
    NoReference(PathBuf),
    #[error("{0}")]
    Core(#[from] recon_core::error::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Config(_) => "config",
            Self::NoReference(_) => "no_reference",
            Self::Core(_) => "computation",
            Self::Io { .. } => "io",
            Self::Csv(_) => "csv",
            Self::Json(_) => "json",
        }
    }

    /// One-line JSON object with the error kind and message.
    pub fn to_json_line(&self) -> String {
        let message = self.to_string().split_whitespace().collect::<Vec<_>>().join(" ");
        json!({"error": self.kind(), "message": message}).to_string()
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
