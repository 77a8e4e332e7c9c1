use thiserror::Error;

/// Harness-level failures, mapped onto process exit codes by the CLI.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("partial failure: {failed} of {total} trials hit numerical errors")]
    PartialFailure { failed: usize, total: usize },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error(transparent)]
    Core(#[from] nogaps_core::CoreError),
    #[error("serialization failed: {0}")]
    Serde(#[from] serde_json::Error),
}

impl HarnessError {
    /// 0 success, 1 config error, 2 partial failure, 3 io error.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::ConfigInvalid(_) | HarnessError::DegenerateGrid(_) => 1,
            HarnessError::PartialFailure { .. } => 2,
            HarnessError::Io { .. } => 3,
            HarnessError::Core(_) => 1,
            HarnessError::Serde(_) => 3,
        }
    }

    pub fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
