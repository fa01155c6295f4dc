use std::path::{Path, PathBuf};

use holstein_core::{Category, Error};
use serde_json::json;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{0}")]
    Refused(String),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path, e: csv::Error) -> Self {
        let source = match e.into_kind() {
            csv::ErrorKind::Io(io) => io,
            other => std::io::Error::other(format!("{other:?}")),
        };
        Self::io(path, source)
    }

    pub fn category(&self) -> Category {
        match self {
            CliError::Core(e) => e.category(),
            CliError::Io { .. } | CliError::Refused(_) => Category::Io,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.category().exit_code()
    }

    /// Machine-readable form printed on stderr.
    pub fn to_json(&self) -> serde_json::Value {
        let issues: Vec<_> = match self {
            CliError::Core(Error::Validation(v)) => v
                .iter()
                .map(|i| json!({ "field": i.field, "message": i.message }))
                .collect(),
            _ => Vec::new(),
        };
        let mut out = json!({
            "category": self.category().as_str(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if !issues.is_empty() {
            out["issues"] = issues.into();
        }
        if let CliError::Core(Error::Integrator { time, .. }) = self {
            out["time"] = json!(time);
        }
        out
    }
}
