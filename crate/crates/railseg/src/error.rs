use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Format {
        path: PathBuf,
        #[source]
        source: railseg_core::Error,
    },
    #[error(transparent)]
    Core(#[from] railseg_core::Error),
    #[error("{path}: invalid JSON: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid manifest: {0}")]
    Manifest(String),
    #[error("unknown scan `{0}`")]
    UnknownScan(String),
    #[error("scan `{scan_id}` has no {what}")]
    Missing { scan_id: String, what: &'static str },
    #[error("missing prediction files for {} candidate scan(s): {}", .0.len(), .0.join(", "))]
    MissingPredictions(Vec<String>),
    #[error("labels of TEST scan `{0}` are reserved for evaluation")]
    TestIsolation(String),
    #[error("scan `{scan_id}`: cannot move from {from} to {to}")]
    Transition {
        scan_id: String,
        from: String,
        to: String,
    },
    #[error("manifest is locked by another process ({0}); remove the lock file if that process is gone")]
    Locked(PathBuf),
    #[error("{0}")]
    NotFound(String),
    #[error("png: {0}")]
    Png(String),
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, source: railseg_core::Error) -> Self {
        Error::Format {
            path: path.into(),
            source,
        }
    }

    /// Stable machine-readable category.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::Format { .. } | Error::Core(_) => "data",
            Error::Json { .. } => "json",
            Error::Manifest(_) => "manifest",
            Error::UnknownScan(_) => "unknown_scan",
            Error::Missing { .. } => "missing",
            Error::MissingPredictions(_) => "missing_predictions",
            Error::TestIsolation(_) => "test_isolation",
            Error::Transition { .. } => "transition",
            Error::Locked(_) => "locked",
            Error::NotFound(_) => "not_found",
            Error::Png(_) => "png",
            Error::Invalid(_) => "invalid",
        }
    }

    pub fn report(&self) -> ErrorReport {
        let details = match self {
            Error::MissingPredictions(ids) => ids.clone(),
            _ => Vec::new(),
        };
        ErrorReport {
            kind: self.kind().to_string(),
            message: self.to_string(),
            details,
        }
    }
}

/// JSON shape of a failure, shared by the CLI and the HTTP service.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub details: Vec<String>,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
