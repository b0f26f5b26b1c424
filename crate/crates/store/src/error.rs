use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = StoreError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("i/o failure at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("path `{0}` escapes its module directory")]
    PathEscape(String),
    #[error("invalid module name `{0}`")]
    InvalidModuleName(String),
    #[error("no manifest.json under {0}")]
    MissingManifest(PathBuf),
    #[error("manifest lists module `{0}` but its directory is missing")]
    MissingModuleDirectory(String),
    #[error("module `{0}` listed more than once in the manifest")]
    DuplicateModule(String),
    #[error("module `{0}` is not present in this URDD")]
    MissingDependencyModule(String),
    #[error("digest mismatch for module `{module}`: manifest {expected}, on disk {actual}")]
    DigestMismatch {
        module: String,
        expected: String,
        actual: String,
    },
    #[error("URDD format version {found} is not compatible with {supported}")]
    IncompatibleFormatVersion { found: String, supported: String },
    #[error("module `{module}` version {found} is not compatible with {supported}")]
    IncompatibleModuleVersion {
        module: String,
        found: String,
        supported: String,
    },
    #[error("malformed document {path}: {message}")]
    Malformed { path: PathBuf, message: String },
    #[error("value not representable in canonical JSON: {0}")]
    Unrepresentable(String),
}

impl StoreError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        StoreError::Io {
            path: path.into(),
            source,
        }
    }
}
