use thiserror::Error;
use urdd_store::StoreError;

#[derive(Debug, Error)]
pub enum FkError {
    #[error("configuration has {got} values, robot has {expected} DOFs")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("configuration value {index} is not finite")]
    NonFinite { index: usize },
    #[error("missing dependency module `{0}`")]
    MissingDependencyModule(String),
    #[error("unknown link `{0}`")]
    UnknownLink(String),
    #[error("inconsistent kinematic modules: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Store(StoreError),
}

impl From<StoreError> for FkError {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::MissingDependencyModule(m) => FkError::MissingDependencyModule(m),
            other => FkError::Store(other),
        }
    }
}
