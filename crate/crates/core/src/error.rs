use std::path::PathBuf;

use thiserror::Error;
use urdd_fk::FkError;
use urdd_store::StoreError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Problems with a robot description itself.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("malformed XML: {0}")]
    MalformedXml(String),
    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },
    #[error("joint `{joint}` references undeclared link `{link}`")]
    DanglingLinkReference { joint: String, link: String },
    #[error("kinematic loop: {0}")]
    KinematicLoop(String),
    #[error("multiple root links: {}", .0.join(", "))]
    MultipleRoots(Vec<String>),
    #[error("robot has no links")]
    NoLinks,
    #[error("mimic cycle through joint `{0}`")]
    MimicCycle(String),
    #[error("invalid mimic on joint `{joint}`: {reason}")]
    InvalidMimic { joint: String, reason: String },
    #[error("joint `{0}` requires a <limit> element")]
    MissingLimits(String),
    #[error("joint `{joint}` has lower limit {lower} > upper limit {upper}")]
    InvertedLimits { joint: String, lower: f64, upper: f64 },
    #[error("mesh file not found: {}", .0.display())]
    MissingMeshFile(PathBuf),
    #[error("invalid value in {context}: {message}")]
    InvalidValue { context: String, message: String },
}

/// Problems loading or processing geometry.
#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("unsupported mesh format: {}", .0.display())]
    UnsupportedFormat(PathBuf),
    #[error("corrupt mesh {}: {message}", .path.display())]
    CorruptMesh { path: PathBuf, message: String },
    #[error("degenerate geometry (affine rank {rank})")]
    DegenerateGeometry { rank: usize },
    #[error("empty geometry")]
    Empty,
    #[error("cannot read {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("link `{link}`: {source}")]
    Link {
        link: String,
        #[source]
        source: Box<GeometryError>,
    },
}

impl GeometryError {
    /// Unreadable, missing or malformed mesh files, as opposed to failures
    /// while deriving shapes from valid meshes.
    pub fn is_input_problem(&self) -> bool {
        match self {
            GeometryError::UnsupportedFormat(_) | GeometryError::CorruptMesh { .. } | GeometryError::Io { .. } => true,
            GeometryError::Link { source, .. } => source.is_input_problem(),
            _ => false,
        }
    }

    pub(crate) fn for_link(self, link: &str) -> GeometryError {
        GeometryError::Link {
            link: link.to_string(),
            source: Box::new(self),
        }
    }
}

/// How an error should be reported by a command-line front end.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Input,
    Derivation,
    Validation,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Input => 1,
            ErrorClass::Derivation => 2,
            ErrorClass::Validation => 3,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Fk(#[from] FkError),
    #[error("cannot read {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown attach link `{0}`")]
    UnknownAttachLink(String),
    #[error("name collision after prefixing: `{0}`")]
    NameCollision(String),
    #[error("illegal attachment joint: {0}")]
    IllegalJoint(String),
    #[error("missing dependency module `{0}`")]
    MissingDependencyModule(String),
    #[error("{0}")]
    InvalidInput(String),
    #[error("validation failed with {} finding(s)", .0.len())]
    Validation(Vec<String>),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Model(_)
            | Error::Io { .. }
            | Error::UnknownAttachLink(_)
            | Error::NameCollision(_)
            | Error::IllegalJoint(_)
            | Error::InvalidInput(_) => ErrorClass::Input,
            Error::Store(e) => match e {
                StoreError::MissingManifest(_)
                | StoreError::MissingModuleDirectory(_)
                | StoreError::DuplicateModule(_)
                | StoreError::DigestMismatch { .. }
                | StoreError::IncompatibleFormatVersion { .. }
                | StoreError::IncompatibleModuleVersion { .. }
                | StoreError::Malformed { .. } => ErrorClass::Input,
                _ => ErrorClass::Derivation,
            },
            Error::Geometry(g) if g.is_input_problem() => ErrorClass::Input,
            Error::Geometry(_) | Error::Fk(_) | Error::MissingDependencyModule(_) => {
                ErrorClass::Derivation
            }
            Error::Validation(_) => ErrorClass::Validation,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}
