use std::path::{Component, Path};

use serde::{Deserialize, Serialize};

use crate::error::{Result, StoreError};

pub const FORMAT_VERSION: &str = "1.0.0";
pub const MANIFEST_JSON: &str = "manifest.json";
pub const MANIFEST_YAML: &str = "manifest.yaml";
pub const MODULE_JSON: &str = "module.json";
pub const MODULE_YAML: &str = "module.yaml";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleRecord {
    pub module_name: String,
    pub module_version: String,
    /// Paths relative to the module directory, sorted.
    pub files: Vec<String>,
    /// Hex SHA-256 of the module's canonical `module.json`.
    pub content_digest: String,
}

/// Provenance of a composite URDD. Not part of the core format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRef {
    pub robot_name: String,
    pub manifest_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ManifestExtensions {
    #[serde(default)]
    pub composed_from: Vec<SourceRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrddManifest {
    pub robot_name: String,
    pub urdd_format_version: String,
    pub created_at: String,
    /// Sorted by module name.
    pub modules: Vec<ModuleRecord>,
    #[serde(default)]
    pub extensions: Option<ManifestExtensions>,
}

impl UrddManifest {
    pub fn module(&self, name: &str) -> Option<&ModuleRecord> {
        self.modules.iter().find(|m| m.module_name == name)
    }
}

/// Major component of a `MAJOR.MINOR.PATCH` string.
pub(crate) fn major(version: &str) -> Option<u64> {
    let mut parts = version.split('.');
    let major = parts.next()?.parse().ok()?;
    let rest: Vec<_> = parts.collect();
    if rest.len() != 2 || rest.iter().any(|p| p.parse::<u64>().is_err()) {
        return None;
    }
    Some(major)
}

pub fn is_valid_module_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// Reject absolute paths, `..`, and anything that is not a plain relative path.
pub fn check_relative_path(path: &str) -> Result<()> {
    let p = Path::new(path);
    let ok = !path.is_empty()
        && !path.contains('\\')
        && p.components().all(|c| matches!(c, Component::Normal(_)));
    if ok {
        Ok(())
    } else {
        Err(StoreError::PathEscape(path.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relative_path_rules() {
        assert!(check_relative_path("meshes/base.obj").is_ok());
        assert!(check_relative_path("meshes/a%2Fb/0.obj").is_ok());
        assert!(check_relative_path("../evil.obj").is_err());
        assert!(check_relative_path("meshes/../../evil.obj").is_err());
        assert!(check_relative_path("/etc/passwd").is_err());
        assert!(check_relative_path("./x.obj").is_err());
        assert!(check_relative_path("").is_err());
    }

    #[test]
    fn semver_major() {
        assert_eq!(major("1.2.3"), Some(1));
        assert_eq!(major("2.0"), None);
        assert_eq!(major("x.0.0"), None);
    }
}
