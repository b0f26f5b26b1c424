use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::canonical::sha256_hex;
use crate::error::{Result, StoreError};
use crate::manifest::{check_relative_path, major, UrddManifest, FORMAT_VERSION, MODULE_JSON};
use crate::schema::{ModuleId, ModulePayload};
use crate::writer::read_manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadMode {
    /// Verify every module digest and module version.
    Strict,
    #[default]
    Lenient,
}

/// A loaded URDD. Module payloads are read from disk on access.
#[derive(Debug, Clone)]
pub struct Urdd {
    root: PathBuf,
    manifest: UrddManifest,
    unknown_modules: Vec<String>,
}

impl Urdd {
    pub fn load(root: impl AsRef<Path>, mode: LoadMode) -> Result<Urdd> {
        let root = root.as_ref().to_path_buf();
        let manifest = read_manifest(&root)?;

        let supported = major(FORMAT_VERSION).expect("FORMAT_VERSION is semver");
        if major(&manifest.urdd_format_version) != Some(supported) {
            return Err(StoreError::IncompatibleFormatVersion {
                found: manifest.urdd_format_version.clone(),
                supported: FORMAT_VERSION.to_string(),
            });
        }

        let mut seen = HashSet::new();
        let mut unknown_modules = Vec::new();
        for record in &manifest.modules {
            if !seen.insert(record.module_name.as_str()) {
                return Err(StoreError::DuplicateModule(record.module_name.clone()));
            }
            check_relative_path(&record.module_name)?;
            for f in &record.files {
                check_relative_path(f)?;
            }
            if !root.join(&record.module_name).is_dir() {
                return Err(StoreError::MissingModuleDirectory(record.module_name.clone()));
            }
            let known = ModuleId::from_name(&record.module_name);
            if known.is_none() {
                unknown_modules.push(record.module_name.clone());
            }
            if mode == LoadMode::Strict {
                if let Some(id) = known {
                    if major(&record.module_version) != major(id.version()) {
                        return Err(StoreError::IncompatibleModuleVersion {
                            module: record.module_name.clone(),
                            found: record.module_version.clone(),
                            supported: id.version().to_string(),
                        });
                    }
                }
                let actual = module_digest(&root, &record.module_name)?;
                if actual != record.content_digest {
                    return Err(StoreError::DigestMismatch {
                        module: record.module_name.clone(),
                        expected: record.content_digest.clone(),
                        actual,
                    });
                }
            }
        }

        Ok(Urdd {
            root,
            manifest,
            unknown_modules,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn manifest(&self) -> &UrddManifest {
        &self.manifest
    }

    pub fn robot_name(&self) -> &str {
        &self.manifest.robot_name
    }

    /// Modules listed in the manifest that this version does not define.
    pub fn unknown_modules(&self) -> &[String] {
        &self.unknown_modules
    }

    pub fn has_module(&self, name: &str) -> bool {
        self.manifest.module(name).is_some()
    }

    pub fn module_dir(&self, name: &str) -> PathBuf {
        self.root.join(name)
    }

    /// Read and deserialize a typed module payload.
    pub fn module<T: ModulePayload>(&self) -> Result<T> {
        let path = self.module_json_path(T::NAME)?;
        let text = fs::read_to_string(&path).map_err(|e| StoreError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| StoreError::Malformed {
            path,
            message: e.to_string(),
        })
    }

    /// Untyped access, for modules this version does not know.
    pub fn module_value(&self, name: &str) -> Result<Value> {
        let path = self.module_json_path(name)?;
        let text = fs::read_to_string(&path).map_err(|e| StoreError::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| StoreError::Malformed {
            path,
            message: e.to_string(),
        })
    }

    fn module_json_path(&self, name: &str) -> Result<PathBuf> {
        if !self.has_module(name) {
            return Err(StoreError::MissingDependencyModule(name.to_string()));
        }
        Ok(self.root.join(name).join(MODULE_JSON))
    }
}

/// Recompute a module's digest from its `module.json` on disk.
pub fn module_digest(root: &Path, module_name: &str) -> Result<String> {
    let path = root.join(module_name).join(MODULE_JSON);
    let bytes = fs::read(&path).map_err(|e| StoreError::io(&path, e))?;
    Ok(sha256_hex(&bytes))
}
