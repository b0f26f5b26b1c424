use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::Serialize;
use serde_json::Value;

use crate::canonical::{sha256_hex, value_to_canonical_json};
use crate::error::{Result, StoreError};
use crate::manifest::{
    check_relative_path, is_valid_module_name, ManifestExtensions, ModuleRecord, UrddManifest,
    FORMAT_VERSION, MANIFEST_JSON, MANIFEST_YAML, MODULE_JSON, MODULE_YAML,
};
use crate::schema::ModuleId;

/// A file to place inside a module directory.
#[derive(Debug, Clone)]
pub struct ModuleFile {
    pub relative_path: String,
    pub bytes: Vec<u8>,
}

impl ModuleFile {
    pub fn new(relative_path: impl Into<String>, bytes: Vec<u8>) -> Self {
        ModuleFile {
            relative_path: relative_path.into(),
            bytes,
        }
    }
}

/// Single writer for one URDD root.
///
/// Modules live in disjoint directories, so `write_module` may be called
/// from several threads; the manifest is written once by [`commit`].
///
/// [`commit`]: UrddWriter::commit
#[derive(Debug)]
pub struct UrddWriter {
    root: PathBuf,
    robot_name: String,
    records: Mutex<BTreeMap<String, ModuleRecord>>,
    extensions: Mutex<Option<ManifestExtensions>>,
}

impl UrddWriter {
    /// Start a new URDD at `root`, creating the directory if needed.
    pub fn create(root: impl AsRef<Path>, robot_name: impl Into<String>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        fs::create_dir_all(&root).map_err(|e| StoreError::io(&root, e))?;
        Ok(UrddWriter {
            root,
            robot_name: robot_name.into(),
            records: Mutex::new(BTreeMap::new()),
            extensions: Mutex::new(None),
        })
    }

    /// Reopen an existing URDD to add or replace modules.
    pub fn open(root: impl AsRef<Path>) -> Result<Self> {
        let root = root.as_ref().to_path_buf();
        let manifest = read_manifest(&root)?;
        let records = manifest
            .modules
            .into_iter()
            .map(|r| (r.module_name.clone(), r))
            .collect();
        Ok(UrddWriter {
            root,
            robot_name: manifest.robot_name,
            records: Mutex::new(records),
            extensions: Mutex::new(manifest.extensions),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn set_extensions(&self, extensions: ManifestExtensions) {
        *self.extensions.lock().expect("writer lock poisoned") = Some(extensions);
    }

    /// Write `<root>/<module_name>/module.{json,yaml}` plus any extra files.
    ///
    /// An existing directory for the module is replaced.
    pub fn write_module<T: Serialize + ?Sized>(
        &self,
        module_name: &str,
        payload: &T,
        files: &[ModuleFile],
    ) -> Result<ModuleRecord> {
        if !is_valid_module_name(module_name) {
            return Err(StoreError::InvalidModuleName(module_name.to_string()));
        }
        for f in files {
            check_relative_path(&f.relative_path)?;
            if f.relative_path == MODULE_JSON || f.relative_path == MODULE_YAML {
                return Err(StoreError::PathEscape(f.relative_path.clone()));
            }
        }
        let value = serde_json::to_value(payload)
            .map_err(|e| StoreError::Unrepresentable(e.to_string()))?;
        let json = value_to_canonical_json(&value)?;
        let yaml = yaml_mirror(&value)?;

        let dir = self.root.join(module_name);
        if dir.exists() {
            fs::remove_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        }
        fs::create_dir_all(&dir).map_err(|e| StoreError::io(&dir, e))?;
        write_file(&dir.join(MODULE_JSON), json.as_bytes())?;
        write_file(&dir.join(MODULE_YAML), yaml.as_bytes())?;
        let mut names = vec![MODULE_JSON.to_string(), MODULE_YAML.to_string()];
        for f in files {
            let path = dir.join(&f.relative_path);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| StoreError::io(parent, e))?;
            }
            write_file(&path, &f.bytes)?;
            names.push(f.relative_path.clone());
        }
        names.sort();
        names.dedup();

        let version = ModuleId::from_name(module_name)
            .map(|m| m.version())
            .unwrap_or("1.0.0");
        let record = ModuleRecord {
            module_name: module_name.to_string(),
            module_version: version.to_string(),
            files: names,
            content_digest: sha256_hex(json.as_bytes()),
        };
        self.records
            .lock()
            .expect("writer lock poisoned")
            .insert(module_name.to_string(), record.clone());
        Ok(record)
    }

    /// Write the manifest (JSON + YAML mirror) listing every module written.
    pub fn commit(&self, created_at: &str) -> Result<UrddManifest> {
        let manifest = UrddManifest {
            robot_name: self.robot_name.clone(),
            urdd_format_version: FORMAT_VERSION.to_string(),
            created_at: created_at.to_string(),
            modules: self
                .records
                .lock()
                .expect("writer lock poisoned")
                .values()
                .cloned()
                .collect(),
            extensions: self.extensions.lock().expect("writer lock poisoned").clone(),
        };
        let value = serde_json::to_value(&manifest)
            .map_err(|e| StoreError::Unrepresentable(e.to_string()))?;
        write_file(
            &self.root.join(MANIFEST_JSON),
            value_to_canonical_json(&value)?.as_bytes(),
        )?;
        write_file(&self.root.join(MANIFEST_YAML), yaml_mirror(&value)?.as_bytes())?;
        Ok(manifest)
    }
}

pub(crate) fn read_manifest(root: &Path) -> Result<UrddManifest> {
    let path = root.join(MANIFEST_JSON);
    if !path.is_file() {
        return Err(StoreError::MissingManifest(root.to_path_buf()));
    }
    let text = fs::read_to_string(&path).map_err(|e| StoreError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| StoreError::Malformed {
        path,
        message: e.to_string(),
    })
}

/// YAML rendering of a JSON tree; always generated from the canonical value.
pub fn yaml_mirror(value: &Value) -> Result<String> {
    serde_yaml::to_string(value).map_err(|e| StoreError::Unrepresentable(e.to_string()))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| StoreError::io(path, e))
}
