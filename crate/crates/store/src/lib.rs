//! On-disk URDD format: manifest, modules, canonical JSON, loading and validation.
//!
//! A URDD is a directory holding a root `manifest.json` (with a YAML mirror)
//! and one subdirectory per module:
//!
//! ```text
//! <root>/manifest.json
//! <root>/manifest.yaml
//! <root>/<module_name>/module.json
//! <root>/<module_name>/module.yaml
//! <root>/<mesh module>/meshes/<link>[/<piece>].{obj,stl,glb}
//! ```
//!
//! JSON is canonical (sorted keys, 17-significant-digit floats); YAML files
//! are regenerated from it. Every module carries a version tag and a SHA-256
//! digest of its `module.json` in the manifest. All paths are relative, so a
//! URDD can be moved or copied freely.

mod canonical;
mod error;
mod loader;
mod manifest;
pub mod schema;
mod validate;
mod writer;

pub use canonical::{format_f64, sha256_hex, to_canonical_json, value_to_canonical_json};
pub use error::{Result, StoreError};
pub use loader::{module_digest, LoadMode, Urdd};
pub use manifest::{
    check_relative_path, is_valid_module_name, ManifestExtensions, ModuleRecord, SourceRef,
    UrddManifest, FORMAT_VERSION, MANIFEST_JSON, MANIFEST_YAML, MODULE_JSON, MODULE_YAML,
};
pub use schema::{dependency_closure, ModuleId, ModulePayload};
pub use validate::{validate_urdd, Finding, Severity, ValidationReport};
pub use writer::{yaml_mirror, ModuleFile, UrddWriter};

/// Percent-encode a link name into a single safe path component.
///
/// Bytes outside `[A-Za-z0-9_.-]` become `%XX`, so distinct names never
/// collide and names containing `/` (as produced by composition prefixes)
/// stay one directory level deep. A leading `.` is also escaped.
pub fn file_stem_for(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for (i, b) in name.bytes().enumerate() {
        let safe = b.is_ascii_alphanumeric() || b == b'_' || b == b'-' || (b == b'.' && i > 0);
        if safe {
            out.push(b as char);
        } else {
            out.push_str(&format!("%{b:02X}"));
        }
    }
    out
}
