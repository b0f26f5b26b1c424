//! Consistency checking of a URDD directory.
//!
//! Findings are data: `validate_urdd` never fails, it reports.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use crate::canonical::sha256_hex;
use crate::manifest::{
    check_relative_path, major, UrddManifest, FORMAT_VERSION, MODULE_JSON, MODULE_YAML,
};
use crate::schema::geometry::{
    ConvexDecompositionModule, ConvexHullModule, LinkShapesModule, OriginalMeshesModule,
};
use crate::schema::kinematics::{BoundsModule, ChainModule, ConnectionsModule, DofMap};
use crate::schema::proximity::{DistanceStatsModule, SkipsModule};
use crate::schema::urdf::UrdfModule;
use crate::schema::{ModuleId, ModulePayload};
use crate::writer::read_manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    /// Module the finding concerns, if any.
    pub module: Option<String>,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match &self.module {
            Some(m) => write!(f, "{sev} [{m}]: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.findings.is_empty()
    }

    pub fn has_errors(&self) -> bool {
        self.findings.iter().any(|f| f.severity == Severity::Error)
    }

    fn error(&mut self, module: Option<&str>, message: impl Into<String>) {
        self.findings.push(Finding {
            severity: Severity::Error,
            module: module.map(str::to_string),
            message: message.into(),
        });
    }
}

/// Check schema, digests, mirrors, mesh references and cross-module
/// agreement. An empty report means the URDD is fully consistent.
pub fn validate_urdd(root: impl AsRef<Path>) -> ValidationReport {
    let root = root.as_ref();
    let mut report = ValidationReport::default();
    let manifest = match read_manifest(root) {
        Ok(m) => m,
        Err(e) => {
            report.error(None, e.to_string());
            return report;
        }
    };
    if major(&manifest.urdd_format_version) != major(FORMAT_VERSION) {
        report.error(
            None,
            format!(
                "format version {} incompatible with {FORMAT_VERSION}",
                manifest.urdd_format_version
            ),
        );
    }

    let mut seen = HashSet::new();
    for record in &manifest.modules {
        let name = record.module_name.as_str();
        if !seen.insert(name) {
            report.error(Some(name), "module listed more than once");
            continue;
        }
        if check_relative_path(name).is_err() {
            report.error(Some(name), "module name is not a plain relative path");
            continue;
        }
        let dir = root.join(name);
        if !dir.is_dir() {
            report.error(Some(name), "module directory missing");
            continue;
        }
        for f in &record.files {
            if check_relative_path(f).is_err() {
                report.error(Some(name), format!("file path escapes module: {f}"));
            } else if !dir.join(f).is_file() {
                report.error(Some(name), format!("dangling mesh reference: {name}/{f}"));
            }
        }
        check_module_files(root, &manifest, name, &mut report);
    }

    let ctx = Context::load(root, &manifest, &mut report);
    ctx.cross_check(root, &mut report);
    report
}

fn check_module_files(root: &Path, manifest: &UrddManifest, name: &str, report: &mut ValidationReport) {
    let record = manifest.module(name).expect("caller looked it up");
    let json_path = root.join(name).join(MODULE_JSON);
    let bytes = match fs::read(&json_path) {
        Ok(b) => b,
        Err(e) => {
            report.error(Some(name), format!("cannot read module.json: {e}"));
            return;
        }
    };
    let digest = sha256_hex(&bytes);
    if digest != record.content_digest {
        report.error(
            Some(name),
            format!("digest mismatch: manifest {} ≠ on disk {digest}", record.content_digest),
        );
    }
    if let Some(id) = ModuleId::from_name(name) {
        if major(&record.module_version) != major(id.version()) {
            report.error(
                Some(name),
                format!("module version {} incompatible with {}", record.module_version, id.version()),
            );
        }
    }
    let json: Value = match serde_json::from_slice(&bytes) {
        Ok(v) => v,
        Err(e) => {
            report.error(Some(name), format!("module.json is not valid JSON: {e}"));
            return;
        }
    };
    let yaml_path = root.join(name).join(MODULE_YAML);
    match fs::read_to_string(&yaml_path) {
        Ok(text) => match serde_yaml::from_str::<Value>(&text) {
            Ok(yaml) if yaml == json => {}
            Ok(_) => report.error(Some(name), "module.yaml does not mirror module.json"),
            Err(e) => report.error(Some(name), format!("module.yaml unreadable: {e}")),
        },
        Err(_) => report.error(Some(name), "module.yaml missing"),
    }
}

/// Typed payloads of the known modules that are present and parse.
#[derive(Default)]
struct Context {
    urdf: Option<UrdfModule>,
    dof: Option<DofMap>,
    chain: Option<ChainModule>,
    connections: Option<ConnectionsModule>,
    bounds: Option<BoundsModule>,
    originals: Option<OriginalMeshesModule>,
    hulls: Option<ConvexHullModule>,
    decomposition: Option<ConvexDecompositionModule>,
    shapes: Option<LinkShapesModule>,
    stats: Option<DistanceStatsModule>,
    skips: Option<SkipsModule>,
}

fn load_typed<T: ModulePayload + DeserializeOwned>(
    root: &Path,
    manifest: &UrddManifest,
    report: &mut ValidationReport,
) -> Option<T> {
    manifest.module(T::NAME)?;
    let path = root.join(T::NAME).join(MODULE_JSON);
    let text = fs::read_to_string(path).ok()?;
    match serde_json::from_str(&text) {
        Ok(v) => Some(v),
        Err(e) => {
            report.error(Some(T::NAME), format!("schema violation: {e}"));
            None
        }
    }
}

impl Context {
    fn load(root: &Path, manifest: &UrddManifest, report: &mut ValidationReport) -> Context {
        Context {
            urdf: load_typed(root, manifest, report),
            dof: load_typed(root, manifest, report),
            chain: load_typed(root, manifest, report),
            connections: load_typed(root, manifest, report),
            bounds: load_typed(root, manifest, report),
            originals: load_typed(root, manifest, report),
            hulls: load_typed(root, manifest, report),
            decomposition: load_typed(root, manifest, report),
            shapes: load_typed(root, manifest, report),
            stats: load_typed(root, manifest, report),
            skips: load_typed(root, manifest, report),
        }
    }

    fn cross_check(&self, root: &Path, report: &mut ValidationReport) {
        let links: Option<Vec<String>> = self
            .urdf
            .as_ref()
            .map(|u| u.links.iter().map(|l| l.name.clone()).collect());
        let link_set: Option<BTreeSet<&str>> =
            links.as_ref().map(|l| l.iter().map(String::as_str).collect());

        if let Some(dof) = &self.dof {
            let m = Some(DofMap::NAME);
            if dof.dof_to_joint.len() != dof.num_dofs {
                report.error(
                    m,
                    format!("dof_to_joint length {} ≠ num_dofs {}", dof.dof_to_joint.len(), dof.num_dofs),
                );
            }
            for (i, entry) in dof.dof_to_joint.iter().enumerate() {
                let back = dof.joint_to_dofs.get(&entry.joint);
                if !back.is_some_and(|v| v.contains(&i)) {
                    report.error(m, format!("dof {i} not listed under joint {}", entry.joint));
                }
            }
            for (joint, dofs) in &dof.joint_to_dofs {
                for &d in dofs {
                    if dof.dof_to_joint.get(d).map(|e| &e.joint) != Some(joint) {
                        report.error(m, format!("joint_to_dofs[{joint}] lists dof {d} of another joint"));
                    }
                }
            }
            if let Some(urdf) = &self.urdf {
                let names: Vec<&str> = urdf.joints.iter().map(|j| j.name.as_str()).collect();
                let listed: Vec<&str> = dof.joint_names.iter().map(String::as_str).collect();
                if names != listed {
                    report.error(m, "joint order disagrees with urdf_module");
                }
            }
        }

        if let (Some(dof), Some(bounds)) = (&self.dof, &self.bounds) {
            if bounds.bounds.len() != dof.num_dofs {
                report.error(
                    Some(BoundsModule::NAME),
                    format!("bounds length {} ≠ num_dofs {}", bounds.bounds.len(), dof.num_dofs),
                );
            }
        }
        if let Some(bounds) = &self.bounds {
            for (i, b) in bounds.bounds.iter().enumerate() {
                if b.dof_index != i {
                    report.error(Some(BoundsModule::NAME), format!("entry {i} has dof_index {}", b.dof_index));
                }
                if let (Some(lo), Some(hi)) = (b.lower, b.upper) {
                    if lo > hi {
                        report.error(Some(BoundsModule::NAME), format!("dof {i}: lower {lo} > upper {hi}"));
                    }
                }
            }
        }

        if let (Some(chain), Some(set)) = (&self.chain, &link_set) {
            let chain_links: BTreeSet<&str> = chain.nodes.iter().map(|n| n.link_name.as_str()).collect();
            if chain.nodes.len() != set.len() || &chain_links != set {
                report.error(Some(ChainModule::NAME), "chain nodes do not match urdf_module links");
            }
            let mut placed = HashSet::new();
            for node in &chain.nodes {
                if let Some(p) = &node.parent_link {
                    if !placed.contains(p.as_str()) {
                        report.error(
                            Some(ChainModule::NAME),
                            format!("{} appears before its parent {p}", node.link_name),
                        );
                    }
                }
                placed.insert(node.link_name.as_str());
            }
        }

        if let (Some(conn), Some(links)) = (&self.connections, &links) {
            let n = links.len();
            if conn.paths.len() != n * n {
                report.error(
                    Some(ConnectionsModule::NAME),
                    format!("{} paths ≠ {n}² link pairs", conn.paths.len()),
                );
            }
            if &conn.links != links {
                report.error(Some(ConnectionsModule::NAME), "link list disagrees with urdf_module");
            }
            for p in &conn.paths {
                if p.link_sequence.len() != p.joint_sequence.len() + 1 {
                    report.error(
                        Some(ConnectionsModule::NAME),
                        format!("path {}→{} has inconsistent lengths", p.from_link, p.to_link),
                    );
                }
            }
        }

        // Mesh references inside payloads.
        let mut refs: Vec<(&str, &str)> = Vec::new();
        if let Some(o) = &self.originals {
            for l in &o.links {
                for g in &l.geometries {
                    refs.extend(g.files.iter().map(|f| (OriginalMeshesModule::NAME, f)));
                }
            }
        }
        if let Some(h) = &self.hulls {
            for l in &h.links {
                if let Some(hull) = &l.hull {
                    refs.extend(hull.files.iter().map(|f| (ConvexHullModule::NAME, f)));
                }
                if l.no_geometry == l.hull.is_some() {
                    report.error(Some(ConvexHullModule::NAME), format!("{}: no_geometry flag disagrees with hull", l.link));
                }
            }
        }
        if let Some(d) = &self.decomposition {
            for l in &d.links {
                for p in &l.pieces {
                    refs.extend(p.files.iter().map(|f| (ConvexDecompositionModule::NAME, f)));
                }
                if !l.no_geometry && l.pieces.is_empty() {
                    report.error(Some(ConvexDecompositionModule::NAME), format!("{}: empty decomposition", l.link));
                }
            }
        }
        for (module, f) in refs {
            if check_relative_path(f).is_err() {
                report.error(Some(module), format!("mesh path escapes module: {f}"));
            } else if !root.join(module).join(f).is_file() {
                report.error(Some(module), format!("dangling mesh reference: {module}/{f}"));
            }
        }

        if let Some(set) = &link_set {
            let mut check_links = |module: &str, names: Vec<&str>| {
                let got: BTreeSet<&str> = names.iter().copied().collect();
                if names.len() != set.len() || &got != set {
                    report.error(Some(module), "per-link entries do not match urdf_module links");
                }
            };
            if let Some(o) = &self.originals {
                check_links(OriginalMeshesModule::NAME, o.links.iter().map(|l| l.link.as_str()).collect());
            }
            if let Some(h) = &self.hulls {
                check_links(ConvexHullModule::NAME, h.links.iter().map(|l| l.link.as_str()).collect());
            }
            if let Some(d) = &self.decomposition {
                check_links(ConvexDecompositionModule::NAME, d.links.iter().map(|l| l.link.as_str()).collect());
            }
            if let Some(s) = &self.shapes {
                check_links(LinkShapesModule::NAME, s.links.iter().map(|l| l.link.as_str()).collect());
            }
            if let Some(s) = &self.stats {
                check_links(DistanceStatsModule::NAME, s.links.iter().map(String::as_str).collect());
            }
        }

        if let (Some(shapes), Some(decomp)) = (&self.shapes, &self.decomposition) {
            for (s, d) in shapes.links.iter().zip(&decomp.links) {
                if s.link == d.link && s.piece_obbs.len() != d.pieces.len() {
                    report.error(
                        Some(LinkShapesModule::NAME),
                        format!("{}: {} piece boxes for {} pieces", s.link, s.piece_obbs.len(), d.pieces.len()),
                    );
                }
            }
        }

        if let Some(stats) = &self.stats {
            let m = Some(DistanceStatsModule::NAME);
            let geo: BTreeSet<&str> = stats.geometry_links.iter().map(String::as_str).collect();
            let k = geo.len();
            for table in &stats.tables {
                if table.pairs.len() != k * k.saturating_sub(1) / 2 {
                    report.error(m, format!("{:?} table has {} pairs for {k} links", table.shape_type, table.pairs.len()));
                }
                for p in &table.pairs {
                    if !(p.min <= p.mean && p.mean <= p.max && p.min >= 0.0) {
                        report.error(m, format!("{}–{}: min/mean/max out of order", p.link_a, p.link_b));
                    }
                    if p.sample_count != stats.samples {
                        report.error(m, format!("{}–{}: {} samples ≠ {}", p.link_a, p.link_b, p.sample_count, stats.samples));
                    }
                    if !geo.contains(p.link_a.as_str()) || !geo.contains(p.link_b.as_str()) {
                        report.error(m, format!("{}–{}: pair involves a link without geometry", p.link_a, p.link_b));
                    }
                }
            }
        }

        if let Some(skips) = &self.skips {
            let m = Some(SkipsModule::NAME);
            for matrix in &skips.matrices {
                let n = matrix.links.len();
                if let Some(links) = &links {
                    if &matrix.links != links {
                        report.error(m, format!("{:?} matrix links disagree with urdf_module", matrix.shape_type));
                    }
                }
                if matrix.skips.len() != n || matrix.skips.iter().any(|r| r.len() != n) {
                    report.error(m, format!("{:?} matrix is not {n}×{n}", matrix.shape_type));
                    continue;
                }
                for i in 0..n {
                    if !matrix.skips[i][i] {
                        report.error(m, format!("{:?} diagonal entry {i} is false", matrix.shape_type));
                    }
                    for j in (i + 1)..n {
                        if matrix.skips[i][j] != matrix.skips[j][i] {
                            report.error(m, format!("{:?} matrix asymmetric at ({i},{j})", matrix.shape_type));
                        }
                        let has_reason = matrix.reason(&matrix.links[i], &matrix.links[j]).is_some();
                        if matrix.skips[i][j] != has_reason {
                            report.error(
                                m,
                                format!(
                                    "{:?} pair {}–{}: skip flag and reason disagree",
                                    matrix.shape_type, matrix.links[i], matrix.links[j]
                                ),
                            );
                        }
                    }
                }
            }
        }
    }
}
