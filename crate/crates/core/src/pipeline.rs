//! End-to-end conversion of a robot description into a URDD directory.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use urdd_fk::FkModel;
use urdd_store::schema::{
    ConvexDecompositionModule, ConvexHullModule, ConvexMeshEntry, DecompositionParams, LinkDecompositionEntry,
    LinkHullEntry, LinkShapeEntry, LinkShapesModule, MeshFiles, OriginalGeometry, OriginalLinkMeshes,
    OriginalMeshesModule, SkipOverride, UrdfSource,
};
use urdd_store::{
    dependency_closure, file_stem_for, validate_urdd, ManifestExtensions, ModuleFile, ModuleId, Severity,
    UrddManifest, UrddWriter, MANIFEST_JSON,
};

use crate::error::{Error, Result};
use crate::geometry::{
    derive_link_geometry, write_glb, write_obj, write_stl, AssetResolver, ConvexHull, LinkGeometry, MeshResolver,
    ShapeOptions, TriMesh,
};
use crate::kinematics::{derive_bounds, derive_chain, derive_connections, derive_dof_map};
use crate::model::{parse_urdf, RobotModel};
use crate::proximity::{derive_distance_stats, derive_skips, SamplingParams};

/// Environment variable naming an asset root tried after the URDF's own
/// directory.
pub const ASSET_ROOT_ENV: &str = "URDD_ASSET_ROOT";

#[derive(Debug, Clone)]
#[derive(Default)]
pub struct ConvertOptions {
    /// Modules to generate; `None` means all. Dependencies are added.
    pub modules: Option<Vec<ModuleId>>,
    pub decomposition: DecompositionParams,
    pub sampling: SamplingParams,
    /// Also export GLB next to OBJ and STL.
    pub glb: bool,
    /// Fixed `created_at` (seconds since the Unix epoch) for reproducible output.
    pub epoch: Option<i64>,
    pub keep_partial: bool,
    pub overrides: Vec<SkipOverride>,
    /// Asset roots tried in order; empty means the URDF directory followed
    /// by `URDD_ASSET_ROOT` when set.
    pub asset_roots: Vec<PathBuf>,
}


/// What a successful conversion produced.
#[derive(Debug, Clone)]
pub struct ConvertReport {
    pub out: PathBuf,
    pub modules: Vec<ModuleId>,
    /// `(added, required_by)` for every module enabled as a dependency.
    pub auto_added: Vec<(ModuleId, ModuleId)>,
    /// Wall time per stage, in execution order.
    pub timings: Vec<(String, Duration)>,
    pub manifest: UrddManifest,
}

impl ConvertReport {
    pub fn total_time(&self) -> Duration {
        self.timings.iter().map(|(_, d)| *d).sum()
    }

    pub fn timing_table(&self) -> String {
        let width = self.timings.iter().map(|(n, _)| n.len()).max().unwrap_or(5).max(5);
        let mut out = format!("{:<width$}  {:>10}\n", "stage", "seconds");
        for (name, d) in &self.timings {
            out.push_str(&format!("{name:<width$}  {:>10.3}\n", d.as_secs_f64()));
        }
        out.push_str(&format!("{:<width$}  {:>10.3}\n", "total", self.total_time().as_secs_f64()));
        out
    }

    pub fn dependency_notices(&self) -> Vec<String> {
        self.auto_added
            .iter()
            .map(|(added, by)| format!("note: enabling {} (required by {})", added.name(), by.name()))
            .collect()
    }
}

fn asset_roots_for(urdf_path: &Path, options: &ConvertOptions) -> Vec<PathBuf> {
    if !options.asset_roots.is_empty() {
        return options.asset_roots.clone();
    }
    let mut roots = vec![urdf_path.parent().map(Path::to_path_buf).unwrap_or_default()];
    if let Some(env) = std::env::var_os(ASSET_ROOT_ENV).filter(|v| !v.is_empty()) {
        roots.push(PathBuf::from(env));
    }
    roots
}

/// Convert the URDF at `urdf_path` into a URDD at `out`.
pub fn convert_file(urdf_path: &Path, out: &Path, options: &ConvertOptions) -> Result<ConvertReport> {
    let start = Instant::now();
    let bytes = fs::read(urdf_path).map_err(|e| Error::io(urdf_path, e))?;
    let xml = String::from_utf8(bytes)
        .map_err(|_| Error::InvalidInput(format!("{} is not valid UTF-8", urdf_path.display())))?;
    let roots = asset_roots_for(urdf_path, options);
    let resolver = AssetResolver::with_roots(roots.clone());
    let model = parse_urdf(&xml, roots.first().map(PathBuf::as_path).unwrap_or(Path::new(".")))?;

    let mut seen = BTreeSet::new();
    let referenced_mesh_bytes = model
        .mesh_filenames()
        .into_iter()
        .map(|f| resolver.locate(f))
        .filter(|p| seen.insert(p.clone()))
        .filter_map(|p| fs::metadata(p).ok())
        .map(|m| m.len())
        .sum();
    let source = UrdfSource {
        file_name: urdf_path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default(),
        byte_size: xml.len() as u64,
        referenced_mesh_bytes,
    };
    let parse_time = start.elapsed();
    let mut report = convert_model(&model, Some(source), &resolver, out, options, None)?;
    report.timings.insert(0, ("parse".into(), parse_time));
    Ok(report)
}

/// Derive and write every selected module for an already-built model.
///
/// An existing URDD at `out` is replaced; any other non-empty directory is
/// refused. On failure the output is removed unless `keep_partial` is set.
pub fn convert_model(
    model: &RobotModel,
    source: Option<UrdfSource>,
    resolver: &dyn MeshResolver,
    out: &Path,
    options: &ConvertOptions,
    extensions: Option<ManifestExtensions>,
) -> Result<ConvertReport> {
    prepare_output(out)?;
    let result = write_all(model, source, resolver, out, options, extensions);
    if result.is_err() && !options.keep_partial {
        let _ = fs::remove_dir_all(out);
    }
    result
}

fn prepare_output(out: &Path) -> Result<()> {
    if !out.exists() {
        return Ok(());
    }
    if !out.is_dir() {
        return Err(Error::InvalidInput(format!("{} exists and is not a directory", out.display())));
    }
    let mut entries = fs::read_dir(out).map_err(|e| Error::io(out, e))?;
    if entries.next().is_none() {
        return Ok(());
    }
    if !out.join(MANIFEST_JSON).is_file() {
        return Err(Error::InvalidInput(format!(
            "{} is not empty and does not hold a URDD; refusing to overwrite",
            out.display()
        )));
    }
    fs::remove_dir_all(out).map_err(|e| Error::io(out, e))
}

/// RFC 3339 timestamp for `created_at`.
pub fn timestamp(epoch: Option<i64>) -> String {
    let t = match epoch {
        Some(secs) => DateTime::<Utc>::from_timestamp(secs, 0).unwrap_or_default(),
        None => Utc::now(),
    };
    t.to_rfc3339_opts(SecondsFormat::Secs, true)
}

struct Stages {
    timings: Vec<(String, Duration)>,
}

impl Stages {
    fn run<T>(&mut self, name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
        let t = Instant::now();
        let v = f()?;
        self.timings.push((name.to_string(), t.elapsed()));
        Ok(v)
    }
}

fn write_all(
    model: &RobotModel,
    source: Option<UrdfSource>,
    resolver: &dyn MeshResolver,
    out: &Path,
    options: &ConvertOptions,
    extensions: Option<ManifestExtensions>,
) -> Result<ConvertReport> {
    let requested = options.modules.clone().unwrap_or_else(|| ModuleId::ALL.to_vec());
    let (modules, auto_added) = dependency_closure(&requested);
    let has = |m: ModuleId| modules.contains(&m);
    let writer = UrddWriter::create(out, model.name())?;
    if let Some(ext) = extensions {
        writer.set_extensions(ext);
    }
    let mut st = Stages { timings: Vec::new() };
    let glb = options.glb;

    st.run(ModuleId::Urdf.name(), || {
        writer.write_module(ModuleId::Urdf.name(), &model.to_urdf_module(source), &[])?;
        Ok(())
    })?;
    let dof = derive_dof_map(model);
    let chain = derive_chain(model);
    if has(ModuleId::Dof) {
        st.run(ModuleId::Dof.name(), || Ok(writer.write_module(ModuleId::Dof.name(), &dof, &[])?))?;
    }
    if has(ModuleId::Chain) {
        st.run(ModuleId::Chain.name(), || Ok(writer.write_module(ModuleId::Chain.name(), &chain, &[])?))?;
    }
    if has(ModuleId::Connections) {
        st.run(ModuleId::Connections.name(), || {
            Ok(writer.write_module(ModuleId::Connections.name(), &derive_connections(model), &[])?)
        })?;
    }
    let bounds = if has(ModuleId::Bounds) {
        Some(st.run(ModuleId::Bounds.name(), || {
            let b = derive_bounds(model, &dof)?;
            writer.write_module(ModuleId::Bounds.name(), &b, &[])?;
            Ok(b)
        })?)
    } else {
        None
    };

    if has(ModuleId::OriginalMeshes) {
        let shape_options = ShapeOptions {
            convex_shapes: has(ModuleId::ConvexHullMeshes),
            decomposition: has(ModuleId::ConvexDecompositionMeshes).then_some(options.decomposition),
        };
        let geometry = st.run("link geometry", || Ok(derive_link_geometry(model, resolver, shape_options)?))?;
        st.run(ModuleId::OriginalMeshes.name(), || {
            let (payload, files) = original_meshes(&geometry, glb);
            Ok(writer.write_module(ModuleId::OriginalMeshes.name(), &payload, &files)?)
        })?;
        if has(ModuleId::ConvexHullMeshes) {
            st.run(ModuleId::ConvexHullMeshes.name(), || {
                let (payload, files) = hull_meshes(&geometry, glb);
                Ok(writer.write_module(ModuleId::ConvexHullMeshes.name(), &payload, &files)?)
            })?;
        }
        if has(ModuleId::ConvexDecompositionMeshes) {
            st.run(ModuleId::ConvexDecompositionMeshes.name(), || {
                let (payload, files) = decomposition_meshes(&geometry, options.decomposition, glb);
                Ok(writer.write_module(ModuleId::ConvexDecompositionMeshes.name(), &payload, &files)?)
            })?;
        }
        if has(ModuleId::LinkShapesApproximations) {
            st.run(ModuleId::LinkShapesApproximations.name(), || {
                Ok(writer.write_module(ModuleId::LinkShapesApproximations.name(), &link_shapes(&geometry), &[])?)
            })?;
        }
        if has(ModuleId::LinkShapesDistanceStatistics) {
            let bounds = bounds.as_ref().expect("bounds is a dependency");
            let stats = st.run(ModuleId::LinkShapesDistanceStatistics.name(), || {
                let urdf = model.to_urdf_module(None);
                let fk = FkModel::from_modules(&urdf, &dof, &chain, None)?;
                let stats = derive_distance_stats(&fk, bounds, &geometry, options.sampling)?;
                writer.write_module(ModuleId::LinkShapesDistanceStatistics.name(), &stats, &[])?;
                Ok(stats)
            })?;
            if has(ModuleId::LinkShapesSkips) {
                st.run(ModuleId::LinkShapesSkips.name(), || {
                    let skips = derive_skips(&stats, &chain, &options.overrides);
                    let files = overrides_file(&options.overrides)?;
                    Ok(writer.write_module(ModuleId::LinkShapesSkips.name(), &skips, &files)?)
                })?;
            }
        }
    }

    let manifest = writer.commit(&timestamp(options.epoch))?;
    st.run("validate", || check_valid(out))?;
    Ok(ConvertReport {
        out: out.to_path_buf(),
        modules,
        auto_added,
        timings: st.timings,
        manifest,
    })
}

/// Fail with `Error::Validation` if the URDD has error findings.
pub fn check_valid(root: &Path) -> Result<()> {
    let report = validate_urdd(root);
    if report.has_errors() {
        return Err(Error::Validation(
            report
                .findings
                .iter()
                .filter(|f| f.severity == Severity::Error)
                .map(ToString::to_string)
                .collect(),
        ));
    }
    Ok(())
}

/// OBJ and STL (and optionally GLB) exports of `mesh` at `<base>.<ext>`.
fn export(mesh: &TriMesh, base: &str, glb: bool, files: &mut Vec<ModuleFile>) -> MeshFiles {
    let obj = format!("{base}.obj");
    let stl = format!("{base}.stl");
    files.push(ModuleFile::new(&obj, write_obj(mesh).into_bytes()));
    files.push(ModuleFile::new(&stl, write_stl(mesh)));
    let glb = glb.then(|| {
        let path = format!("{base}.glb");
        files.push(ModuleFile::new(&path, write_glb(mesh)));
        path
    });
    MeshFiles { obj, stl, glb }
}

fn convex_entry(hull: &ConvexHull, base: &str, glb: bool, files: &mut Vec<ModuleFile>) -> ConvexMeshEntry {
    let mesh = hull.as_mesh(base);
    ConvexMeshEntry {
        files: export(&mesh, base, glb, files),
        vertex_count: hull.vertices.len(),
        triangle_count: hull.triangles.len(),
        volume: hull.volume,
        centroid: hull.centroid.coords.into(),
    }
}

fn original_meshes(geometry: &[LinkGeometry], glb: bool) -> (OriginalMeshesModule, Vec<ModuleFile>) {
    let mut files = Vec::new();
    let links = geometry
        .iter()
        .map(|g| {
            let stem = file_stem_for(&g.link);
            let geometries = g
                .originals
                .iter()
                .map(|o| OriginalGeometry {
                    index: o.index,
                    role: o.role,
                    role_index: o.role_index,
                    origin: o.origin,
                    source: o.mesh.source.clone(),
                    vertex_count: o.mesh.vertices.len(),
                    triangle_count: o.mesh.triangles.len(),
                    files: export(&o.mesh, &format!("meshes/{stem}/{}", o.index), glb, &mut files),
                })
                .collect();
            OriginalLinkMeshes {
                link: g.link.clone(),
                geometries,
            }
        })
        .collect();
    (OriginalMeshesModule { links }, files)
}

fn hull_meshes(geometry: &[LinkGeometry], glb: bool) -> (ConvexHullModule, Vec<ModuleFile>) {
    let mut files = Vec::new();
    let links = geometry
        .iter()
        .map(|g| {
            let hull = g.shapes.as_ref().map(|s| {
                let base = format!("meshes/{}", file_stem_for(&g.link));
                convex_entry(&s.hull, &base, glb, &mut files)
            });
            LinkHullEntry {
                link: g.link.clone(),
                no_geometry: hull.is_none(),
                hull,
            }
        })
        .collect();
    (ConvexHullModule { links }, files)
}

fn decomposition_meshes(
    geometry: &[LinkGeometry],
    params: DecompositionParams,
    glb: bool,
) -> (ConvexDecompositionModule, Vec<ModuleFile>) {
    let mut files = Vec::new();
    let links = geometry
        .iter()
        .map(|g| {
            let decomposition = g.shapes.as_ref().and_then(|s| s.decomposition.as_ref());
            let stem = file_stem_for(&g.link);
            let pieces = decomposition
                .map(|d| {
                    d.pieces
                        .iter()
                        .enumerate()
                        .map(|(i, p)| convex_entry(p, &format!("meshes/{stem}/{i}"), glb, &mut files))
                        .collect()
                })
                .unwrap_or_default();
            LinkDecompositionEntry {
                link: g.link.clone(),
                no_geometry: decomposition.is_none(),
                pieces,
                concavity_tolerance_used: decomposition.map(|d| d.concavity_tolerance_used),
                coverage_ratio: decomposition.and_then(|d| d.coverage_ratio),
            }
        })
        .collect();
    (ConvexDecompositionModule { params, links }, files)
}

fn link_shapes(geometry: &[LinkGeometry]) -> LinkShapesModule {
    let links = geometry
        .iter()
        .map(|g| match &g.shapes {
            None => LinkShapeEntry {
                link: g.link.clone(),
                no_geometry: true,
                obb: None,
                sphere: None,
                piece_obbs: Vec::new(),
                piece_spheres: Vec::new(),
            },
            Some(s) => LinkShapeEntry {
                link: g.link.clone(),
                no_geometry: false,
                obb: Some(s.obb.to_entry()),
                sphere: Some(s.sphere.to_entry()),
                piece_obbs: s.piece_obbs.iter().map(|o| o.to_entry()).collect(),
                piece_spheres: s.piece_spheres.iter().map(|p| p.to_entry()).collect(),
            },
        })
        .collect();
    LinkShapesModule { links }
}

/// Sizes and identity of a URDD, as shown by `info`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UrddInfo {
    pub robot_name: String,
    pub urdd_format_version: String,
    pub created_at: String,
    pub num_dofs: Option<usize>,
    pub num_links: Option<usize>,
    pub modules: Vec<ModuleVersion>,
    /// Bytes of every file in the directory.
    pub size_with_meshes: u64,
    /// Bytes excluding files under a module's `meshes/` directory.
    pub size_without_meshes: u64,
    /// Size of the URDF the URDD was converted from, when recorded.
    pub source_urdf_bytes: Option<u64>,
    pub composed_from: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModuleVersion {
    pub name: String,
    pub version: String,
}

pub fn urdd_info(root: &Path) -> Result<UrddInfo> {
    use urdd_store::schema::{DofMap, UrdfModule};
    use urdd_store::{LoadMode, Urdd};

    if !root.is_dir() {
        return Err(Error::InvalidInput(format!("{} is not a directory", root.display())));
    }
    let urdd = Urdd::load(root, LoadMode::Lenient)?;
    let urdf: Option<UrdfModule> = urdd.has_module(ModuleId::Urdf.name()).then(|| urdd.module()).transpose()?;
    let dof: Option<DofMap> = urdd.has_module(ModuleId::Dof.name()).then(|| urdd.module()).transpose()?;
    let manifest = urdd.manifest();
    let (mut with, mut without) = (0u64, 0u64);
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::InvalidInput(e.to_string()))?;
        if !entry.file_type().is_file() {
            continue;
        }
        let len = entry.metadata().map_err(|e| Error::InvalidInput(e.to_string()))?.len();
        with += len;
        let rel = entry.path().strip_prefix(root).unwrap_or(entry.path());
        let in_meshes = rel.components().nth(1).is_some_and(|c| c.as_os_str() == "meshes");
        if !in_meshes {
            without += len;
        }
    }
    Ok(UrddInfo {
        robot_name: manifest.robot_name.clone(),
        urdd_format_version: manifest.urdd_format_version.clone(),
        created_at: manifest.created_at.clone(),
        num_dofs: dof.map(|d| d.num_dofs),
        num_links: urdf.as_ref().map(|u| u.links.len()),
        modules: manifest
            .modules
            .iter()
            .map(|m| ModuleVersion {
                name: m.module_name.clone(),
                version: m.module_version.clone(),
            })
            .collect(),
        size_with_meshes: with,
        size_without_meshes: without,
        source_urdf_bytes: urdf.and_then(|u| u.source).map(|s| s.byte_size),
        composed_from: manifest
            .extensions
            .iter()
            .flat_map(|e| e.composed_from.iter().map(|s| s.robot_name.clone()))
            .collect(),
    })
}

/// File name of the user skip overrides, both as input and as recorded in
/// the skips module.
pub const OVERRIDES_FILE: &str = "skips_overrides.json";

/// The normalized overrides as a module file, when there are any.
fn overrides_file(overrides: &[SkipOverride]) -> Result<Vec<ModuleFile>> {
    if overrides.is_empty() {
        return Ok(Vec::new());
    }
    let normalized: Vec<SkipOverride> = overrides.iter().map(SkipOverride::normalized).collect();
    let json = urdd_store::to_canonical_json(&normalized)?;
    Ok(vec![ModuleFile::new(OVERRIDES_FILE, json.into_bytes())])
}

/// Read a `skips_overrides.json` file.
pub fn read_overrides(path: &Path) -> Result<Vec<SkipOverride>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    crate::proximity::parse_overrides(&text)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

/// Regenerate the skips module of an existing URDD with new overrides,
/// reusing its distance statistics. `created_at` is kept.
pub fn apply_overrides(root: &Path, overrides: &[SkipOverride]) -> Result<UrddManifest> {
    use urdd_store::schema::{ChainModule, DistanceStatsModule};
    use urdd_store::{LoadMode, Urdd};

    let urdd = Urdd::load(root, LoadMode::Strict)?;
    for m in [ModuleId::Chain, ModuleId::LinkShapesDistanceStatistics] {
        if !urdd.has_module(m.name()) {
            return Err(Error::MissingDependencyModule(m.name().into()));
        }
    }
    let stats: DistanceStatsModule = urdd.module()?;
    let chain: ChainModule = urdd.module()?;
    let links: BTreeSet<&str> = stats.links.iter().map(String::as_str).collect();
    for o in overrides {
        for l in [&o.link_a, &o.link_b] {
            if !links.contains(l.as_str()) {
                return Err(Error::InvalidInput(format!("override names unknown link `{l}`")));
            }
        }
    }
    let writer = UrddWriter::open(root)?;
    let skips = derive_skips(&stats, &chain, overrides);
    writer.write_module(ModuleId::LinkShapesSkips.name(), &skips, &overrides_file(overrides)?)?;
    let manifest = writer.commit(&urdd.manifest().created_at)?;
    check_valid(root)?;
    Ok(manifest)
}

/// Every `*.urdf` file below `root`, sorted.
pub fn discover_urdfs(root: &Path) -> Result<Vec<PathBuf>> {
    if !root.is_dir() {
        return Err(Error::InvalidInput(format!("{} is not a directory", root.display())));
    }
    let mut found = Vec::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| Error::InvalidInput(e.to_string()))?;
        let is_urdf = entry
            .path()
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("urdf"));
        if entry.file_type().is_file() && is_urdf {
            found.push(entry.into_path());
        }
    }
    Ok(found)
}

/// Result of converting one robot in a batch.
#[derive(Debug)]
pub struct BatchOutcome {
    pub urdf: PathBuf,
    pub out: PathBuf,
    pub result: Result<ConvertReport>,
}

/// Convert every URDF below `root` into `out_root/<relative path without
/// extension>`. Failures are collected, never propagated.
pub fn batch_convert(root: &Path, out_root: &Path, options: &ConvertOptions) -> Result<Vec<BatchOutcome>> {
    use rayon::prelude::*;

    let urdfs = discover_urdfs(root)?;
    Ok(urdfs
        .into_par_iter()
        .map(|urdf| {
            let rel = urdf.strip_prefix(root).unwrap_or(&urdf).with_extension("");
            let out = out_root.join(rel);
            let result = convert_file(&urdf, &out, options);
            BatchOutcome { urdf, out, result }
        })
        .collect())
}
