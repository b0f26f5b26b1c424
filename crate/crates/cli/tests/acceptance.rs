//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Every check compares against an oracle written here,
//! independently of the code under test.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::f64::consts::PI;
use std::fs;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use nalgebra::{Matrix3, Matrix4, Point3, Rotation3, Unit, UnitQuaternion, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;
use urdd_core::composer::{combine, Attachment};
use urdd_core::fixtures;
use urdd_core::geometry::primitives::box_mesh;
use urdd_core::geometry::{
    convex_decomposition, convex_hull, convex_hull_mesh, fit_obb, min_enclosing_sphere, AssetResolver, ConvexHull,
    TriMesh,
};
use urdd_core::kinematics::{derive_chain, derive_connections, derive_dof_map};
use urdd_core::pipeline::{convert_file, convert_model, urdd_info, ConvertOptions};
use urdd_core::proximity::{convex_distance, SamplingParams};
use urdd_core::{parse_urdf, RobotModel};
use urdd_fk::{FkModel, RigidTransform};
use urdd_store::schema::{
    ChainModule, DecompositionParams, DistanceStatsModule, DofMap, JointSpec, JointType, LinkSpec,
    OriginalMeshesModule, PassThrough, Pose, ShapeType, SkipOverride, SkipReason, SkipsModule, UrdfModule,
};
use urdd_store::{validate_urdd, LoadMode, Urdd};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

struct Criterion {
    name: &'static str,
    limit: Option<Duration>,
    run: fn(&Workspace) -> Outcome,
}

/// Scratch space shared by the criteria.
struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }
}

fn main() -> ExitCode {
    let criteria = [
        Criterion { name: "DOF and link counts of the five reference trees", limit: secs(1), run: dof_counts },
        Criterion { name: "FK matches brute-force oracle on 1000 random cases", limit: secs(10), run: fk_oracle },
        Criterion { name: "FK runs from a pre-generated URDD without the parser", limit: None, run: fk_isolation },
        Criterion { name: "Connections equal BFS paths on trees up to 60 links", limit: secs(5), run: connections_oracle },
        Criterion { name: "Geometry containment, cube bounds and L-prism coverage", limit: secs(60), run: geometry_suite },
        Criterion { name: "Proximity statistics, skip matrices and SAT agreement", limit: secs(60), run: proximity_suite },
        Criterion { name: "Byte-identical conversion and relocation invariance", limit: secs(30), run: determinism },
        Criterion { name: "Composition DOFs, FK identity and validation", limit: secs(60), run: composition },
        Criterion { name: "35-link, ~10k-triangle robot converts fully", limit: secs(120), run: conversion_timing },
        Criterion { name: "URDD sizes exceed URDF, meshes add size", limit: None, run: size_accounting },
    ];
    let workspace = Workspace {
        dir: TempDir::new().expect("temp dir"),
    };
    // Panics are reported as failures, not printed as backtraces.
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = panic::catch_unwind(AssertUnwindSafe(|| (c.run)(&workspace)))
            .unwrap_or_else(|p| Err(format!("panicked: {}", panic_message(&p))));
        let elapsed = start.elapsed();
        let result = match (result, c.limit) {
            (Ok(_), Some(limit)) if elapsed > limit => {
                Err(format!("took {:.2} s, limit {} s", elapsed.as_secs_f64(), limit.as_secs()))
            }
            (r, _) => r,
        };
        let limit = c.limit.map_or(String::new(), |l| format!(" / {} s", l.as_secs()));
        let timing = format!("{:.2} s{limit}", elapsed.as_secs_f64());
        match result {
            Ok(detail) => println!("PASS [{:>2}] {} ({timing}): {detail}", i + 1, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {} ({timing}): {why}", i + 1, c.name);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn secs(s: u64) -> Option<Duration> {
    Some(Duration::from_secs(s))
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "unknown panic".into())
}

fn err<E: std::fmt::Display>(context: &str) -> impl Fn(E) -> String + '_ {
    move |e| format!("{context}: {e}")
}

// ---------------------------------------------------------------------------
// Shared helpers

fn options(samples: usize) -> ConvertOptions {
    ConvertOptions {
        sampling: SamplingParams { samples, seed: 7 },
        epoch: Some(1_700_000_000),
        ..ConvertOptions::default()
    }
}

/// Convert an in-memory model whose geometry is primitives only.
fn convert_boxes(model: &RobotModel, out: &Path, opts: &ConvertOptions) -> Result<(), String> {
    let resolver = AssetResolver::new(out.parent().unwrap_or(Path::new(".")));
    convert_model(model, None, &resolver, out, opts, None)
        .map(|_| ())
        .map_err(err(model.name()))
}

fn planar2_urdf(ws: &Workspace) -> PathBuf {
    let path = ws.path("planar2/planar2.urdf");
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(&path, fixtures::PLANAR2_URDF).unwrap();
    path
}

fn urdd_binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_urdd"))
}

fn run_cli(args: &[&str]) -> Result<String, String> {
    let out = urdd_binary().args(args).output().map_err(err("spawn urdd"))?;
    if !out.status.success() {
        return Err(format!(
            "urdd {} exited with {}: {}",
            args.join(" "),
            out.status,
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    Ok(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn homogeneous(t: &RigidTransform) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&t.rotation);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&t.translation);
    m
}

fn translation(v: Vector3<f64>) -> Matrix4<f64> {
    Matrix4::new_translation(&v)
}

fn rpy(r: f64, p: f64, y: f64) -> Matrix4<f64> {
    // Fixed-axis roll, pitch, yaw: Rz(y) Ry(p) Rx(r).
    Rotation3::from_euler_angles(r, p, y).to_homogeneous()
}

fn rotation(axis: [f64; 3], angle: f64) -> Matrix4<f64> {
    Rotation3::from_axis_angle(&Unit::new_normalize(Vector3::from(axis)), angle).to_homogeneous()
}

// ---------------------------------------------------------------------------
// Brute-force FK oracle: configuration layout by the per-joint contribution
// rule in document order, poses by recursive composition up to the root.

struct FkOracle<'a> {
    joints: &'a [JointSpec],
    /// First configuration index of each non-mimic moving joint.
    start: HashMap<&'a str, usize>,
    num_dofs: usize,
}

impl<'a> FkOracle<'a> {
    fn new(joints: &'a [JointSpec]) -> Self {
        let mut start = HashMap::new();
        let mut next = 0;
        for j in joints {
            let width = match j.joint_type {
                _ if j.mimic.is_some() => 0,
                JointType::Fixed => 0,
                JointType::Revolute | JointType::Continuous | JointType::Prismatic => 1,
                JointType::Planar => 3,
                JointType::Floating => 6,
            };
            if width > 0 {
                start.insert(j.name.as_str(), next);
                next += width;
            }
        }
        FkOracle {
            joints,
            start,
            num_dofs: next,
        }
    }

    fn joint(&self, name: &str) -> &JointSpec {
        self.joints.iter().find(|j| j.name == name).expect("joint exists")
    }

    /// Scalar value of a single-axis joint, following mimic links.
    fn value(&self, j: &JointSpec, q: &[f64]) -> f64 {
        match &j.mimic {
            Some(m) => m.multiplier * self.value(self.joint(&m.source_joint), q) + m.offset,
            None => q[self.start[j.name.as_str()]],
        }
    }

    fn motion(&self, j: &JointSpec, q: &[f64]) -> Matrix4<f64> {
        match j.joint_type {
            JointType::Fixed => Matrix4::identity(),
            JointType::Revolute | JointType::Continuous => rotation(j.axis, self.value(j, q)),
            JointType::Prismatic => translation(Vector3::from(j.axis) * self.value(j, q)),
            JointType::Planar => {
                let i = self.start[j.name.as_str()];
                let n = Vector3::from(j.axis).normalize();
                // Smallest-index world axis not parallel to the normal.
                let e = (0..3)
                    .map(|k| Vector3::ith(k, 1.0))
                    .find(|e: &Vector3<f64>| e.dot(&n).abs() < 1.0 - 1e-6)
                    .unwrap();
                let u = (e - n * e.dot(&n)).normalize();
                let v = n.cross(&u);
                translation(u * q[i] + v * q[i + 1]) * rotation(j.axis, q[i + 2])
            }
            JointType::Floating => {
                let i = self.start[j.name.as_str()];
                translation(Vector3::new(q[i], q[i + 1], q[i + 2])) * rpy(q[i + 3], q[i + 4], q[i + 5])
            }
        }
    }

    fn pose(&self, link: &str, q: &[f64]) -> Matrix4<f64> {
        match self.joints.iter().find(|j| j.child_link == link) {
            None => Matrix4::identity(),
            Some(j) => {
                let [x, y, z] = j.origin.xyz;
                let [r, p, yw] = j.origin.rpy;
                self.pose(&j.parent_link, q) * translation(Vector3::new(x, y, z)) * rpy(r, p, yw) * self.motion(j, q)
            }
        }
    }
}

fn fk_model(model: &RobotModel) -> Result<FkModel, String> {
    FkModel::from_modules(
        &model.to_urdf_module(None),
        &derive_dof_map(model),
        &derive_chain(model),
        Some(derive_connections(model)),
    )
    .map_err(err("fk model"))
}

fn random_q(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-PI..PI)).collect()
}

// ---------------------------------------------------------------------------
// 1

fn dof_counts(ws: &Workspace) -> Outcome {
    // Reference robots: (label, DOFs, links).
    let rows = [
        ("ur5_like", 6, 11),
        ("xarm7_like", 7, 10),
        ("a1_like", 12, 35),
        ("spot_arm_like", 17, 55),
        ("b1_z1_like", 19, 25),
    ];
    let mut seen = Vec::new();
    for (i, (label, dofs, links)) in rows.into_iter().enumerate() {
        let generated = fixtures::scale_model(label, dofs, links, i as u64 + 1);
        // Round trip through URDF text so the parser is part of the path.
        let dir = ws.path(&format!("scale/{label}"));
        let path = fixtures::write_urdf(&dir, &generated).map_err(err("write urdf"))?;
        let model = parse_urdf(&fs::read_to_string(&path).unwrap(), &dir).map_err(err(label))?;
        let dof_map = derive_dof_map(&model);
        let chain = derive_chain(&model);
        ensure!(dof_map.num_dofs == dofs, "{label}: {} DOFs, expected {dofs}", dof_map.num_dofs);
        ensure!(chain.nodes.len() == links, "{label}: {} chain nodes, expected {links}", chain.nodes.len());
        seen.push(format!("{}/{}", dof_map.num_dofs, chain.nodes.len()));
    }
    Ok(format!("DOFs/links {}", seen.join(", ")))
}

// ---------------------------------------------------------------------------
// 2

fn fk_oracle(ws: &Workspace) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    let mut kinds = BTreeSet::new();
    for case in 0..1000 {
        let links = rng.random_range(2..=16);
        let model = fixtures::random_tree(&mut rng, links);
        let fk = fk_model(&model)?;
        let oracle = FkOracle::new(model.joints());
        ensure!(fk.num_dofs() == oracle.num_dofs, "case {case}: {} DOFs, oracle {}", fk.num_dofs(), oracle.num_dofs);
        for j in model.joints() {
            kinds.insert(if j.mimic.is_some() { "mimic" } else { j.joint_type.as_str() });
        }
        let q = random_q(&mut rng, fk.num_dofs());
        let poses = fk.compute(&q, &RigidTransform::identity()).map_err(err("fk"))?;
        for (link, pose) in fk.links().iter().zip(&poses) {
            let d = (homogeneous(pose) - oracle.pose(link, &q)).amax();
            worst = worst.max(d);
            ensure!(d <= 1e-9, "case {case}: link {link} differs by {d:e}");
        }
        // Path composition through the connections module agrees too.
        let link = &fk.links()[rng.random_range(0..links)];
        let via_path = fk.fk_link(&q, link, &RigidTransform::identity()).map_err(err("fk_link"))?;
        let d = (homogeneous(&via_path) - oracle.pose(link, &q)).amax();
        ensure!(d <= 1e-9, "case {case}: path pose of {link} differs by {d:e}");
    }
    ensure!(kinds.len() == 7, "random trees covered only {kinds:?}");

    // planar2 through a full conversion.
    let out = ws.path("planar2/fk_urdd");
    convert_file(&planar2_urdf(ws), &out, &options(50)).map_err(err("convert planar2"))?;
    let urdd = Urdd::load(&out, LoadMode::Strict).map_err(err("load"))?;
    let fk = FkModel::from_urdd(&urdd).map_err(err("fk model"))?;
    let id = RigidTransform::identity();
    let rz = Matrix3::new(0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0);
    let expect = [
        ([0.0, 0.0], "link2", [1.0, 0.0, 0.0], Matrix3::identity()),
        ([0.0, 0.0], "ee_link", [2.0, 0.0, 0.0], Matrix3::identity()),
        ([PI / 2.0, 0.0], "link2", [0.0, 1.0, 0.0], rz),
        ([PI / 2.0, 0.0], "ee_link", [0.0, 2.0, 0.0], rz),
    ];
    for (q, link, t, r) in expect {
        let pose = fk.fk_link(&q, link, &id).map_err(err("fk_link"))?;
        let dt = (pose.translation - Vector3::from(t)).amax();
        let dr = (pose.rotation - r).amax();
        ensure!(dt <= 1e-9 && dr <= 1e-9, "planar2 {link} at {q:?}: off by {dt:e}/{dr:e}");
    }
    Ok(format!("1000 cases over {} joint kinds, worst {worst:.1e}; planar2 poses exact", kinds.len()))
}

// ---------------------------------------------------------------------------
// 3

/// Workspace crates reachable from `krate` through path dependencies of the
/// given manifest sections.
fn workspace_closure(root: &Path, krate: &str, sections: &[&str]) -> Result<BTreeSet<String>, String> {
    let dir_of = |name: &str| match name {
        "urdd-store" => Some("store"),
        "urdd-fk" => Some("fk"),
        "urdd-core" => Some("core"),
        "urdd-cli" => Some("cli"),
        _ => None,
    };
    let mut all = BTreeSet::new();
    let mut queue = VecDeque::from([(krate.to_string(), sections.to_vec())]);
    while let Some((name, secs)) = queue.pop_front() {
        let Some(dir) = dir_of(&name) else { continue };
        let manifest = fs::read_to_string(root.join(dir).join("Cargo.toml")).map_err(err("read manifest"))?;
        let mut section = String::new();
        for line in manifest.lines().map(str::trim) {
            if line.starts_with('[') {
                section = line.trim_matches(|c| c == '[' || c == ']').to_string();
            } else if secs.contains(&section.as_str()) {
                if let Some((dep, _)) = line.split_once(['=', '.']) {
                    let dep = dep.trim().to_string();
                    if !dep.is_empty() && all.insert(dep.clone()) {
                        // Only normal dependencies of dependencies are built.
                        queue.push_back((dep, vec!["dependencies"]));
                    }
                }
            }
        }
    }
    Ok(all)
}

fn fk_isolation(_: &Workspace) -> Outcome {
    let crates = Path::new(env!("CARGO_MANIFEST_DIR")).parent().unwrap().to_path_buf();
    let deps = workspace_closure(&crates, "urdd-fk", &["dependencies", "dev-dependencies"])?;
    for banned in ["urdd-core", "roxmltree"] {
        ensure!(!deps.contains(banned), "the fk test build pulls in {banned}: {deps:?}");
    }
    let tests = crates.join("fk/tests");
    let mut test_files = 0;
    for entry in fs::read_dir(&tests).map_err(err("fk tests dir"))? {
        let path = entry.map_err(err("dir entry"))?.path();
        if path.extension().is_some_and(|e| e == "rs") {
            test_files += 1;
            let text = fs::read_to_string(&path).unwrap();
            ensure!(!text.contains("urdd_core"), "{} refers to the converter", path.display());
        }
    }
    ensure!(test_files > 0, "no fk test target");
    let fixture = tests.join("fixtures/planar2_urdd");
    let report = validate_urdd(&fixture);
    ensure!(report.is_empty(), "fixture does not validate: {report:?}");
    ensure!(
        !fixture.join("link_shapes_distance_statistics_module").exists(),
        "fixture should hold only the kinematic modules"
    );
    // The same computation the fk test target performs.
    let urdd = Urdd::load(&fixture, LoadMode::Strict).map_err(err("load fixture"))?;
    let fk = FkModel::from_urdd(&urdd).map_err(err("fk model"))?;
    let ee = fk.fk_link(&[PI / 2.0, 0.0], "ee_link", &RigidTransform::identity()).map_err(err("fk"))?;
    ensure!((ee.translation - Vector3::new(0.0, 2.0, 0.0)).amax() <= 1e-9, "ee_link at {}", ee.translation);
    Ok(format!(
        "fk test build closure {{{}}} excludes the parser; {test_files} test file(s) read only the fixture",
        deps.into_iter().collect::<Vec<_>>().join(", ")
    ))
}

// ---------------------------------------------------------------------------
// 4

fn bfs_paths(urdf: &UrdfModule, from: &str) -> HashMap<String, (Vec<String>, Vec<String>)> {
    let mut adjacent: HashMap<&str, Vec<(&str, &str)>> = HashMap::new();
    for j in &urdf.joints {
        adjacent.entry(&j.parent_link).or_default().push((&j.child_link, &j.name));
        adjacent.entry(&j.child_link).or_default().push((&j.parent_link, &j.name));
    }
    let mut previous: HashMap<&str, (&str, &str)> = HashMap::new();
    let mut queue = VecDeque::from([from]);
    let mut visited = BTreeSet::from([from]);
    while let Some(l) = queue.pop_front() {
        for &(n, j) in adjacent.get(l).map(Vec::as_slice).unwrap_or(&[]) {
            if visited.insert(n) {
                previous.insert(n, (l, j));
                queue.push_back(n);
            }
        }
    }
    visited
        .iter()
        .map(|&to| {
            let (mut links, mut joints) = (vec![to.to_string()], Vec::new());
            let mut cur = to;
            while let Some(&(p, j)) = previous.get(cur) {
                links.push(p.to_string());
                joints.push(j.to_string());
                cur = p;
            }
            links.reverse();
            joints.reverse();
            (to.to_string(), (joints, links))
        })
        .collect()
}

fn connections_oracle(_: &Workspace) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(60);
    let mut models: Vec<RobotModel> = (1..=60).map(|n| fixtures::random_tree(&mut rng, n)).collect();
    models.push(fixtures::scale_model("spot_arm_like", 17, 55, 4));
    models.push(fixtures::quadruped_model());
    let mut entries = 0;
    for model in &models {
        let urdf = model.to_urdf_module(None);
        let conn = derive_connections(model);
        let n = urdf.links.len();
        ensure!(conn.paths.len() == n * n, "{} links but {} paths", n, conn.paths.len());
        for (i, from) in urdf.links.iter().enumerate() {
            let oracle = bfs_paths(&urdf, &from.name);
            ensure!(oracle.len() == n, "oracle did not reach every link");
            for (k, to) in urdf.links.iter().enumerate() {
                let p = &conn.paths[i * n + k];
                ensure!(p.from_link == from.name && p.to_link == to.name, "path {} is out of row-major order", i * n + k);
                let (joints, links) = &oracle[&to.name];
                ensure!(
                    &p.joint_sequence == joints && &p.link_sequence == links,
                    "{} -> {}: {:?} vs BFS {:?}",
                    from.name,
                    to.name,
                    p.joint_sequence,
                    joints
                );
                entries += 1;
            }
        }
    }
    Ok(format!("{} trees, {entries} paths, largest 60 links (3600 entries)", models.len()))
}

// ---------------------------------------------------------------------------
// 5

fn check_containment(label: &str, points: &[Point3<f64>], hull: &ConvexHull) -> Result<f64, String> {
    let tol = 1e-7;
    let mut worst: f64 = f64::NEG_INFINITY;
    let planes = hull.planes();
    for p in points {
        let d = planes.iter().map(|(n, o)| n.dot(&p.coords) - o).fold(f64::NEG_INFINITY, f64::max);
        worst = worst.max(d);
        ensure!(d <= tol, "{label}: mesh point {p} outside hull by {d:e}");
    }
    let obb = fit_obb(hull);
    let sphere = min_enclosing_sphere(&hull.vertices);
    for v in &hull.vertices {
        let local = obb.rotation.transpose() * (v - obb.center);
        let e = (0..3).map(|i| local[i].abs() - obb.half_extents[i]).fold(f64::NEG_INFINITY, f64::max);
        ensure!(e <= tol, "{label}: hull vertex outside OBB by {e:e}");
        let s = (v - sphere.center).norm() - sphere.radius;
        ensure!(s <= tol, "{label}: hull vertex outside sphere by {s:e}");
        worst = worst.max(e).max(s);
    }
    ensure!(obb.rotation.determinant() > 0.0, "{label}: OBB rotation is improper");
    Ok(worst)
}

fn in_l_prism(p: &Point3<f64>) -> bool {
    let in_outline = (p.x > 0.0 && p.x < 2.0 && p.y > 0.0 && p.y < 1.0) || (p.x > 0.0 && p.x < 1.0 && p.y > 0.0 && p.y < 2.0);
    in_outline && p.z > 0.0 && p.z < 1.0
}

fn geometry_suite(_: &Workspace) -> Outcome {
    // Containment chain on meshes and random clouds.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checked = 0;
    let mut worst: f64 = f64::NEG_INFINITY;
    let mut meshes: Vec<TriMesh> = (0..8).map(|v| fixtures::bumpy_mesh(v, 14, 18, 0.1)).collect();
    meshes.push(fixtures::l_prism_mesh());
    meshes.push(box_mesh([0.5, 0.2, 0.1]));
    for m in &meshes {
        let hull = convex_hull_mesh(m).map_err(err(&m.source))?;
        worst = worst.max(check_containment(&m.source, &m.vertices, &hull)?);
        checked += 1;
    }
    for i in 0..40 {
        let scale = Vector3::new(rng.random_range(0.1..2.0), rng.random_range(0.1..2.0), rng.random_range(0.1..2.0));
        let r = Rotation3::from_euler_angles(rng.random_range(-PI..PI), rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let points: Vec<Point3<f64>> = (0..rng.random_range(4..200))
            .map(|_| {
                let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                Point3::from(r * v.component_mul(&scale) + Vector3::new(3.0, -1.0, 0.5))
            })
            .collect();
        let hull = convex_hull(&points).map_err(err(&format!("cloud {i}")))?;
        worst = worst.max(check_containment(&format!("cloud {i}"), &points, &hull)?);
        checked += 1;
    }

    // Unit cube bounds.
    let cube = convex_hull_mesh(&box_mesh([0.5; 3])).map_err(err("cube"))?;
    let sphere = min_enclosing_sphere(&cube.vertices);
    let expected = 3f64.sqrt() / 2.0;
    ensure!((sphere.radius - expected).abs() <= 1e-9, "cube sphere radius {}", sphere.radius);
    let obb = fit_obb(&cube);
    ensure!(
        obb.half_extents.iter().all(|h| (h - 0.5).abs() <= 1e-9),
        "cube OBB half extents {:?}",
        obb.half_extents
    );

    // L-prism decomposition against a 128^3 voxel oracle over the joint box
    // of the prism and the pieces.
    let decomposition = convex_decomposition(&[fixtures::l_prism_mesh()], &DecompositionParams::default())
        .map_err(err("decompose L"))?;
    let pieces: Vec<Vec<(Vector3<f64>, f64)>> = decomposition.pieces.iter().map(ConvexHull::planes).collect();
    let (mut lo, mut hi) = (Point3::new(0.0, 0.0, 0.0), Point3::new(2.0, 2.0, 1.0));
    for v in decomposition.pieces.iter().flat_map(|p| &p.vertices) {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    const N: usize = 128;
    let step = (hi - lo) / N as f64;
    let (mut both, mut either) = (0usize, 0usize);
    for i in 0..N {
        for j in 0..N {
            for k in 0..N {
                let p = lo + Vector3::new((i as f64 + 0.5) * step.x, (j as f64 + 0.5) * step.y, (k as f64 + 0.5) * step.z);
                let in_source = in_l_prism(&p);
                let in_union = pieces
                    .iter()
                    .any(|planes| planes.iter().all(|(n, o)| n.dot(&p.coords) - o <= 1e-12));
                both += (in_source && in_union) as usize;
                either += (in_source || in_union) as usize;
            }
        }
    }
    let iou = both as f64 / either as f64;
    ensure!(iou >= 0.95, "L-prism coverage (IoU) {iou:.4} with {} pieces", pieces.len());
    Ok(format!(
        "{checked} shapes contained (worst {worst:.1e}); cube r={:.12}, half extents 0.5; L-prism {} pieces, voxel IoU {iou:.4}",
        sphere.radius,
        pieces.len()
    ))
}

// ---------------------------------------------------------------------------
// 6

/// Separating-axis test for two boxes; true when they overlap.
fn sat_overlap(ca: Vector3<f64>, ra: &Matrix3<f64>, ha: [f64; 3], cb: Vector3<f64>, rb: &Matrix3<f64>, hb: [f64; 3]) -> bool {
    let mut axes: Vec<Vector3<f64>> = Vec::with_capacity(15);
    for i in 0..3 {
        axes.push(ra.column(i).into());
        axes.push(rb.column(i).into());
        for j in 0..3 {
            let c = ra.column(i).cross(&rb.column(j));
            if c.norm() > 1e-12 {
                axes.push(c.normalize());
            }
        }
    }
    let d = cb - ca;
    axes.iter().all(|axis| {
        let project = |r: &Matrix3<f64>, h: [f64; 3]| (0..3).map(|i| h[i] * r.column(i).dot(axis).abs()).sum::<f64>();
        d.dot(axis).abs() <= project(ra, ha) + project(rb, hb)
    })
}

fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation3<f64> {
    loop {
        let v = Vector4::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() > 0.1 && v.norm() <= 1.0 {
            return UnitQuaternion::from_quaternion(nalgebra::Quaternion::from(v)).to_rotation_matrix();
        }
    }
}

/// Expected skip reason of a pair under the documented precedence, from the
/// URDF structure and the stored statistics.
fn expected_reason(
    a: &str,
    b: &str,
    urdf: &UrdfModule,
    stats: &DistanceStatsModule,
    shape: ShapeType,
    overrides: &[SkipOverride],
    threshold: f64,
) -> Option<SkipReason> {
    if let Some(o) = overrides.iter().find(|o| (o.link_a == a && o.link_b == b) || (o.link_a == b && o.link_b == a)) {
        return o.skip.then_some(SkipReason::UserSpecified);
    }
    let adjacent = urdf.joints.iter().any(|j| {
        (j.parent_link == a && j.child_link == b) || (j.parent_link == b && j.child_link == a)
    });
    if adjacent {
        return Some(SkipReason::Adjacent);
    }
    let has_geometry = |l: &str| urdf.links.iter().any(|s| s.name == l && !s.collision_geometries.is_empty());
    if !has_geometry(a) || !has_geometry(b) {
        return Some(SkipReason::NoGeometry);
    }
    let pair = stats.table(shape).and_then(|t| t.get(a, b)).expect("pair has statistics");
    (pair.intersect_fraction >= threshold).then_some(SkipReason::AlwaysColliding)
}

fn check_skips(out: &Path, overrides: &[SkipOverride], counts: &mut BTreeMap<String, usize>) -> Result<(), String> {
    let urdd = Urdd::load(out, LoadMode::Strict).map_err(err("load"))?;
    let urdf: UrdfModule = urdd.module().map_err(err("urdf"))?;
    let stats: DistanceStatsModule = urdd.module().map_err(err("stats"))?;
    let skips: SkipsModule = urdd.module().map_err(err("skips"))?;
    ensure!(!skips.matrices.is_empty(), "no skip matrices");
    let names: Vec<&str> = urdf.links.iter().map(|l| l.name.as_str()).collect();
    for m in &skips.matrices {
        let n = names.len();
        ensure!(m.links.iter().map(String::as_str).eq(names.iter().copied()), "matrix links differ from URDF");
        ensure!(m.skips.len() == n && m.skips.iter().all(|r| r.len() == n), "matrix is not {n}x{n}");
        let mut listed = BTreeSet::new();
        for r in &m.reasons {
            ensure!(listed.insert((r.link_a.clone(), r.link_b.clone())), "duplicate reason for {r:?}");
        }
        for i in 0..n {
            ensure!(m.skips[i][i], "diagonal entry {i} not skipped");
            for j in 0..n {
                ensure!(m.skips[i][j] == m.skips[j][i], "asymmetric at ({i}, {j})");
                if i >= j {
                    continue;
                }
                let (a, b) = (names[i], names[j]);
                let expected = expected_reason(a, b, &urdf, &stats, m.shape_type, overrides, skips.always_colliding_threshold);
                let stored = m.reason(a, b);
                ensure!(
                    stored == expected && m.skips[i][j] == expected.is_some(),
                    "{:?} ({a}, {b}): skip {} reason {stored:?}, expected {expected:?}",
                    m.shape_type,
                    m.skips[i][j]
                );
                let upper = listed.contains(&(a.to_string(), b.to_string()));
                ensure!(upper == expected.is_some(), "({a}, {b}) reason not listed once in link order");
                *counts.entry(format!("{expected:?}")).or_default() += 1;
            }
        }
        ensure!(listed.len() == m.reasons.len(), "reasons listed for unknown pairs");
    }
    Ok(())
}

/// A robot that exercises every skip reason: `tip` sits inside `base`
/// whatever the joint does, `marker` is visual only, `far` never comes near.
fn skip_fixture() -> RobotModel {
    let mut marker = LinkSpec::new("marker");
    marker.visual_geometries.push(fixtures::box_geometry([0.05; 3], [0.0; 3]));
    let links = vec![
        fixtures::box_link("base", [0.5; 3]),
        fixtures::box_link("mid", [0.05; 3]),
        fixtures::box_link("tip", [0.1; 3]),
        fixtures::box_link("far", [0.1; 3]),
        marker,
    ];
    let joints = vec![
        fixtures::joint("j1", JointType::Revolute, "base", "mid", Pose::default(), [0.0, 0.0, 1.0], Some((-PI, PI))),
        fixtures::joint("j2", JointType::Fixed, "mid", "tip", Pose::from_xyz([0.1, 0.0, 0.0]), [1.0, 0.0, 0.0], None),
        fixtures::joint("j3", JointType::Prismatic, "base", "far", Pose::from_xyz([3.0, 0.0, 0.0]), [0.0, 1.0, 0.0], Some((-0.5, 0.5))),
        fixtures::joint("j4", JointType::Fixed, "base", "marker", Pose::from_xyz([0.0, 0.0, 1.0]), [1.0, 0.0, 0.0], None),
    ];
    RobotModel::new("skips", links, joints, PassThrough::default()).expect("valid fixture")
}

fn proximity_suite(ws: &Workspace) -> Outcome {
    // Prismatic cubes: centers 2..3 apart, so surfaces 1..2 apart, mean 1.5.
    let out = ws.path("proximity/cubes");
    convert_boxes(&fixtures::prismatic_cubes(), &out, &options(2000))?;
    let urdd = Urdd::load(&out, LoadMode::Strict).map_err(err("load cubes"))?;
    let stats: DistanceStatsModule = urdd.module().map_err(err("stats"))?;
    ensure!(stats.samples == 2000, "{} samples", stats.samples);
    let mut summary = Vec::new();
    for shape in [ShapeType::Hull, ShapeType::Obb, ShapeType::Decomposition] {
        let table = stats.table(shape).ok_or(format!("no {shape:?} table"))?;
        let p = table.get("a", "b").ok_or("no (a, b) pair")?;
        ensure!(
            (p.min - 1.0).abs() <= 0.05 && (p.max - 2.0).abs() <= 0.05 && (p.mean - 1.5).abs() <= 0.05,
            "{shape:?}: min {} max {} mean {}",
            p.min,
            p.max,
            p.mean
        );
        summary.push(format!("{shape:?} {:.3}/{:.3}/{:.3}", p.min, p.max, p.mean));
    }

    // Skip matrices, exhaustively, on several robots and with overrides.
    let mut counts = BTreeMap::new();
    check_skips(&out, &[], &mut counts)?;
    let overrides = vec![
        SkipOverride { link_a: "base".into(), link_b: "mid".into(), skip: false },
        SkipOverride { link_a: "far".into(), link_b: "tip".into(), skip: true },
    ];
    let out = ws.path("proximity/skips");
    let mut opts = options(300);
    opts.overrides = overrides.clone();
    convert_boxes(&skip_fixture(), &out, &opts)?;
    check_skips(&out, &overrides, &mut counts)?;
    for model in [fixtures::quadruped_model(), fixtures::scale_model("ur5_like", 6, 11, 1)] {
        let out = ws.path(&format!("proximity/{}", model.name()));
        convert_boxes(&model, &out, &options(300))?;
        check_skips(&out, &[], &mut counts)?;
    }
    let planar2 = ws.path("proximity/planar2");
    convert_file(&planar2_urdf(ws), &planar2, &options(300)).map_err(err("planar2"))?;
    check_skips(&planar2, &[], &mut counts)?;
    for reason in ["Some(Adjacent)", "Some(NoGeometry)", "Some(AlwaysColliding)", "Some(UserSpecified)", "None"] {
        ensure!(counts.contains_key(reason), "no pair exercised {reason}");
    }

    // GJK zero distance iff boxes overlap by separating axes.
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let cube = convex_hull_mesh(&box_mesh([0.5; 3])).map_err(err("cube"))?;
    let mut overlapping = 0;
    for case in 0..500 {
        let (ra, rb) = (random_rotation(&mut rng), random_rotation(&mut rng));
        let ca = Vector3::new(rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2), rng.random_range(-0.2..0.2));
        let dir = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let cb = ca + dir.normalize() * rng.random_range(0.5..2.0);
        let pa = RigidTransform::new(*ra.matrix(), ca);
        let pb = RigidTransform::new(*rb.matrix(), cb);
        let d = convex_distance(&cube, &pa, &cube, &pb);
        let sat = sat_overlap(ca, ra.matrix(), [0.5; 3], cb, rb.matrix(), [0.5; 3]);
        ensure!((d == 0.0) == sat, "case {case}: distance {d:e} but SAT overlap {sat}");
        overlapping += sat as usize;
    }
    Ok(format!(
        "{}; skip pairs by reason {counts:?}; SAT agrees on 500 poses ({overlapping} overlapping)",
        summary.join(", ")
    ))
}

// ---------------------------------------------------------------------------
// 7

fn tree_files(root: &Path) -> Result<BTreeMap<PathBuf, Vec<u8>>, String> {
    let mut files = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(err("read dir"))? {
            let path = entry.map_err(err("dir entry"))?.path();
            if path.is_dir() {
                stack.push(path);
            } else {
                let bytes = fs::read(&path).map_err(err("read file"))?;
                files.insert(path.strip_prefix(root).unwrap().to_path_buf(), bytes);
            }
        }
    }
    Ok(files)
}

fn copy_tree(from: &Path, to: &Path) -> Result<(), String> {
    for (rel, bytes) in tree_files(from)? {
        let dest = to.join(rel);
        fs::create_dir_all(dest.parent().unwrap()).map_err(err("mkdir"))?;
        fs::write(dest, bytes).map_err(err("write"))?;
    }
    Ok(())
}

fn same_tree(a: &Path, b: &Path) -> Result<usize, String> {
    let (fa, fb) = (tree_files(a)?, tree_files(b)?);
    ensure!(
        fa.keys().eq(fb.keys()),
        "file sets differ: {:?}",
        fa.keys().collect::<BTreeSet<_>>().symmetric_difference(&fb.keys().collect()).collect::<Vec<_>>()
    );
    for (rel, bytes) in &fa {
        ensure!(fb[rel] == *bytes, "{} differs", rel.display());
    }
    Ok(fa.len())
}

fn determinism(ws: &Workspace) -> Outcome {
    let src = ws.path("determinism/src");
    let urdf = fixtures::write_mesh_robot(&src, "det", 6, 4, 16, 20).map_err(err("write robot"))?;
    let urdf = urdf.to_str().unwrap();
    let convert = |out: &Path, extra: &[&str]| {
        let mut args = vec!["convert", "--urdf", urdf, "--out", out.to_str().unwrap(), "--epoch", "1700000000", "--glb"];
        args.extend_from_slice(extra);
        run_cli(&args)
    };
    let (a, b) = (ws.path("determinism/a"), ws.path("determinism/b"));
    convert(&a, &[])?;
    convert(&b, &["--jobs", "1"])?;
    let files = same_tree(&a, &b)?;

    // The same URDF and meshes elsewhere convert to the same bytes.
    let moved_src = ws.path("determinism/elsewhere/robot");
    copy_tree(&src, &moved_src)?;
    let c = ws.path("determinism/c");
    run_cli(&[
        "convert", "--urdf", moved_src.join("det.urdf").to_str().unwrap(), "--out", c.to_str().unwrap(),
        "--epoch", "1700000000", "--glb",
    ])?;
    same_tree(&a, &c)?;

    // A relocated URDD loads, validates and computes FK identically.
    let moved = ws.path("determinism/relocated/deeper/det_urdd");
    copy_tree(&a, &moved)?;
    fs::remove_dir_all(&b).map_err(err("remove"))?;
    let report = validate_urdd(&moved);
    ensure!(report.is_empty(), "relocated URDD: {report:?}");
    let (ua, um) = (
        Urdd::load(&a, LoadMode::Strict).map_err(err("load"))?,
        Urdd::load(&moved, LoadMode::Strict).map_err(err("load relocated"))?,
    );
    ensure!(ua.manifest() == um.manifest(), "manifests differ after relocation");
    let (fa, fm) = (
        FkModel::from_urdd(&ua).map_err(err("fk"))?,
        FkModel::from_urdd(&um).map_err(err("fk relocated"))?,
    );
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let q = random_q(&mut rng, fa.num_dofs());
        let id = RigidTransform::identity();
        ensure!(
            fa.compute(&q, &id).map_err(err("fk"))? == fm.compute(&q, &id).map_err(err("fk"))?,
            "FK differs after relocation"
        );
    }
    Ok(format!("{files} files identical across runs, --jobs and source location; relocated copy validates with equal FK"))
}

// ---------------------------------------------------------------------------
// 8

struct Source {
    dir: PathBuf,
    fk: FkModel,
    dofs: DofMap,
}

fn source(ws: &Workspace, model: &RobotModel) -> Result<Source, String> {
    let dir = ws.path(&format!("compose/{}", model.name()));
    convert_boxes(model, &dir, &options(100))?;
    let urdd = Urdd::load(&dir, LoadMode::Strict).map_err(err("load"))?;
    Ok(Source {
        fk: FkModel::from_urdd(&urdd).map_err(err("fk"))?,
        dofs: urdd.module().map_err(err("dofs"))?,
        dir,
    })
}

/// Checks the composite at `out` against its sources: DOF layout, FK of every
/// link, and validation. Returns the composite DOF count.
fn check_composite(
    parent: &Source,
    child: &Source,
    attach: &str,
    joint: &JointSpec,
    out: &Path,
    rng: &mut ChaCha8Rng,
) -> Result<(usize, f64), String> {
    let report = validate_urdd(out);
    ensure!(report.is_empty(), "composite does not validate cleanly: {report:?}");
    let urdd = Urdd::load(out, LoadMode::Strict).map_err(err("load composite"))?;
    let dofs: DofMap = urdd.module().map_err(err("dofs"))?;
    let chain: ChainModule = urdd.module().map_err(err("chain"))?;
    let fk = FkModel::from_urdd(&urdd).map_err(err("fk"))?;
    let (pp, cp) = (format!("{}/", parent_name(parent)), format!("{}/", parent_name(child)));
    let jn = joint.joint_type.dof_count();
    let (np, nc) = (parent.dofs.num_dofs, child.dofs.num_dofs);
    ensure!(dofs.num_dofs == np + jn + nc, "composite has {} DOFs, expected {np} + {jn} + {nc}", dofs.num_dofs);
    // Layout: parent DOFs, attachment DOFs, child DOFs.
    for (i, e) in dofs.dof_to_joint.iter().enumerate() {
        let expected = if i < np {
            format!("{pp}{}", parent.dofs.dof_to_joint[i].joint)
        } else if i < np + jn {
            joint.name.clone()
        } else {
            format!("{cp}{}", child.dofs.dof_to_joint[i - np - jn].joint)
        };
        ensure!(e.joint == expected, "DOF {i} drives {}, expected {expected}", e.joint);
    }
    ensure!(chain.nodes.len() == parent.fk.links().len() + child.fk.links().len(), "link count not additive");

    let id = RigidTransform::identity();
    let oracle_joint = {
        let [x, y, z] = joint.origin.xyz;
        let [r, p, yw] = joint.origin.rpy;
        translation(Vector3::new(x, y, z)) * rpy(r, p, yw)
    };
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let q = random_q(rng, dofs.num_dofs);
        let (qp, qj, qc) = (&q[..np], &q[np..np + jn], &q[np + jn..]);
        let composite = fk.fk(&q, &id).map_err(err("composite fk"))?;
        let parent_poses = parent.fk.fk(qp, &id).map_err(err("parent fk"))?;
        let child_poses = child.fk.fk(qc, &id).map_err(err("child fk"))?;
        let motion = match joint.joint_type {
            JointType::Fixed => Matrix4::identity(),
            JointType::Floating => translation(Vector3::new(qj[0], qj[1], qj[2])) * rpy(qj[3], qj[4], qj[5]),
            JointType::Revolute | JointType::Continuous => rotation(joint.axis, qj[0]),
            JointType::Prismatic => translation(Vector3::from(joint.axis) * qj[0]),
            JointType::Planar => return Err("planar attachment not covered here".into()),
        };
        let mount = homogeneous(parent_poses.get(attach).unwrap()) * oracle_joint * motion;
        for (link, pose) in &parent_poses.poses {
            let d = (homogeneous(composite.get(&format!("{pp}{link}")).unwrap()) - homogeneous(pose)).amax();
            worst = worst.max(d);
        }
        for (link, pose) in &child_poses.poses {
            let expected = mount * homogeneous(pose);
            let d = (homogeneous(composite.get(&format!("{cp}{link}")).unwrap()) - expected).amax();
            worst = worst.max(d);
        }
    }
    ensure!(worst <= 1e-9, "composite FK identity violated by {worst:e}");
    Ok((dofs.num_dofs, worst))
}

fn parent_name(s: &Source) -> String {
    s.dir.file_name().unwrap().to_string_lossy().into_owned()
}

fn composition(ws: &Workspace) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let arm = source(ws, &fixtures::arm_model())?;
    let gripper = source(ws, &fixtures::gripper_model())?;
    let quadruped = source(ws, &fixtures::quadruped_model())?;

    // Arm + gripper through the command line, joint given as JSON.
    let joint_json = r#"{"name": "wrist_mount", "joint_type": "fixed", "parent_link": "tool0",
        "child_link": "palm", "origin": {"xyz": [0.0, 0.0, 0.05], "rpy": [0.0, 0.0, 1.5707963267948966]},
        "axis": [1.0, 0.0, 0.0]}"#;
    let joint: JointSpec = serde_json::from_str(joint_json).map_err(err("joint JSON"))?;
    let arm_gripper = ws.path("compose/arm_gripper");
    run_cli(&[
        "combine", "--parent", arm.dir.to_str().unwrap(), "--child", gripper.dir.to_str().unwrap(),
        "--attach-link", "tool0", "--joint", joint_json, "--out", arm_gripper.to_str().unwrap(),
        "--samples", "100", "--epoch", "0",
    ])?;
    let (fixed_dofs, w1) = check_composite(&arm, &gripper, "tool0", &joint, &arm_gripper, &mut rng)?;
    ensure!(fixed_dofs == arm.dofs.num_dofs + gripper.dofs.num_dofs, "fixed joint changed the DOF sum");
    let conn = Urdd::load(&arm_gripper, LoadMode::Strict)
        .and_then(|u| u.module::<urdd_store::schema::ConnectionsModule>())
        .map_err(err("connections"))?;
    let path = conn.path("arm/base", "gripper/finger_l").ok_or("no base -> finger path")?;
    ensure!(path.joint_sequence.contains(&"wrist_mount".to_string()), "path misses the attachment joint");

    // Quadruped + arm on a floating joint, through the library.
    let mut floating: JointSpec = joint.clone();
    floating.name = "mount".into();
    floating.joint_type = JointType::Floating;
    floating.parent_link = String::new();
    floating.child_link = "base".into();
    floating.origin = Pose { xyz: [0.1, 0.0, 0.1], rpy: [0.0, 0.2, 0.0] };
    let quad_arm = ws.path("compose/quadruped_arm");
    combine(&quadruped.dir, &arm.dir, &Attachment::new("trunk", floating.clone()), &quad_arm, &options(100))
        .map_err(err("combine quadruped + arm"))?;
    let (floating_dofs, w2) = check_composite(&quadruped, &arm, "trunk", &floating, &quad_arm, &mut rng)?;
    ensure!(floating_dofs == quadruped.dofs.num_dofs + arm.dofs.num_dofs + 6, "floating joint did not add 6");
    Ok(format!(
        "arm({}) + gripper({}) fixed = {fixed_dofs}; quadruped({}) + arm floating = {floating_dofs}; FK worst {:.1e}; both validate cleanly",
        arm.dofs.num_dofs,
        gripper.dofs.num_dofs,
        quadruped.dofs.num_dofs,
        w1.max(w2)
    ))
}

// ---------------------------------------------------------------------------
// 9

fn conversion_timing(ws: &Workspace) -> Outcome {
    let src = ws.path("timing/src");
    let urdf = fixtures::write_timing_robot(&src).map_err(err("write timing robot"))?;
    let out = ws.path("timing/urdd");
    let start = Instant::now();
    run_cli(&[
        "convert", "--urdf", urdf.to_str().unwrap(), "--out", out.to_str().unwrap(), "--samples", "1000",
    ])?;
    let elapsed = start.elapsed();
    let urdd = Urdd::load(&out, LoadMode::Strict).map_err(err("load"))?;
    ensure!(urdd.manifest().modules.len() == 11, "{} modules written", urdd.manifest().modules.len());
    let chain: ChainModule = urdd.module().map_err(err("chain"))?;
    ensure!(chain.nodes.len() == 35, "{} links", chain.nodes.len());
    let originals: OriginalMeshesModule = urdd.module().map_err(err("originals"))?;
    let triangles: Vec<usize> = originals
        .links
        .iter()
        .map(|l| l.geometries.iter().filter(|g| g.role == urdd_store::schema::GeometryRole::Collision).map(|g| g.triangle_count).sum())
        .collect();
    let min = *triangles.iter().min().unwrap();
    ensure!(triangles.len() == 35 && min >= 9000, "per-link triangles as low as {min}");
    let stats: DistanceStatsModule = urdd.module().map_err(err("stats"))?;
    ensure!(stats.samples == 1000, "{} samples", stats.samples);
    Ok(format!(
        "35 links, >= {min} triangles per link, 1000 samples, all modules in {:.1} s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------
// 10

fn size_accounting(ws: &Workspace) -> Outcome {
    let mut fixtures_seen: Vec<PathBuf> = Vec::new();
    let planar2 = ws.path("sizes/planar2");
    convert_file(&planar2_urdf(ws), &planar2, &options(100)).map_err(err("planar2"))?;
    fixtures_seen.push(planar2);
    let mesh_src = ws.path("sizes/mesh_src");
    let urdf = fixtures::write_mesh_robot(&mesh_src, "mesh8", 8, 5, 20, 24).map_err(err("write mesh robot"))?;
    let mesh_out = ws.path("sizes/mesh8");
    convert_file(&urdf, &mesh_out, &options(100)).map_err(err("mesh8"))?;
    fixtures_seen.push(mesh_out);
    for model in [fixtures::quadruped_model(), fixtures::scale_model("b1_z1_like", 19, 25, 5)] {
        let dir = ws.path(&format!("sizes/{}", model.name()));
        let path = fixtures::write_urdf(&dir, &model).map_err(err("write urdf"))?;
        let out = dir.join("urdd");
        convert_file(&path, &out, &options(100)).map_err(err(model.name()))?;
        fixtures_seen.push(out);
    }
    // Outputs of the other criteria, when they ran.
    for rel in ["timing/urdd", "compose/arm_gripper", "compose/quadruped_arm", "determinism/a"] {
        if ws.path(rel).join("manifest.json").exists() {
            fixtures_seen.push(ws.path(rel));
        }
    }
    let mut rows = Vec::new();
    for dir in &fixtures_seen {
        let info = urdd_info(dir).map_err(err("info"))?;
        let urdf_bytes = info.source_urdf_bytes.ok_or(format!("{}: source size not recorded", info.robot_name))?;
        ensure!(
            info.size_without_meshes > urdf_bytes,
            "{}: URDD without meshes {} <= URDF {urdf_bytes}",
            info.robot_name,
            info.size_without_meshes
        );
        ensure!(
            info.size_with_meshes > info.size_without_meshes,
            "{}: with meshes {} <= without {}",
            info.robot_name,
            info.size_with_meshes,
            info.size_without_meshes
        );
        rows.push(format!(
            "{} {}<{}<{}",
            info.robot_name, urdf_bytes, info.size_without_meshes, info.size_with_meshes
        ));
    }
    // The command-line report carries the same numbers.
    let json = run_cli(&["info", "--json", fixtures_seen[0].to_str().unwrap()])?;
    let value: serde_json::Value = serde_json::from_str(&json).map_err(err("info JSON"))?;
    ensure!(value["num_dofs"] == 2 && value["num_links"] == 4, "planar2 info: {value}");
    Ok(format!("{} fixtures (bytes URDF<URDD<URDD+meshes): {}", rows.len(), rows.join(", ")))
}
