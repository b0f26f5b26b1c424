use std::f64::consts::FRAC_PI_6;
use std::fs;
use std::path::Path;

use nalgebra::{Point3, Rotation3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use urdd_core::fixtures::{self, box_geometry, PLANAR2_URDF};
use urdd_core::geometry::io::{read_obj, read_stl};
use urdd_core::geometry::primitives::box_mesh;
use urdd_core::geometry::{
    convex_decomposition, convex_hull, convex_hull_mesh, derive_link_geometry, fit_obb, load_mesh, min_enclosing_sphere,
    write_obj, write_stl, AssetResolver, ShapeOptions,
};
use urdd_core::{parse_urdf, GeometryError, RobotModel};
use urdd_store::schema::{DecompositionParams, LinkSpec, PassThrough};

fn shapes() -> ShapeOptions {
    ShapeOptions {
        convex_shapes: true,
        decomposition: None,
    }
}

fn cube_points(half: f64) -> Vec<Point3<f64>> {
    box_mesh([half; 3]).vertices
}

#[test]
fn unit_cube_hull() {
    let mut pts = cube_points(0.5);
    pts.push(Point3::new(0.1, -0.2, 0.3));
    let hull = convex_hull(&pts).unwrap();
    assert!((hull.volume - 1.0).abs() < 1e-12);
    assert_eq!(hull.vertices.len(), 8);
    assert_eq!(hull.triangles.len(), 12);
    assert!(hull.centroid.coords.norm() < 1e-12);
}

#[test]
fn flat_input_is_degenerate_unless_inflated() {
    let square = [
        Point3::new(0.0, 0.0, 0.0),
        Point3::new(1.0, 0.0, 0.0),
        Point3::new(1.0, 1.0, 0.0),
        Point3::new(0.0, 1.0, 0.0),
    ];
    assert!(matches!(convex_hull(&square), Err(GeometryError::DegenerateGeometry { rank: 2 })));
    let (hull, rank) = urdd_core::geometry::convex_hull_inflated(&square).unwrap();
    assert_eq!(rank, Some(2));
    assert!(hull.volume > 0.0 && hull.volume < 1e-5);
    assert!(matches!(convex_hull(&[]), Err(GeometryError::Empty)));
}

#[test]
fn cube_decomposes_into_one_piece() {
    let params = DecompositionParams::default();
    let d = convex_decomposition(&[box_mesh([0.5; 3])], &params).unwrap();
    assert_eq!(d.pieces.len(), 1);
    assert!(d.coverage_ratio.unwrap() > 0.99);
    assert_eq!(d.concavity_tolerance_used, params.concavity_tolerance);
}

#[test]
fn single_piece_budget_underestimates_l_prism_coverage() {
    let params = DecompositionParams {
        max_pieces: 1,
        ..DecompositionParams::default()
    };
    let d = convex_decomposition(&[fixtures::l_prism_mesh()], &params).unwrap();
    assert_eq!(d.pieces.len(), 1);
    // One hull of the L has volume 3.5 against a solid of 3.
    let coverage = d.coverage_ratio.unwrap();
    assert!(coverage < 0.95, "coverage {coverage}");
}

#[test]
fn obb_recovers_rotated_box() {
    let r = Rotation3::from_axis_angle(&Vector3::z_axis(), FRAC_PI_6);
    let pts: Vec<Point3<f64>> = box_mesh([1.0, 0.5, 0.25]).vertices.iter().map(|p| r * p).collect();
    let obb = fit_obb(&convex_hull(&pts).unwrap());
    assert!((obb.volume() - 1.0).abs() <= 0.05, "volume {}", obb.volume());
    assert!(pts.iter().all(|p| obb.excess(p) <= 1e-9));
}

#[test]
fn obb_aligns_with_elongated_cloud() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let r = Rotation3::from_euler_angles(0.3, -0.5, 1.1);
    let pts: Vec<Point3<f64>> = (0..400)
        .map(|_| {
            let local = Point3::new(rng.random_range(-2.0..2.0), rng.random_range(-0.5..0.5), rng.random_range(-0.5..0.5));
            r * local
        })
        .collect();
    let obb = fit_obb(&convex_hull(&pts).unwrap());
    let long = (0..3).max_by(|&a, &b| obb.half_extents[a].total_cmp(&obb.half_extents[b])).unwrap();
    let cos = obb.axis(long).dot(&(r * Vector3::x())).abs();
    assert!(cos >= 5f64.to_radians().cos(), "angle {} deg", cos.acos().to_degrees());
}

#[test]
fn sphere_of_one_and_two_points() {
    let one = min_enclosing_sphere(&[Point3::new(1.0, 2.0, 3.0)]);
    assert_eq!(one.center, Point3::new(1.0, 2.0, 3.0));
    assert_eq!(one.radius, 0.0);
    let two = min_enclosing_sphere(&[Point3::new(-1.0, 0.0, 0.0), Point3::new(3.0, 0.0, 0.0)]);
    assert!((two.center - Point3::new(1.0, 0.0, 0.0)).norm() < 1e-12);
    assert!((two.radius - 2.0).abs() < 1e-12);
}

#[test]
fn obj_and_stl_round_trip_with_scale() {
    let dir = tempfile::tempdir().unwrap();
    let cube = box_mesh([0.5; 3]);
    fs::write(dir.path().join("c.obj"), write_obj(&cube)).unwrap();
    fs::write(dir.path().join("c.stl"), write_stl(&cube)).unwrap();
    for name in ["c.obj", "c.stl"] {
        let m = load_mesh(&dir.path().join(name), [2.0, 1.0, 1.0]).unwrap();
        let (lo, hi) = m.aabb().unwrap();
        assert_eq!((lo, hi), (Point3::new(-1.0, -0.5, -0.5), Point3::new(1.0, 0.5, 0.5)), "{name}");
        assert!((m.signed_volume() - 2.0).abs() < 1e-12, "{name}");
    }
    assert!(matches!(load_mesh(&dir.path().join("c.dae"), [1.0; 3]), Err(GeometryError::UnsupportedFormat(_))));
    assert!(matches!(load_mesh(&dir.path().join("gone.obj"), [1.0; 3]), Err(GeometryError::Io { .. })));
}

#[test]
fn zero_area_triangles_are_dropped() {
    let stl = "solid t\n\
        facet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 0 1 0\nendloop\nendfacet\n\
        facet normal 0 0 1\nouter loop\nvertex 0 0 0\nvertex 1 0 0\nvertex 2 0 0\nendloop\nendfacet\n\
        endsolid t\n";
    let raw = read_stl(stl.as_bytes()).unwrap();
    assert_eq!(raw.triangles.len(), 2);
    assert_eq!(raw.cleaned().triangles.len(), 1);

    let obj = read_obj("v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 1 0\nf 1 2 3\nf 3 4 1\n").unwrap();
    assert_eq!(obj.cleaned().triangles.len(), 1);
    assert!(read_obj("v 0 0 0\nf 1 2 3\n").is_err());
}

#[test]
fn collision_parts_merge_into_one_bundle() {
    let mut link = LinkSpec::new("two_boxes");
    link.collision_geometries.push(box_geometry([0.5; 3], [0.0; 3]));
    link.collision_geometries.push(box_geometry([0.5; 3], [2.0, 0.0, 0.0]));
    let mut ghost = LinkSpec::new("ghost");
    ghost.visual_geometries.push(box_geometry([0.5; 3], [0.0; 3]));
    let m = RobotModel::new(
        "m",
        vec![link, ghost],
        vec![fixtures::joint(
            "j",
            urdd_store::schema::JointType::Fixed,
            "two_boxes",
            "ghost",
            Default::default(),
            [1.0, 0.0, 0.0],
            None,
        )],
        PassThrough::default(),
    )
    .unwrap();
    let geometry = derive_link_geometry(&m, &AssetResolver::new("."), shapes()).unwrap();
    let set = geometry[0].shapes.as_ref().unwrap();
    assert_eq!(geometry[0].originals.len(), 2);
    assert!((set.hull.volume - 3.0).abs() < 1e-9);
    let (lo, hi) = set.collision_mesh.aabb().unwrap();
    assert_eq!((lo.x, hi.x), (-0.5, 2.5));
    // Visual-only links keep their meshes but get no collision shapes.
    assert_eq!(geometry[1].originals.len(), 1);
    assert!(geometry[1].shapes.is_none());
}

#[test]
fn planar2_bundles() {
    let m = parse_urdf(PLANAR2_URDF, Path::new(".")).unwrap();
    let geometry = derive_link_geometry(&m, &AssetResolver::new("."), shapes()).unwrap();
    assert_eq!(geometry.len(), 4);
    for g in &geometry {
        let set = g.shapes.as_ref().unwrap();
        assert!((set.sphere.radius - 3f64.sqrt() / 2.0).abs() < 1e-9, "{}", g.link);
        assert!((set.obb.volume() - 1.0).abs() < 1e-9, "{}", g.link);
        assert!((set.hull.volume - 1.0).abs() < 1e-9, "{}", g.link);
    }
}

#[test]
fn missing_mesh_names_the_link() {
    let mut link = LinkSpec::new("broken");
    link.collision_geometries.push(urdd_store::schema::GeometryRef {
        name: None,
        origin: Default::default(),
        shape: urdd_store::schema::Shape::Mesh {
            filename: "nowhere.stl".into(),
            scale: [1.0; 3],
        },
    });
    let m = RobotModel::new("m", vec![link], vec![], PassThrough::default()).unwrap();
    let err = derive_link_geometry(&m, &AssetResolver::new("/nonexistent"), shapes()).unwrap_err();
    assert!(matches!(&err, GeometryError::Link { link, .. } if link == "broken"));
    assert!(err.to_string().contains("nowhere.stl"));
}

fn cloud(seed: u64, n: usize) -> Vec<Point3<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = Vector3::new(rng.random_range(0.1..3.0), rng.random_range(0.1..3.0), rng.random_range(0.1..3.0));
    (0..n)
        .map(|_| {
            let v = Vector3::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            Point3::from(v.component_mul(&scale))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hull_contains_every_input_point(seed in any::<u64>(), n in 4usize..200) {
        let pts = cloud(seed, n);
        let hull = convex_hull(&pts).unwrap();
        let scale = pts.iter().map(|p| p.coords.amax()).fold(0.0, f64::max);
        for p in &pts {
            prop_assert!(hull.max_plane_distance(p) <= 1e-9 * scale.max(1.0));
        }
        let again = convex_hull_mesh(&hull.as_mesh("h")).unwrap();
        prop_assert!((again.volume - hull.volume).abs() <= 1e-9 * hull.volume);
    }

    #[test]
    fn bounding_volumes_enclose_the_hull(seed in any::<u64>(), n in 4usize..120) {
        let pts = cloud(seed, n);
        let hull = convex_hull(&pts).unwrap();
        let obb = fit_obb(&hull);
        let sphere = min_enclosing_sphere(&pts);
        let r = sphere.radius;
        prop_assert!(hull.volume <= obb.volume() * (1.0 + 1e-9));
        prop_assert!(hull.volume <= 4.0 / 3.0 * std::f64::consts::PI * r * r * r * (1.0 + 1e-9));
        for p in &pts {
            prop_assert!(obb.excess(p) <= 1e-9 * (1.0 + r));
            prop_assert!((p - sphere.center).norm() <= r * (1.0 + 1e-9) + 1e-12);
        }
    }
}
