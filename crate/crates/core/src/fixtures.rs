//! Synthetic robots and meshes shared by tests, benchmarks and the
//! acceptance suite.

use std::f64::consts::PI;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use urdd_store::schema::{
    GeometryRef, JointLimits, JointSpec, JointType, LinkSpec, Mimic, PassThrough, Pose, Shape,
};

use crate::geometry::{write_obj, TriMesh};
use crate::model::{to_urdf_xml, RobotModel};

/// Hand-written two-joint planar arm with a unit-cube collision box (and
/// matching visual) on every link.
pub const PLANAR2_URDF: &str = r#"<?xml version="1.0"?>
<robot name="planar2">
  <link name="base_link">
    <visual><geometry><box size="1 1 1"/></geometry></visual>
    <collision><geometry><box size="1 1 1"/></geometry></collision>
  </link>
  <link name="link1">
    <visual><geometry><box size="1 1 1"/></geometry></visual>
    <collision><geometry><box size="1 1 1"/></geometry></collision>
  </link>
  <link name="link2">
    <visual><geometry><box size="1 1 1"/></geometry></visual>
    <collision><geometry><box size="1 1 1"/></geometry></collision>
  </link>
  <link name="ee_link">
    <visual><geometry><box size="1 1 1"/></geometry></visual>
    <collision><geometry><box size="1 1 1"/></geometry></collision>
  </link>
  <joint name="j1" type="revolute">
    <parent link="base_link"/>
    <child link="link1"/>
    <origin xyz="0 0 0" rpy="0 0 0"/>
    <axis xyz="0 0 1"/>
    <limit lower="-3.14159" upper="3.14159" effort="10" velocity="1"/>
  </joint>
  <joint name="j2" type="revolute">
    <parent link="link1"/>
    <child link="link2"/>
    <origin xyz="1 0 0" rpy="0 0 0"/>
    <axis xyz="0 0 1"/>
    <limit lower="-3.14159" upper="3.14159" effort="10" velocity="1"/>
  </joint>
  <joint name="ee" type="fixed">
    <parent link="link2"/>
    <child link="ee_link"/>
    <origin xyz="1 0 0" rpy="0 0 0"/>
  </joint>
</robot>
"#;

/// `(label, dofs, links)` rows of the synthetic conversion-scale trees.
pub const SCALE_ROWS: [(&str, usize, usize); 5] = [
    ("ur5_like", 6, 11),
    ("xarm7_like", 7, 10),
    ("a1_like", 12, 35),
    ("spot_arm_like", 17, 55),
    ("b1_z1_like", 19, 25),
];

pub fn box_geometry(half: [f64; 3], xyz: [f64; 3]) -> GeometryRef {
    GeometryRef {
        name: None,
        origin: Pose::from_xyz(xyz),
        shape: Shape::Box { half_extents: half },
    }
}

/// A link with the same box as visual and collision geometry.
pub fn box_link(name: &str, half: [f64; 3]) -> LinkSpec {
    let mut l = LinkSpec::new(name);
    l.visual_geometries.push(box_geometry(half, [0.0; 3]));
    l.collision_geometries.push(box_geometry(half, [0.0; 3]));
    l
}

pub fn joint(
    name: &str,
    joint_type: JointType,
    parent: &str,
    child: &str,
    origin: Pose,
    axis: [f64; 3],
    limits: Option<(f64, f64)>,
) -> JointSpec {
    JointSpec {
        name: name.into(),
        joint_type,
        parent_link: parent.into(),
        child_link: child.into(),
        origin,
        axis,
        limits: limits.map(|(lower, upper)| JointLimits {
            lower: Some(lower),
            upper: Some(upper),
            velocity: Some(1.0),
            effort: Some(10.0),
        }),
        mimic: None,
    }
}

fn model(name: &str, links: Vec<LinkSpec>, joints: Vec<JointSpec>) -> RobotModel {
    RobotModel::new(name, links, joints, PassThrough::default()).expect("fixture model is valid")
}

/// Random tree of `links` links in which exactly `dofs` joints are single
/// axis (revolute, continuous or prismatic) and the rest fixed.
pub fn scale_model(label: &str, dofs: usize, links: usize, seed: u64) -> RobotModel {
    assert!(dofs < links, "a tree has links - 1 joints");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let names: Vec<String> = (0..links).map(|i| format!("link_{i}")).collect();
    let mut moving: Vec<bool> = (0..links - 1).map(|i| i < dofs).collect();
    for i in (1..moving.len()).rev() {
        moving.swap(i, rng.random_range(0..=i));
    }
    let link_specs = names.iter().map(|n| box_link(n, [0.05, 0.05, 0.05])).collect();
    let joints = (1..links)
        .map(|c| {
            let parent = rng.random_range(c.saturating_sub(4)..c);
            let origin = Pose {
                xyz: [rng.random_range(-0.3..0.3), rng.random_range(-0.3..0.3), 0.2],
                rpy: [0.0, 0.0, rng.random_range(-1.0..1.0)],
            };
            let (jt, limits) = if !moving[c - 1] {
                (JointType::Fixed, None)
            } else {
                match rng.random_range(0..3) {
                    0 => (JointType::Revolute, Some((-2.0, 2.0))),
                    1 => (JointType::Continuous, None),
                    _ => (JointType::Prismatic, Some((-0.1, 0.1))),
                }
            };
            joint(&format!("joint_{c}"), jt, &names[parent], &names[c], origin, [0.0, 0.0, 1.0], limits)
        })
        .collect();
    model(label, link_specs, joints)
}

/// Random tree of `links` links exercising every joint type, including
/// planar, floating and mimic joints, with random origins and axes.
pub fn random_tree(rng: &mut impl Rng, links: usize) -> RobotModel {
    let names: Vec<String> = (0..links).map(|i| format!("l{i}")).collect();
    let mut joints: Vec<JointSpec> = Vec::new();
    let unit = |rng: &mut dyn FnMut() -> f64| {
        let v = [rng(), rng(), rng()];
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt().max(1e-3);
        [v[0] / n, v[1] / n, v[2] / n]
    };
    for c in 1..links {
        let parent = rng.random_range(0..c);
        let origin = Pose {
            xyz: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
            rpy: [rng.random_range(-PI..PI), rng.random_range(-1.5..1.5), rng.random_range(-PI..PI)],
        };
        let axis = unit(&mut || rng.random_range(-1.0..1.0));
        let kind = rng.random_range(0..10);
        let (jt, limits) = match kind {
            0 | 1 => (JointType::Fixed, None),
            2 | 3 => (JointType::Revolute, Some((-2.5, 2.5))),
            4 => (JointType::Continuous, None),
            5 | 6 => (JointType::Prismatic, Some((-0.5, 0.5))),
            7 => (JointType::Planar, None),
            8 => (JointType::Floating, None),
            _ => (JointType::Revolute, Some((-1.0, 1.0))),
        };
        let mut j = joint(&format!("j{c}"), jt, &names[parent], &names[c], origin, axis, limits);
        // Some single-axis joints mimic an earlier single-axis joint.
        if kind == 9 {
            if let Some(src) = joints.iter().rev().find(|s| s.joint_type.is_single_axis()) {
                j.mimic = Some(Mimic {
                    source_joint: src.name.clone(),
                    multiplier: rng.random_range(-2.0..2.0),
                    offset: rng.random_range(-0.5..0.5),
                });
            }
        }
        joints.push(j);
    }
    let link_specs = names.iter().map(|n| LinkSpec::new(n.as_str())).collect();
    model("random_tree", link_specs, joints)
}

/// Two unit cubes joined by a prismatic x joint with limits `[2, 3]`.
pub fn prismatic_cubes() -> RobotModel {
    model(
        "prismatic_cubes",
        vec![box_link("a", [0.5; 3]), box_link("b", [0.5; 3])],
        vec![joint("slide", JointType::Prismatic, "a", "b", Pose::default(), [1.0, 0.0, 0.0], Some((2.0, 3.0)))],
    )
}

/// L-shaped prism: the outline (0,0) (2,0) (2,1) (1,1) (1,2) (0,2)
/// extruded over z ∈ [0, 1]. Volume 3.
pub fn l_prism_mesh() -> TriMesh {
    let outline = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)];
    let mut vertices = Vec::new();
    for z in [0.0, 1.0] {
        vertices.extend(outline.iter().map(|&(x, y)| Point3::new(x, y, z)));
    }
    // Cap triangulation of the L: a fan from vertex 3 (the reflex corner).
    let cap = [[3, 4, 5], [3, 5, 0], [3, 0, 1], [3, 1, 2]];
    let mut triangles: Vec<[u32; 3]> = Vec::new();
    for t in cap {
        triangles.push([t[0] + 6, t[1] + 6, t[2] + 6]);
        triangles.push([t[0], t[2], t[1]]);
    }
    for i in 0..6u32 {
        let j = (i + 1) % 6;
        triangles.push([i, j, j + 6]);
        triangles.push([i, j + 6, i + 6]);
    }
    TriMesh::new(vertices, triangles, "l_prism")
}

/// A closed, non-convex "bumpy" blob of roughly `2 · rings · sectors`
/// triangles. Different `variant`s give different shapes.
pub fn bumpy_mesh(variant: u32, rings: usize, sectors: usize, radius: f64) -> TriMesh {
    let k = 3.0 + (variant % 4) as f64;
    let m = 2.0 + (variant % 3) as f64;
    let r = |theta: f64, phi: f64| radius * (1.0 + 0.25 * (k * phi).sin() * (m * theta).sin());
    let mut vertices = vec![Point3::new(0.0, 0.0, r(0.0, 0.0))];
    for i in 1..rings {
        let theta = PI * i as f64 / rings as f64;
        for j in 0..sectors {
            let phi = 2.0 * PI * j as f64 / sectors as f64;
            let rr = r(theta, phi);
            let stretch = 1.0 + 0.1 * (variant % 5) as f64;
            vertices.push(Point3::new(
                rr * theta.sin() * phi.cos() * stretch,
                rr * theta.sin() * phi.sin(),
                rr * theta.cos(),
            ));
        }
    }
    let south = vertices.len() as u32;
    vertices.push(Point3::new(0.0, 0.0, -radius));
    let s = sectors as u32;
    let ring = |i: usize, j: u32| 1 + (i as u32 - 1) * s + (j % s);
    let mut triangles = Vec::new();
    for j in 0..s {
        triangles.push([0, ring(1, j), ring(1, j + 1)]);
    }
    for i in 1..rings - 1 {
        for j in 0..s {
            let (a, b, c, d) = (ring(i, j), ring(i, j + 1), ring(i + 1, j), ring(i + 1, j + 1));
            triangles.push([a, c, d]);
            triangles.push([a, d, b]);
        }
    }
    for j in 0..s {
        triangles.push([south, ring(rings - 1, j + 1), ring(rings - 1, j)]);
    }
    TriMesh::new(vertices, triangles, format!("bumpy_{variant}"))
}

/// Serial-parallel arm of `links` links whose every link carries a distinct
/// ~`2 · rings · sectors`-triangle mesh. Writes the URDF and its meshes into
/// `dir` and returns the URDF path.
pub fn write_mesh_robot(dir: &Path, name: &str, links: usize, dofs: usize, rings: usize, sectors: usize) -> io::Result<PathBuf> {
    let base = scale_model(name, dofs, links, 7);
    fs::create_dir_all(dir.join("meshes"))?;
    let mut link_specs = Vec::new();
    for (i, l) in base.links().iter().enumerate() {
        let file = format!("meshes/{}.obj", l.name);
        fs::write(dir.join(&file), write_obj(&bumpy_mesh(i as u32, rings, sectors, 0.08)))?;
        let geometry = GeometryRef {
            name: None,
            origin: Pose::default(),
            shape: Shape::Mesh {
                filename: file,
                scale: [1.0; 3],
            },
        };
        let mut link = LinkSpec::new(l.name.as_str());
        link.visual_geometries.push(geometry.clone());
        link.collision_geometries.push(geometry);
        link_specs.push(link);
    }
    let robot = model(name, link_specs, base.joints().to_vec());
    let path = dir.join(format!("{name}.urdf"));
    fs::write(&path, to_urdf_xml(&robot))?;
    Ok(path)
}

/// The conversion-timing robot: 35 links, 12 DOFs, ~10k triangles per link.
pub fn write_timing_robot(dir: &Path) -> io::Result<PathBuf> {
    write_mesh_robot(dir, "timing35", 35, 12, 71, 70)
}

/// Serial arm with box links, ending in `tool0`.
pub fn arm_model() -> RobotModel {
    let links = ["base", "shoulder", "upper", "fore", "tool0"];
    let mut specs: Vec<LinkSpec> = links.iter().map(|n| box_link(n, [0.1, 0.1, 0.1])).collect();
    specs[4] = LinkSpec::new("tool0");
    let joints = (1..links.len())
        .map(|i| {
            let (jt, lim) = if i == 4 { (JointType::Fixed, None) } else { (JointType::Revolute, Some((-2.0, 2.0))) };
            joint(&format!("arm_j{i}"), jt, links[i - 1], links[i], Pose::from_xyz([0.0, 0.0, 0.3]), [0.0, 1.0, 0.0], lim)
        })
        .collect();
    model("arm", specs, joints)
}

/// Two-finger gripper rooted at `palm`.
pub fn gripper_model() -> RobotModel {
    let mut right = joint(
        "right",
        JointType::Prismatic,
        "palm",
        "finger_r",
        Pose::from_xyz([0.0, -0.05, 0.08]),
        [0.0, -1.0, 0.0],
        Some((0.0, 0.04)),
    );
    right.mimic = Some(Mimic {
        source_joint: "left".into(),
        multiplier: 1.0,
        offset: 0.0,
    });
    model(
        "gripper",
        vec![
            box_link("palm", [0.05, 0.08, 0.03]),
            box_link("finger_l", [0.01, 0.01, 0.04]),
            box_link("finger_r", [0.01, 0.01, 0.04]),
        ],
        vec![
            joint("left", JointType::Prismatic, "palm", "finger_l", Pose::from_xyz([0.0, 0.05, 0.08]), [0.0, 1.0, 0.0], Some((0.0, 0.04))),
            right,
        ],
    )
}

/// Four-legged body with two-joint legs.
pub fn quadruped_model() -> RobotModel {
    let mut links = vec![box_link("trunk", [0.3, 0.15, 0.08])];
    let mut joints = Vec::new();
    for (leg, (x, y)) in [("fl", (0.25, 0.12)), ("fr", (0.25, -0.12)), ("rl", (-0.25, 0.12)), ("rr", (-0.25, -0.12))] {
        let hip = format!("{leg}_thigh");
        let shin = format!("{leg}_calf");
        links.push(box_link(&hip, [0.03, 0.03, 0.1]));
        links.push(box_link(&shin, [0.02, 0.02, 0.1]));
        joints.push(joint(&format!("{leg}_hip"), JointType::Revolute, "trunk", &hip, Pose::from_xyz([x, y, -0.1]), [0.0, 1.0, 0.0], Some((-1.0, 1.0))));
        joints.push(joint(&format!("{leg}_knee"), JointType::Revolute, &hip, &shin, Pose::from_xyz([0.0, 0.0, -0.2]), [0.0, 1.0, 0.0], Some((-2.5, -0.5))));
    }
    model("quadruped", links, joints)
}

/// Write `model` as `<dir>/<name>.urdf`.
pub fn write_urdf(dir: &Path, model: &RobotModel) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(format!("{}.urdf", model.name()));
    fs::write(&path, to_urdf_xml(model))?;
    Ok(path)
}
