use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use urdd_core::fixtures::{self, box_link, joint, PLANAR2_URDF};
use urdd_core::kinematics::{derive_bounds, derive_chain, derive_connections, derive_dof_map};
use urdd_core::{parse_urdf, RobotModel};
use urdd_store::schema::{DofKind, JointType, LinkSpec, Mimic, PassThrough, Pose};

fn planar2() -> RobotModel {
    parse_urdf(PLANAR2_URDF, Path::new(".")).unwrap()
}

fn model(links: &[&str], joints: Vec<urdd_store::schema::JointSpec>) -> RobotModel {
    RobotModel::new("m", links.iter().map(|n| LinkSpec::new(*n)).collect(), joints, PassThrough::default()).unwrap()
}

#[test]
fn dof_map_of_mixed_joints() {
    let z = [0.0, 0.0, 1.0];
    let mut j3 = joint("j3", JointType::Revolute, "b", "d", Pose::default(), z, Some((-1.0, 1.0)));
    j3.mimic = Some(Mimic {
        source_joint: "j1".into(),
        multiplier: -1.0,
        offset: 0.0,
    });
    let m = model(
        &["a", "b", "c", "d", "e"],
        vec![
            joint("j1", JointType::Revolute, "a", "b", Pose::default(), z, Some((-2.0, 2.0))),
            joint("j2", JointType::Fixed, "b", "c", Pose::default(), z, None),
            j3,
            joint("j4", JointType::Floating, "a", "e", Pose::default(), z, None),
        ],
    );
    let dofs = derive_dof_map(&m);
    assert_eq!(dofs.num_dofs, 7);
    let pairs: Vec<(&str, usize)> = dofs.dof_to_joint.iter().map(|e| (e.joint.as_str(), e.sub_index)).collect();
    assert_eq!(pairs, [("j1", 0), ("j4", 0), ("j4", 1), ("j4", 2), ("j4", 3), ("j4", 4), ("j4", 5)]);
    assert!(dofs.joint_to_dofs["j3"].is_empty());
    assert!(dofs.joint_to_dofs["j2"].is_empty());
    assert_eq!(dofs.mimic_bindings["j3"].source_joint, "j1");
    let kinds: Vec<DofKind> = dofs.dof_to_joint.iter().map(|e| e.kind).collect();
    assert_eq!(kinds[1..4], [DofKind::Translational; 3]);
    assert_eq!(kinds[4..], [DofKind::Rotational; 3]);

    let bounds = derive_bounds(&m, &dofs).unwrap();
    assert_eq!(bounds.bounds.len(), 7);
    assert_eq!((bounds.bounds[0].lower, bounds.bounds[0].upper, bounds.bounds[0].unbounded), (Some(-2.0), Some(2.0), false));
    assert!(bounds.bounds[1..].iter().all(|b| b.unbounded && b.lower.is_none() && b.joint == "j4"));
}

#[test]
fn all_fixed_robot_has_no_dofs() {
    let x = [1.0, 0.0, 0.0];
    let m = model(&["a", "b"], vec![joint("j", JointType::Fixed, "a", "b", Pose::default(), x, None)]);
    let dofs = derive_dof_map(&m);
    assert_eq!(dofs.num_dofs, 0);
    assert!(dofs.dof_to_joint.is_empty());
    assert!(derive_bounds(&m, &dofs).unwrap().bounds.is_empty());
}

#[test]
fn continuous_and_planar_bounds() {
    let z = [0.0, 0.0, 1.0];
    let m = model(
        &["a", "b", "c"],
        vec![
            joint("c1", JointType::Continuous, "a", "b", Pose::default(), z, None),
            joint("p1", JointType::Planar, "b", "c", Pose::default(), z, None),
        ],
    );
    let dofs = derive_dof_map(&m);
    assert_eq!(dofs.num_dofs, 4);
    let bounds = derive_bounds(&m, &dofs).unwrap();
    assert!(bounds.bounds[0].unbounded && bounds.bounds[0].lower.is_none());
    assert_eq!(bounds.bounds.iter().map(|b| b.dof_index).collect::<Vec<_>>(), [0, 1, 2, 3]);
}

#[test]
fn seven_dof_arm_bounds_have_seven_entries() {
    let m = fixtures::scale_model("xarm7_like", 7, 10, 2);
    let dofs = derive_dof_map(&m);
    let bounds = derive_bounds(&m, &dofs).unwrap();
    assert_eq!(bounds.bounds.iter().map(|b| b.dof_index).collect::<Vec<_>>(), (0..7).collect::<Vec<_>>());
}

#[test]
fn planar2_chain() {
    let chain = derive_chain(&planar2());
    assert_eq!(chain.root_link, "base_link");
    let nodes: Vec<(&str, Option<&str>, Vec<&str>)> = chain
        .nodes
        .iter()
        .map(|n| {
            (
                n.link_name.as_str(),
                n.parent_joint.as_deref(),
                n.child_joints.iter().map(String::as_str).collect(),
            )
        })
        .collect();
    assert_eq!(
        nodes,
        [
            ("base_link", None, vec!["j1"]),
            ("link1", Some("j1"), vec!["j2"]),
            ("link2", Some("j2"), vec!["ee"]),
            ("ee_link", Some("ee"), vec![]),
        ]
    );
}

#[test]
fn branching_torso_lists_both_shoulders() {
    let y = [0.0, 1.0, 0.0];
    let r = Some((-1.0, 1.0));
    let links: Vec<LinkSpec> = ["torso", "l_upper", "l_fore", "r_upper", "r_fore"].iter().map(|n| box_link(n, [0.1; 3])).collect();
    let m = RobotModel::new(
        "torso",
        links,
        vec![
            joint("l_shoulder", JointType::Revolute, "torso", "l_upper", Pose::default(), y, r),
            joint("l_elbow", JointType::Revolute, "l_upper", "l_fore", Pose::default(), y, r),
            joint("r_shoulder", JointType::Revolute, "torso", "r_upper", Pose::default(), y, r),
            joint("r_elbow", JointType::Revolute, "r_upper", "r_fore", Pose::default(), y, r),
        ],
        PassThrough::default(),
    )
    .unwrap();
    let chain = derive_chain(&m);
    assert_eq!(chain.nodes[0].child_joints, ["l_shoulder", "r_shoulder"]);
    let path = derive_connections(&m);
    let p = path.path("l_fore", "r_fore").unwrap();
    assert_eq!(p.joint_sequence, ["l_elbow", "l_shoulder", "r_shoulder", "r_elbow"]);
    assert_eq!(p.link_sequence, ["l_fore", "l_upper", "torso", "r_upper", "r_fore"]);
}

#[test]
fn planar2_connections() {
    let conn = derive_connections(&planar2());
    assert_eq!(conn.paths.len(), 16);
    assert_eq!(conn.path("base_link", "ee_link").unwrap().joint_sequence, ["j1", "j2", "ee"]);
    let own = conn.path("link1", "link1").unwrap();
    assert!(own.joint_sequence.is_empty());
    assert_eq!(own.link_sequence, ["link1"]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dof_maps_are_mutually_inverse(seed in any::<u64>(), links in 1usize..30) {
        let m = fixtures::random_tree(&mut ChaCha8Rng::seed_from_u64(seed), links);
        let dofs = derive_dof_map(&m);
        let expected: usize = m.joints().iter().filter(|j| j.mimic.is_none()).map(|j| j.joint_type.dof_count()).sum();
        prop_assert_eq!(dofs.num_dofs, expected);
        prop_assert_eq!(dofs.dof_to_joint.len(), dofs.num_dofs);
        prop_assert_eq!(dofs.joint_to_dofs.len(), m.joints().len());
        for (i, e) in dofs.dof_to_joint.iter().enumerate() {
            prop_assert_eq!(dofs.joint_to_dofs[&e.joint][e.sub_index], i);
        }
        for (j, list) in &dofs.joint_to_dofs {
            for (sub, &i) in list.iter().enumerate() {
                prop_assert_eq!(&dofs.dof_to_joint[i].joint, j);
                prop_assert_eq!(dofs.dof_to_joint[i].sub_index, sub);
            }
        }
        let bounds = derive_bounds(&m, &dofs).unwrap();
        prop_assert_eq!(bounds.bounds.len(), dofs.num_dofs);
    }

    #[test]
    fn chain_is_topologically_ordered(seed in any::<u64>(), links in 1usize..40) {
        let m = fixtures::random_tree(&mut ChaCha8Rng::seed_from_u64(seed), links);
        let chain = derive_chain(&m);
        prop_assert_eq!(chain.nodes.len(), links);
        prop_assert_eq!(chain.nodes.iter().filter(|n| n.parent_joint.is_none()).count(), 1);
        let mut seen = BTreeSet::new();
        let mut children = BTreeSet::new();
        for n in &chain.nodes {
            if let Some(p) = &n.parent_link {
                prop_assert!(seen.contains(p.as_str()), "{} before its parent {}", n.link_name, p);
            }
            seen.insert(n.link_name.as_str());
            for c in &n.child_joints {
                prop_assert!(children.insert(c.clone()), "joint {} listed twice", c);
            }
        }
        prop_assert_eq!(children.len(), links - 1);
    }

    #[test]
    fn paths_are_simple_and_reversible(seed in any::<u64>(), links in 1usize..20) {
        let m = fixtures::random_tree(&mut ChaCha8Rng::seed_from_u64(seed), links);
        let conn = derive_connections(&m);
        prop_assert_eq!(conn.paths.len(), links * links);
        let joints: HashMap<&str, (&str, &str)> =
            m.joints().iter().map(|j| (j.name.as_str(), (j.parent_link.as_str(), j.child_link.as_str()))).collect();
        for p in &conn.paths {
            prop_assert_eq!(p.link_sequence.len(), p.joint_sequence.len() + 1);
            let unique: BTreeSet<&String> = p.link_sequence.iter().collect();
            prop_assert_eq!(unique.len(), p.link_sequence.len());
            for (k, j) in p.joint_sequence.iter().enumerate() {
                let (a, b) = joints[j.as_str()];
                let (x, y) = (p.link_sequence[k].as_str(), p.link_sequence[k + 1].as_str());
                prop_assert!((a, b) == (x, y) || (a, b) == (y, x));
            }
            let back = conn.path(&p.to_link, &p.from_link).unwrap();
            let reversed: Vec<String> = back.joint_sequence.iter().rev().cloned().collect();
            prop_assert_eq!(&reversed, &p.joint_sequence);
        }
    }
}
