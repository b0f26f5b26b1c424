//! DOF, chain, connections and bounds derivation.

use std::collections::BTreeMap;

use urdd_store::schema::{
    BoundsEntry, BoundsModule, ChainModule, ChainNode, ConnectionPath, ConnectionsModule, DofEntry,
    DofKind, DofMap, JointType,
};

use crate::error::ModelError;
use crate::model::RobotModel;

/// Kinds of the configuration variables a non-mimic joint contributes.
pub fn dof_kinds(joint_type: JointType) -> &'static [DofKind] {
    use DofKind::{Rotational as R, Translational as T};
    match joint_type {
        JointType::Revolute | JointType::Continuous => &[R],
        JointType::Prismatic => &[T],
        JointType::Planar => &[T, T, R],
        JointType::Floating => &[T, T, T, R, R, R],
        JointType::Fixed => &[],
    }
}

pub fn derive_dof_map(model: &RobotModel) -> DofMap {
    let mut dof_to_joint = Vec::new();
    let mut joint_to_dofs = BTreeMap::new();
    let mut mimic_bindings = BTreeMap::new();
    for (ji, j) in model.joints().iter().enumerate() {
        let mut indices = Vec::new();
        if let Some(m) = &j.mimic {
            mimic_bindings.insert(j.name.clone(), m.clone());
        } else {
            for (sub, &kind) in dof_kinds(j.joint_type).iter().enumerate() {
                indices.push(dof_to_joint.len());
                dof_to_joint.push(DofEntry {
                    joint: j.name.clone(),
                    joint_index: ji,
                    sub_index: sub,
                    kind,
                });
            }
        }
        joint_to_dofs.insert(j.name.clone(), indices);
    }
    DofMap {
        num_dofs: dof_to_joint.len(),
        joint_names: model.joints().iter().map(|j| j.name.clone()).collect(),
        dof_to_joint,
        joint_to_dofs,
        mimic_bindings,
    }
}

pub fn derive_chain(model: &RobotModel) -> ChainModule {
    let nodes = model
        .bfs_order()
        .into_iter()
        .map(|l| {
            let parent = model.parent_joint_of(l);
            ChainNode {
                link_name: model.links()[l].name.clone(),
                parent_joint: parent.map(|j| model.joints()[j].name.clone()),
                parent_link: parent.map(|j| model.joints()[j].parent_link.clone()),
                child_joints: model
                    .child_joints_of(l)
                    .iter()
                    .map(|&j| model.joints()[j].name.clone())
                    .collect(),
            }
        })
        .collect();
    ChainModule {
        root_link: model.root_link().to_string(),
        nodes,
    }
}

/// Tree paths for all `L²` ordered link pairs, row-major in link document order.
pub fn derive_connections(model: &RobotModel) -> ConnectionsModule {
    let n = model.links().len();
    // Root-to-link index paths.
    let mut lineage: Vec<Vec<usize>> = vec![Vec::new(); n];
    for l in model.bfs_order() {
        lineage[l] = match model.parent_link_of(l) {
            Some(p) => {
                let mut v = lineage[p].clone();
                v.push(l);
                v
            }
            None => vec![l],
        };
    }
    let link_name = |l: usize| model.links()[l].name.clone();
    let joint_name = |l: usize| {
        model.joints()[model.parent_joint_of(l).expect("non-root link has a parent joint")]
            .name
            .clone()
    };

    let mut paths = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let (pa, pb) = (&lineage[a], &lineage[b]);
            let common = pa.iter().zip(pb).take_while(|(x, y)| x == y).count();
            let mut joint_sequence = Vec::new();
            let mut link_sequence = Vec::new();
            for &l in pa[common..].iter().rev() {
                link_sequence.push(link_name(l));
                joint_sequence.push(joint_name(l));
            }
            link_sequence.push(link_name(pa[common - 1]));
            for &l in &pb[common..] {
                joint_sequence.push(joint_name(l));
                link_sequence.push(link_name(l));
            }
            paths.push(ConnectionPath {
                from_link: link_name(a),
                to_link: link_name(b),
                joint_sequence,
                link_sequence,
            });
        }
    }
    ConnectionsModule {
        links: model.links().iter().map(|l| l.name.clone()).collect(),
        paths,
    }
}

pub fn derive_bounds(model: &RobotModel, dof_map: &DofMap) -> Result<BoundsModule, ModelError> {
    let mut bounds = Vec::with_capacity(dof_map.num_dofs);
    for (i, entry) in dof_map.dof_to_joint.iter().enumerate() {
        let joint = &model.joints()[entry.joint_index];
        let (lower, upper) = match joint.joint_type {
            JointType::Revolute | JointType::Prismatic => {
                let limits = joint.limits.ok_or_else(|| ModelError::MissingLimits(joint.name.clone()))?;
                (limits.lower, limits.upper)
            }
            _ => (None, None),
        };
        if let (Some(lo), Some(hi)) = (lower, upper) {
            if lo > hi {
                return Err(ModelError::InvertedLimits {
                    joint: joint.name.clone(),
                    lower: lo,
                    upper: hi,
                });
            }
        }
        bounds.push(BoundsEntry {
            dof_index: i,
            joint: entry.joint.clone(),
            kind: entry.kind,
            lower,
            upper,
            unbounded: lower.is_none() || upper.is_none(),
        });
    }
    Ok(BoundsModule { bounds })
}
