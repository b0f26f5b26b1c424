use std::collections::{BTreeMap, HashMap};

use nalgebra::Vector3;
use urdd_store::schema::{
    ChainModule, ConnectionsModule, DofMap, JointSpec, JointType, UrdfModule,
};
use urdd_store::Urdd;

use crate::error::FkError;
use crate::transform::RigidTransform;

type Result<T> = std::result::Result<T, FkError>;

/// How a joint obtains its motion value(s) from the configuration vector.
#[derive(Debug, Clone, PartialEq)]
enum Drive {
    Fixed,
    /// First of `dof_count` contiguous configuration entries.
    Direct(usize),
    /// `multiplier * q[dof] + offset`, already flattened through mimic chains.
    Mimic { dof: usize, multiplier: f64, offset: f64 },
}

#[derive(Debug, Clone)]
struct JointKin {
    joint_type: JointType,
    origin: RigidTransform,
    axis: Vector3<f64>,
    parent: usize,
    child: usize,
    drive: Drive,
}

/// Kinematic model assembled from URDD modules alone.
///
/// Links are indexed in `urdf_module` document order; `compute` evaluates
/// them in chain order so every parent precedes its children.
#[derive(Debug, Clone)]
pub struct FkModel {
    links: Vec<String>,
    link_index: HashMap<String, usize>,
    joints: Vec<JointKin>,
    joint_index: HashMap<String, usize>,
    root: usize,
    /// `(child link, joint)` in chain order, root excluded.
    order: Vec<(usize, usize)>,
    num_dofs: usize,
    connections: Option<ConnectionsModule>,
}

/// World-frame pose of every link.
#[derive(Debug, Clone, PartialEq)]
pub struct FkResult {
    pub poses: BTreeMap<String, RigidTransform>,
}

impl FkResult {
    pub fn get(&self, link: &str) -> Option<&RigidTransform> {
        self.poses.get(link)
    }

    pub fn len(&self) -> usize {
        self.poses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poses.is_empty()
    }
}

impl FkModel {
    /// Load the urdf, dof and chain modules (and connections, when present).
    pub fn from_urdd(urdd: &Urdd) -> Result<Self> {
        let urdf: UrdfModule = urdd.module()?;
        let dofs: DofMap = urdd.module()?;
        let chain: ChainModule = urdd.module()?;
        let connections = if urdd.has_module("connections_module") {
            Some(urdd.module::<ConnectionsModule>()?)
        } else {
            None
        };
        Self::from_modules(&urdf, &dofs, &chain, connections)
    }

    pub fn from_modules(
        urdf: &UrdfModule,
        dofs: &DofMap,
        chain: &ChainModule,
        connections: Option<ConnectionsModule>,
    ) -> Result<Self> {
        let links: Vec<String> = urdf.links.iter().map(|l| l.name.clone()).collect();
        let link_index: HashMap<String, usize> =
            links.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        let joint_index: HashMap<String, usize> = urdf
            .joints
            .iter()
            .enumerate()
            .map(|(i, j)| (j.name.clone(), i))
            .collect();
        let lookup_link = |name: &str| {
            link_index
                .get(name)
                .copied()
                .ok_or_else(|| FkError::Inconsistent(format!("joint references unknown link `{name}`")))
        };

        let mut joints = Vec::with_capacity(urdf.joints.len());
        for j in &urdf.joints {
            let drive = resolve_drive(j, urdf, dofs, &joint_index)?;
            joints.push(JointKin {
                joint_type: j.joint_type,
                origin: RigidTransform::from_xyz_rpy(j.origin.xyz, j.origin.rpy),
                axis: Vector3::from(j.axis),
                parent: lookup_link(&j.parent_link)?,
                child: lookup_link(&j.child_link)?,
                drive,
            });
        }

        let root = *link_index
            .get(&chain.root_link)
            .ok_or_else(|| FkError::Inconsistent(format!("unknown root link `{}`", chain.root_link)))?;
        if chain.nodes.len() != links.len() {
            return Err(FkError::Inconsistent(format!(
                "chain has {} nodes, urdf has {} links",
                chain.nodes.len(),
                links.len()
            )));
        }
        let mut seen = vec![false; links.len()];
        seen[root] = true;
        let mut order = Vec::with_capacity(links.len().saturating_sub(1));
        for node in &chain.nodes {
            let Some(joint_name) = &node.parent_joint else {
                if node.link_name != chain.root_link {
                    return Err(FkError::Inconsistent(format!(
                        "non-root link `{}` has no parent joint",
                        node.link_name
                    )));
                }
                continue;
            };
            let child = lookup_link(&node.link_name)?;
            let ji = *joint_index
                .get(joint_name)
                .ok_or_else(|| FkError::Inconsistent(format!("unknown joint `{joint_name}`")))?;
            let joint = &joints[ji];
            if joint.child != child || !seen[joint.parent] || seen[child] {
                return Err(FkError::Inconsistent(format!(
                    "chain node `{}` is out of order or mismatched with joint `{joint_name}`",
                    node.link_name
                )));
            }
            seen[child] = true;
            order.push((child, ji));
        }

        Ok(FkModel {
            links,
            link_index,
            joints,
            joint_index,
            root,
            order,
            num_dofs: dofs.num_dofs,
            connections,
        })
    }

    pub fn num_dofs(&self) -> usize {
        self.num_dofs
    }

    pub fn links(&self) -> &[String] {
        &self.links
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.link_index.get(name).copied()
    }

    pub fn root_link(&self) -> &str {
        &self.links[self.root]
    }

    fn check_configuration(&self, q: &[f64]) -> Result<()> {
        if q.len() != self.num_dofs {
            return Err(FkError::DimensionMismatch {
                expected: self.num_dofs,
                got: q.len(),
            });
        }
        if let Some(index) = q.iter().position(|v| !v.is_finite()) {
            return Err(FkError::NonFinite { index });
        }
        Ok(())
    }

    /// Poses of all links, indexed like [`FkModel::links`].
    pub fn compute(&self, q: &[f64], base: &RigidTransform) -> Result<Vec<RigidTransform>> {
        let mut out = Vec::new();
        self.compute_into(q, base, &mut out)?;
        Ok(out)
    }

    /// Like [`FkModel::compute`] but reuses `out`.
    pub fn compute_into(
        &self,
        q: &[f64],
        base: &RigidTransform,
        out: &mut Vec<RigidTransform>,
    ) -> Result<()> {
        self.check_configuration(q)?;
        out.clear();
        out.resize(self.links.len(), RigidTransform::identity());
        out[self.root] = *base;
        for &(child, ji) in &self.order {
            let joint = &self.joints[ji];
            let local = joint.origin * motion(joint, q);
            out[child] = out[joint.parent] * local;
        }
        Ok(())
    }

    pub fn fk(&self, q: &[f64], base: &RigidTransform) -> Result<FkResult> {
        let poses = self.compute(q, base)?;
        Ok(FkResult {
            poses: self.links.iter().cloned().zip(poses).collect(),
        })
    }

    /// Pose of one link, composed along the connections path from the root.
    pub fn fk_link(&self, q: &[f64], link: &str, base: &RigidTransform) -> Result<RigidTransform> {
        self.check_configuration(q)?;
        if !self.link_index.contains_key(link) {
            return Err(FkError::UnknownLink(link.to_string()));
        }
        let connections = self
            .connections
            .as_ref()
            .ok_or_else(|| FkError::MissingDependencyModule("connections_module".into()))?;
        let path = connections
            .path(self.root_link(), link)
            .ok_or_else(|| FkError::UnknownLink(link.to_string()))?;
        let mut pose = *base;
        for (step, joint_name) in path.joint_sequence.iter().enumerate() {
            let ji = *self
                .joint_index
                .get(joint_name)
                .ok_or_else(|| FkError::Inconsistent(format!("unknown joint `{joint_name}` in path")))?;
            let joint = &self.joints[ji];
            let local = joint.origin * motion(joint, q);
            let from = &path.link_sequence[step];
            if self.links[joint.parent] == *from {
                pose = pose * local;
            } else {
                pose = pose * local.inverse();
            }
        }
        Ok(pose)
    }
}

fn motion(joint: &JointKin, q: &[f64]) -> RigidTransform {
    let scalar = || match joint.drive {
        Drive::Direct(i) => q[i],
        Drive::Mimic {
            dof,
            multiplier,
            offset,
        } => multiplier * q[dof] + offset,
        Drive::Fixed => 0.0,
    };
    match joint.joint_type {
        JointType::Fixed => RigidTransform::identity(),
        JointType::Revolute | JointType::Continuous => {
            RigidTransform::from_axis_angle(&joint.axis, scalar())
        }
        JointType::Prismatic => RigidTransform::from_translation(joint.axis * scalar()),
        JointType::Planar => {
            let Drive::Direct(i) = joint.drive else {
                return RigidTransform::identity();
            };
            let (u, v) = plane_basis(&joint.axis);
            let mut t = RigidTransform::from_axis_angle(&joint.axis, q[i + 2]);
            t.translation = u * q[i] + v * q[i + 1];
            t
        }
        JointType::Floating => {
            let Drive::Direct(i) = joint.drive else {
                return RigidTransform::identity();
            };
            RigidTransform::from_xyz_rpy([q[i], q[i + 1], q[i + 2]], [q[i + 3], q[i + 4], q[i + 5]])
        }
    }
}

/// In-plane orthonormal basis `(u, v)` for a plane with unit normal `n`.
///
/// `u` is the first world axis not parallel to `n`, projected into the plane;
/// `v = n × u`, so `(u, v, n)` is right-handed.
pub fn plane_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    let e = axes
        .into_iter()
        .find(|e| e.dot(n).abs() < 1.0 - 1e-6)
        .unwrap_or_else(Vector3::x);
    let u = (e - n * e.dot(n)).normalize();
    (u, n.cross(&u))
}

fn resolve_drive(
    joint: &JointSpec,
    urdf: &UrdfModule,
    dofs: &DofMap,
    joint_index: &HashMap<String, usize>,
) -> Result<Drive> {
    if joint.joint_type == JointType::Fixed {
        return Ok(Drive::Fixed);
    }
    let mut multiplier = 1.0;
    let mut offset = 0.0;
    let mut current = joint;
    let mut steps = 0;
    loop {
        let binding = dofs.mimic_bindings.get(&current.name);
        match binding {
            None => {
                let indices = dofs.joint_to_dofs.get(&current.name).ok_or_else(|| {
                    FkError::Inconsistent(format!("joint `{}` missing from dof map", current.name))
                })?;
                let expected = current.joint_type.dof_count();
                if indices.len() != expected || indices.windows(2).any(|w| w[1] != w[0] + 1) {
                    return Err(FkError::Inconsistent(format!(
                        "joint `{}` maps to {:?}, expected {expected} contiguous DOFs",
                        current.name, indices
                    )));
                }
                if indices.iter().any(|&i| i >= dofs.num_dofs) {
                    return Err(FkError::Inconsistent(format!(
                        "joint `{}` maps past num_dofs",
                        current.name
                    )));
                }
                let first = indices[0];
                return Ok(if steps == 0 {
                    Drive::Direct(first)
                } else {
                    Drive::Mimic {
                        dof: first,
                        multiplier,
                        offset,
                    }
                });
            }
            Some(m) => {
                // value = multiplier * (m.multiplier * src + m.offset) + offset
                offset += multiplier * m.offset;
                multiplier *= m.multiplier;
                steps += 1;
                if steps > urdf.joints.len() {
                    return Err(FkError::Inconsistent(format!(
                        "mimic cycle through joint `{}`",
                        joint.name
                    )));
                }
                let src = *joint_index.get(&m.source_joint).ok_or_else(|| {
                    FkError::Inconsistent(format!("unknown mimic source `{}`", m.source_joint))
                })?;
                current = &urdf.joints[src];
                if !current.joint_type.is_single_axis() {
                    return Err(FkError::Inconsistent(format!(
                        "mimic source `{}` is not a single-axis joint",
                        current.name
                    )));
                }
            }
        }
    }
}

/// Forward kinematics of every link, from a loaded URDD.
pub fn fk(urdd: &Urdd, q: &[f64], base: &RigidTransform) -> Result<FkResult> {
    FkModel::from_urdd(urdd)?.fk(q, base)
}

/// Forward kinematics of one link, from a loaded URDD.
pub fn fk_link(urdd: &Urdd, q: &[f64], link: &str, base: &RigidTransform) -> Result<RigidTransform> {
    FkModel::from_urdd(urdd)?.fk_link(q, link, base)
}
