//! Validated in-memory robot description.

mod parse;
mod write;

use std::collections::{HashMap, HashSet, VecDeque};

use urdd_store::schema::{
    GeometryRef, JointSpec, JointType, LinkSpec, PassThrough, Shape, UrdfModule, UrdfSource,
};

use crate::error::ModelError;

pub use parse::{parse_urdf, parse_urdf_with, resolve_mesh_path, ParseOptions};
pub use write::to_urdf_xml;

/// A robot whose links and joints form a single tree.
///
/// Construction through [`RobotModel::new`] is the only way to obtain one,
/// so every instance satisfies the tree, naming, limit and mimic invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct RobotModel {
    name: String,
    links: Vec<LinkSpec>,
    joints: Vec<JointSpec>,
    root_link: String,
    passthrough: PassThrough,
    link_index: HashMap<String, usize>,
    joint_index: HashMap<String, usize>,
    /// Joint index whose child is the link, per link index.
    parent_joint: Vec<Option<usize>>,
    /// Joint indices whose parent is the link, in document order.
    child_joints: Vec<Vec<usize>>,
}

impl RobotModel {
    pub fn new(
        name: impl Into<String>,
        links: Vec<LinkSpec>,
        joints: Vec<JointSpec>,
        passthrough: PassThrough,
    ) -> Result<Self, ModelError> {
        let name = name.into();
        if links.is_empty() {
            return Err(ModelError::NoLinks);
        }

        let mut link_index = HashMap::with_capacity(links.len());
        for (i, l) in links.iter().enumerate() {
            if link_index.insert(l.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateName {
                    kind: "link",
                    name: l.name.clone(),
                });
            }
            validate_link(l)?;
        }
        let mut joint_index = HashMap::with_capacity(joints.len());
        for (i, j) in joints.iter().enumerate() {
            if joint_index.insert(j.name.clone(), i).is_some() {
                return Err(ModelError::DuplicateName {
                    kind: "joint",
                    name: j.name.clone(),
                });
            }
        }

        let mut parent_joint: Vec<Option<usize>> = vec![None; links.len()];
        let mut child_joints: Vec<Vec<usize>> = vec![Vec::new(); links.len()];
        for (ji, j) in joints.iter().enumerate() {
            let dangling = |link: &str| ModelError::DanglingLinkReference {
                joint: j.name.clone(),
                link: link.to_string(),
            };
            let p = *link_index.get(&j.parent_link).ok_or_else(|| dangling(&j.parent_link))?;
            let c = *link_index.get(&j.child_link).ok_or_else(|| dangling(&j.child_link))?;
            if p == c {
                return Err(ModelError::KinematicLoop(format!(
                    "joint `{}` connects link `{}` to itself",
                    j.name, j.parent_link
                )));
            }
            if let Some(prev) = parent_joint[c] {
                return Err(ModelError::KinematicLoop(format!(
                    "link `{}` is the child of both `{}` and `{}`",
                    j.child_link, joints[prev].name, j.name
                )));
            }
            parent_joint[c] = Some(ji);
            child_joints[p].push(ji);
            validate_joint(j)?;
        }

        let roots: Vec<usize> = (0..links.len()).filter(|&i| parent_joint[i].is_none()).collect();
        if roots.len() > 1 {
            return Err(ModelError::MultipleRoots(
                roots.iter().map(|&i| links[i].name.clone()).collect(),
            ));
        }
        // Every link has at most one parent; no root at all, or links not
        // reached from the root, means a cycle.
        let Some(&root) = roots.first() else {
            return Err(ModelError::KinematicLoop("every link has a parent joint".into()));
        };
        let mut reached = vec![false; links.len()];
        reached[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(l) = queue.pop_front() {
            for &ji in &child_joints[l] {
                let c = link_index[&joints[ji].child_link];
                if !reached[c] {
                    reached[c] = true;
                    queue.push_back(c);
                }
            }
        }
        if let Some(lost) = reached.iter().position(|r| !r) {
            return Err(ModelError::KinematicLoop(format!(
                "link `{}` lies on a cycle unreachable from root `{}`",
                links[lost].name, links[root].name
            )));
        }

        validate_mimics(&joints, &joint_index)?;

        let root_link = links[root].name.clone();
        Ok(RobotModel {
            name,
            links,
            joints,
            root_link,
            passthrough,
            link_index,
            joint_index,
            parent_joint,
            child_joints,
        })
    }

    pub fn from_urdf_module(module: &UrdfModule) -> Result<Self, ModelError> {
        let model = RobotModel::new(
            module.robot_name.clone(),
            module.links.clone(),
            module.joints.clone(),
            module.passthrough.clone(),
        )?;
        if model.root_link != module.root_link {
            return Err(ModelError::InvalidValue {
                context: "urdf_module".into(),
                message: format!(
                    "root_link `{}` disagrees with the tree root `{}`",
                    module.root_link, model.root_link
                ),
            });
        }
        Ok(model)
    }

    pub fn to_urdf_module(&self, source: Option<UrdfSource>) -> UrdfModule {
        UrdfModule {
            robot_name: self.name.clone(),
            root_link: self.root_link.clone(),
            links: self.links.clone(),
            joints: self.joints.clone(),
            passthrough: self.passthrough.clone(),
            source,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn links(&self) -> &[LinkSpec] {
        &self.links
    }

    pub fn joints(&self) -> &[JointSpec] {
        &self.joints
    }

    pub fn root_link(&self) -> &str {
        &self.root_link
    }

    pub fn root_index(&self) -> usize {
        self.link_index[&self.root_link]
    }

    pub fn passthrough(&self) -> &PassThrough {
        &self.passthrough
    }

    pub fn link(&self, name: &str) -> Option<&LinkSpec> {
        self.link_index.get(name).map(|&i| &self.links[i])
    }

    pub fn joint(&self, name: &str) -> Option<&JointSpec> {
        self.joint_index.get(name).map(|&i| &self.joints[i])
    }

    pub fn link_index(&self, name: &str) -> Option<usize> {
        self.link_index.get(name).copied()
    }

    pub fn joint_index(&self, name: &str) -> Option<usize> {
        self.joint_index.get(name).copied()
    }

    /// Index of the joint whose child is link `link`, `None` for the root.
    pub fn parent_joint_of(&self, link: usize) -> Option<usize> {
        self.parent_joint[link]
    }

    pub fn child_joints_of(&self, link: usize) -> &[usize] {
        &self.child_joints[link]
    }

    pub fn parent_link_of(&self, link: usize) -> Option<usize> {
        self.parent_joint[link].map(|j| self.link_index[&self.joints[j].parent_link])
    }

    pub fn child_link_of_joint(&self, joint: usize) -> usize {
        self.link_index[&self.joints[joint].child_link]
    }

    pub fn parent_link_of_joint(&self, joint: usize) -> usize {
        self.link_index[&self.joints[joint].parent_link]
    }

    /// Link indices in breadth-first order from the root; children of a link
    /// follow its child-joint document order.
    pub fn bfs_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.links.len());
        let mut queue = VecDeque::from([self.root_index()]);
        while let Some(l) = queue.pop_front() {
            order.push(l);
            for &j in &self.child_joints[l] {
                queue.push_back(self.child_link_of_joint(j));
            }
        }
        order
    }

    /// Depth of each link (root = 0), indexed by link.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.links.len()];
        for l in self.bfs_order() {
            if let Some(p) = self.parent_link_of(l) {
                depth[l] = depth[p] + 1;
            }
        }
        depth
    }

    /// Distinct mesh filenames referenced anywhere, in first-seen order.
    pub fn mesh_filenames(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for l in &self.links {
            for g in l.visual_geometries.iter().chain(&l.collision_geometries) {
                if let Shape::Mesh { filename, .. } = &g.shape {
                    if seen.insert(filename.as_str()) {
                        out.push(filename.as_str());
                    }
                }
            }
        }
        out
    }
}

fn invalid(context: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::InvalidValue {
        context: context.into(),
        message: message.into(),
    }
}

fn validate_link(l: &LinkSpec) -> Result<(), ModelError> {
    let ctx = format!("link `{}`", l.name);
    if let Some(inertial) = &l.inertial {
        if !(inertial.mass >= 0.0) || !inertial.mass.is_finite() {
            return Err(invalid(&ctx, format!("mass {} must be finite and ≥ 0", inertial.mass)));
        }
        if !inertial.origin.is_finite() {
            return Err(invalid(&ctx, "inertial origin is not finite"));
        }
        let t = &inertial.inertia;
        if ![t.ixx, t.ixy, t.ixz, t.iyy, t.iyz, t.izz].iter().all(|v| v.is_finite()) {
            return Err(invalid(&ctx, "inertia tensor is not finite"));
        }
    }
    for g in l.visual_geometries.iter().chain(&l.collision_geometries) {
        validate_geometry(&ctx, g)?;
    }
    Ok(())
}

fn validate_geometry(ctx: &str, g: &GeometryRef) -> Result<(), ModelError> {
    if !g.origin.is_finite() {
        return Err(invalid(ctx, "geometry origin is not finite"));
    }
    let positive = |what: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(invalid(ctx, format!("{what} must be positive, got {v}")))
        }
    };
    match &g.shape {
        Shape::Mesh { filename, scale } => {
            if filename.is_empty() {
                return Err(invalid(ctx, "empty mesh filename"));
            }
            for s in scale {
                if !s.is_finite() || *s == 0.0 {
                    return Err(invalid(ctx, format!("mesh scale component {s} must be finite and non-zero")));
                }
            }
            Ok(())
        }
        Shape::Box { half_extents } => half_extents.iter().try_for_each(|&h| positive("box size", h)),
        Shape::Cylinder { radius, length } | Shape::Capsule { radius, length } => {
            positive("radius", *radius)?;
            positive("length", *length)
        }
        Shape::Sphere { radius } => positive("radius", *radius),
    }
}

fn validate_joint(j: &JointSpec) -> Result<(), ModelError> {
    let ctx = format!("joint `{}`", j.name);
    if !j.origin.is_finite() {
        return Err(invalid(&ctx, "origin is not finite"));
    }
    if j.joint_type != JointType::Fixed && j.joint_type != JointType::Floating {
        let norm = j.axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > 1e-9 {
            return Err(invalid(&ctx, format!("axis {:?} is not a unit vector", j.axis)));
        }
    }
    match j.joint_type {
        JointType::Revolute | JointType::Prismatic => {
            let limits = j.limits.ok_or_else(|| ModelError::MissingLimits(j.name.clone()))?;
            let (Some(lower), Some(upper)) = (limits.lower, limits.upper) else {
                return Err(ModelError::MissingLimits(j.name.clone()));
            };
            if !lower.is_finite() || !upper.is_finite() {
                return Err(invalid(&ctx, "limits must be finite"));
            }
            if lower > upper {
                return Err(ModelError::InvertedLimits {
                    joint: j.name.clone(),
                    lower,
                    upper,
                });
            }
        }
        _ => {
            if let Some(l) = j.limits {
                if l.lower.is_some() || l.upper.is_some() {
                    return Err(invalid(
                        &ctx,
                        format!("{} joints carry no position limits", j.joint_type.as_str()),
                    ));
                }
            }
        }
    }
    if let Some(m) = &j.mimic {
        if !j.joint_type.is_single_axis() {
            return Err(ModelError::InvalidMimic {
                joint: j.name.clone(),
                reason: format!("{} joints cannot mimic", j.joint_type.as_str()),
            });
        }
        if !m.multiplier.is_finite() || !m.offset.is_finite() {
            return Err(ModelError::InvalidMimic {
                joint: j.name.clone(),
                reason: "multiplier and offset must be finite".into(),
            });
        }
    }
    Ok(())
}

fn validate_mimics(
    joints: &[JointSpec],
    joint_index: &HashMap<String, usize>,
) -> Result<(), ModelError> {
    for j in joints {
        let Some(m) = &j.mimic else { continue };
        let Some(&src) = joint_index.get(&m.source_joint) else {
            return Err(ModelError::InvalidMimic {
                joint: j.name.clone(),
                reason: format!("source joint `{}` does not exist", m.source_joint),
            });
        };
        let src = &joints[src];
        if !src.joint_type.is_single_axis() {
            return Err(ModelError::InvalidMimic {
                joint: j.name.clone(),
                reason: format!(
                    "source joint `{}` is {}, not single-axis",
                    src.name,
                    src.joint_type.as_str()
                ),
            });
        }
    }
    for (start, j) in joints.iter().enumerate() {
        let mut current = start;
        let mut steps = 0;
        while let Some(m) = &joints[current].mimic {
            current = joint_index[&m.source_joint];
            steps += 1;
            if current == start || steps > joints.len() {
                return Err(ModelError::MimicCycle(j.name.clone()));
            }
        }
    }
    Ok(())
}
