//! Attaching one robot to another.
//!
//! Names from each source are prefixed so the union is collision free, the
//! child's root is hung from a link of the parent by a caller-supplied
//! joint, and every derived module is regenerated for the composite. Mesh
//! data is read from the sources' `original_meshes_module`, so composites
//! never refer back into another URDD.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use urdd_store::schema::{
    GeometryRef, GeometryRole, JointSpec, LinkSpec, OriginalMeshesModule, PassThrough, Shape, UrdfModule, UrdfSource,
};
use urdd_store::{sha256_hex, LoadMode, ManifestExtensions, ModulePayload, SourceRef, Urdd, MANIFEST_JSON};

use crate::error::{Error, GeometryError, Result};
use crate::geometry::{load_mesh, tessellate, MeshResolver, TriMesh};
use crate::model::{to_urdf_xml, RobotModel};
use crate::pipeline::{convert_model, ConvertOptions, ConvertReport};

/// How the child is attached to the parent.
#[derive(Debug, Clone, PartialEq)]
pub struct Attachment {
    /// Link of the parent the child hangs from, with or without its prefix.
    pub attach_link: String,
    /// The attachment joint. `child_link` must name the child's root (with
    /// or without prefix); `parent_link` may be empty or name `attach_link`.
    pub joint: JointSpec,
    /// Defaults to the parent's robot name followed by `/`.
    pub parent_prefix: Option<String>,
    /// Defaults to the child's robot name followed by `/`.
    pub child_prefix: Option<String>,
}

impl Attachment {
    pub fn new(attach_link: impl Into<String>, joint: JointSpec) -> Self {
        Attachment {
            attach_link: attach_link.into(),
            joint,
            parent_prefix: None,
            child_prefix: None,
        }
    }

    fn prefixes(&self, parent: &RobotModel, child: &RobotModel) -> (String, String) {
        (
            self.parent_prefix.clone().unwrap_or_else(|| format!("{}/", parent.name())),
            self.child_prefix.clone().unwrap_or_else(|| format!("{}/", child.name())),
        )
    }
}

/// The composite model: parent links, then child links; parent joints, the
/// attachment joint, then child joints.
pub fn combine_models(parent: &RobotModel, child: &RobotModel, attachment: &Attachment) -> Result<RobotModel> {
    let (pp, cp) = attachment.prefixes(parent, child);
    let attach = if parent.link(&attachment.attach_link).is_some() {
        format!("{pp}{}", attachment.attach_link)
    } else if attachment
        .attach_link
        .strip_prefix(pp.as_str())
        .is_some_and(|raw| parent.link(raw).is_some())
    {
        attachment.attach_link.clone()
    } else {
        return Err(Error::UnknownAttachLink(attachment.attach_link.clone()));
    };

    let mut joint = attachment.joint.clone();
    let child_root = format!("{cp}{}", child.root_link());
    if joint.child_link != child_root && joint.child_link != child.root_link() {
        return Err(Error::IllegalJoint(format!(
            "child_link `{}` is not the child's root link `{child_root}`",
            joint.child_link
        )));
    }
    joint.child_link = child_root;
    let raw_attach = &attach[pp.len()..];
    if !(joint.parent_link.is_empty() || joint.parent_link == attach || joint.parent_link == raw_attach) {
        return Err(Error::IllegalJoint(format!(
            "parent_link `{}` differs from the attach link `{attach}`",
            joint.parent_link
        )));
    }
    joint.parent_link = attach;

    let (p_links, p_joints, p_pass) = prefixed(parent, &pp);
    let (c_links, c_joints, c_pass) = prefixed(child, &cp);

    let mut seen = HashSet::new();
    for name in p_links.iter().chain(&c_links).map(|l| &l.name) {
        if !seen.insert(("link", name.clone())) {
            return Err(Error::NameCollision(name.clone()));
        }
    }
    for name in p_joints.iter().chain(&c_joints).chain([&joint]).map(|j| &j.name) {
        if !seen.insert(("joint", name.clone())) {
            return Err(Error::NameCollision(name.clone()));
        }
    }
    check_attachment_joint(&joint, p_joints.iter().chain(&c_joints))?;

    let links: Vec<LinkSpec> = p_links.into_iter().chain(c_links).collect();
    let joints: Vec<JointSpec> = p_joints.into_iter().chain([joint]).chain(c_joints).collect();
    let passthrough = PassThrough {
        elements: p_pass.elements.into_iter().chain(c_pass.elements).collect(),
        attributes: p_pass.attributes.into_iter().chain(c_pass.attributes).collect(),
    };
    Ok(RobotModel::new(
        format!("{}+{}", parent.name(), child.name()),
        links,
        joints,
        passthrough,
    )?)
}

/// The attachment joint on its own must be legal: checked in a two-link
/// model so its errors are reported as `IllegalJoint`.
fn check_attachment_joint<'a>(joint: &JointSpec, others: impl Iterator<Item = &'a JointSpec>) -> Result<()> {
    let mut alone = joint.clone();
    if let Some(m) = alone.mimic.take() {
        let source = others
            .into_iter()
            .find(|j| j.name == m.source_joint)
            .ok_or_else(|| Error::IllegalJoint(format!("mimic source `{}` does not exist", m.source_joint)))?;
        if !source.joint_type.is_single_axis() || !joint.joint_type.is_single_axis() {
            return Err(Error::IllegalJoint("mimic requires single-axis joints".into()));
        }
    }
    RobotModel::new(
        "attachment",
        vec![LinkSpec::new(alone.parent_link.as_str()), LinkSpec::new(alone.child_link.as_str())],
        vec![alone],
        PassThrough::default(),
    )
    .map(|_| ())
    .map_err(|e| Error::IllegalJoint(e.to_string()))
}

fn prefixed(model: &RobotModel, prefix: &str) -> (Vec<LinkSpec>, Vec<JointSpec>, PassThrough) {
    let p = |s: &str| format!("{prefix}{s}");
    let links = model
        .links()
        .iter()
        .map(|l| LinkSpec {
            name: p(&l.name),
            ..l.clone()
        })
        .collect();
    let joints = model
        .joints()
        .iter()
        .map(|j| {
            let mut j = j.clone();
            j.name = p(&j.name);
            j.parent_link = p(&j.parent_link);
            j.child_link = p(&j.child_link);
            if let Some(m) = &mut j.mimic {
                m.source_joint = p(&m.source_joint);
            }
            j
        })
        .collect();
    let mut link_names: Vec<&str> = model.links().iter().map(|l| l.name.as_str()).collect();
    let mut joint_names: Vec<&str> = model.joints().iter().map(|j| j.name.as_str()).collect();
    // Longest first, so a name that extends another is matched whole.
    link_names.sort_by_key(|n| std::cmp::Reverse(n.len()));
    joint_names.sort_by_key(|n| std::cmp::Reverse(n.len()));
    let rename = |ctx: &str| rename_context(ctx, "link:", &link_names, prefix)
        .or_else(|| rename_context(ctx, "joint:", &joint_names, prefix))
        .unwrap_or_else(|| ctx.to_string());
    let mut pass = model.passthrough().clone();
    for e in &mut pass.elements {
        e.context = rename(&e.context);
    }
    for a in &mut pass.attributes {
        a.context = rename(&a.context);
    }
    (links, joints, pass)
}

/// `kind<name>[/rest]` with `name` one of `names`, rewritten with `prefix`.
fn rename_context(ctx: &str, kind: &str, names: &[&str], prefix: &str) -> Option<String> {
    let rest = ctx.strip_prefix(kind)?;
    names.iter().find_map(|n| {
        let tail = rest.strip_prefix(n)?;
        (tail.is_empty() || tail.starts_with('/')).then(|| format!("{kind}{prefix}{n}{tail}"))
    })
}

/// Meshes of composite links, read from the sources' exported originals.
struct SourceMeshes {
    files: HashMap<(String, GeometryRole, usize), (PathBuf, String)>,
}

impl SourceMeshes {
    fn add(&mut self, urdd: &Urdd, prefix: &str) -> Result<()> {
        let name = OriginalMeshesModule::NAME;
        if !urdd.has_module(name) {
            return Ok(());
        }
        let module: OriginalMeshesModule = urdd.module()?;
        let dir = urdd.module_dir(name);
        for link in module.links {
            for g in link.geometries {
                self.files.insert(
                    (format!("{prefix}{}", link.link), g.role, g.role_index),
                    (dir.join(&g.files.obj), g.source),
                );
            }
        }
        Ok(())
    }
}

impl MeshResolver for SourceMeshes {
    fn resolve(&self, link: &str, role: GeometryRole, role_index: usize, geometry: &GeometryRef) -> std::result::Result<TriMesh, GeometryError> {
        if let Some((path, source)) = self.files.get(&(link.to_string(), role, role_index)) {
            let mut mesh = load_mesh(path, [1.0; 3])?;
            mesh.source = source.clone();
            return Ok(mesh);
        }
        match &geometry.shape {
            Shape::Mesh { filename, .. } => Err(GeometryError::Io {
                path: PathBuf::from(filename),
                source: std::io::Error::new(std::io::ErrorKind::NotFound, "mesh not exported by the source URDD"),
            }),
            other => Ok(tessellate(other, crate::geometry::primitives::DEFAULT_SEGMENTS).expect("primitive shape")),
        }
    }
}

fn has_mesh_geometry(model: &RobotModel) -> bool {
    model
        .links()
        .iter()
        .flat_map(|l| l.visual_geometries.iter().chain(&l.collision_geometries))
        .any(|g| matches!(g.shape, Shape::Mesh { .. }))
}

/// Combine the URDDs at `parent_dir` and `child_dir` into a new URDD at
/// `out`, regenerating every module selected by `options`.
pub fn combine(
    parent_dir: &Path,
    child_dir: &Path,
    attachment: &Attachment,
    out: &Path,
    options: &ConvertOptions,
) -> Result<ConvertReport> {
    let mut sources = Vec::new();
    for dir in [parent_dir, child_dir] {
        if !dir.is_dir() {
            return Err(Error::InvalidInput(format!("{} is not a URDD directory", dir.display())));
        }
        let urdd = Urdd::load(dir, LoadMode::Strict)?;
        let urdf: UrdfModule = urdd.module()?;
        let model = RobotModel::from_urdf_module(&urdf)?;
        let manifest_path = dir.join(MANIFEST_JSON);
        let digest = sha256_hex(&fs::read(&manifest_path).map_err(|e| Error::io(&manifest_path, e))?);
        sources.push((urdd, urdf, model, digest));
    }
    let (parent, child) = (&sources[0], &sources[1]);
    let composite = combine_models(&parent.2, &child.2, attachment)?;
    let (pp, cp) = attachment.prefixes(&parent.2, &child.2);

    let mut meshes = SourceMeshes { files: HashMap::new() };
    for ((urdd, _, model, _), prefix) in sources.iter().zip([&pp, &cp]) {
        if has_mesh_geometry(model) && !urdd.has_module(OriginalMeshesModule::NAME) {
            return Err(Error::MissingDependencyModule(format!(
                "{} in {}",
                OriginalMeshesModule::NAME,
                urdd.root().display()
            )));
        }
        meshes.add(urdd, prefix)?;
    }

    let source = UrdfSource {
        file_name: format!("{}.urdf", composite.name()),
        byte_size: to_urdf_xml(&composite).len() as u64,
        referenced_mesh_bytes: sources
            .iter()
            .filter_map(|s| s.1.source.as_ref())
            .map(|s| s.referenced_mesh_bytes)
            .sum(),
    };
    let extensions = ManifestExtensions {
        composed_from: sources
            .iter()
            .map(|(_, urdf, _, digest)| SourceRef {
                robot_name: urdf.robot_name.clone(),
                manifest_digest: digest.clone(),
            })
            .collect(),
    };
    convert_model(&composite, Some(source), &meshes, out, options, Some(extensions))
}
