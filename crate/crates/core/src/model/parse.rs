use std::path::{Path, PathBuf};

use roxmltree::{Document, Node};
use urdd_store::schema::{
    GeometryRef, Inertial, InertiaTensor, JointLimits, JointSpec, JointType, LinkSpec, Mimic,
    PassThrough, Pose, RawAttribute, RawElement, Shape,
};

use super::RobotModel;
use crate::error::ModelError;

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Fail with `MissingMeshFile` when a referenced mesh cannot be found.
    pub eager_asset_check: bool,
}

/// Parse URDF text without touching the filesystem.
pub fn parse_urdf(xml: &str, asset_root: &Path) -> Result<RobotModel, ModelError> {
    parse_urdf_with(xml, asset_root, &ParseOptions::default())
}

pub fn parse_urdf_with(
    xml: &str,
    asset_root: &Path,
    options: &ParseOptions,
) -> Result<RobotModel, ModelError> {
    let doc = Document::parse(xml).map_err(|e| ModelError::MalformedXml(e.to_string()))?;
    let robot = doc.root_element();
    if robot.tag_name().name() != "robot" {
        return Err(ModelError::MalformedXml(format!(
            "root element is <{}>, expected <robot>",
            robot.tag_name().name()
        )));
    }
    let mut p = Parser {
        xml,
        passthrough: PassThrough::default(),
    };
    let name = p.required_attr(robot, "name", "robot")?.to_string();
    p.unknown_attrs(robot, "robot", &["name"]);

    let mut links = Vec::new();
    let mut joints = Vec::new();
    for child in robot.children().filter(Node::is_element) {
        match child.tag_name().name() {
            "link" => links.push(p.link(child)?),
            "joint" => joints.push(p.joint(child)?),
            _ => p.raw(child, "robot"),
        }
    }
    let model = RobotModel::new(name, links, joints, p.passthrough)?;

    if options.eager_asset_check {
        for filename in model.mesh_filenames() {
            let path = resolve_mesh_path(filename, asset_root);
            if !path.is_file() {
                return Err(ModelError::MissingMeshFile(path));
            }
        }
    }
    Ok(model)
}

/// Locate a mesh referenced by a URDF.
///
/// `package://pkg/rest` tries `<root>/pkg/rest` then `<root>/rest`;
/// `file://` is stripped; relative paths are joined to the asset root.
/// When no candidate exists the first one is returned.
pub fn resolve_mesh_path(filename: &str, asset_root: &Path) -> PathBuf {
    if let Some(rest) = filename.strip_prefix("package://") {
        let with_pkg = asset_root.join(rest);
        if with_pkg.exists() {
            return with_pkg;
        }
        if let Some((_, inner)) = rest.split_once('/') {
            let without = asset_root.join(inner);
            if without.exists() {
                return without;
            }
        }
        return with_pkg;
    }
    let stripped = filename.strip_prefix("file://").unwrap_or(filename);
    let path = Path::new(stripped);
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        asset_root.join(path)
    }
}

struct Parser<'a> {
    xml: &'a str,
    passthrough: PassThrough,
}

fn invalid(context: &str, message: impl Into<String>) -> ModelError {
    ModelError::InvalidValue {
        context: context.to_string(),
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn raw(&mut self, node: Node, context: &str) {
        self.passthrough.elements.push(RawElement {
            context: context.to_string(),
            xml: self.xml[node.range()].to_string(),
        });
    }

    fn unknown_attrs(&mut self, node: Node, context: &str, known: &[&str]) {
        for a in node.attributes() {
            if a.namespace().is_some() || !known.contains(&a.name()) {
                let name = match a.namespace() {
                    Some(ns) => format!("{{{ns}}}{}", a.name()),
                    None => a.name().to_string(),
                };
                self.passthrough.attributes.push(RawAttribute {
                    context: context.to_string(),
                    name,
                    value: a.value().to_string(),
                });
            }
        }
    }

    fn required_attr<'n>(
        &self,
        node: Node<'n, '_>,
        attr: &str,
        context: &str,
    ) -> Result<&'n str, ModelError> {
        node.attribute(attr)
            .ok_or_else(|| invalid(context, format!("<{}> lacks `{attr}`", node.tag_name().name())))
    }

    fn link(&mut self, node: Node) -> Result<LinkSpec, ModelError> {
        let name = self.required_attr(node, "name", "link")?.to_string();
        let ctx = format!("link:{name}");
        self.unknown_attrs(node, &ctx, &["name"]);
        let mut link = LinkSpec::new(name);
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "inertial" => {
                    if link.inertial.is_some() {
                        return Err(invalid(&ctx, "more than one <inertial>"));
                    }
                    link.inertial = Some(self.inertial(child, &format!("{ctx}/inertial"))?);
                }
                "visual" => {
                    let c = format!("{ctx}/visual:{}", link.visual_geometries.len());
                    link.visual_geometries.push(self.geometry_ref(child, &c)?);
                }
                "collision" => {
                    let c = format!("{ctx}/collision:{}", link.collision_geometries.len());
                    link.collision_geometries.push(self.geometry_ref(child, &c)?);
                }
                _ => self.raw(child, &ctx),
            }
        }
        Ok(link)
    }

    fn inertial(&mut self, node: Node, ctx: &str) -> Result<Inertial, ModelError> {
        self.unknown_attrs(node, ctx, &[]);
        let mut origin = Pose::default();
        let mut mass = None;
        let mut inertia = None;
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "origin" => origin = self.origin(child, ctx)?,
                "mass" => {
                    self.unknown_attrs(child, &format!("{ctx}/mass"), &["value"]);
                    mass = Some(scalar(self.required_attr(child, "value", ctx)?, ctx)?);
                }
                "inertia" => {
                    const KEYS: [&str; 6] = ["ixx", "ixy", "ixz", "iyy", "iyz", "izz"];
                    self.unknown_attrs(child, &format!("{ctx}/inertia"), &KEYS);
                    let mut v = [0.0; 6];
                    for (slot, key) in v.iter_mut().zip(KEYS) {
                        if let Some(s) = child.attribute(key) {
                            *slot = scalar(s, ctx)?;
                        }
                    }
                    inertia = Some(InertiaTensor {
                        ixx: v[0],
                        ixy: v[1],
                        ixz: v[2],
                        iyy: v[3],
                        iyz: v[4],
                        izz: v[5],
                    });
                }
                _ => self.raw(child, ctx),
            }
        }
        Ok(Inertial {
            mass: mass.unwrap_or(0.0),
            origin,
            inertia: inertia.unwrap_or_default(),
        })
    }

    fn origin(&mut self, node: Node, ctx: &str) -> Result<Pose, ModelError> {
        let octx = format!("{ctx}/origin");
        self.unknown_attrs(node, &octx, &["xyz", "rpy"]);
        for child in node.children().filter(Node::is_element) {
            self.raw(child, &octx);
        }
        let xyz = node.attribute("xyz").map(|s| vec3(s, ctx)).transpose()?.unwrap_or([0.0; 3]);
        let rpy = node.attribute("rpy").map(|s| vec3(s, ctx)).transpose()?.unwrap_or([0.0; 3]);
        Ok(Pose { xyz, rpy })
    }

    fn geometry_ref(&mut self, node: Node, ctx: &str) -> Result<GeometryRef, ModelError> {
        self.unknown_attrs(node, ctx, &["name"]);
        let name = node.attribute("name").map(str::to_string);
        let mut origin = Pose::default();
        let mut shape = None;
        for child in node.children().filter(Node::is_element) {
            match child.tag_name().name() {
                "origin" => origin = self.origin(child, ctx)?,
                "geometry" => shape = Some(self.shape(child, &format!("{ctx}/geometry"))?),
                _ => self.raw(child, ctx),
            }
        }
        let shape = shape.ok_or_else(|| invalid(ctx, "missing <geometry>"))?;
        Ok(GeometryRef {
            name,
            origin,
            shape,
        })
    }

    fn shape(&mut self, node: Node, ctx: &str) -> Result<Shape, ModelError> {
        self.unknown_attrs(node, ctx, &[]);
        let mut shape = None;
        for child in node.children().filter(Node::is_element) {
            let kind = child.tag_name().name();
            let sctx = format!("{ctx}/{kind}");
            let parsed = match kind {
                "mesh" => {
                    self.unknown_attrs(child, &sctx, &["filename", "scale"]);
                    Shape::Mesh {
                        filename: self.required_attr(child, "filename", ctx)?.to_string(),
                        scale: child
                            .attribute("scale")
                            .map(|s| vec3(s, ctx))
                            .transpose()?
                            .unwrap_or([1.0; 3]),
                    }
                }
                "box" => {
                    self.unknown_attrs(child, &sctx, &["size"]);
                    let size = vec3(self.required_attr(child, "size", ctx)?, ctx)?;
                    Shape::Box {
                        half_extents: size.map(|s| s / 2.0),
                    }
                }
                "cylinder" | "capsule" => {
                    self.unknown_attrs(child, &sctx, &["radius", "length"]);
                    let radius = scalar(self.required_attr(child, "radius", ctx)?, ctx)?;
                    let length = scalar(self.required_attr(child, "length", ctx)?, ctx)?;
                    if kind == "cylinder" {
                        Shape::Cylinder { radius, length }
                    } else {
                        Shape::Capsule { radius, length }
                    }
                }
                "sphere" => {
                    self.unknown_attrs(child, &sctx, &["radius"]);
                    Shape::Sphere {
                        radius: scalar(self.required_attr(child, "radius", ctx)?, ctx)?,
                    }
                }
                _ => {
                    self.raw(child, ctx);
                    continue;
                }
            };
            if shape.is_some() {
                return Err(invalid(ctx, "more than one shape in <geometry>"));
            }
            shape = Some(parsed);
        }
        shape.ok_or_else(|| invalid(ctx, "<geometry> has no supported shape"))
    }

    fn joint(&mut self, node: Node) -> Result<JointSpec, ModelError> {
        let name = self.required_attr(node, "name", "joint")?.to_string();
        let ctx = format!("joint:{name}");
        self.unknown_attrs(node, &ctx, &["name", "type"]);
        let type_str = self.required_attr(node, "type", &ctx)?;
        let joint_type = JointType::parse(type_str)
            .ok_or_else(|| invalid(&ctx, format!("unknown joint type `{type_str}`")))?;

        let mut origin = Pose::default();
        let mut parent = None;
        let mut child_link = None;
        let mut axis = [1.0, 0.0, 0.0];
        let mut limit_node = None;
        let mut mimic = None;
        for child in node.children().filter(Node::is_element) {
            let cctx = format!("{ctx}/{}", child.tag_name().name());
            match child.tag_name().name() {
                "origin" => origin = self.origin(child, &ctx)?,
                "parent" => {
                    self.unknown_attrs(child, &cctx, &["link"]);
                    parent = Some(self.required_attr(child, "link", &ctx)?.to_string());
                }
                "child" => {
                    self.unknown_attrs(child, &cctx, &["link"]);
                    child_link = Some(self.required_attr(child, "link", &ctx)?.to_string());
                }
                "axis" => {
                    self.unknown_attrs(child, &cctx, &["xyz"]);
                    if let Some(s) = child.attribute("xyz") {
                        axis = vec3(s, &ctx)?;
                    }
                }
                "limit" => {
                    self.unknown_attrs(child, &cctx, &["lower", "upper", "velocity", "effort"]);
                    limit_node = Some(child);
                }
                "mimic" => {
                    self.unknown_attrs(child, &cctx, &["joint", "multiplier", "offset"]);
                    mimic = Some(Mimic {
                        source_joint: self.required_attr(child, "joint", &ctx)?.to_string(),
                        multiplier: child
                            .attribute("multiplier")
                            .map(|s| scalar(s, &ctx))
                            .transpose()?
                            .unwrap_or(1.0),
                        offset: child
                            .attribute("offset")
                            .map(|s| scalar(s, &ctx))
                            .transpose()?
                            .unwrap_or(0.0),
                    });
                }
                _ => self.raw(child, &ctx),
            }
        }

        let norm = axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(norm > 1e-12) || !norm.is_finite() {
            return Err(invalid(&ctx, format!("axis {axis:?} cannot be normalized")));
        }
        let axis = axis.map(|v| v / norm);

        let bounded = matches!(joint_type, JointType::Revolute | JointType::Prismatic);
        let limits = match limit_node {
            Some(n) => {
                let opt = |k: &str| n.attribute(k).map(|s| scalar(s, &ctx)).transpose();
                let (lower, upper) = if bounded {
                    (Some(opt("lower")?.unwrap_or(0.0)), Some(opt("upper")?.unwrap_or(0.0)))
                } else {
                    (None, None)
                };
                Some(JointLimits {
                    lower,
                    upper,
                    velocity: opt("velocity")?,
                    effort: opt("effort")?,
                })
            }
            None => None,
        };

        Ok(JointSpec {
            parent_link: parent.ok_or_else(|| invalid(&ctx, "missing <parent>"))?,
            child_link: child_link.ok_or_else(|| invalid(&ctx, "missing <child>"))?,
            name,
            joint_type,
            origin,
            axis,
            limits,
            mimic,
        })
    }
}

fn scalar(s: &str, ctx: &str) -> Result<f64, ModelError> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| invalid(ctx, format!("`{s}` is not a number")))?;
    if !v.is_finite() {
        return Err(invalid(ctx, format!("`{s}` is not finite")));
    }
    Ok(v)
}

fn vec3(s: &str, ctx: &str) -> Result<[f64; 3], ModelError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 3 {
        return Err(invalid(ctx, format!("`{s}` is not a 3-vector")));
    }
    Ok([scalar(parts[0], ctx)?, scalar(parts[1], ctx)?, scalar(parts[2], ctx)?])
}
