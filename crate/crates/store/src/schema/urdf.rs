//! Payload of `urdf_module`: the source URDF restated as plain data.

use serde::{Deserialize, Serialize};

use super::ModulePayload;

/// Translation plus fixed-axis roll-pitch-yaw, as written in URDF `<origin>`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub xyz: [f64; 3],
    pub rpy: [f64; 3],
}

impl Pose {
    pub fn from_xyz(xyz: [f64; 3]) -> Self {
        Pose {
            xyz,
            rpy: [0.0; 3],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.xyz.iter().chain(self.rpy.iter()).all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JointType {
    Revolute,
    Continuous,
    Prismatic,
    Fixed,
    Floating,
    Planar,
}

impl JointType {
    /// Number of configuration variables the joint contributes when it is
    /// not a mimic.
    pub fn dof_count(self) -> usize {
        match self {
            JointType::Revolute | JointType::Continuous | JointType::Prismatic => 1,
            JointType::Planar => 3,
            JointType::Floating => 6,
            JointType::Fixed => 0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            JointType::Revolute => "revolute",
            JointType::Continuous => "continuous",
            JointType::Prismatic => "prismatic",
            JointType::Fixed => "fixed",
            JointType::Floating => "floating",
            JointType::Planar => "planar",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "revolute" => JointType::Revolute,
            "continuous" => JointType::Continuous,
            "prismatic" => JointType::Prismatic,
            "fixed" => JointType::Fixed,
            "floating" => JointType::Floating,
            "planar" => JointType::Planar,
            _ => return None,
        })
    }

    /// Single-axis joints, the only ones that may drive or be a mimic.
    pub fn is_single_axis(self) -> bool {
        self.dof_count() == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointLimits {
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub velocity: Option<f64>,
    pub effort: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mimic {
    pub source_joint: String,
    pub multiplier: f64,
    pub offset: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSpec {
    pub name: String,
    pub joint_type: JointType,
    pub parent_link: String,
    pub child_link: String,
    #[serde(default)]
    pub origin: Pose,
    /// Unit axis. Meaningless for fixed and floating joints but always present.
    pub axis: [f64; 3],
    #[serde(default)]
    pub limits: Option<JointLimits>,
    #[serde(default)]
    pub mimic: Option<Mimic>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct InertiaTensor {
    pub ixx: f64,
    pub ixy: f64,
    pub ixz: f64,
    pub iyy: f64,
    pub iyz: f64,
    pub izz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inertial {
    pub mass: f64,
    #[serde(default)]
    pub origin: Pose,
    pub inertia: InertiaTensor,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Shape {
    Mesh { filename: String, scale: [f64; 3] },
    Box { half_extents: [f64; 3] },
    Cylinder { radius: f64, length: f64 },
    Sphere { radius: f64 },
    Capsule { radius: f64, length: f64 },
}

impl Shape {
    /// Short human-readable descriptor, used as mesh provenance.
    pub fn descriptor(&self) -> String {
        match self {
            Shape::Mesh { filename, scale } => {
                format!("mesh:{filename}@{}x{}x{}", scale[0], scale[1], scale[2])
            }
            Shape::Box { half_extents: h } => format!("box:{}x{}x{}", 2.0 * h[0], 2.0 * h[1], 2.0 * h[2]),
            Shape::Cylinder { radius, length } => format!("cylinder:r{radius}:l{length}"),
            Shape::Sphere { radius } => format!("sphere:r{radius}"),
            Shape::Capsule { radius, length } => format!("capsule:r{radius}:l{length}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryRef {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub origin: Pose,
    pub shape: Shape,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub name: String,
    #[serde(default)]
    pub inertial: Option<Inertial>,
    #[serde(default)]
    pub visual_geometries: Vec<GeometryRef>,
    #[serde(default)]
    pub collision_geometries: Vec<GeometryRef>,
}

impl LinkSpec {
    pub fn new(name: impl Into<String>) -> Self {
        LinkSpec {
            name: name.into(),
            inertial: None,
            visual_geometries: Vec::new(),
            collision_geometries: Vec::new(),
        }
    }
}

/// An XML element the converter does not interpret, kept verbatim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawElement {
    /// Where it appeared, e.g. `robot`, `link:base_link`, `joint:j1`.
    pub context: String,
    pub xml: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawAttribute {
    pub context: String,
    pub name: String,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PassThrough {
    #[serde(default)]
    pub elements: Vec<RawElement>,
    #[serde(default)]
    pub attributes: Vec<RawAttribute>,
}

impl PassThrough {
    pub fn is_empty(&self) -> bool {
        self.elements.is_empty() && self.attributes.is_empty()
    }
}

/// Facts about the file the module was generated from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrdfSource {
    pub file_name: String,
    pub byte_size: u64,
    /// Total size of the distinct mesh files the URDF references.
    pub referenced_mesh_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UrdfModule {
    pub robot_name: String,
    pub root_link: String,
    pub links: Vec<LinkSpec>,
    pub joints: Vec<JointSpec>,
    #[serde(default)]
    pub passthrough: PassThrough,
    #[serde(default)]
    pub source: Option<UrdfSource>,
}

impl ModulePayload for UrdfModule {
    const NAME: &'static str = "urdf_module";
}
