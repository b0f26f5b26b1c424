//! Payloads of the mesh modules and the link-shape approximation module.

use serde::{Deserialize, Serialize};

use super::urdf::Pose;
use super::ModulePayload;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshFiles {
    pub obj: String,
    pub stl: String,
    #[serde(default)]
    pub glb: Option<String>,
}

impl MeshFiles {
    pub fn iter(&self) -> impl Iterator<Item = &str> {
        [Some(self.obj.as_str()), Some(self.stl.as_str()), self.glb.as_deref()]
            .into_iter()
            .flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryRole {
    Visual,
    Collision,
}

/// One `<visual>` or `<collision>` geometry, exported in its own frame with
/// scale applied. `index` counts visuals first, then collisions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalGeometry {
    pub index: usize,
    pub role: GeometryRole,
    pub role_index: usize,
    pub origin: Pose,
    pub source: String,
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub files: MeshFiles,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalLinkMeshes {
    pub link: String,
    pub geometries: Vec<OriginalGeometry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OriginalMeshesModule {
    pub links: Vec<OriginalLinkMeshes>,
}

impl ModulePayload for OriginalMeshesModule {
    const NAME: &'static str = "original_meshes_module";
}

/// A convex mesh written to disk, expressed in its link's frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexMeshEntry {
    pub files: MeshFiles,
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub volume: f64,
    pub centroid: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkHullEntry {
    pub link: String,
    pub no_geometry: bool,
    pub hull: Option<ConvexMeshEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexHullModule {
    pub links: Vec<LinkHullEntry>,
}

impl ModulePayload for ConvexHullModule {
    const NAME: &'static str = "convex_hull_meshes_module";
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecompositionParams {
    pub max_pieces: usize,
    pub concavity_tolerance: f64,
    pub voxel_resolution: usize,
}

impl Default for DecompositionParams {
    fn default() -> Self {
        DecompositionParams {
            max_pieces: 32,
            concavity_tolerance: 0.02,
            voxel_resolution: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkDecompositionEntry {
    pub link: String,
    pub no_geometry: bool,
    pub pieces: Vec<ConvexMeshEntry>,
    pub concavity_tolerance_used: Option<f64>,
    pub coverage_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexDecompositionModule {
    pub params: DecompositionParams,
    pub links: Vec<LinkDecompositionEntry>,
}

impl ModulePayload for ConvexDecompositionModule {
    const NAME: &'static str = "convex_decomposition_meshes_module";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObbEntry {
    pub center: [f64; 3],
    /// Box axes as unit vectors in the link frame (columns of the rotation).
    pub axes: [[f64; 3]; 3],
    pub half_extents: [f64; 3],
    /// Same rotation as `axes`, unit quaternion (w, x, y, z) with w >= 0.
    pub quaternion_wxyz: [f64; 4],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereEntry {
    pub center: [f64; 3],
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkShapeEntry {
    pub link: String,
    pub no_geometry: bool,
    pub obb: Option<ObbEntry>,
    pub sphere: Option<SphereEntry>,
    pub piece_obbs: Vec<ObbEntry>,
    pub piece_spheres: Vec<SphereEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkShapesModule {
    pub links: Vec<LinkShapeEntry>,
}

impl ModulePayload for LinkShapesModule {
    const NAME: &'static str = "link_shapes_approximations_module";
}
