//! Per-link geometry: original meshes plus every convex approximation of
//! the link's collision geometry, expressed in the link frame.

use std::path::PathBuf;

use rayon::prelude::*;
use urdd_fk::RigidTransform;
use urdd_store::schema::{DecompositionParams, GeometryRef, GeometryRole, LinkSpec, Pose, Shape};

use super::decomposition::{convex_decomposition, Decomposition};
use super::hull::{convex_hull_inflated, ConvexHull};
use super::io::load_mesh;
use super::mesh::TriMesh;
use super::obb::{fit_obb, OrientedBox};
use super::primitives::{tessellate, DEFAULT_SEGMENTS};
use super::sphere::{min_enclosing_sphere, Sphere};
use crate::error::GeometryError;
use crate::model::{resolve_mesh_path, RobotModel};

/// Produces the triangle mesh of one `<visual>` or `<collision>` geometry
/// in its own frame, with scale applied.
pub trait MeshResolver: Sync {
    fn resolve(&self, link: &str, role: GeometryRole, role_index: usize, geometry: &GeometryRef) -> Result<TriMesh, GeometryError>;
}

/// Mesh files resolved against asset roots tried in order; primitives are
/// tessellated.
#[derive(Debug, Clone)]
pub struct AssetResolver {
    pub roots: Vec<PathBuf>,
}

impl AssetResolver {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        AssetResolver { roots: vec![root.into()] }
    }

    pub fn with_roots(roots: Vec<PathBuf>) -> Self {
        AssetResolver { roots }
    }

    /// Path of `filename` under the first root that has it, else under the
    /// first root so errors name the primary location.
    pub fn locate(&self, filename: &str) -> PathBuf {
        let candidates: Vec<PathBuf> = self.roots.iter().map(|r| resolve_mesh_path(filename, r)).collect();
        candidates
            .iter()
            .find(|p| p.is_file())
            .or(candidates.first())
            .cloned()
            .unwrap_or_else(|| PathBuf::from(filename))
    }
}

impl MeshResolver for AssetResolver {
    fn resolve(&self, _link: &str, _role: GeometryRole, _role_index: usize, geometry: &GeometryRef) -> Result<TriMesh, GeometryError> {
        match &geometry.shape {
            Shape::Mesh { filename, scale } => {
                let mut mesh = load_mesh(&self.locate(filename), *scale)?;
                mesh.source = filename.clone();
                Ok(mesh)
            }
            other => Ok(tessellate(other, DEFAULT_SEGMENTS).expect("primitive shape")),
        }
    }
}

/// One exported original geometry.
#[derive(Debug, Clone)]
pub struct OriginalMesh {
    /// Visuals first, then collisions.
    pub index: usize,
    pub role: GeometryRole,
    pub role_index: usize,
    pub origin: Pose,
    pub mesh: TriMesh,
}

/// Convex approximations of a link's merged collision geometry.
#[derive(Debug, Clone)]
pub struct LinkShapeSet {
    /// Collision meshes merged in the link frame.
    pub collision_mesh: TriMesh,
    pub hull: ConvexHull,
    /// Affine rank of the collision vertices when the hull had to be inflated.
    pub inflated_from_rank: Option<usize>,
    pub decomposition: Option<Decomposition>,
    pub obb: OrientedBox,
    pub sphere: Sphere,
    pub piece_obbs: Vec<OrientedBox>,
    pub piece_spheres: Vec<Sphere>,
}

#[derive(Debug, Clone)]
pub struct LinkGeometry {
    pub link: String,
    pub originals: Vec<OriginalMesh>,
    /// `None` for links without collision geometry.
    pub shapes: Option<LinkShapeSet>,
}

/// Which parts of [`derive_link_geometry`] to compute.
#[derive(Debug, Clone, Copy)]
pub struct ShapeOptions {
    /// Hull and bounding volumes; without this only originals are loaded.
    pub convex_shapes: bool,
    /// Decomposition parameters; `None` skips decomposition.
    pub decomposition: Option<DecompositionParams>,
}

/// Derive geometry for every link, in link order. Links are processed in
/// parallel; errors carry the link name.
pub fn derive_link_geometry(model: &RobotModel, resolver: &dyn MeshResolver, options: ShapeOptions) -> Result<Vec<LinkGeometry>, GeometryError> {
    model
        .links()
        .par_iter()
        .map(|link| derive_one(link, resolver, options).map_err(|e| e.for_link(&link.name)))
        .collect()
}

fn derive_one(link: &LinkSpec, resolver: &dyn MeshResolver, options: ShapeOptions) -> Result<LinkGeometry, GeometryError> {
    let mut originals = Vec::new();
    let roles = [
        (GeometryRole::Visual, &link.visual_geometries),
        (GeometryRole::Collision, &link.collision_geometries),
    ];
    for (role, geoms) in roles {
        for (role_index, g) in geoms.iter().enumerate() {
            let mesh = resolver.resolve(&link.name, role, role_index, g)?;
            originals.push(OriginalMesh {
                index: originals.len(),
                role,
                role_index,
                origin: g.origin,
                mesh,
            });
        }
    }
    let parts: Vec<TriMesh> = originals
        .iter()
        .filter(|o| o.role == GeometryRole::Collision)
        .map(|o| o.mesh.transformed(&RigidTransform::from_xyz_rpy(o.origin.xyz, o.origin.rpy)))
        .collect();
    let shapes = if parts.is_empty() || !options.convex_shapes {
        None
    } else {
        Some(shape_set(parts, options)?)
    };
    Ok(LinkGeometry {
        link: link.name.clone(),
        originals,
        shapes,
    })
}

/// Hull, decomposition and bounding volumes of collision parts given in
/// the link frame.
pub fn shape_set(parts: Vec<TriMesh>, options: ShapeOptions) -> Result<LinkShapeSet, GeometryError> {
    let collision_mesh = TriMesh::merged(&parts);
    let (hull, inflated_from_rank) = convex_hull_inflated(&collision_mesh.vertices)?;
    let decomposition = match options.decomposition {
        None => None,
        Some(_) if inflated_from_rank.is_some() => Some(Decomposition {
            pieces: vec![hull.clone()],
            concavity_tolerance_used: options.decomposition.map_or(0.0, |p| p.concavity_tolerance),
            coverage_ratio: None,
        }),
        Some(params) => Some(convex_decomposition(&parts, &params)?),
    };
    let obb = fit_obb(&hull);
    let sphere = min_enclosing_sphere(&hull.vertices);
    let pieces: &[ConvexHull] = decomposition.as_ref().map_or(&[], |d| &d.pieces);
    let piece_obbs = pieces.iter().map(fit_obb).collect();
    let piece_spheres = pieces.iter().map(|p| min_enclosing_sphere(&p.vertices)).collect();
    Ok(LinkShapeSet {
        collision_mesh,
        hull,
        inflated_from_rank,
        decomposition,
        obb,
        sphere,
        piece_obbs,
        piece_spheres,
    })
}
