//! Mesh handling and convex approximations.

pub mod decomposition;
pub mod hull;
pub mod io;
pub mod mesh;
pub mod obb;
pub mod primitives;
pub mod shapes;
pub mod sphere;

pub use decomposition::{convex_decomposition, voxelize, Decomposition, VoxelGrid};
pub use hull::{convex_hull, convex_hull_inflated, convex_hull_mesh, ConvexHull};
pub use io::{load_mesh, write_glb, write_obj, write_stl, MeshFormat};
pub use mesh::TriMesh;
pub use obb::{fit_obb, OrientedBox};
pub use primitives::tessellate;
pub use shapes::{derive_link_geometry, AssetResolver, LinkGeometry, LinkShapeSet, MeshResolver, OriginalMesh, ShapeOptions};
pub use sphere::{min_enclosing_sphere, Sphere};
