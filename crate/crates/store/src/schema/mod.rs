//! Typed payloads for every module this crate knows how to read.

pub mod geometry;
pub mod kinematics;
pub mod proximity;
pub mod urdf;

pub use geometry::*;
pub use kinematics::*;
pub use proximity::*;
pub use urdf::*;

use serde::de::DeserializeOwned;
use serde::Serialize;

/// A module payload stored as `<root>/<NAME>/module.json`.
pub trait ModulePayload: Serialize + DeserializeOwned {
    const NAME: &'static str;
}

/// The modules this version of the format defines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModuleId {
    Urdf,
    Dof,
    Chain,
    Connections,
    Bounds,
    OriginalMeshes,
    ConvexHullMeshes,
    ConvexDecompositionMeshes,
    LinkShapesApproximations,
    LinkShapesDistanceStatistics,
    LinkShapesSkips,
}

impl ModuleId {
    pub const ALL: [ModuleId; 11] = [
        ModuleId::Urdf,
        ModuleId::Dof,
        ModuleId::Chain,
        ModuleId::Connections,
        ModuleId::Bounds,
        ModuleId::OriginalMeshes,
        ModuleId::ConvexHullMeshes,
        ModuleId::ConvexDecompositionMeshes,
        ModuleId::LinkShapesApproximations,
        ModuleId::LinkShapesDistanceStatistics,
        ModuleId::LinkShapesSkips,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModuleId::Urdf => "urdf_module",
            ModuleId::Dof => "dof_module",
            ModuleId::Chain => "chain_module",
            ModuleId::Connections => "connections_module",
            ModuleId::Bounds => "bounds_module",
            ModuleId::OriginalMeshes => "original_meshes_module",
            ModuleId::ConvexHullMeshes => "convex_hull_meshes_module",
            ModuleId::ConvexDecompositionMeshes => "convex_decomposition_meshes_module",
            ModuleId::LinkShapesApproximations => "link_shapes_approximations_module",
            ModuleId::LinkShapesDistanceStatistics => "link_shapes_distance_statistics_module",
            ModuleId::LinkShapesSkips => "link_shapes_skips_module",
        }
    }

    pub fn from_name(name: &str) -> Option<ModuleId> {
        ModuleId::ALL.into_iter().find(|m| m.name() == name)
    }

    /// Semantic version of the payload schema.
    pub fn version(self) -> &'static str {
        "1.0.0"
    }

    /// Modules that must be generated before this one.
    pub fn dependencies(self) -> &'static [ModuleId] {
        use ModuleId::*;
        match self {
            Urdf => &[],
            Dof | Chain | OriginalMeshes => &[Urdf],
            Connections => &[Urdf, Chain],
            Bounds => &[Urdf, Dof],
            ConvexHullMeshes | ConvexDecompositionMeshes => &[OriginalMeshes],
            LinkShapesApproximations => &[ConvexHullMeshes, ConvexDecompositionMeshes],
            LinkShapesDistanceStatistics => &[
                Chain,
                Dof,
                Bounds,
                ConvexHullMeshes,
                ConvexDecompositionMeshes,
                LinkShapesApproximations,
            ],
            LinkShapesSkips => &[LinkShapesDistanceStatistics, Chain],
        }
    }

    /// Whether the module stores mesh files under `meshes/`.
    pub fn has_meshes(self) -> bool {
        matches!(
            self,
            ModuleId::OriginalMeshes
                | ModuleId::ConvexHullMeshes
                | ModuleId::ConvexDecompositionMeshes
        )
    }
}

/// `requested` plus everything it transitively depends on, in generation
/// order. The second element lists `(added, required_by)` pairs.
pub fn dependency_closure(requested: &[ModuleId]) -> (Vec<ModuleId>, Vec<(ModuleId, ModuleId)>) {
    let mut selected: Vec<ModuleId> = requested.to_vec();
    let mut added = Vec::new();
    let mut i = 0;
    while i < selected.len() {
        let m = selected[i];
        for &dep in m.dependencies() {
            if !selected.contains(&dep) {
                selected.push(dep);
                added.push((dep, m));
            }
        }
        i += 1;
    }
    // ModuleId::ALL is already a valid generation order.
    let ordered = ModuleId::ALL
        .into_iter()
        .filter(|m| selected.contains(m))
        .collect();
    (ordered, added)
}
