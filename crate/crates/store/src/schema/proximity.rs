//! Payloads of the distance-statistics and skip modules, plus the skip
//! overrides file exchanged with the web viewer.

use serde::{Deserialize, Serialize};

use super::ModulePayload;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeType {
    Hull,
    Obb,
    Sphere,
    Decomposition,
}

impl ShapeType {
    pub const ALL: [ShapeType; 4] = [
        ShapeType::Hull,
        ShapeType::Obb,
        ShapeType::Sphere,
        ShapeType::Decomposition,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairStats {
    pub link_a: String,
    pub link_b: String,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub sample_count: usize,
    pub intersect_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceTable {
    pub shape_type: ShapeType,
    /// Unordered pairs, `link_a` before `link_b` in link order.
    pub pairs: Vec<PairStats>,
}

impl DistanceTable {
    /// Order-insensitive lookup.
    pub fn get(&self, a: &str, b: &str) -> Option<&PairStats> {
        self.pairs
            .iter()
            .find(|p| (p.link_a == a && p.link_b == b) || (p.link_a == b && p.link_b == a))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceStatsModule {
    pub samples: usize,
    pub seed: u64,
    /// All links in document order.
    pub links: Vec<String>,
    /// Links that carry collision geometry.
    pub geometry_links: Vec<String>,
    pub tables: Vec<DistanceTable>,
}

impl DistanceStatsModule {
    pub fn table(&self, shape_type: ShapeType) -> Option<&DistanceTable> {
        self.tables.iter().find(|t| t.shape_type == shape_type)
    }
}

impl ModulePayload for DistanceStatsModule {
    const NAME: &'static str = "link_shapes_distance_statistics_module";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    Adjacent,
    AlwaysColliding,
    NoGeometry,
    UserSpecified,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipPair {
    pub link_a: String,
    pub link_b: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipMatrix {
    pub shape_type: ShapeType,
    pub links: Vec<String>,
    /// Symmetric, diagonal true.
    pub skips: Vec<Vec<bool>>,
    /// One entry per skipped off-diagonal pair (upper triangle).
    pub reasons: Vec<SkipPair>,
}

impl SkipMatrix {
    pub fn is_skipped(&self, a: &str, b: &str) -> Option<bool> {
        let i = self.links.iter().position(|l| l == a)?;
        let j = self.links.iter().position(|l| l == b)?;
        Some(self.skips[i][j])
    }

    pub fn reason(&self, a: &str, b: &str) -> Option<SkipReason> {
        self.reasons
            .iter()
            .find(|p| (p.link_a == a && p.link_b == b) || (p.link_a == b && p.link_b == a))
            .map(|p| p.reason)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkipsModule {
    pub always_colliding_threshold: f64,
    pub matrices: Vec<SkipMatrix>,
}

impl SkipsModule {
    pub fn matrix(&self, shape_type: ShapeType) -> Option<&SkipMatrix> {
        self.matrices.iter().find(|m| m.shape_type == shape_type)
    }
}

impl ModulePayload for SkipsModule {
    const NAME: &'static str = "link_shapes_skips_module";
}

/// One entry of `skips_overrides.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkipOverride {
    pub link_a: String,
    pub link_b: String,
    pub skip: bool,
}

impl SkipOverride {
    /// Same override with the pair in lexicographic order.
    pub fn normalized(&self) -> SkipOverride {
        if self.link_a <= self.link_b {
            self.clone()
        } else {
            SkipOverride {
                link_a: self.link_b.clone(),
                link_b: self.link_a.clone(),
                skip: self.skip,
            }
        }
    }
}
