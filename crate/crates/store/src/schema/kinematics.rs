//! Payloads of the DOF, chain, connections and bounds modules.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::urdf::Mimic;
use super::ModulePayload;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DofKind {
    Rotational,
    Translational,
}

/// One configuration variable and the joint it drives.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DofEntry {
    pub joint: String,
    /// Index of the joint in document order.
    pub joint_index: usize,
    /// Position of this variable within its joint (0 for single-axis joints).
    pub sub_index: usize,
    pub kind: DofKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofMap {
    pub num_dofs: usize,
    /// Joint names in joint-index order.
    pub joint_names: Vec<String>,
    pub dof_to_joint: Vec<DofEntry>,
    /// Every joint is present; fixed and mimic joints map to an empty list.
    pub joint_to_dofs: BTreeMap<String, Vec<usize>>,
    pub mimic_bindings: BTreeMap<String, Mimic>,
}

impl ModulePayload for DofMap {
    const NAME: &'static str = "dof_module";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainNode {
    pub link_name: String,
    pub parent_joint: Option<String>,
    pub parent_link: Option<String>,
    pub child_joints: Vec<String>,
}

/// Parent-before-child list of links; the root comes first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainModule {
    pub root_link: String,
    pub nodes: Vec<ChainNode>,
}

impl ModulePayload for ChainModule {
    const NAME: &'static str = "chain_module";
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionPath {
    pub from_link: String,
    pub to_link: String,
    pub joint_sequence: Vec<String>,
    pub link_sequence: Vec<String>,
}

/// Paths for every ordered link pair, row-major over `links`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionsModule {
    pub links: Vec<String>,
    pub paths: Vec<ConnectionPath>,
}

impl ConnectionsModule {
    pub fn path(&self, from: &str, to: &str) -> Option<&ConnectionPath> {
        let n = self.links.len();
        let i = self.links.iter().position(|l| l == from)?;
        let j = self.links.iter().position(|l| l == to)?;
        self.paths.get(i * n + j).filter(|p| p.from_link == from && p.to_link == to)
    }
}

impl ModulePayload for ConnectionsModule {
    const NAME: &'static str = "connections_module";
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsEntry {
    pub dof_index: usize,
    pub joint: String,
    pub kind: DofKind,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub unbounded: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsModule {
    pub bounds: Vec<BoundsEntry>,
}

impl ModulePayload for BoundsModule {
    const NAME: &'static str = "bounds_module";
}
