//! Link distance statistics over sampled configurations, and the skip
//! matrices derived from them.

mod gjk;

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::PI;

use nalgebra::Point3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use urdd_fk::{FkModel, RigidTransform};
use urdd_store::schema::{
    BoundsModule, ChainModule, DistanceStatsModule, DistanceTable, DofKind, PairStats, ShapeType, SkipMatrix,
    SkipOverride, SkipPair, SkipReason, SkipsModule,
};

pub use gjk::{convex_distance, gjk_distance, gjk_distance_below, Polytope, Posed};

use crate::error::Result;
use crate::geometry::{LinkGeometry, LinkShapeSet, Sphere};

/// Samples drawn when none are configured.
pub const DEFAULT_SAMPLES: usize = 1000;
/// Pairs intersecting in at least this fraction of samples are skipped.
pub const ALWAYS_COLLIDING_THRESHOLD: f64 = 0.99;

/// `n` configurations drawn uniformly within the bounds. Each configuration
/// consumes the random stream in DOF order, so the first `m` samples of a
/// larger draw equal a draw of `m`.
pub fn sample_configurations(bounds: &BoundsModule, n: usize, seed: u64) -> Vec<Vec<f64>> {
    let ranges: Vec<(f64, f64)> = bounds
        .bounds
        .iter()
        .map(|b| match (b.lower, b.upper) {
            (Some(lo), Some(hi)) if !b.unbounded => (lo, hi),
            _ => match b.kind {
                DofKind::Rotational => (-PI, PI),
                DofKind::Translational => (-1.0, 1.0),
            },
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            ranges
                .iter()
                .map(|&(lo, hi)| {
                    let u: f64 = rng.random();
                    lo + (hi - lo) * u
                })
                .collect()
        })
        .collect()
}

/// Link shapes prepared for repeated distance queries.
#[derive(Debug, Clone)]
pub struct ProximityShapes {
    pub hull: Polytope,
    pub obb: Polytope,
    pub sphere: Sphere,
    pub pieces: Vec<Polytope>,
    pub piece_spheres: Vec<Sphere>,
}

impl ProximityShapes {
    pub fn new(set: &LinkShapeSet) -> Self {
        let pieces: Vec<Polytope> = set
            .decomposition
            .as_ref()
            .map(|d| d.pieces.iter().map(Polytope::from_hull).collect())
            .unwrap_or_default();
        ProximityShapes {
            hull: Polytope::from_hull(&set.hull),
            obb: Polytope::from_obb(&set.obb),
            sphere: set.sphere,
            piece_spheres: set.piece_spheres.clone(),
            pieces,
        }
    }
}

/// Distance between two posed link shapes of the given type.
pub fn shape_distance(
    shape_type: ShapeType,
    a: &ProximityShapes,
    pose_a: &RigidTransform,
    b: &ProximityShapes,
    pose_b: &RigidTransform,
) -> f64 {
    match shape_type {
        ShapeType::Hull => gjk_distance(&mut Posed::new(&a.hull, *pose_a), &mut Posed::new(&b.hull, *pose_b)),
        ShapeType::Obb => gjk_distance(&mut Posed::new(&a.obb, *pose_a), &mut Posed::new(&b.obb, *pose_b)),
        ShapeType::Sphere => sphere_gap(&a.sphere, pose_a, &b.sphere, pose_b),
        ShapeType::Decomposition => {
            if a.pieces.is_empty() || b.pieces.is_empty() {
                return gjk_distance(&mut Posed::new(&a.hull, *pose_a), &mut Posed::new(&b.hull, *pose_b));
            }
            decomposition_distance(a, pose_a, b, pose_b)
        }
    }
}

/// Smallest piece-to-piece distance. Every piece lies inside its link's
/// bounding sphere, so the gap between a piece's sphere and the other
/// link's sphere bounds all of that piece's pairs from below; pieces are
/// visited in order of that bound and GJK stops as soon as a pair cannot
/// beat the best distance so far.
fn decomposition_distance(a: &ProximityShapes, pose_a: &RigidTransform, b: &ProximityShapes, pose_b: &RigidTransform) -> f64 {
    let world = |s: &Sphere, pose: &RigidTransform| Sphere {
        center: pose.transform_point(&s.center),
        radius: s.radius,
    };
    let (link_a, link_b) = (world(&a.sphere, pose_a), world(&b.sphere, pose_b));
    let order = |pieces: &[Sphere], pose: &RigidTransform, other: &Sphere| {
        let mut v: Vec<(f64, Sphere, usize)> = pieces
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let w = world(s, pose);
                (gap(&w, other), w, i)
            })
            .collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.2.cmp(&y.2)));
        v
    };
    let order_a = order(&a.piece_spheres, pose_a, &link_b);
    let order_b = order(&b.piece_spheres, pose_b, &link_a);
    let mut best = f64::INFINITY;
    for (ga, sa, i) in &order_a {
        if *ga >= best {
            break;
        }
        for (gb, sb, j) in &order_b {
            if *gb >= best {
                break;
            }
            if gap(sa, sb) >= best {
                continue;
            }
            let d = gjk_distance_below(
                &mut Posed::new(&a.pieces[*i], *pose_a),
                &mut Posed::new(&b.pieces[*j], *pose_b),
                best,
            );
            if d < best {
                best = d;
                if best == 0.0 {
                    return 0.0;
                }
            }
        }
    }
    best
}

fn gap(a: &Sphere, b: &Sphere) -> f64 {
    ((a.center - b.center).norm() - a.radius - b.radius).max(0.0)
}

fn sphere_gap(a: &Sphere, pose_a: &RigidTransform, b: &Sphere, pose_b: &RigidTransform) -> f64 {
    let ca: Point3<f64> = pose_a.transform_point(&a.center);
    let cb: Point3<f64> = pose_b.transform_point(&b.center);
    ((ca - cb).norm() - a.radius - b.radius).max(0.0)
}

/// Sampling configuration for [`derive_distance_stats`].
#[derive(Debug, Clone, Copy)]
pub struct SamplingParams {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SamplingParams {
    fn default() -> Self {
        SamplingParams {
            samples: DEFAULT_SAMPLES,
            seed: 0,
        }
    }
}

/// Distance statistics for every unordered pair of links with collision
/// geometry, one table per shape type. `geometry` is in FK link order.
/// Tables for decomposition are produced only when every geometry link has
/// a decomposition.
pub fn derive_distance_stats(
    fk: &FkModel,
    bounds: &BoundsModule,
    geometry: &[LinkGeometry],
    params: SamplingParams,
) -> Result<DistanceStatsModule> {
    let configs = sample_configurations(bounds, params.samples, params.seed);
    let base = RigidTransform::identity();
    let poses: Vec<Vec<RigidTransform>> = configs
        .iter()
        .map(|q| fk.compute(q, &base))
        .collect::<std::result::Result<_, _>>()?;

    let shapes: Vec<Option<ProximityShapes>> = geometry
        .iter()
        .map(|g| g.shapes.as_ref().map(ProximityShapes::new))
        .collect();
    let with_geometry: Vec<usize> = (0..shapes.len()).filter(|&i| shapes[i].is_some()).collect();
    let mut pairs = Vec::new();
    for (k, &i) in with_geometry.iter().enumerate() {
        for &j in &with_geometry[k + 1..] {
            pairs.push((i, j));
        }
    }
    let has_decomposition = geometry
        .iter()
        .filter_map(|g| g.shapes.as_ref())
        .all(|s| s.decomposition.is_some());
    let types: Vec<ShapeType> = ShapeType::ALL
        .into_iter()
        .filter(|&t| t != ShapeType::Decomposition || has_decomposition)
        .collect();

    let tables = types
        .iter()
        .map(|&shape_type| {
            let stats: Vec<PairStats> = pairs
                .par_iter()
                .map(|&(i, j)| {
                    let (a, b) = (shapes[i].as_ref().unwrap(), shapes[j].as_ref().unwrap());
                    let distances = poses.iter().map(|p| shape_distance(shape_type, a, &p[i], b, &p[j]));
                    pair_stats(&geometry[i].link, &geometry[j].link, distances)
                })
                .collect();
            DistanceTable {
                shape_type,
                pairs: stats,
            }
        })
        .collect();

    Ok(DistanceStatsModule {
        samples: params.samples,
        seed: params.seed,
        links: geometry.iter().map(|g| g.link.clone()).collect(),
        geometry_links: with_geometry.iter().map(|&i| geometry[i].link.clone()).collect(),
        tables,
    })
}

fn pair_stats(a: &str, b: &str, distances: impl Iterator<Item = f64>) -> PairStats {
    let (mut min, mut max, mut sum, mut count, mut hits) = (f64::INFINITY, f64::NEG_INFINITY, 0.0, 0usize, 0usize);
    for d in distances {
        min = min.min(d);
        max = max.max(d);
        sum += d;
        count += 1;
        hits += (d == 0.0) as usize;
    }
    if count == 0 {
        (min, max) = (0.0, 0.0);
    }
    let n = count.max(1) as f64;
    PairStats {
        link_a: a.to_string(),
        link_b: b.to_string(),
        min,
        max,
        // Keep mean inside [min, max] despite summation rounding.
        mean: (sum / n).clamp(min, max),
        sample_count: count,
        intersect_fraction: hits as f64 / n,
    }
}

/// Skip matrices, one per distance table.
pub fn derive_skips(stats: &DistanceStatsModule, chain: &ChainModule, overrides: &[SkipOverride]) -> SkipsModule {
    SkipsModule {
        always_colliding_threshold: ALWAYS_COLLIDING_THRESHOLD,
        matrices: stats
            .tables
            .iter()
            .map(|t| derive_skip_matrix(stats, t, chain, overrides))
            .collect(),
    }
}

/// Skip matrix for one table. Reasons take precedence in the order user
/// override, adjacency, missing geometry, always colliding; an override
/// with `skip = false` keeps the pair checked regardless of the rules.
pub fn derive_skip_matrix(
    stats: &DistanceStatsModule,
    table: &DistanceTable,
    chain: &ChainModule,
    overrides: &[SkipOverride],
) -> SkipMatrix {
    let links = &stats.links;
    let n = links.len();
    let geometry: BTreeSet<&str> = stats.geometry_links.iter().map(String::as_str).collect();
    let mut adjacent = BTreeSet::new();
    for node in &chain.nodes {
        if let Some(p) = &node.parent_link {
            adjacent.insert(ordered(p, &node.link_name));
        }
    }
    let user: BTreeMap<(String, String), bool> = overrides
        .iter()
        .map(|o| {
            let o = o.normalized();
            ((o.link_a, o.link_b), o.skip)
        })
        .collect();

    let mut skips = vec![vec![false; n]; n];
    let mut reasons = Vec::new();
    for i in 0..n {
        skips[i][i] = true;
        for j in i + 1..n {
            let (a, b) = (links[i].as_str(), links[j].as_str());
            let key = ordered(a, b);
            let reason = match user.get(&key) {
                Some(false) => None,
                Some(true) => Some(SkipReason::UserSpecified),
                None if adjacent.contains(&key) => Some(SkipReason::Adjacent),
                None if !geometry.contains(a) || !geometry.contains(b) => Some(SkipReason::NoGeometry),
                None => table
                    .get(a, b)
                    .filter(|p| p.intersect_fraction >= ALWAYS_COLLIDING_THRESHOLD)
                    .map(|_| SkipReason::AlwaysColliding),
            };
            if let Some(reason) = reason {
                skips[i][j] = true;
                skips[j][i] = true;
                reasons.push(SkipPair {
                    link_a: a.to_string(),
                    link_b: b.to_string(),
                    reason,
                });
            }
        }
    }
    SkipMatrix {
        shape_type: table.shape_type,
        links: links.clone(),
        skips,
        reasons,
    }
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

/// Parse `skips_overrides.json`, normalizing every pair.
pub fn parse_overrides(json: &str) -> std::result::Result<Vec<SkipOverride>, serde_json::Error> {
    let list: Vec<SkipOverride> = serde_json::from_str(json)?;
    Ok(list.iter().map(SkipOverride::normalized).collect())
}
