//! Separation distance between convex shapes (GJK).

use nalgebra::{Matrix2, Matrix3, Point3, Vector2, Vector3};
use urdd_fk::RigidTransform;

use crate::geometry::{ConvexHull, OrientedBox};

/// Vertex counts at or below this use a linear support scan.
const BRUTE_FORCE_SUPPORT: usize = 24;
const MAX_ITERATIONS: usize = 128;

/// Convex polytope with vertex adjacency for hill-climbing support queries.
#[derive(Debug, Clone)]
pub struct Polytope {
    pub vertices: Vec<Point3<f64>>,
    neighbors: Vec<Vec<u32>>,
    /// Largest distance from the first vertex, a size scale for tolerances.
    scale: f64,
}

impl Polytope {
    pub fn from_hull(hull: &ConvexHull) -> Polytope {
        let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); hull.vertices.len()];
        for t in &hull.triangles {
            for i in 0..3 {
                let (a, b) = (t[i], t[(i + 1) % 3]);
                neighbors[a as usize].push(b);
                neighbors[b as usize].push(a);
            }
        }
        for n in &mut neighbors {
            n.sort_unstable();
            n.dedup();
        }
        Polytope::with_neighbors(hull.vertices.clone(), neighbors)
    }

    fn with_neighbors(vertices: Vec<Point3<f64>>, neighbors: Vec<Vec<u32>>) -> Polytope {
        let scale = vertices.iter().map(|v| (v - vertices[0]).norm()).fold(0.0, f64::max);
        Polytope {
            vertices,
            neighbors,
            scale,
        }
    }

    pub fn from_obb(obb: &OrientedBox) -> Polytope {
        let vertices = obb.corners().to_vec();
        // Corner i differs from its neighbors in exactly one bit.
        let neighbors = (0..8u32).map(|i| vec![i ^ 1, i ^ 2, i ^ 4]).collect();
        Polytope::with_neighbors(vertices, neighbors)
    }

    /// Index of a vertex maximizing `d·v`, starting the climb at `hint`.
    pub fn support_index(&self, d: &Vector3<f64>, hint: usize) -> usize {
        let dot = |i: usize| self.vertices[i].coords.dot(d);
        if self.vertices.len() <= BRUTE_FORCE_SUPPORT {
            return (0..self.vertices.len())
                .max_by(|&a, &b| dot(a).total_cmp(&dot(b)))
                .unwrap_or(0);
        }
        let mut cur = hint.min(self.vertices.len() - 1);
        let mut best = dot(cur);
        loop {
            let mut next = cur;
            for &nb in &self.neighbors[cur] {
                let val = dot(nb as usize);
                if val > best {
                    best = val;
                    next = nb as usize;
                }
            }
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }
}

/// A polytope placed by a rigid transform, remembering its last support
/// vertex to warm-start the next query.
pub struct Posed<'a> {
    poly: &'a Polytope,
    pose: RigidTransform,
    hint: usize,
}

impl<'a> Posed<'a> {
    pub fn new(poly: &'a Polytope, pose: RigidTransform) -> Self {
        Posed { poly, pose, hint: 0 }
    }

    fn support(&mut self, d: &Vector3<f64>) -> Vector3<f64> {
        let local = self.pose.rotation.transpose() * d;
        self.hint = self.poly.support_index(&local, self.hint);
        self.pose.transform_point(&self.poly.vertices[self.hint]).coords
    }

    fn any_point(&self) -> Vector3<f64> {
        self.pose.transform_point(&self.poly.vertices[0]).coords
    }

    fn scale(&self) -> f64 {
        self.poly.scale
    }
}

/// Distance between two posed hulls; exactly 0 when they touch or overlap.
pub fn convex_distance(a: &ConvexHull, pose_a: &RigidTransform, b: &ConvexHull, pose_b: &RigidTransform) -> f64 {
    let (pa, pb) = (Polytope::from_hull(a), Polytope::from_hull(b));
    gjk_distance(&mut Posed::new(&pa, *pose_a), &mut Posed::new(&pb, *pose_b))
}

/// Relative accuracy at which GJK stops refining a positive distance.
const RELATIVE_TOLERANCE: f64 = 1e-10;

/// GJK distance between posed polytopes.
pub fn gjk_distance(a: &mut Posed, b: &mut Posed) -> f64 {
    gjk_distance_below(a, b, f64::INFINITY)
}

/// Like [`gjk_distance`], but once the distance is proven to be at least
/// `cutoff` the search stops and some value `>= cutoff` is returned.
pub fn gjk_distance_below(a: &mut Posed, b: &mut Posed, cutoff: f64) -> f64 {
    let scale = a.scale().max(b.scale()).max(1e-9);
    let contact = (1e-12 * scale).powi(2);
    // Start from a vertex of the Minkowski difference so the simplex always
    // contains `v` and its distance decreases monotonically.
    let d0 = a.any_point() - b.any_point();
    let d0 = if d0.norm_squared() > 0.0 { d0 } else { Vector3::x() };
    let mut v = a.support(&-d0) - b.support(&d0);
    let mut simplex = Simplex::new(v);
    for _ in 0..MAX_ITERATIONS {
        let vv = v.norm_squared();
        if vv <= contact {
            return 0.0;
        }
        let w = a.support(&-v) - b.support(&v);
        let vw = v.dot(&w);
        // v·w / |v| is a lower bound on the distance.
        if vw > 0.0 && vw * vw >= cutoff * cutoff * vv {
            return (vw / vv.sqrt()).max(cutoff);
        }
        // No further progress toward the origin is possible.
        if vv - vw <= RELATIVE_TOLERANCE * vv || simplex.contains(&w) {
            break;
        }
        simplex.push(w);
        let Some(closest) = simplex.reduce() else {
            return 0.0;
        };
        if closest.norm_squared() >= vv {
            // Rounding stalled the descent.
            break;
        }
        v = closest;
    }
    let d = v.norm();
    if d * d <= contact {
        0.0
    } else {
        d
    }
}

/// Up to four Minkowski-difference points; the last pushed is the newest.
struct Simplex {
    pts: [Vector3<f64>; 4],
    len: usize,
}

impl Simplex {
    fn new(p: Vector3<f64>) -> Self {
        Simplex {
            pts: [p, Vector3::zeros(), Vector3::zeros(), Vector3::zeros()],
            len: 1,
        }
    }

    fn contains(&self, w: &Vector3<f64>) -> bool {
        self.pts[..self.len].iter().any(|p| p == w)
    }

    fn push(&mut self, w: Vector3<f64>) {
        self.pts[self.len] = w;
        self.len += 1;
    }

    /// Replace the simplex by the smallest face whose relative interior
    /// holds the point closest to the origin, and return that point.
    /// `None` means the origin is enclosed by a full tetrahedron.
    ///
    /// The previous simplex's closest point was interior to it, so the new
    /// closest face must contain the newest point; only those subsets are
    /// tried.
    fn reduce(&mut self) -> Option<Vector3<f64>> {
        let n = self.len;
        let newest = n - 1;
        let mut best: Option<(f64, Vector3<f64>, u32)> = None;
        for mask in 0u32..(1 << newest) {
            let full = mask | (1 << newest);
            let mut sub = [Vector3::zeros(); 4];
            let mut k = 0;
            for (i, p) in self.pts[..n].iter().enumerate() {
                if full & (1 << i) != 0 {
                    sub[k] = *p;
                    k += 1;
                }
            }
            let Some(p) = affine_closest(&sub[..k]) else {
                continue;
            };
            let d = p.norm_squared();
            let better = match best {
                None => true,
                Some((bd, _, bmask)) => d < bd || (d == bd && full.count_ones() < bmask.count_ones()),
            };
            if better {
                best = Some((d, p, full));
            }
        }
        let (_, p, mask) = best.unwrap_or((self.pts[newest].norm_squared(), self.pts[newest], 1 << newest));
        if mask.count_ones() == 4 {
            return None;
        }
        let mut k = 0;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                self.pts[k] = self.pts[i];
                k += 1;
            }
        }
        self.len = k;
        Some(p)
    }
}

/// Closest point to the origin on the affine hull of `pts`, if it lies
/// strictly inside their convex hull.
fn affine_closest(pts: &[Vector3<f64>]) -> Option<Vector3<f64>> {
    let p0 = pts[0];
    let mut d = [Vector3::zeros(); 3];
    for (i, p) in pts[1..].iter().enumerate() {
        d[i] = p - p0;
    }
    let mut mu = [0.0; 3];
    match pts.len() - 1 {
        0 => {}
        1 => {
            let dd = d[0].norm_squared();
            if dd <= 0.0 {
                return None;
            }
            mu[0] = -p0.dot(&d[0]) / dd;
        }
        2 => {
            let g = Matrix2::new(d[0].dot(&d[0]), d[0].dot(&d[1]), d[1].dot(&d[0]), d[1].dot(&d[1]));
            if g.determinant() <= 1e-12 * g[(0, 0)] * g[(1, 1)] {
                return None;
            }
            let r = g.lu().solve(&Vector2::new(-p0.dot(&d[0]), -p0.dot(&d[1])))?;
            mu[..2].copy_from_slice(&[r.x, r.y]);
        }
        3 => {
            let g = Matrix3::from_fn(|i, j| d[i].dot(&d[j]));
            if g.determinant() <= 1e-12 * g[(0, 0)] * g[(1, 1)] * g[(2, 2)] {
                return None;
            }
            let r = g.lu().solve(&Vector3::new(-p0.dot(&d[0]), -p0.dot(&d[1]), -p0.dot(&d[2])))?;
            mu = [r.x, r.y, r.z];
        }
        _ => unreachable!("at most four simplex points"),
    }
    let m = pts.len() - 1;
    let l0 = 1.0 - mu[..m].iter().sum::<f64>();
    if l0 <= 0.0 || mu[..m].iter().any(|&x| x <= 0.0) {
        return None;
    }
    Some((0..m).fold(p0, |acc, i| acc + d[i] * mu[i]))
}
