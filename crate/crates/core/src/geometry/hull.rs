//! Quickhull in 3D.

use nalgebra::{Point3, Vector3};

use super::mesh::{aabb, TriMesh};
use crate::error::GeometryError;

/// Total thickness added along deficient directions of flat or linear input.
pub const INFLATION_THICKNESS: f64 = 1e-6;

/// Closed convex triangle mesh with outward winding.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexHull {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    pub volume: f64,
    pub centroid: Point3<f64>,
}

impl ConvexHull {
    pub fn as_mesh(&self, source: impl Into<String>) -> TriMesh {
        TriMesh::new(self.vertices.clone(), self.triangles.clone(), source)
    }

    /// Outward unit normal and offset of every face: `n·x <= d` inside.
    pub fn planes(&self) -> Vec<(Vector3<f64>, f64)> {
        self.triangles
            .iter()
            .filter_map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize]);
                let n = (b - a).cross(&(c - a));
                let len = n.norm();
                (len > 0.0).then(|| {
                    let n = n / len;
                    (n, n.dot(&a.coords))
                })
            })
            .collect()
    }

    /// Largest signed distance of `p` outside any face plane.
    pub fn max_plane_distance(&self, p: &Point3<f64>) -> f64 {
        self.planes()
            .iter()
            .map(|(n, d)| n.dot(&p.coords) - d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn surface_area(&self) -> f64 {
        self.as_mesh("").surface_area()
    }
}

/// Hull of a mesh's vertices.
pub fn convex_hull_mesh(mesh: &TriMesh) -> Result<ConvexHull, GeometryError> {
    convex_hull(&mesh.vertices)
}

/// Hull of a point set. Fails with `DegenerateGeometry` when the points span
/// fewer than three dimensions.
pub fn convex_hull(points: &[Point3<f64>]) -> Result<ConvexHull, GeometryError> {
    if points.is_empty() {
        return Err(GeometryError::Empty);
    }
    let eps = tolerance(points);
    let simplex = initial_simplex(points, eps)?;
    Quickhull::new(points, eps, simplex).run()
}

/// Hull of a point set, inflating flat, linear or single-point input by
/// [`INFLATION_THICKNESS`] along the missing directions. Returns the hull
/// and the affine rank of the input when inflation was needed.
pub fn convex_hull_inflated(points: &[Point3<f64>]) -> Result<(ConvexHull, Option<usize>), GeometryError> {
    match convex_hull(points) {
        Ok(h) => Ok((h, None)),
        Err(GeometryError::DegenerateGeometry { rank }) => {
            let eps = tolerance(points);
            let dirs = deficient_directions(points, eps);
            let half = INFLATION_THICKNESS / 2.0;
            let mut inflated = Vec::with_capacity(points.len() << dirs.len());
            for p in points {
                for mask in 0..(1usize << dirs.len()) {
                    let mut q = *p;
                    for (k, d) in dirs.iter().enumerate() {
                        let s = if mask & (1 << k) == 0 { -half } else { half };
                        q += d * s;
                    }
                    inflated.push(q);
                }
            }
            let hull = convex_hull(&inflated)?;
            Ok((hull, Some(rank)))
        }
        Err(e) => Err(e),
    }
}

fn tolerance(points: &[Point3<f64>]) -> f64 {
    let (lo, hi) = aabb(points).expect("non-empty");
    let extent = (hi - lo).max();
    let magnitude = lo.coords.abs().max().max(hi.coords.abs().max());
    (1e-10 * extent).max(1e-13 * magnitude).max(1e-12)
}

/// Orthonormal directions the point set does not span.
fn deficient_directions(points: &[Point3<f64>], eps: f64) -> Vec<Vector3<f64>> {
    match initial_simplex(points, eps) {
        Ok(_) => Vec::new(),
        Err(_) => {
            let (i0, i1) = farthest_extremes(points);
            let d = points[i1] - points[i0];
            if d.norm() <= eps {
                return vec![Vector3::x(), Vector3::y(), Vector3::z()];
            }
            let d = d.normalize();
            let i2 = farthest_from_line(points, i0, &d).0;
            let e = points[i2] - points[i0];
            let n = d.cross(&e);
            let line_dist = (e - d * e.dot(&d)).norm();
            if line_dist <= eps {
                let u = any_perpendicular(&d);
                vec![u, d.cross(&u)]
            } else {
                vec![n.normalize()]
            }
        }
    }
}

pub(crate) fn any_perpendicular(d: &Vector3<f64>) -> Vector3<f64> {
    let axes = [Vector3::x(), Vector3::y(), Vector3::z()];
    let e = axes
        .into_iter()
        .min_by(|a, b| a.dot(d).abs().total_cmp(&b.dot(d).abs()))
        .expect("three axes");
    (e - d * e.dot(d)).normalize()
}

fn farthest_extremes(points: &[Point3<f64>]) -> (usize, usize) {
    let mut ext = [0usize; 6];
    for (i, p) in points.iter().enumerate() {
        for k in 0..3 {
            if p[k] < points[ext[2 * k]][k] {
                ext[2 * k] = i;
            }
            if p[k] > points[ext[2 * k + 1]][k] {
                ext[2 * k + 1] = i;
            }
        }
    }
    let mut best = (ext[0], ext[1]);
    let mut best_d = -1.0;
    for a in 0..6 {
        for b in a + 1..6 {
            let d = (points[ext[a]] - points[ext[b]]).norm_squared();
            if d > best_d {
                best_d = d;
                best = (ext[a].min(ext[b]), ext[a].max(ext[b]));
            }
        }
    }
    best
}

fn farthest_from_line(points: &[Point3<f64>], i0: usize, d: &Vector3<f64>) -> (usize, f64) {
    let mut best = (i0, -1.0);
    for (i, p) in points.iter().enumerate() {
        let e = p - points[i0];
        let dist = (e - d * e.dot(d)).norm();
        if dist > best.1 {
            best = (i, dist);
        }
    }
    best
}

fn initial_simplex(points: &[Point3<f64>], eps: f64) -> Result<[usize; 4], GeometryError> {
    let (i0, i1) = farthest_extremes(points);
    let d = points[i1] - points[i0];
    if d.norm() <= eps {
        return Err(GeometryError::DegenerateGeometry { rank: 0 });
    }
    let d = d.normalize();
    let (i2, line_dist) = farthest_from_line(points, i0, &d);
    if line_dist <= eps {
        return Err(GeometryError::DegenerateGeometry { rank: 1 });
    }
    let n = d.cross(&(points[i2] - points[i0])).normalize();
    let mut best = (i0, 0.0f64);
    for (i, p) in points.iter().enumerate() {
        let dist = n.dot(&(p - points[i0]));
        if dist.abs() > best.1.abs() {
            best = (i, dist);
        }
    }
    if best.1.abs() <= eps {
        return Err(GeometryError::DegenerateGeometry { rank: 2 });
    }
    Ok([i0, i1, i2, best.0])
}

#[derive(Debug, Clone)]
struct Face {
    v: [usize; 3],
    n: Vector3<f64>,
    d: f64,
    /// `adj[i]` shares edge `v[i] -> v[i+1]`.
    adj: [usize; 3],
    outside: Vec<usize>,
    alive: bool,
    mark: usize,
}

struct Quickhull<'a> {
    points: &'a [Point3<f64>],
    eps: f64,
    faces: Vec<Face>,
    pending: Vec<usize>,
    epoch: usize,
}

impl<'a> Quickhull<'a> {
    fn new(points: &'a [Point3<f64>], eps: f64, s: [usize; 4]) -> Self {
        let mut qh = Quickhull {
            points,
            eps,
            faces: Vec::new(),
            pending: Vec::new(),
            epoch: 0,
        };
        let [mut a, mut b, c, d] = s;
        let n = (points[b] - points[a]).cross(&(points[c] - points[a]));
        if n.dot(&(points[d] - points[a])) > 0.0 {
            std::mem::swap(&mut a, &mut b);
        }
        // Base (a, b, c) faces away from d.
        for v in [[a, b, c], [b, a, d], [c, b, d], [a, c, d]] {
            qh.push_face(v);
        }
        qh.link_all();
        let in_simplex = |i: usize| s.contains(&i);
        for i in 0..points.len() {
            if in_simplex(i) {
                continue;
            }
            for f in 0..4 {
                if qh.dist(f, i) > eps {
                    qh.faces[f].outside.push(i);
                    break;
                }
            }
        }
        for f in 0..4 {
            if !qh.faces[f].outside.is_empty() {
                qh.pending.push(f);
            }
        }
        qh
    }

    fn push_face(&mut self, v: [usize; 3]) -> usize {
        let [a, b, c] = v.map(|i| self.points[i]);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        let n = if len > 0.0 { n / len } else { n };
        let centroid = (a.coords + b.coords + c.coords) / 3.0;
        self.faces.push(Face {
            v,
            n,
            d: n.dot(&centroid),
            adj: [usize::MAX; 3],
            outside: Vec::new(),
            alive: true,
            mark: 0,
        });
        self.faces.len() - 1
    }

    fn link_all(&mut self) {
        let n = self.faces.len();
        for f in 0..n {
            for i in 0..3 {
                let (u, w) = (self.faces[f].v[i], self.faces[f].v[(i + 1) % 3]);
                for g in 0..n {
                    if g == f {
                        continue;
                    }
                    let gv = self.faces[g].v;
                    if (0..3).any(|j| gv[j] == w && gv[(j + 1) % 3] == u) {
                        self.faces[f].adj[i] = g;
                    }
                }
            }
        }
    }

    fn dist(&self, f: usize, p: usize) -> f64 {
        self.faces[f].n.dot(&self.points[p].coords) - self.faces[f].d
    }

    fn run(mut self) -> Result<ConvexHull, GeometryError> {
        while let Some(f) = self.pending.pop() {
            if !self.faces[f].alive || self.faces[f].outside.is_empty() {
                continue;
            }
            let apex = *self.faces[f]
                .outside
                .iter()
                .max_by(|&&a, &&b| self.dist(f, a).total_cmp(&self.dist(f, b)).then(b.cmp(&a)))
                .expect("non-empty outside set");
            let added = self.add_point(f, apex, self.eps)
                || self.add_point(f, apex, -self.eps);
            if !added {
                // Numerically ambiguous apex; leave it out rather than corrupt topology.
                self.faces[f].outside.retain(|&p| p != apex);
                if !self.faces[f].outside.is_empty() {
                    self.pending.push(f);
                }
            }
        }
        Ok(self.finish())
    }

    /// Try to add `apex`, seen from face `start`; `threshold` decides which
    /// faces count as visible. Returns false when the horizon is not a
    /// simple loop.
    fn add_point(&mut self, start: usize, apex: usize, threshold: f64) -> bool {
        self.epoch += 1;
        let epoch = self.epoch;
        let mut visible = vec![start];
        self.faces[start].mark = epoch;
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            for i in 0..3 {
                let g = self.faces[f].adj[i];
                if self.faces[g].mark != epoch && self.dist(g, apex) > threshold {
                    self.faces[g].mark = epoch;
                    visible.push(g);
                }
            }
        }

        // Horizon edges (a, b, neighbor) keyed by start vertex.
        let mut horizon: Vec<(usize, usize, usize)> = Vec::new();
        for &f in &visible {
            for i in 0..3 {
                let g = self.faces[f].adj[i];
                if self.faces[g].mark != epoch {
                    horizon.push((self.faces[f].v[i], self.faces[f].v[(i + 1) % 3], g));
                }
            }
        }
        let Some(ordered) = order_loop(&horizon) else {
            return false;
        };
        if ordered.iter().any(|&(a, b, _)| a == apex || b == apex) {
            return false;
        }

        let first_new = self.faces.len();
        let m = ordered.len();
        for (i, &(a, b, nb)) in ordered.iter().enumerate() {
            let f = self.push_face([a, b, apex]);
            self.faces[f].adj = [nb, first_new + (i + 1) % m, first_new + (i + m - 1) % m];
            let slot = (0..3)
                .find(|&j| self.faces[nb].v[j] == b && self.faces[nb].v[(j + 1) % 3] == a)
                .expect("neighbor shares the horizon edge");
            self.faces[nb].adj[slot] = f;
        }

        let mut orphans = Vec::new();
        for &f in &visible {
            self.faces[f].alive = false;
            orphans.append(&mut self.faces[f].outside);
        }
        for p in orphans {
            if p == apex {
                continue;
            }
            for f in first_new..first_new + m {
                if self.dist(f, p) > self.eps {
                    self.faces[f].outside.push(p);
                    break;
                }
            }
        }
        for f in first_new..first_new + m {
            if !self.faces[f].outside.is_empty() {
                self.pending.push(f);
            }
        }
        true
    }

    fn finish(self) -> ConvexHull {
        let mut remap = vec![u32::MAX; self.points.len()];
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for f in self.faces.iter().filter(|f| f.alive) {
            let mut t = [0u32; 3];
            for (slot, &v) in t.iter_mut().zip(&f.v) {
                if remap[v] == u32::MAX {
                    remap[v] = vertices.len() as u32;
                    vertices.push(self.points[v]);
                }
                *slot = remap[v];
            }
            triangles.push(t);
        }
        let (volume, centroid) = volume_and_centroid(&vertices, &triangles);
        ConvexHull {
            vertices,
            triangles,
            volume,
            centroid,
        }
    }
}

/// Chain horizon edges into one loop, or `None` if they do not form one.
fn order_loop(edges: &[(usize, usize, usize)]) -> Option<Vec<(usize, usize, usize)>> {
    if edges.len() < 3 {
        return None;
    }
    let mut by_start = std::collections::HashMap::with_capacity(edges.len());
    for (i, e) in edges.iter().enumerate() {
        if by_start.insert(e.0, i).is_some() {
            return None;
        }
    }
    let mut ordered = Vec::with_capacity(edges.len());
    let mut cur = 0;
    for _ in 0..edges.len() {
        ordered.push(edges[cur]);
        cur = *by_start.get(&edges[cur].1)?;
    }
    (cur == 0).then_some(ordered)
}

pub(crate) fn volume_and_centroid(vertices: &[Point3<f64>], triangles: &[[u32; 3]]) -> (f64, Point3<f64>) {
    if vertices.is_empty() {
        return (0.0, Point3::origin());
    }
    let o = vertices.iter().fold(Vector3::zeros(), |s, p| s + p.coords) / vertices.len() as f64;
    let mut volume = 0.0;
    let mut moment = Vector3::zeros();
    for t in triangles {
        let [a, b, c] = t.map(|i| vertices[i as usize].coords - o);
        let v = a.dot(&b.cross(&c)) / 6.0;
        volume += v;
        moment += (a + b + c) * (v / 4.0);
    }
    let centroid = if volume.abs() > 0.0 {
        Point3::from(o + moment / volume)
    } else {
        Point3::from(o)
    };
    (volume, centroid)
}
