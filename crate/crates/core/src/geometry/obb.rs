//! Oriented bounding boxes.
//!
//! The box is the smaller of two fits: principal axes of the hull surface,
//! and minimum-area rectangles over the dominant hull face normals. Either
//! way every hull vertex is inside by construction, since extents come from
//! projecting the vertices onto the chosen axes.

use std::collections::HashMap;

use nalgebra::{Matrix3, Point3, SymmetricEigen, Vector2, Vector3};
use urdd_fk::{quaternion_wxyz, RigidTransform};
use urdd_store::schema::ObbEntry;

use super::hull::{any_perpendicular, ConvexHull};

/// Smallest half-extent reported, so flat boxes keep a usable volume.
pub const MIN_HALF_EXTENT: f64 = 1e-9;
/// Face-normal directions tried beyond the principal axes.
const MAX_FACE_CANDIDATES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    pub center: Point3<f64>,
    /// Columns are the box axes.
    pub rotation: Matrix3<f64>,
    pub half_extents: Vector3<f64>,
}

impl OrientedBox {
    pub fn volume(&self) -> f64 {
        8.0 * self.half_extents.product()
    }

    pub fn axis(&self, i: usize) -> Vector3<f64> {
        self.rotation.column(i).into_owned()
    }

    /// Box frame as a rigid transform from box coordinates to the parent frame.
    pub fn frame(&self) -> RigidTransform {
        RigidTransform::new(self.rotation, self.center.coords)
    }

    pub fn corners(&self) -> [Point3<f64>; 8] {
        std::array::from_fn(|i| {
            let s = Vector3::new(
                if i & 1 == 0 { -1.0 } else { 1.0 },
                if i & 2 == 0 { -1.0 } else { 1.0 },
                if i & 4 == 0 { -1.0 } else { 1.0 },
            );
            self.center + self.rotation * s.component_mul(&self.half_extents)
        })
    }

    /// Largest amount by which `p` lies outside the box along any axis.
    pub fn excess(&self, p: &Point3<f64>) -> f64 {
        let local = self.rotation.transpose() * (p - self.center);
        (0..3)
            .map(|i| local[i].abs() - self.half_extents[i])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_entry(&self) -> ObbEntry {
        let col = |i: usize| {
            let c = self.rotation.column(i);
            [c[0], c[1], c[2]]
        };
        ObbEntry {
            center: [self.center.x, self.center.y, self.center.z],
            axes: [col(0), col(1), col(2)],
            half_extents: [self.half_extents.x, self.half_extents.y, self.half_extents.z],
            quaternion_wxyz: quaternion_wxyz(&self.rotation),
        }
    }

    pub fn from_entry(e: &ObbEntry) -> OrientedBox {
        OrientedBox {
            center: Point3::from(e.center),
            rotation: Matrix3::from_columns(&e.axes.map(Vector3::from)),
            half_extents: Vector3::from(e.half_extents),
        }
    }
}

/// Fit an oriented box around a convex hull.
pub fn fit_obb(hull: &ConvexHull) -> OrientedBox {
    let pts = &hull.vertices;
    let pca = box_for_axes(pts, principal_axes(hull));
    let mut best: Option<OrientedBox> = None;
    for n in face_normal_candidates(hull) {
        let b = min_box_about(pts, &n);
        if best.is_none_or(|cur| b.volume() < cur.volume()) {
            best = Some(b);
        }
    }
    match best {
        Some(b) if pca.volume() > b.volume() * (1.0 + 1e-9) => b,
        _ => pca,
    }
}

/// Principal axes of the hull surface, sorted by decreasing spread, with
/// deterministic signs and right-handed orientation.
fn principal_axes(hull: &ConvexHull) -> Matrix3<f64> {
    let pts = &hull.vertices;
    let o = pts.iter().fold(Vector3::zeros(), |s, p| s + p.coords) / pts.len().max(1) as f64;
    let mut area = 0.0;
    let mut first = Vector3::zeros();
    let mut second = Matrix3::zeros();
    for t in &hull.triangles {
        let [a, b, c] = t.map(|i| pts[i as usize].coords - o);
        let ar = 0.5 * (b - a).cross(&(c - a)).norm();
        let s = a + b + c;
        area += ar;
        first += s * (ar / 3.0);
        second += (a * a.transpose() + b * b.transpose() + c * c.transpose() + s * s.transpose()) * (ar / 12.0);
    }
    if area <= 0.0 {
        return Matrix3::identity();
    }
    let mean = first / area;
    let cov = second / area - mean * mean.transpose();
    let eig = SymmetricEigen::new(cov);
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let vals = order.map(|i| eig.eigenvalues[i]);
    let vecs = order.map(|i| eig.eigenvectors.column(i).into_owned());

    let scale = vals[0].abs().max(f64::MIN_POSITIVE);
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-6 * scale;
    let (u, v) = match (close(vals[0], vals[1]), close(vals[1], vals[2])) {
        (true, true) => return Matrix3::identity(),
        // Only one axis is well defined; fix the others from the world frame.
        (true, false) | (false, true) => {
            let distinct = if close(vals[0], vals[1]) { vecs[2] } else { vecs[0] };
            let e = canonical_sign(distinct);
            let u = world_axis_across(&e);
            let w = e.cross(&u);
            if close(vals[0], vals[1]) {
                (u, w)
            } else {
                (e, u)
            }
        }
        (false, false) => (canonical_sign(vecs[0]), canonical_sign(vecs[1])),
    };
    let v = (v - u * u.dot(&v)).normalize();
    Matrix3::from_columns(&[u, v, u.cross(&v)])
}

/// First world axis not parallel to `e`, projected onto its orthogonal plane.
fn world_axis_across(e: &Vector3<f64>) -> Vector3<f64> {
    for w in [Vector3::x(), Vector3::y(), Vector3::z()] {
        let p = w - e * e.dot(&w);
        if p.norm() > 1e-6 {
            return p.normalize();
        }
    }
    any_perpendicular(e)
}

/// Flip so the first clearly non-zero component is positive.
fn canonical_sign(v: Vector3<f64>) -> Vector3<f64> {
    match v.iter().find(|c| c.abs() > 1e-12) {
        Some(&c) if c < 0.0 => -v,
        _ => v,
    }
}

fn box_for_axes(pts: &[Point3<f64>], rotation: Matrix3<f64>) -> OrientedBox {
    let rt = rotation.transpose();
    let mut lo = Vector3::repeat(f64::INFINITY);
    let mut hi = Vector3::repeat(f64::NEG_INFINITY);
    for p in pts {
        let l = rt * p.coords;
        lo = lo.inf(&l);
        hi = hi.sup(&l);
    }
    let mut half = (hi - lo) / 2.0;
    for h in half.iter_mut() {
        *h = h.max(MIN_HALF_EXTENT);
    }
    OrientedBox {
        center: Point3::from(rotation * ((lo + hi) / 2.0)),
        rotation,
        half_extents: half,
    }
}

/// Hull face normals merged by direction, largest total area first.
fn face_normal_candidates(hull: &ConvexHull) -> Vec<Vector3<f64>> {
    let mut by_dir: HashMap<[i64; 3], (Vector3<f64>, f64, usize)> = HashMap::new();
    for (k, t) in hull.triangles.iter().enumerate() {
        let [a, b, c] = t.map(|i| hull.vertices[i as usize]);
        let n = (b - a).cross(&(c - a));
        let len = n.norm();
        if len <= 0.0 {
            continue;
        }
        let n = canonical_sign(n / len);
        let key = [n.x, n.y, n.z].map(|c| (c * 1e6).round() as i64);
        let e = by_dir.entry(key).or_insert((n, 0.0, k));
        e.1 += len / 2.0;
    }
    let mut cands: Vec<_> = by_dir.into_values().collect();
    cands.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.2.cmp(&b.2)));
    cands.truncate(MAX_FACE_CANDIDATES);
    cands.into_iter().map(|c| c.0).collect()
}

/// Smallest box with one axis along `n`: minimum-area rectangle of the
/// points projected on the plane orthogonal to `n`.
fn min_box_about(pts: &[Point3<f64>], n: &Vector3<f64>) -> OrientedBox {
    let u = any_perpendicular(n);
    let v = n.cross(&u);
    let flat: Vec<Vector2<f64>> = pts.iter().map(|p| Vector2::new(p.coords.dot(&u), p.coords.dot(&v))).collect();
    let poly = hull_2d(flat);
    let dir = min_area_direction(&poly);
    let a = u * dir.x + v * dir.y;
    let b = n.cross(&a);
    let mut axes = [(a, 0.0), (b, 0.0), (*n, 0.0)];
    for (axis, ext) in axes.iter_mut() {
        let (lo, hi) = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            let d = p.coords.dot(axis);
            (lo.min(d), hi.max(d))
        });
        *ext = hi - lo;
    }
    // Longest axis first, as for the principal fit.
    axes.sort_by(|x, y| y.1.total_cmp(&x.1));
    let a0 = canonical_sign(axes[0].0);
    let a1 = canonical_sign(axes[1].0);
    box_for_axes(pts, Matrix3::from_columns(&[a0, a1, a0.cross(&a1)]))
}

/// Counter-clockwise convex hull (monotone chain), without collinear points.
fn hull_2d(mut pts: Vec<Vector2<f64>>) -> Vec<Vector2<f64>> {
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &Vector2<f64>, a: &Vector2<f64>, b: &Vector2<f64>| {
        (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
    };
    let mut out: Vec<Vector2<f64>> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = out.len();
        let iter: Box<dyn Iterator<Item = &Vector2<f64>>> = if pass == 0 {
            Box::new(pts.iter())
        } else {
            Box::new(pts.iter().rev())
        };
        for p in iter {
            while out.len() >= start + 2 && cross(&out[out.len() - 2], &out[out.len() - 1], p) <= 0.0 {
                out.pop();
            }
            out.push(*p);
        }
        out.pop();
    }
    out
}

/// Unit edge direction of the minimum-area enclosing rectangle, by rotating
/// calipers over a counter-clockwise polygon.
fn min_area_direction(poly: &[Vector2<f64>]) -> Vector2<f64> {
    let m = poly.len();
    if m < 2 {
        return Vector2::x();
    }
    if m == 2 {
        let d = poly[1] - poly[0];
        return if d.norm() > 0.0 { d.normalize() } else { Vector2::x() };
    }
    let advance = |mut k: usize, dir: &Vector2<f64>| {
        for _ in 0..m {
            let next = (k + 1) % m;
            if poly[next].dot(dir) > poly[k].dot(dir) + 1e-15 {
                k = next;
            } else {
                break;
            }
        }
        k
    };
    let mut best = (f64::INFINITY, Vector2::x());
    let (mut right, mut top, mut left) = (0, 0, 0);
    for i in 0..m {
        let e = poly[(i + 1) % m] - poly[i];
        let len = e.norm();
        if len <= 0.0 {
            continue;
        }
        let e = e / len;
        let inward = Vector2::new(-e.y, e.x);
        if i == 0 {
            let argmax = |f: &dyn Fn(&Vector2<f64>) -> f64| {
                (0..m).max_by(|&a, &b| f(&poly[a]).total_cmp(&f(&poly[b]))).unwrap()
            };
            right = argmax(&|p| p.dot(&e));
            top = argmax(&|p| p.dot(&inward));
            left = argmax(&|p| -p.dot(&e));
        } else {
            right = advance(right, &e);
            top = advance(top, &inward);
            left = advance(left, &-e);
        }
        let width = poly[right].dot(&e) - poly[left].dot(&e);
        let height = poly[top].dot(&inward) - poly[i].dot(&inward);
        let area = width * height;
        if area < best.0 {
            best = (area, e);
        }
    }
    best.1
}
