//! Minimum enclosing spheres (Welzl, move-to-front variant).

use nalgebra::{Matrix3, Point3, Vector3};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use urdd_store::schema::SphereEntry;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sphere {
    pub center: Point3<f64>,
    pub radius: f64,
}

impl Sphere {
    const EMPTY: Sphere = Sphere {
        center: Point3::new(0.0, 0.0, 0.0),
        radius: -1.0,
    };

    fn contains(&self, p: &Point3<f64>) -> bool {
        let slack = 1e-12 * (1.0 + self.radius.abs());
        (p - self.center).norm() <= self.radius + slack
    }

    pub fn to_entry(&self) -> SphereEntry {
        SphereEntry {
            center: [self.center.x, self.center.y, self.center.z],
            radius: self.radius,
        }
    }

    pub fn from_entry(e: &SphereEntry) -> Sphere {
        Sphere {
            center: Point3::from(e.center),
            radius: e.radius,
        }
    }
}

/// Smallest sphere containing all points. The input is shuffled with a
/// fixed seed, so results are reproducible. Empty input gives radius 0 at
/// the origin.
pub fn min_enclosing_sphere(points: &[Point3<f64>]) -> Sphere {
    if points.is_empty() {
        return Sphere {
            center: Point3::origin(),
            radius: 0.0,
        };
    }
    let mut pts = points.to_vec();
    pts.shuffle(&mut ChaCha8Rng::seed_from_u64(0));
    let mut boundary = Vec::with_capacity(4);
    let mut s = mtf(&mut pts, None, &mut boundary);
    // Absorb rounding so containment holds exactly.
    for p in points {
        s.radius = s.radius.max((p - s.center).norm());
    }
    s
}

/// Smallest ball around `pts[..limit]` with `boundary` on its surface.
fn mtf(pts: &mut [Point3<f64>], limit: Option<usize>, boundary: &mut Vec<Point3<f64>>) -> Sphere {
    let n = limit.unwrap_or(pts.len());
    let mut ball = ball_on(boundary);
    if boundary.len() == 4 {
        return ball;
    }
    for i in 0..n {
        if !ball.contains(&pts[i]) {
            boundary.push(pts[i]);
            ball = mtf(pts, Some(i), boundary);
            boundary.pop();
            pts[..=i].rotate_right(1);
        }
    }
    ball
}

/// Smallest ball with all of `b` (at most four points) on its surface,
/// falling back to the smallest ball containing them when they are
/// degenerate.
fn ball_on(b: &[Point3<f64>]) -> Sphere {
    match b {
        [] => Sphere::EMPTY,
        [a] => Sphere {
            center: *a,
            radius: 0.0,
        },
        [a, c] => Sphere {
            center: Point3::from((a.coords + c.coords) / 2.0),
            radius: (a - c).norm() / 2.0,
        },
        [a, c, d] => circumcircle(a, c, d).unwrap_or_else(|| smallest_of_subsets(b)),
        [a, c, d, e] => circumsphere(a, c, d, e).unwrap_or_else(|| smallest_of_subsets(b)),
        _ => unreachable!("at most four support points"),
    }
}

fn circumcircle(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> Option<Sphere> {
    let u = b - a;
    let v = c - a;
    let w = u.cross(&v);
    let w2 = w.norm_squared();
    if w2 <= 1e-24 * u.norm_squared().max(v.norm_squared()).powi(2) {
        return None;
    }
    let off = (v.cross(&w) * u.norm_squared() + w.cross(&u) * v.norm_squared()) / (2.0 * w2);
    Some(Sphere {
        center: a + off,
        radius: off.norm(),
    })
}

fn circumsphere(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>, d: &Point3<f64>) -> Option<Sphere> {
    let rows = [b - a, c - a, d - a];
    let m = Matrix3::from_rows(&rows.map(|r| r.transpose()));
    let scale = rows.iter().map(|r| r.norm()).fold(0.0, f64::max);
    if m.determinant().abs() <= 1e-12 * scale.powi(3) {
        return None;
    }
    let rhs = Vector3::from(rows.map(|r| r.norm_squared() / 2.0));
    let off = m.lu().solve(&rhs)?;
    Some(Sphere {
        center: a + off,
        radius: off.norm(),
    })
}

/// Smallest pair or triple ball that contains every point of `b`.
fn smallest_of_subsets(b: &[Point3<f64>]) -> Sphere {
    let mut best: Option<Sphere> = None;
    let n = b.len();
    let mut consider = |s: Sphere| {
        if b.iter().all(|p| s.contains(p)) && best.is_none_or(|cur| s.radius < cur.radius) {
            best = Some(s);
        }
    };
    for i in 0..n {
        for j in i + 1..n {
            consider(ball_on(&[b[i], b[j]]));
            for k in j + 1..n {
                if let Some(s) = circumcircle(&b[i], &b[j], &b[k]) {
                    consider(s);
                }
            }
        }
    }
    best.unwrap_or_else(|| {
        let c = Point3::from(b.iter().fold(Vector3::zeros(), |s, p| s + p.coords) / n as f64);
        Sphere {
            center: c,
            radius: b.iter().map(|p| (p - c).norm()).fold(0.0, f64::max),
        }
    })
}
