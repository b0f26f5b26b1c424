use std::collections::HashMap;

use nalgebra::Point3;
use urdd_fk::RigidTransform;

/// Welding distance for duplicate vertices.
pub const WELD_TOLERANCE: f64 = 1e-9;
/// Triangles with smaller area are dropped during cleaning.
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Indexed triangle mesh.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TriMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    /// Provenance: a file path or a primitive descriptor.
    pub source: String,
}

impl TriMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>, source: impl Into<String>) -> Self {
        TriMesh {
            vertices,
            triangles,
            source: source.into(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.triangles.is_empty()
    }

    pub fn triangle(&self, t: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.triangles[t];
        [
            self.vertices[a as usize],
            self.vertices[b as usize],
            self.vertices[c as usize],
        ]
    }

    /// Weld vertices closer than [`WELD_TOLERANCE`], drop degenerate
    /// triangles and unreferenced vertices. Vertex order follows first use.
    pub fn cleaned(&self) -> TriMesh {
        let cell = WELD_TOLERANCE;
        let key = |p: &Point3<f64>| {
            [
                (p.x / cell).floor() as i64,
                (p.y / cell).floor() as i64,
                (p.z / cell).floor() as i64,
            ]
        };
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        let mut welded: Vec<Point3<f64>> = Vec::new();
        let mut remap = Vec::with_capacity(self.vertices.len());
        for p in &self.vertices {
            let k = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(list) = grid.get(&[k[0] + dx, k[1] + dy, k[2] + dz]) {
                            for &i in list {
                                if (welded[i] - p).norm() <= WELD_TOLERANCE {
                                    found = Some(i);
                                    break 'search;
                                }
                            }
                        }
                    }
                }
            }
            let idx = found.unwrap_or_else(|| {
                welded.push(*p);
                grid.entry(k).or_default().push(welded.len() - 1);
                welded.len() - 1
            });
            remap.push(idx);
        }

        let mut used = vec![u32::MAX; welded.len()];
        let mut vertices = Vec::new();
        let mut triangles = Vec::with_capacity(self.triangles.len());
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| remap[i as usize]);
            if a == b || b == c || a == c {
                continue;
            }
            let area = 0.5 * (welded[b] - welded[a]).cross(&(welded[c] - welded[a])).norm();
            if !(area >= MIN_TRIANGLE_AREA) {
                continue;
            }
            let mut tri = [0u32; 3];
            for (slot, v) in tri.iter_mut().zip([a, b, c]) {
                if used[v] == u32::MAX {
                    used[v] = vertices.len() as u32;
                    vertices.push(welded[v]);
                }
                *slot = used[v];
            }
            triangles.push(tri);
        }
        TriMesh {
            vertices,
            triangles,
            source: self.source.clone(),
        }
    }

    pub fn scaled(mut self, scale: [f64; 3]) -> TriMesh {
        for v in &mut self.vertices {
            v.x *= scale[0];
            v.y *= scale[1];
            v.z *= scale[2];
        }
        // A negative scale mirrors the mesh; restore outward winding.
        if scale[0] * scale[1] * scale[2] < 0.0 {
            for t in &mut self.triangles {
                t.swap(1, 2);
            }
        }
        self
    }

    pub fn transformed(&self, t: &RigidTransform) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|p| t.transform_point(p)).collect(),
            triangles: self.triangles.clone(),
            source: self.source.clone(),
        }
    }

    /// Concatenate meshes; sources are joined with `+`.
    pub fn merged<'a>(meshes: impl IntoIterator<Item = &'a TriMesh>) -> TriMesh {
        let mut out = TriMesh::default();
        let mut sources = Vec::new();
        for m in meshes {
            let base = out.vertices.len() as u32;
            out.vertices.extend_from_slice(&m.vertices);
            out.triangles
                .extend(m.triangles.iter().map(|t| t.map(|i| i + base)));
            sources.push(m.source.clone());
        }
        out.source = sources.join("+");
        out
    }

    /// Axis-aligned bounds `(min, max)`; `None` when there are no vertices.
    pub fn aabb(&self) -> Option<(Point3<f64>, Point3<f64>)> {
        aabb(&self.vertices)
    }

    /// Signed volume by tetrahedra against the origin; positive for closed
    /// outward-wound meshes.
    pub fn signed_volume(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                a.coords.dot(&b.coords.cross(&c.coords))
            })
            .sum::<f64>()
            / 6.0
    }

    pub fn surface_area(&self) -> f64 {
        (0..self.triangles.len())
            .map(|t| {
                let [a, b, c] = self.triangle(t);
                0.5 * (b - a).cross(&(c - a)).norm()
            })
            .sum()
    }
}

pub fn aabb(points: &[Point3<f64>]) -> Option<(Point3<f64>, Point3<f64>)> {
    let first = *points.first()?;
    Some(points.iter().fold((first, first), |(lo, hi), p| {
        (lo.inf(p), hi.sup(p))
    }))
}

/// Largest AABB extent, used to scale numerical tolerances.
pub fn extent(points: &[Point3<f64>]) -> f64 {
    aabb(points)
        .map(|(lo, hi)| (hi - lo).max())
        .unwrap_or(0.0)
}
