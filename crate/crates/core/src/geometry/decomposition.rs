//! Approximate convex decomposition.
//!
//! The solid is voxelized, then its grid cell is split recursively along
//! voxel planes. Each piece is the exact hull of the solid clipped to its
//! cell, so pieces never overlap and together cover the solid. A piece is
//! split while its concavity, the fraction of its hull volume not backed by
//! solid voxels, exceeds the tolerance and the piece budget allows.

use nalgebra::{Point3, Vector3};
use urdd_store::schema::DecompositionParams;

use super::hull::{convex_hull, ConvexHull};
use super::mesh::{aabb, TriMesh};
use crate::error::GeometryError;

/// Strided boundary voxels sampled when scoring a split candidate.
const SCORE_SAMPLES: usize = 64;
/// Split positions tried per axis.
const SPLITS_PER_AXIS: usize = 7;

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub pieces: Vec<ConvexHull>,
    pub concavity_tolerance_used: f64,
    /// Intersection over union of solid voxels and voxels inside a piece;
    /// `None` when the input does not enclose any voxel center.
    pub coverage_ratio: Option<f64>,
}

/// Voxelization by ray parity, voting over the three axis directions.
#[derive(Debug, Clone)]
pub struct VoxelGrid {
    pub origin: Point3<f64>,
    pub h: f64,
    pub dims: [usize; 3],
    pub solid: Vec<bool>,
}

impl VoxelGrid {
    pub fn index(&self, v: [usize; 3]) -> usize {
        v[0] + self.dims[0] * (v[1] + self.dims[1] * v[2])
    }

    pub fn center(&self, v: [usize; 3]) -> Point3<f64> {
        self.origin + Vector3::new(v[0] as f64 + 0.5, v[1] as f64 + 0.5, v[2] as f64 + 0.5) * self.h
    }

    pub fn voxel_volume(&self) -> f64 {
        self.h.powi(3)
    }

    pub fn solid_count(&self) -> usize {
        self.solid.iter().filter(|&&s| s).count()
    }

    fn is_solid(&self, v: [i64; 3]) -> bool {
        (0..3).all(|a| v[a] >= 0 && (v[a] as usize) < self.dims[a])
            && self.solid[self.index(v.map(|c| c as usize))]
    }

    fn corner(&self, v: [usize; 3]) -> Point3<f64> {
        self.origin + Vector3::new(v[0] as f64, v[1] as f64, v[2] as f64) * self.h
    }
}

/// Voxelize the union of closed meshes at `resolution` voxels along the
/// longest extent. The grid is centered on the bounding box.
pub fn voxelize(parts: &[TriMesh], resolution: usize) -> Option<VoxelGrid> {
    let all: Vec<Point3<f64>> = parts.iter().flat_map(|m| m.vertices.iter().copied()).collect();
    let (lo, hi) = aabb(&all)?;
    let ext = hi - lo;
    let resolution = resolution.max(1);
    let h = ext.max() / resolution as f64;
    if !(h > 0.0) {
        return None;
    }
    let dims = [0, 1, 2].map(|a| ((ext[a] / h - 1e-9).ceil() as usize).clamp(1, resolution));
    let center = Point3::from((lo.coords + hi.coords) / 2.0);
    let origin = center - Vector3::new(dims[0] as f64, dims[1] as f64, dims[2] as f64) * (h / 2.0);
    let mut grid = VoxelGrid {
        origin,
        h,
        dims,
        solid: vec![false; dims.iter().product()],
    };
    let mut votes = vec![0u8; grid.solid.len()];
    for part in parts {
        votes.iter_mut().for_each(|v| *v = 0);
        for axis in 0..3 {
            cast_axis(&grid, part, axis, &mut votes);
        }
        for (s, &v) in grid.solid.iter_mut().zip(&votes) {
            *s |= v >= 2;
        }
    }
    Some(grid)
}

/// Axes spanning the plane orthogonal to `axis`, cyclic.
fn other_axes(axis: usize) -> (usize, usize) {
    ((axis + 1) % 3, (axis + 2) % 3)
}

/// Ray parameter where the line through `(pb, pc)` along `axis` crosses the
/// triangle, or `None`. Shared edges and vertices count for exactly one of
/// the triangles meeting there, so closed surfaces give consistent parity.
fn crossing(tri: &[Point3<f64>; 3], axis: usize, pb: f64, pc: f64) -> Option<f64> {
    let (b, c) = other_axes(axis);
    let mut v = tri.map(|p| (p[b], p[c], p[axis]));
    let area = (v[1].0 - v[0].0) * (v[2].1 - v[0].1) - (v[1].1 - v[0].1) * (v[2].0 - v[0].0);
    if area == 0.0 {
        return None;
    }
    if area < 0.0 {
        v.swap(1, 2);
    }
    let mut w = [0.0; 3];
    for i in 0..3 {
        let (p, q) = (v[(i + 1) % 3], v[(i + 2) % 3]);
        let (ex, ey) = (q.0 - p.0, q.1 - p.1);
        // Evaluate from the lexicographically smaller endpoint so both
        // triangles sharing the edge get exactly negated values.
        let (sign, a, z) = if (p.0, p.1) <= (q.0, q.1) { (1.0, p, q) } else { (-1.0, q, p) };
        let e = sign * ((z.0 - a.0) * (pc - a.1) - (z.1 - a.1) * (pb - a.0));
        let owns_edge = ey > 0.0 || (ey == 0.0 && ex < 0.0);
        if e < 0.0 || (e == 0.0 && !owns_edge) {
            return None;
        }
        w[i] = e;
    }
    let sum = w[0] + w[1] + w[2];
    (sum > 0.0).then(|| (w[0] * v[0].2 + w[1] * v[1].2 + w[2] * v[2].2) / sum)
}

fn cast_axis(grid: &VoxelGrid, part: &TriMesh, axis: usize, votes: &mut [u8]) {
    let (b, c) = other_axes(axis);
    let (nb, nc) = (grid.dims[b], grid.dims[c]);
    let mut lines: Vec<Vec<f64>> = vec![Vec::new(); nb * nc];
    let line_range = |lo: f64, hi: f64, k: usize, n: usize| {
        let o = grid.origin[k];
        let first = ((lo - o) / grid.h - 0.5).ceil().max(0.0) as usize;
        let last = ((hi - o) / grid.h - 0.5).floor();
        if last < 0.0 {
            return first..first;
        }
        first..(last as usize + 1).min(n)
    };
    for t in 0..part.triangles.len() {
        let tri = part.triangle(t);
        let (tlo, thi) = aabb(&tri).expect("three points");
        for j in line_range(tlo[b], thi[b], b, nb) {
            let pb = grid.origin[b] + (j as f64 + 0.5) * grid.h;
            for k in line_range(tlo[c], thi[c], c, nc) {
                let pc = grid.origin[c] + (k as f64 + 0.5) * grid.h;
                if let Some(x) = crossing(&tri, axis, pb, pc) {
                    lines[j + nb * k].push(x);
                }
            }
        }
    }
    for j in 0..nb {
        for k in 0..nc {
            let xs = &mut lines[j + nb * k];
            if xs.is_empty() {
                continue;
            }
            xs.sort_by(f64::total_cmp);
            let mut passed = 0;
            for i in 0..grid.dims[axis] {
                let x = grid.origin[axis] + (i as f64 + 0.5) * grid.h;
                while passed < xs.len() && xs[passed] < x {
                    passed += 1;
                }
                if passed % 2 == 1 {
                    let mut v = [0; 3];
                    v[axis] = i;
                    v[b] = j;
                    v[c] = k;
                    votes[grid.index(v)] += 1;
                }
            }
        }
    }
}

/// Inside test for an arbitrary point by the same three-ray parity vote.
fn inside_solid(parts: &[TriMesh], p: &Point3<f64>) -> bool {
    parts.iter().any(|m| {
        let votes = (0..3)
            .filter(|&axis| {
                let (b, c) = other_axes(axis);
                let n = (0..m.triangles.len())
                    .filter(|&t| crossing(&m.triangle(t), axis, p[b], p[c]).is_some_and(|x| x > p[axis]))
                    .count();
                n % 2 == 1
            })
            .count();
        votes >= 2
    })
}

/// True for a triangle lying in a face plane of the box `[lo, hi]` whose
/// solid side is outside the box; it bounds a neighbor cell, not this one.
fn faces_away_on_boundary(tri: &[Point3<f64>; 3], lo: &Point3<f64>, hi: &Point3<f64>, tol: f64) -> bool {
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
    (0..3).any(|a| {
        let on = |bound: f64| tri.iter().all(|v| (v[a] - bound).abs() <= tol);
        (on(lo[a]) && n[a] > 0.0) || (on(hi[a]) && n[a] < 0.0)
    })
}

/// Polygon of `tri` inside the box `[lo, hi]` (Sutherland-Hodgman).
///
/// Polygons with area below `min_area` are dropped: a triangle that only
/// grazes the box along an edge bounds no solid inside it.
fn clip_triangle(tri: [Point3<f64>; 3], lo: &Point3<f64>, hi: &Point3<f64>, min_area: f64, out: &mut Vec<Point3<f64>>) {
    let mut poly: Vec<Point3<f64>> = tri.to_vec();
    let mut next = Vec::with_capacity(9);
    for axis in 0..3 {
        for (bound, upper) in [(lo[axis], false), (hi[axis], true)] {
            let inside = |p: &Point3<f64>| if upper { p[axis] <= bound } else { p[axis] >= bound };
            next.clear();
            for i in 0..poly.len() {
                let (p, q) = (poly[i], poly[(i + 1) % poly.len()]);
                let (pin, qin) = (inside(&p), inside(&q));
                if pin {
                    next.push(p);
                }
                if pin != qin {
                    let t = (bound - p[axis]) / (q[axis] - p[axis]);
                    let mut r = p + (q - p) * t;
                    r[axis] = bound;
                    next.push(r);
                }
            }
            std::mem::swap(&mut poly, &mut next);
            if poly.is_empty() {
                return;
            }
        }
    }
    let area = (1..poly.len() - 1)
        .map(|i| (poly[i] - poly[0]).cross(&(poly[i + 1] - poly[0])))
        .sum::<Vector3<f64>>()
        .norm()
        / 2.0;
    if area > min_area {
        out.extend_from_slice(&poly);
    }
}

#[derive(Debug, Clone)]
struct Piece {
    lo: [usize; 3],
    hi: [usize; 3],
    /// `(part, triangle)` pairs whose bounds touch the cell.
    tris: Vec<(usize, usize)>,
    hull: Option<ConvexHull>,
    voxels: usize,
    tight: Option<([usize; 3], [usize; 3])>,
    concavity: f64,
}

struct Decomposer<'a> {
    parts: &'a [TriMesh],
    grid: VoxelGrid,
    boundary: Vec<[usize; 3]>,
}

impl Decomposer<'_> {
    fn cells(lo: [usize; 3], hi: [usize; 3]) -> impl Iterator<Item = [usize; 3]> {
        (lo[2]..hi[2]).flat_map(move |k| (lo[1]..hi[1]).flat_map(move |j| (lo[0]..hi[0]).map(move |i| [i, j, k])))
    }

    fn make_piece(&self, lo: [usize; 3], hi: [usize; 3], candidates: &[(usize, usize)], hull: Option<ConvexHull>) -> Piece {
        let (clo, chi) = (self.grid.corner(lo), self.grid.corner(hi));
        let tol = 1e-12 * (1.0 + self.grid.h);
        let tris: Vec<(usize, usize)> = candidates
            .iter()
            .copied()
            .filter(|&(p, t)| {
                let tri = self.parts[p].triangle(t);
                (0..3).all(|a| {
                    tri.iter().any(|v| v[a] >= clo[a] - tol) && tri.iter().any(|v| v[a] <= chi[a] + tol)
                })
            })
            .collect();

        let mut voxels = 0;
        let mut tight: Option<([usize; 3], [usize; 3])> = None;
        for v in Self::cells(lo, hi) {
            if self.grid.solid[self.grid.index(v)] {
                voxels += 1;
                let (tlo, thi) = tight.get_or_insert((v, [v[0] + 1, v[1] + 1, v[2] + 1]));
                for a in 0..3 {
                    tlo[a] = tlo[a].min(v[a]);
                    thi[a] = thi[a].max(v[a] + 1);
                }
            }
        }

        let hull = hull.or_else(|| {
            let mut pts = Vec::new();
            let plane_tol = 1e-9 * self.grid.h;
            let area_tol = 1e-12 * self.grid.h * self.grid.h;
            for &(p, t) in &tris {
                let tri = self.parts[p].triangle(t);
                if faces_away_on_boundary(&tri, &clo, &chi, plane_tol) {
                    continue;
                }
                clip_triangle(tri, &clo, &chi, area_tol, &mut pts);
            }
            let mid = Point3::from((clo.coords + chi.coords) / 2.0);
            for c in 0..8 {
                let corner = self.grid.corner([0, 1, 2].map(|a| if c & (1 << a) == 0 { lo[a] } else { hi[a] }));
                // Probe just inside the cell: corners on the surface come from clipping.
                let probe = corner + (mid - corner) * 1e-6;
                if inside_solid(self.parts, &probe) {
                    pts.push(corner);
                }
            }
            if pts.len() < 4 {
                return None;
            }

            convex_hull(&pts).ok()
        });
        let concavity = match &hull {
            Some(h) if h.volume > 0.0 => ((h.volume - voxels as f64 * self.grid.voxel_volume()) / h.volume).max(0.0),
            _ => 0.0,
        };
        Piece {
            lo,
            hi,
            tris,
            hull,
            voxels,
            tight,
            concavity,
        }
    }

    /// Best voxel plane to split `piece` at, as `(axis, index)`. Each
    /// candidate is scored by the summed hull volumes of its two halves,
    /// approximated from boundary voxels: the extremes in 26 directions plus
    /// a strided sample.
    /// Split plane for `piece`. Each axis proposes the cut that minimizes
    /// the children's summed hull volume; axes then compete on the volume
    /// removed, scaled by their span relative to the longest span so thin
    /// directions are not sliced into slabs.
    fn best_split(&self, piece: &Piece) -> Option<(usize, usize)> {
        let (tlo, thi) = piece.tight?;
        let inside = |v: &[usize; 3]| (0..3).all(|a| v[a] >= piece.lo[a] && v[a] < piece.hi[a]);
        let surface: Vec<[usize; 3]> = self.boundary.iter().filter(|v| inside(v)).copied().collect();
        let spans: [usize; 3] = std::array::from_fn(|a| thi[a] - tlo[a]);
        let max_span = *spans.iter().max()? as f64;
        let mut whole: Option<f64> = None;
        let mut per_axis: Vec<(f64, usize, usize)> = Vec::new();
        for axis in 0..3 {
            let span = spans[axis];
            if span < 2 {
                continue;
            }
            let mut cands: Vec<usize> = (1..=SPLITS_PER_AXIS)
                .map(|k| tlo[axis] + (span * k + SPLITS_PER_AXIS.div_ceil(2)) / (SPLITS_PER_AXIS + 1))
                .filter(|&s| s > tlo[axis] && s < thi[axis])
                .collect();
            cands.dedup();
            let mut sorted = surface.clone();
            sorted.sort_by_key(|v| v[axis]);
            let mut cuts: Vec<usize> = cands.iter().map(|&s| sorted.partition_point(|v| v[axis] < s)).collect();
            // A final cut past the end yields the extremes of the whole piece.
            cuts.push(sorted.len());
            let (below, above) = sweep_extremes(&sorted, &cuts);
            if whole.is_none() {
                whole = Some(self.approx_hull_volume(&below[cands.len()], &sorted));
            }
            let mut best: Option<(f64, usize)> = None;
            for (ci, &s) in cands.iter().enumerate() {
                let (lower, upper) = sorted.split_at(cuts[ci]);
                let score = self.approx_hull_volume(&below[ci], lower) + self.approx_hull_volume(&above[ci], upper);
                let center_offset = (2 * s).abs_diff(tlo[axis] + thi[axis]);
                let better = match best {
                    None => true,
                    Some((bs, bi)) => {
                        let b_off = (2 * bi).abs_diff(tlo[axis] + thi[axis]);
                        score < bs * (1.0 - 1e-9) || (score <= bs * (1.0 + 1e-9) && center_offset < b_off)
                    }
                };
                if better {
                    best = Some((score, s));
                }
            }
            if let Some((score, s)) = best {
                per_axis.push((score, axis, s));
            }
        }
        let whole = whole?;
        let merit = |&(score, axis, _): &(f64, usize, usize)| (whole - score).max(0.0) * spans[axis] as f64 / max_span;
        let mut choice: Option<&(f64, usize, usize)> = None;
        for cand in &per_axis {
            let better = match choice {
                None => true,
                Some(c) => {
                    let (m, mc) = (merit(cand), merit(c));
                    m > mc * (1.0 + 1e-9) || (m >= mc * (1.0 - 1e-9) && spans[cand.1] > spans[c.1])
                }
            };
            if better {
                choice = Some(cand);
            }
        }
        choice.map(|&(_, a, s)| (a, s))
    }

    fn approx_hull_volume(&self, extremes: &[[usize; 3]], voxels: &[[usize; 3]]) -> f64 {
        if voxels.len() < 4 {
            return 0.0;
        }
        let stride = voxels.len().div_ceil(SCORE_SAMPLES);
        let pts: Vec<Point3<f64>> = extremes
            .iter()
            .chain(voxels.iter().step_by(stride))
            .map(|v| self.grid.center(*v))
            .collect();
        convex_hull(&pts).map(|h| h.volume).unwrap_or(0.0)
    }

    fn coverage(&self, pieces: &[Piece]) -> Option<f64> {
        let solid = self.grid.solid_count();
        if solid == 0 {
            return None;
        }
        let (mut both, mut either) = (0usize, 0usize);
        for piece in pieces {
            let planes = piece.hull.as_ref().map(|h| h.planes()).unwrap_or_default();
            for v in Self::cells(piece.lo, piece.hi) {
                let s = self.grid.solid[self.grid.index(v)];
                let c = self.grid.center(v);
                let u = !planes.is_empty() && planes.iter().all(|(n, d)| n.dot(&c.coords) - d <= 1e-12);
                both += (s && u) as usize;
                either += (s || u) as usize;
            }
        }
        Some(both as f64 / either as f64)
    }
}

/// Directions `{-1, 0, 1}³ \\ 0` used for extreme voxels.
fn extreme_directions() -> Vec<[i64; 3]> {
    let mut dirs = Vec::with_capacity(26);
    for x in -1..=1 {
        for y in -1..=1 {
            for z in -1..=1 {
                if (x, y, z) != (0, 0, 0) {
                    dirs.push([x, y, z]);
                }
            }
        }
    }
    dirs
}

/// Directional extremes of `sorted[..cut]` and `sorted[cut..]` for every cut,
/// in one forward and one backward pass.
fn sweep_extremes(sorted: &[[usize; 3]], cuts: &[usize]) -> (Vec<Vec<[usize; 3]>>, Vec<Vec<[usize; 3]>>) {
    let dirs = extreme_directions();
    let dot = |d: &[i64; 3], v: &[usize; 3]| d[0] * v[0] as i64 + d[1] * v[1] as i64 + d[2] * v[2] as i64;
    let snapshot = |ext: &[Option<(i64, [usize; 3])>]| ext.iter().flatten().map(|e| e.1).collect::<Vec<_>>();
    let update = |ext: &mut Vec<Option<(i64, [usize; 3])>>, v: &[usize; 3]| {
        for (slot, d) in ext.iter_mut().zip(&dirs) {
            let val = dot(d, v);
            if slot.is_none_or(|(best, _)| val > best) {
                *slot = Some((val, *v));
            }
        }
    };

    let mut below = vec![Vec::new(); cuts.len()];
    let mut ext = vec![None; dirs.len()];
    let mut ci = 0;
    for (i, v) in sorted.iter().enumerate() {
        while ci < cuts.len() && cuts[ci] == i {
            below[ci] = snapshot(&ext);
            ci += 1;
        }
        update(&mut ext, v);
    }
    while ci < cuts.len() {
        below[ci] = snapshot(&ext);
        ci += 1;
    }

    let mut above = vec![Vec::new(); cuts.len()];
    let mut ext = vec![None; dirs.len()];
    let mut ci = cuts.len();
    for i in (0..sorted.len()).rev() {
        while ci > 0 && cuts[ci - 1] == i + 1 {
            above[ci - 1] = snapshot(&ext);
            ci -= 1;
        }
        update(&mut ext, &sorted[i]);
    }
    while ci > 0 {
        above[ci - 1] = snapshot(&ext);
        ci -= 1;
    }
    (below, above)
}

/// Decompose the union of closed meshes into convex pieces.
pub fn convex_decomposition(parts: &[TriMesh], params: &DecompositionParams) -> Result<Decomposition, GeometryError> {
    let all: Vec<Point3<f64>> = parts.iter().flat_map(|m| m.vertices.iter().copied()).collect();
    let root_hull = convex_hull(&all)?;
    let Some(grid) = voxelize(parts, params.voxel_resolution) else {
        return Err(GeometryError::Empty);
    };
    let boundary: Vec<[usize; 3]> = Decomposer::cells([0; 3], grid.dims)
        .filter(|&v| {
            let s = v.map(|c| c as i64);
            grid.solid[grid.index(v)]
                && [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]]
                    .iter()
                    .any(|d| !grid.is_solid([s[0] + d[0], s[1] + d[1], s[2] + d[2]]))
        })
        .collect();
    let dec = Decomposer { parts, grid, boundary };

    let everything: Vec<(usize, usize)> = parts
        .iter()
        .enumerate()
        .flat_map(|(p, m)| (0..m.triangles.len()).map(move |t| (p, t)))
        .collect();
    let mut pieces = vec![dec.make_piece([0; 3], dec.grid.dims, &everything, Some(root_hull))];

    let tol = params.concavity_tolerance;
    let mut unsplittable = vec![false];
    while pieces.len() < params.max_pieces.max(1) {
        let worst = (0..pieces.len())
            .filter(|&i| !unsplittable[i] && pieces[i].concavity > tol && pieces[i].voxels >= 2)
            .max_by(|&a, &b| {
                let score = |p: &Piece| p.concavity * p.hull.as_ref().map_or(0.0, |h| h.volume);
                score(&pieces[a]).total_cmp(&score(&pieces[b])).then(b.cmp(&a))
            });
        let Some(i) = worst else { break };
        let Some((axis, s)) = dec.best_split(&pieces[i]) else {
            unsplittable[i] = true;
            continue;
        };
        let parent = pieces.swap_remove(i);
        unsplittable.swap_remove(i);
        let mut hi_a = parent.hi;
        hi_a[axis] = s;
        let mut lo_b = parent.lo;
        lo_b[axis] = s;
        for (lo, hi) in [(parent.lo, hi_a), (lo_b, parent.hi)] {
            let child = dec.make_piece(lo, hi, &parent.tris, None);
            if child.hull.is_some() {
                pieces.push(child);
                unsplittable.push(false);
            }
        }
    }

    pieces.sort_by(|a, b| (a.lo[2], a.lo[1], a.lo[0]).cmp(&(b.lo[2], b.lo[1], b.lo[0])));
    let coverage_ratio = dec.coverage(&pieces);
    Ok(Decomposition {
        pieces: pieces.into_iter().filter_map(|p| p.hull).collect(),
        concavity_tolerance_used: tol,
        coverage_ratio,
    })
}
