//! Tessellation of URDF primitive shapes. Revolution surfaces are built
//! around the z axis, centered at the origin, with outward winding.

use std::f64::consts::{PI, TAU};

use nalgebra::Point3;
use urdd_store::schema::Shape;

use super::mesh::TriMesh;

/// Segments around revolution surfaces.
pub const DEFAULT_SEGMENTS: usize = 32;

/// Tessellate a primitive. Returns `None` for mesh shapes.
pub fn tessellate(shape: &Shape, segments: usize) -> Option<TriMesh> {
    let mut mesh = match shape {
        Shape::Mesh { .. } => return None,
        Shape::Box { half_extents } => box_mesh(*half_extents),
        Shape::Cylinder { radius, length } => cylinder_mesh(*radius, *length, segments),
        Shape::Sphere { radius } => sphere_mesh(*radius, segments, segments / 2),
        Shape::Capsule { radius, length } => capsule_mesh(*radius, *length, segments),
    };
    mesh.source = shape.descriptor();
    Some(mesh)
}

pub fn box_mesh(h: [f64; 3]) -> TriMesh {
    let vertices = (0..8)
        .map(|i| {
            Point3::new(
                if i & 1 == 0 { -h[0] } else { h[0] },
                if i & 2 == 0 { -h[1] } else { h[1] },
                if i & 4 == 0 { -h[2] } else { h[2] },
            )
        })
        .collect();
    let triangles = vec![
        [0, 2, 1], [1, 2, 3], // -z
        [4, 5, 6], [5, 7, 6], // +z
        [0, 1, 4], [1, 5, 4], // -y
        [2, 6, 3], [3, 6, 7], // +y
        [0, 4, 2], [2, 4, 6], // -x
        [1, 3, 5], [3, 7, 5], // +x
    ];
    TriMesh::new(vertices, triangles, format!("box:{}x{}x{}", 2.0 * h[0], 2.0 * h[1], 2.0 * h[2]))
}

/// Stack of rings `(radius, z)` closed by a pole or cap center at each end.
fn revolve(rings: &[(f64, f64)], bottom: f64, top: f64, segments: usize) -> TriMesh {
    let seg = segments.max(3);
    let mut vertices = vec![Point3::new(0.0, 0.0, bottom)];
    for &(r, z) in rings {
        for s in 0..seg {
            let a = TAU * s as f64 / seg as f64;
            vertices.push(Point3::new(r * a.cos(), r * a.sin(), z));
        }
    }
    vertices.push(Point3::new(0.0, 0.0, top));
    let top_idx = (vertices.len() - 1) as u32;
    let ring = |k: usize, s: usize| (1 + k * seg + s % seg) as u32;

    let mut triangles = Vec::new();
    for s in 0..seg {
        triangles.push([0, ring(0, s + 1), ring(0, s)]);
    }
    for k in 0..rings.len() - 1 {
        for s in 0..seg {
            let (a, b) = (ring(k, s), ring(k, s + 1));
            let (c, d) = (ring(k + 1, s), ring(k + 1, s + 1));
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    let last = rings.len() - 1;
    for s in 0..seg {
        triangles.push([ring(last, s), ring(last, s + 1), top_idx]);
    }
    TriMesh::new(vertices, triangles, "")
}

pub fn cylinder_mesh(radius: f64, length: f64, segments: usize) -> TriMesh {
    let h = length / 2.0;
    revolve(&[(radius, -h), (radius, h)], -h, h, segments)
}

pub fn sphere_mesh(radius: f64, segments: usize, stacks: usize) -> TriMesh {
    let stacks = stacks.max(2);
    let rings: Vec<(f64, f64)> = (1..stacks)
        .map(|k| {
            let phi = PI * k as f64 / stacks as f64;
            (radius * phi.sin(), -radius * phi.cos())
        })
        .collect();
    revolve(&rings, -radius, radius, segments)
}

/// Cylinder of `length` capped by hemispheres, so total height is `length + 2r`.
pub fn capsule_mesh(radius: f64, length: f64, segments: usize) -> TriMesh {
    let h = length / 2.0;
    let cap_stacks = (segments / 4).max(2);
    let mut rings = Vec::new();
    for k in 1..=cap_stacks {
        let phi = 0.5 * PI * k as f64 / cap_stacks as f64;
        rings.push((radius * phi.sin(), -h - radius * phi.cos()));
    }
    for k in (1..=cap_stacks).rev() {
        let phi = 0.5 * PI * k as f64 / cap_stacks as f64;
        rings.push((radius * phi.sin(), h + radius * phi.cos()));
    }
    revolve(&rings, -h - radius, h + radius, segments)
}
