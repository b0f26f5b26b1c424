//! OBJ, STL and GLB reading and writing, triangle geometry only.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use nalgebra::{Matrix4, Point3, Quaternion, UnitQuaternion, Vector3, Vector4};
use serde_json::{json, Value};

use super::mesh::TriMesh;
use crate::error::GeometryError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Obj,
    Stl,
    Glb,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<MeshFormat> {
        let ext = path.extension()?.to_str()?.to_ascii_lowercase();
        match ext.as_str() {
            "obj" => Some(MeshFormat::Obj),
            "stl" => Some(MeshFormat::Stl),
            "glb" => Some(MeshFormat::Glb),
            _ => None,
        }
    }
}

/// Load, scale and clean a mesh file.
pub fn load_mesh(path: &Path, scale: [f64; 3]) -> Result<TriMesh, GeometryError> {
    let format =
        MeshFormat::from_path(path).ok_or_else(|| GeometryError::UnsupportedFormat(path.to_path_buf()))?;
    let bytes = fs::read(path).map_err(|source| GeometryError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let corrupt = |message: String| GeometryError::CorruptMesh {
        path: path.to_path_buf(),
        message,
    };
    let mut mesh = match format {
        MeshFormat::Obj => read_obj(&String::from_utf8_lossy(&bytes)),
        MeshFormat::Stl => read_stl(&bytes),
        MeshFormat::Glb => read_glb(&bytes),
    }
    .map_err(corrupt)?;
    mesh.source = path.display().to_string();
    let mesh = mesh.scaled(scale).cleaned();
    if mesh.is_empty() {
        return Err(GeometryError::CorruptMesh {
            path: path.to_path_buf(),
            message: "no non-degenerate triangles".into(),
        });
    }
    Ok(mesh)
}

pub fn read_obj(text: &str) -> Result<TriMesh, String> {
    let mut vertices = Vec::new();
    let mut triangles = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| format!("line {}: {e}", lineno + 1))?;
                if coords.len() != 3 || coords.iter().any(|c| !c.is_finite()) {
                    return Err(format!("line {}: bad vertex", lineno + 1));
                }
                vertices.push(Point3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for tok in parts {
                    let first = tok.split('/').next().unwrap_or("");
                    let i: i64 = first
                        .parse()
                        .map_err(|_| format!("line {}: bad face index `{tok}`", lineno + 1))?;
                    let resolved = if i > 0 {
                        i - 1
                    } else if i < 0 {
                        vertices.len() as i64 + i
                    } else {
                        return Err(format!("line {}: face index 0", lineno + 1));
                    };
                    if resolved < 0 || resolved >= vertices.len() as i64 {
                        return Err(format!("line {}: face index out of range", lineno + 1));
                    }
                    idx.push(resolved as u32);
                }
                if idx.len() < 3 {
                    return Err(format!("line {}: face with fewer than 3 vertices", lineno + 1));
                }
                for k in 1..idx.len() - 1 {
                    triangles.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    Ok(TriMesh::new(vertices, triangles, ""))
}

pub fn write_obj(mesh: &TriMesh) -> String {
    let mut out = String::with_capacity(mesh.vertices.len() * 40 + mesh.triangles.len() * 20);
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for t in &mesh.triangles {
        let _ = writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1);
    }
    out
}

pub fn read_stl(bytes: &[u8]) -> Result<TriMesh, String> {
    let binary_len = |n: usize| 84 + 50 * n;
    if bytes.len() >= 84 {
        let n = u32::from_le_bytes([bytes[80], bytes[81], bytes[82], bytes[83]]) as usize;
        if bytes.len() == binary_len(n) {
            return read_stl_binary(bytes, n);
        }
    }
    let text = std::str::from_utf8(bytes).map_err(|_| "neither binary nor ASCII STL".to_string())?;
    if !text.trim_start().starts_with("solid") {
        return Err("neither binary nor ASCII STL".into());
    }
    let mut vertices = Vec::new();
    for line in text.lines() {
        let mut parts = line.split_whitespace();
        if parts.next() == Some("vertex") {
            let c: Vec<f64> = parts
                .take(3)
                .map(|s| s.parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|e| e.to_string())?;
            if c.len() != 3 {
                return Err("bad vertex line".into());
            }
            vertices.push(Point3::new(c[0], c[1], c[2]));
        }
    }
    if vertices.len() % 3 != 0 {
        return Err("vertex count is not a multiple of 3".into());
    }
    let triangles = (0..vertices.len() as u32 / 3)
        .map(|t| [3 * t, 3 * t + 1, 3 * t + 2])
        .collect();
    Ok(TriMesh::new(vertices, triangles, ""))
}

fn read_stl_binary(bytes: &[u8], n: usize) -> Result<TriMesh, String> {
    let f = |o: usize| f32::from_le_bytes([bytes[o], bytes[o + 1], bytes[o + 2], bytes[o + 3]]) as f64;
    let mut vertices = Vec::with_capacity(3 * n);
    for t in 0..n {
        let base = 84 + 50 * t + 12;
        for k in 0..3 {
            let o = base + 12 * k;
            let p = Point3::new(f(o), f(o + 4), f(o + 8));
            if !p.coords.iter().all(|c| c.is_finite()) {
                return Err(format!("non-finite vertex in triangle {t}"));
            }
            vertices.push(p);
        }
    }
    let triangles = (0..n as u32).map(|t| [3 * t, 3 * t + 1, 3 * t + 2]).collect();
    Ok(TriMesh::new(vertices, triangles, ""))
}

pub fn write_stl(mesh: &TriMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.triangles.len());
    let mut header = [b' '; 80];
    let tag = b"binary STL";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.triangles.len() as u32).to_le_bytes());
    for t in 0..mesh.triangles.len() {
        let [a, b, c] = mesh.triangle(t);
        let n = (b - a).cross(&(c - a));
        let n = if n.norm() > 0.0 { n.normalize() } else { n };
        for v in [n, a.coords, b.coords, c.coords] {
            for k in 0..3 {
                out.extend_from_slice(&(v[k] as f32).to_le_bytes());
            }
        }
        out.extend_from_slice(&0u16.to_le_bytes());
    }
    out
}

const GLB_MAGIC: u32 = 0x4654_6C67;
const CHUNK_JSON: u32 = 0x4E4F_534A;
const CHUNK_BIN: u32 = 0x004E_4942;

/// Single-mesh GLB with float positions and u32 indices.
pub fn write_glb(mesh: &TriMesh) -> Vec<u8> {
    let mut bin = Vec::with_capacity(mesh.vertices.len() * 12 + mesh.triangles.len() * 12);
    let mut lo = [f32::INFINITY; 3];
    let mut hi = [f32::NEG_INFINITY; 3];
    for v in &mesh.vertices {
        for k in 0..3 {
            let x = v[k] as f32;
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
            bin.extend_from_slice(&x.to_le_bytes());
        }
    }
    let positions_len = bin.len();
    for t in &mesh.triangles {
        for &i in t {
            bin.extend_from_slice(&i.to_le_bytes());
        }
    }
    let indices_len = bin.len() - positions_len;
    if mesh.vertices.is_empty() {
        lo = [0.0; 3];
        hi = [0.0; 3];
    }
    let doc = json!({
        "asset": {"version": "2.0", "generator": "urdd"},
        "scene": 0,
        "scenes": [{"nodes": [0]}],
        "nodes": [{"mesh": 0}],
        "meshes": [{"primitives": [{"attributes": {"POSITION": 0}, "indices": 1, "mode": 4}]}],
        "buffers": [{"byteLength": bin.len()}],
        "bufferViews": [
            {"buffer": 0, "byteOffset": 0, "byteLength": positions_len, "target": 34962},
            {"buffer": 0, "byteOffset": positions_len, "byteLength": indices_len, "target": 34963}
        ],
        "accessors": [
            {"bufferView": 0, "componentType": 5126, "count": mesh.vertices.len(), "type": "VEC3",
             "min": lo, "max": hi},
            {"bufferView": 1, "componentType": 5125, "count": mesh.triangles.len() * 3, "type": "SCALAR"}
        ]
    });
    let mut json_bytes = serde_json::to_vec(&doc).expect("static glTF document serializes");
    while !json_bytes.len().is_multiple_of(4) {
        json_bytes.push(b' ');
    }
    while bin.len() % 4 != 0 {
        bin.push(0);
    }
    let total = 12 + 8 + json_bytes.len() + 8 + bin.len();
    let mut out = Vec::with_capacity(total);
    out.extend_from_slice(&GLB_MAGIC.to_le_bytes());
    out.extend_from_slice(&2u32.to_le_bytes());
    out.extend_from_slice(&(total as u32).to_le_bytes());
    out.extend_from_slice(&(json_bytes.len() as u32).to_le_bytes());
    out.extend_from_slice(&CHUNK_JSON.to_le_bytes());
    out.extend_from_slice(&json_bytes);
    out.extend_from_slice(&(bin.len() as u32).to_le_bytes());
    out.extend_from_slice(&CHUNK_BIN.to_le_bytes());
    out.extend_from_slice(&bin);
    out
}

/// Read all triangle primitives of the default scene, with node transforms
/// applied.
pub fn read_glb(bytes: &[u8]) -> Result<TriMesh, String> {
    let u32_at = |o: usize| -> Result<u32, String> {
        bytes
            .get(o..o + 4)
            .map(|b| u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .ok_or_else(|| "truncated GLB".to_string())
    };
    if u32_at(0)? != GLB_MAGIC {
        return Err("bad GLB magic".into());
    }
    if u32_at(4)? != 2 {
        return Err("unsupported GLB version".into());
    }
    let mut offset = 12;
    let mut doc: Option<Value> = None;
    let mut bin: &[u8] = &[];
    while offset + 8 <= bytes.len() {
        let len = u32_at(offset)? as usize;
        let kind = u32_at(offset + 4)?;
        let data = bytes
            .get(offset + 8..offset + 8 + len)
            .ok_or("truncated GLB chunk")?;
        match kind {
            CHUNK_JSON => doc = Some(serde_json::from_slice(data).map_err(|e| e.to_string())?),
            CHUNK_BIN => bin = data,
            _ => {}
        }
        offset += 8 + len;
    }
    let doc = doc.ok_or("GLB has no JSON chunk")?;
    let gltf = Gltf { doc: &doc, bin };

    let mut out = TriMesh::default();
    let scene = doc["scene"].as_u64().unwrap_or(0) as usize;
    let roots: Vec<usize> = match doc["scenes"].get(scene) {
        Some(s) => index_list(&s["nodes"]),
        None => (0..doc["nodes"].as_array().map_or(0, Vec::len)).collect(),
    };
    for r in roots {
        gltf.visit(r, Matrix4::identity(), &mut out, 0)?;
    }
    if doc["nodes"].as_array().is_none_or(Vec::is_empty) {
        for m in 0..doc["meshes"].as_array().map_or(0, Vec::len) {
            gltf.append_mesh(m, &Matrix4::identity(), &mut out)?;
        }
    }
    Ok(out)
}

fn index_list(v: &Value) -> Vec<usize> {
    v.as_array()
        .map(|a| a.iter().filter_map(Value::as_u64).map(|i| i as usize).collect())
        .unwrap_or_default()
}

struct Gltf<'a> {
    doc: &'a Value,
    bin: &'a [u8],
}

impl Gltf<'_> {
    fn visit(&self, node: usize, parent: Matrix4<f64>, out: &mut TriMesh, depth: usize) -> Result<(), String> {
        if depth > 64 {
            return Err("GLB node hierarchy too deep".into());
        }
        let n = self.doc["nodes"].get(node).ok_or("node index out of range")?;
        let local = node_matrix(n)?;
        let world = parent * local;
        if let Some(m) = n["mesh"].as_u64() {
            self.append_mesh(m as usize, &world, out)?;
        }
        for c in index_list(&n["children"]) {
            self.visit(c, world, out, depth + 1)?;
        }
        Ok(())
    }

    fn append_mesh(&self, mesh: usize, world: &Matrix4<f64>, out: &mut TriMesh) -> Result<(), String> {
        let m = self.doc["meshes"].get(mesh).ok_or("mesh index out of range")?;
        for prim in m["primitives"].as_array().into_iter().flatten() {
            if prim["mode"].as_u64().unwrap_or(4) != 4 {
                continue;
            }
            let pos = prim["attributes"]["POSITION"]
                .as_u64()
                .ok_or("primitive without POSITION")? as usize;
            let positions = self.accessor_f32x3(pos)?;
            let base = out.vertices.len() as u32;
            for p in &positions {
                let h = world * Vector4::new(p[0], p[1], p[2], 1.0);
                out.vertices.push(Point3::new(h.x, h.y, h.z));
            }
            let indices = match prim["indices"].as_u64() {
                Some(i) => self.accessor_indices(i as usize)?,
                None => (0..positions.len() as u32).collect(),
            };
            if indices.len() % 3 != 0 {
                return Err("index count is not a multiple of 3".into());
            }
            for t in indices.chunks(3) {
                if t.iter().any(|&i| i as usize >= positions.len()) {
                    return Err("index out of range".into());
                }
                out.triangles.push([base + t[0], base + t[1], base + t[2]]);
            }
        }
        Ok(())
    }

    fn view(&self, accessor: &Value, elem_size: usize) -> Result<(Vec<&[u8]>, usize), String> {
        let count = accessor["count"].as_u64().ok_or("accessor without count")? as usize;
        let view_idx = accessor["bufferView"].as_u64().ok_or("sparse accessors unsupported")? as usize;
        let view = self.doc["bufferViews"].get(view_idx).ok_or("bufferView out of range")?;
        if view["buffer"].as_u64().unwrap_or(0) != 0 {
            return Err("external buffers unsupported".into());
        }
        let start = view["byteOffset"].as_u64().unwrap_or(0) as usize
            + accessor["byteOffset"].as_u64().unwrap_or(0) as usize;
        let stride = view["byteStride"].as_u64().map_or(elem_size, |s| s as usize);
        let mut items = Vec::with_capacity(count);
        for i in 0..count {
            let o = start + i * stride;
            items.push(self.bin.get(o..o + elem_size).ok_or("accessor exceeds buffer")?);
        }
        Ok((items, count))
    }

    fn accessor_f32x3(&self, idx: usize) -> Result<Vec<[f64; 3]>, String> {
        let a = self.doc["accessors"].get(idx).ok_or("accessor out of range")?;
        if a["componentType"].as_u64() != Some(5126) || a["type"].as_str() != Some("VEC3") {
            return Err("POSITION must be float VEC3".into());
        }
        let (items, _) = self.view(a, 12)?;
        Ok(items
            .into_iter()
            .map(|b| {
                let f = |k: usize| f32::from_le_bytes([b[k], b[k + 1], b[k + 2], b[k + 3]]) as f64;
                [f(0), f(4), f(8)]
            })
            .collect())
    }

    fn accessor_indices(&self, idx: usize) -> Result<Vec<u32>, String> {
        let a = self.doc["accessors"].get(idx).ok_or("accessor out of range")?;
        let size = match a["componentType"].as_u64() {
            Some(5121) => 1,
            Some(5123) => 2,
            Some(5125) => 4,
            _ => return Err("unsupported index component type".into()),
        };
        let (items, _) = self.view(a, size)?;
        Ok(items
            .into_iter()
            .map(|b| match size {
                1 => b[0] as u32,
                2 => u16::from_le_bytes([b[0], b[1]]) as u32,
                _ => u32::from_le_bytes([b[0], b[1], b[2], b[3]]),
            })
            .collect())
    }
}

fn node_matrix(n: &Value) -> Result<Matrix4<f64>, String> {
    let floats = |v: &Value| -> Option<Vec<f64>> { v.as_array()?.iter().map(Value::as_f64).collect() };
    if let Some(m) = floats(&n["matrix"]) {
        if m.len() != 16 {
            return Err("node matrix must have 16 entries".into());
        }
        return Ok(Matrix4::from_column_slice(&m));
    }
    let t = floats(&n["translation"]).unwrap_or_else(|| vec![0.0; 3]);
    let r = floats(&n["rotation"]).unwrap_or_else(|| vec![0.0, 0.0, 0.0, 1.0]);
    let s = floats(&n["scale"]).unwrap_or_else(|| vec![1.0; 3]);
    if t.len() != 3 || r.len() != 4 || s.len() != 3 {
        return Err("malformed node TRS".into());
    }
    let q = UnitQuaternion::from_quaternion(Quaternion::new(r[3], r[0], r[1], r[2]));
    let mut m = q.to_homogeneous();
    for c in 0..3 {
        for row in 0..3 {
            m[(row, c)] *= s[c];
        }
    }
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(&Vector3::new(t[0], t[1], t[2]));
    Ok(m)
}
