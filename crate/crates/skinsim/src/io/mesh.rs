//! STL and OBJ mesh files.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use skinsim_core::geometry::{Material, TriMesh};
use skinsim_core::math::Point3;

use crate::error::{Error, Result};

/// Length unit of coordinates stored in a file.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    M,
    Mm,
}

impl Units {
    pub fn to_meters(self) -> f64 {
        match self {
            Units::M => 1.0,
            Units::Mm => 1e-3,
        }
    }
}

/// Merges bit-identical positions (after unit scaling) into one vertex.
struct Welder {
    index: HashMap<[u64; 3], u32>,
    vertices: Vec<Point3>,
}

impl Welder {
    fn new() -> Self {
        Self { index: HashMap::new(), vertices: Vec::new() }
    }

    fn add(&mut self, p: Point3) -> u32 {
        // -0.0 and 0.0 are the same point
        let key = [p.x + 0.0, p.y + 0.0, p.z + 0.0].map(f64::to_bits);
        *self.index.entry(key).or_insert_with(|| {
            self.vertices.push(p);
            (self.vertices.len() - 1) as u32
        })
    }
}

fn is_binary_stl(bytes: &[u8]) -> bool {
    if bytes.len() < 84 {
        return false;
    }
    let n = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
    bytes.len() == 84 + 50 * n
}

/// Binary or ASCII STL; coincident corners are welded.
pub fn parse_stl(bytes: &[u8], units: Units) -> Result<TriMesh> {
    let s = units.to_meters();
    let mut w = Welder::new();
    let mut faces = Vec::new();
    if is_binary_stl(bytes) {
        let n = u32::from_le_bytes(bytes[80..84].try_into().expect("4 bytes")) as usize;
        for k in 0..n {
            let rec = &bytes[84 + 50 * k..84 + 50 * (k + 1)];
            let f = |o: usize| f32::from_le_bytes(rec[o..o + 4].try_into().expect("4 bytes")) as f64 * s;
            let mut tri = [0u32; 3];
            for (c, t) in tri.iter_mut().enumerate() {
                let o = 12 + 12 * c;
                *t = w.add(Point3::new(f(o), f(o + 4), f(o + 8)));
            }
            faces.push(tri);
        }
    } else {
        let text = std::str::from_utf8(bytes).map_err(|_| Error::format("STL is neither binary nor UTF-8 text"))?;
        if !text.trim_start().starts_with("solid") {
            return Err(Error::format("STL text must start with 'solid'"));
        }
        let mut corners = Vec::with_capacity(3);
        for (line_no, line) in text.lines().enumerate() {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("vertex") => {
                    let xyz: Vec<f64> = it.map(|t| t.parse::<f64>()).collect::<std::result::Result<_, _>>()
                        .map_err(|_| Error::format(format!("STL line {}: bad vertex", line_no + 1)))?;
                    if xyz.len() != 3 {
                        return Err(Error::format(format!("STL line {}: vertex needs 3 coordinates", line_no + 1)));
                    }
                    corners.push(w.add(Point3::new(xyz[0] * s, xyz[1] * s, xyz[2] * s)));
                }
                Some("endloop") => {
                    if corners.len() != 3 {
                        return Err(Error::format(format!("STL line {}: facet must have 3 vertices", line_no + 1)));
                    }
                    faces.push([corners[0], corners[1], corners[2]]);
                    corners.clear();
                }
                _ => {}
            }
        }
    }
    Ok(TriMesh::new(w.vertices, faces, Material::Structural))
}

/// Binary STL with per-face normals; units are meters.
pub fn stl_binary(mesh: &TriMesh) -> Vec<u8> {
    let mut out = Vec::with_capacity(84 + 50 * mesh.face_count());
    let mut header = [0u8; 80];
    let tag = b"skinsim binary STL";
    header[..tag.len()].copy_from_slice(tag);
    out.extend_from_slice(&header);
    out.extend_from_slice(&(mesh.face_count() as u32).to_le_bytes());
    for f in 0..mesh.face_count() {
        let n = mesh.face_normal(f).unwrap_or_default();
        let mut put = |x: f64| out.extend_from_slice(&(x as f32).to_le_bytes());
        put(n.x);
        put(n.y);
        put(n.z);
        for p in mesh.triangle(f) {
            put(p.x);
            put(p.y);
            put(p.z);
        }
        out.extend_from_slice(&[0, 0]);
    }
    out
}

/// Wavefront OBJ positions and faces. Polygons are fan-triangulated;
/// `g`/`usemtl` names matching a material tag set the tag of later faces.
pub fn parse_obj(text: &str, units: Units) -> Result<TriMesh> {
    let s = units.to_meters();
    let mut vertices = Vec::new();
    let mut faces = Vec::new();
    let mut materials = Vec::new();
    let mut current = Material::Structural;
    for (line_no, line) in text.lines().enumerate() {
        let bad = |what: &str| Error::format(format!("OBJ line {}: {what}", line_no + 1));
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let xyz: Vec<f64> = it.take(3).map(str::parse).collect::<std::result::Result<_, _>>().map_err(|_| bad("bad vertex"))?;
                if xyz.len() != 3 {
                    return Err(bad("vertex needs 3 coordinates"));
                }
                vertices.push(Point3::new(xyz[0] * s, xyz[1] * s, xyz[2] * s));
            }
            Some("f") => {
                let idx: Vec<u32> = it
                    .map(|tok| {
                        let raw: i64 = tok.split('/').next().unwrap_or("").parse().map_err(|_| bad("bad face index"))?;
                        let n = vertices.len() as i64;
                        let i = if raw < 0 { n + raw } else { raw - 1 };
                        if raw == 0 || i < 0 || i >= n {
                            return Err(bad("face index out of range"));
                        }
                        Ok(i as u32)
                    })
                    .collect::<Result<_>>()?;
                if idx.len() < 3 {
                    return Err(bad("face needs at least 3 vertices"));
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                    materials.push(current);
                }
            }
            Some("g") | Some("usemtl") => {
                if let Some(m) = it.next().and_then(Material::from_name) {
                    current = m;
                }
            }
            _ => {}
        }
    }
    let mut mesh = TriMesh::new(vertices, faces, Material::Structural);
    mesh.face_material = materials;
    Ok(mesh)
}

/// OBJ with one group per material tag (empty groups are omitted).
pub fn obj_string(mesh: &TriMesh) -> String {
    let mut out = String::from("o skin\n");
    for v in &mesh.vertices {
        let _ = writeln!(out, "v {} {} {}", v.x, v.y, v.z);
    }
    for m in Material::ALL {
        let faces: Vec<&[u32; 3]> = mesh.faces.iter().zip(&mesh.face_material).filter(|(_, &fm)| fm == m).map(|(f, _)| f).collect();
        if faces.is_empty() {
            continue;
        }
        let _ = writeln!(out, "g {}\nusemtl {}", m.name(), m.name());
        for f in faces {
            let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
    }
    out
}

/// Reads `.stl` or `.obj` by extension.
pub fn read_mesh(path: &Path, units: Units) -> Result<TriMesh> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    match ext.as_deref() {
        Some("stl") => parse_stl(&bytes, units),
        Some("obj") => parse_obj(std::str::from_utf8(&bytes).map_err(|_| Error::format("OBJ is not UTF-8"))?, units),
        _ => Err(Error::format(format!("unsupported mesh format: {}", path.display()))),
    }
}
