use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use super::{Aabb, GeometryError};
use crate::math::{Point3, Pose, Vec3};

/// Print material of a face.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Material {
    /// Standard PLA: dermis and mounts.
    Structural,
    /// Conductive PLA: capacitive rings and traces.
    Conductive,
    /// TPU: compliant covering and supports.
    Flexible,
}

impl Material {
    pub const ALL: [Material; 3] = [Material::Structural, Material::Conductive, Material::Flexible];

    pub fn name(self) -> &'static str {
        match self {
            Material::Structural => "structural",
            Material::Conductive => "conductive",
            Material::Flexible => "flexible",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == name)
    }
}

/// Indexed triangle mesh in meters with one material tag per face.
#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TriMesh {
    pub vertices: Vec<Point3>,
    pub faces: Vec<[u32; 3]>,
    pub face_material: Vec<Material>,
}

impl TriMesh {
    /// Mesh with every face tagged `material`.
    pub fn new(vertices: Vec<Point3>, faces: Vec<[u32; 3]>, material: Material) -> Self {
        let face_material = vec![material; faces.len()];
        Self { vertices, faces, face_material }
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Corner positions of face `f`. Panics on out-of-range indices; run
    /// [`super::validate_mesh`] first on untrusted input.
    pub fn triangle(&self, f: usize) -> [Point3; 3] {
        let [a, b, c] = self.faces[f];
        [self.vertices[a as usize], self.vertices[b as usize], self.vertices[c as usize]]
    }

    pub fn triangles(&self) -> Vec<[Point3; 3]> {
        (0..self.faces.len()).map(|f| self.triangle(f)).collect()
    }

    /// Unnormalized face normal (twice the area vector).
    pub fn face_cross(&self, f: usize) -> Vec3 {
        let [a, b, c] = self.triangle(f);
        (b - a).cross(&(c - a))
    }

    pub fn face_area(&self, f: usize) -> f64 {
        0.5 * self.face_cross(f).norm()
    }

    pub fn face_normal(&self, f: usize) -> Option<Vec3> {
        let n = self.face_cross(f);
        let len = n.norm();
        (len > 0.0).then(|| n / len)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.faces.len()).map(|f| self.face_area(f)).sum()
    }

    /// Surface point at barycentric coordinates `(w0, w1, w2)` of face `f`.
    pub fn point_at(&self, f: usize, bary: [f64; 3]) -> Point3 {
        let [a, b, c] = self.triangle(f);
        Point3::from(a.coords * bary[0] + b.coords * bary[1] + c.coords * bary[2])
    }

    pub fn aabb(&self) -> Option<Aabb> {
        Aabb::from_points(self.vertices.iter())
    }

    /// Angle-weighted vertex normals. Fails on vertices that touch no
    /// non-degenerate face or whose weighted sum cancels.
    pub fn vertex_normals(&self) -> Result<Vec<Vec3>, GeometryError> {
        let mut acc = vec![Vec3::zeros(); self.vertices.len()];
        for f in 0..self.faces.len() {
            let Some(n) = self.face_normal(f) else { continue };
            let idx = self.faces[f];
            let p = self.triangle(f);
            for k in 0..3 {
                let e1 = p[(k + 1) % 3] - p[k];
                let e2 = p[(k + 2) % 3] - p[k];
                let angle = libm::atan2(e1.cross(&e2).norm(), e1.dot(&e2));
                acc[idx[k] as usize] += n * angle;
            }
        }
        acc.into_iter()
            .enumerate()
            .map(|(vertex, n)| {
                let len = n.norm();
                if len > 1e-12 && len.is_finite() {
                    Ok(n / len)
                } else {
                    Err(GeometryError::UndefinedNormal { vertex })
                }
            })
            .collect()
    }

    /// Appends `other` as a separate body; no vertex welding.
    pub fn append(&mut self, other: &TriMesh) {
        let base = self.vertices.len() as u32;
        self.vertices.extend_from_slice(&other.vertices);
        self.faces
            .extend(other.faces.iter().map(|[a, b, c]| [a + base, b + base, c + base]));
        self.face_material.extend_from_slice(&other.face_material);
    }

    pub fn transformed(&self, pose: &Pose) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| pose * v).collect(),
            faces: self.faces.clone(),
            face_material: self.face_material.clone(),
        }
    }

    pub fn scaled(&self, factor: f64) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|v| Point3::from(v.coords * factor)).collect(),
            faces: self.faces.clone(),
            face_material: self.face_material.clone(),
        }
    }

    pub fn with_material(mut self, material: Material) -> TriMesh {
        self.face_material.iter_mut().for_each(|m| *m = material);
        self
    }

    /// Reverses the winding of every face.
    pub fn flipped(mut self) -> TriMesh {
        self.faces.iter_mut().for_each(|f| f.swap(1, 2));
        self
    }

    /// Faces carrying `material`, with unreferenced vertices dropped.
    pub fn filter_material(&self, material: Material) -> TriMesh {
        let mut remap: BTreeMap<u32, u32> = BTreeMap::new();
        let mut out = TriMesh::default();
        for (face, m) in self.faces.iter().zip(&self.face_material) {
            if *m != material {
                continue;
            }
            let mut nf = [0u32; 3];
            for (k, &v) in face.iter().enumerate() {
                nf[k] = *remap.entry(v).or_insert_with(|| {
                    out.vertices.push(self.vertices[v as usize]);
                    (out.vertices.len() - 1) as u32
                });
            }
            out.faces.push(nf);
            out.face_material.push(material);
        }
        out
    }

    /// Concatenates bodies into one mesh.
    pub fn merge<'a>(parts: impl IntoIterator<Item = &'a TriMesh>) -> TriMesh {
        let mut out = TriMesh::default();
        for p in parts {
            out.append(p);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::primitives;

    #[test]
    fn cube_area_and_normals_point_outward() {
        let cube = primitives::box_mesh(Vec3::new(0.5, 0.5, 0.5), Material::Structural);
        assert!((cube.total_area() - 6.0).abs() < 1e-12);
        let normals = cube.vertex_normals().unwrap();
        for (v, n) in cube.vertices.iter().zip(&normals) {
            // corners: normal is the diagonal direction
            assert!((n - v.coords.normalize()).norm() < 1e-12);
        }
    }

    #[test]
    fn filter_material_keeps_only_tagged_faces() {
        let mut m = primitives::box_mesh(Vec3::new(1.0, 1.0, 1.0), Material::Structural);
        let ring = primitives::plane_patch(1.0, 1.0, 1, 1, Material::Conductive);
        m.append(&ring);
        let c = m.filter_material(Material::Conductive);
        assert_eq!(c.face_count(), 2);
        assert_eq!(c.vertex_count(), 4);
        assert_eq!(m.filter_material(Material::Flexible).face_count(), 0);
    }

    #[test]
    fn isolated_vertex_has_no_normal() {
        let mut m = primitives::plane_patch(1.0, 1.0, 1, 1, Material::Structural);
        m.vertices.push(Point3::origin());
        assert_eq!(m.vertex_normals(), Err(GeometryError::UndefinedNormal { vertex: 4 }));
    }
}
