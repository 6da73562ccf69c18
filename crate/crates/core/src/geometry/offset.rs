use alloc::vec::Vec;

use super::{validate_mesh, Aabb, Bvh, Finding, GeometryError, Material, TriMesh};
use crate::math::Point3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum OffsetDirection {
    Outward,
}

/// Distance (m) to push a surface along its outward vertex normals.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OffsetSpec {
    pub distance: f64,
    pub direction: OffsetDirection,
}

impl OffsetSpec {
    /// Zero is accepted and yields the identity (flagged by
    /// [`extrude_covering`]); negative or non-finite distances are rejected.
    pub fn outward(distance: f64) -> Result<Self, GeometryError> {
        if !(distance >= 0.0 && distance.is_finite()) {
            return Err(GeometryError::InvalidParameter("offset distance must be finite and >= 0"));
        }
        Ok(Self { distance, direction: OffsetDirection::Outward })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OffsetResult {
    pub mesh: TriMesh,
    /// Non-fatal findings (self-intersections outside strict mode, zero offset).
    pub warnings: Vec<Finding>,
}

/// Displaces every vertex along its angle-weighted normal by
/// `spec.distance`. Connectivity is unchanged; faces are tagged structural.
pub fn offset_surface(mesh: &TriMesh, spec: &OffsetSpec, strict: bool) -> Result<OffsetResult, GeometryError> {
    displace(mesh, spec, strict, Material::Structural)
}

/// Covering layer: a displaced copy of the dermis tagged flexible. It is not
/// welded to the dermis.
pub fn extrude_covering(dermis: &TriMesh, spec: &OffsetSpec, strict: bool) -> Result<OffsetResult, GeometryError> {
    let mut out = displace(dermis, spec, strict, Material::Flexible)?;
    if spec.distance == 0.0 {
        out.warnings.push(Finding::CoincidentOffset);
    }
    Ok(out)
}

fn displace(mesh: &TriMesh, spec: &OffsetSpec, strict: bool, material: Material) -> Result<OffsetResult, GeometryError> {
    let report = validate_mesh(mesh);
    if !report.is_valid() {
        return Err(GeometryError::InvalidMesh(report));
    }
    if !(spec.distance >= 0.0 && spec.distance.is_finite()) {
        return Err(GeometryError::InvalidParameter("offset distance must be finite and >= 0"));
    }
    let normals = mesh.vertex_normals()?;
    let vertices: Vec<Point3> = mesh
        .vertices
        .iter()
        .zip(&normals)
        .map(|(v, n)| v + n * spec.distance)
        .collect();
    let out = TriMesh::new(vertices, mesh.faces.clone(), material);

    let mut warnings = Vec::new();
    if spec.distance > 0.0 {
        let pairs = find_self_intersections(&out);
        if !pairs.is_empty() {
            if strict {
                return Err(GeometryError::SelfIntersection { pairs });
            }
            warnings.extend(pairs.into_iter().map(|faces| Finding::SelfIntersection { faces }));
        }
    }
    Ok(OffsetResult { mesh: out, warnings })
}

/// Face pairs that intersect without sharing a vertex, sorted.
pub fn find_self_intersections(mesh: &TriMesh) -> Vec<(usize, usize)> {
    let tris = mesh.triangles();
    let bvh = Bvh::build(&tris);
    let mut pairs = Vec::new();
    for (i, t) in tris.iter().enumerate() {
        let Some(b) = Aabb::from_points(t.iter()) else { continue };
        let fi = mesh.faces[i];
        bvh.for_each_overlap(&b, |j| {
            if j <= i {
                return;
            }
            let fj = mesh.faces[j];
            if fi.iter().any(|v| fj.contains(v)) {
                return;
            }
            if super::triangles_intersect(t, &tris[j]) {
                pairs.push((i, j));
            }
        });
    }
    pairs.sort_unstable();
    pairs
}
