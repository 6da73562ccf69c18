use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::TriMesh;

/// Faces with area at or below this (m²) are reported as degenerate.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Finding {
    IndexOutOfRange { face: usize, index: u32 },
    NonFiniteVertex { vertex: usize },
    DegenerateFace { face: usize, area: f64 },
    /// Two faces traverse the shared edge in the same direction.
    InconsistentWinding { edge: (u32, u32) },
    NonManifoldEdge { edge: (u32, u32), faces: usize },
    MaterialCountMismatch { faces: usize, tags: usize },
    SelfIntersection { faces: (usize, usize) },
    /// Offset of zero produced a copy lying on top of its source.
    CoincidentOffset,
}

impl Finding {
    pub fn severity(&self) -> Severity {
        match self {
            Finding::NonManifoldEdge { .. }
            | Finding::SelfIntersection { .. }
            | Finding::CoincidentOffset => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
    pub boundary_edges: usize,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity() == Severity::Error)
    }

    pub fn is_valid(&self) -> bool {
        self.errors().next().is_none()
    }

    /// Watertight: every edge shared by exactly two faces.
    pub fn is_closed(&self) -> bool {
        self.boundary_edges == 0
            && !self.findings.iter().any(|f| matches!(f, Finding::NonManifoldEdge { .. }))
    }
}

/// Checks indices, degenerate faces, winding consistency and open boundary
/// edges. Never fails; everything found goes into the report.
pub fn validate_mesh(mesh: &TriMesh) -> ValidationReport {
    let mut report = ValidationReport::default();
    let nv = mesh.vertices.len();

    if mesh.face_material.len() != mesh.faces.len() {
        report.findings.push(Finding::MaterialCountMismatch {
            faces: mesh.faces.len(),
            tags: mesh.face_material.len(),
        });
    }
    for (vertex, v) in mesh.vertices.iter().enumerate() {
        if !v.coords.iter().all(|c| c.is_finite()) {
            report.findings.push(Finding::NonFiniteVertex { vertex });
        }
    }

    // undirected edge -> (uses, forward uses)
    let mut edges: BTreeMap<(u32, u32), (usize, usize)> = BTreeMap::new();
    for (face, idx) in mesh.faces.iter().enumerate() {
        if let Some(&bad) = idx.iter().find(|&&i| i as usize >= nv) {
            report.findings.push(Finding::IndexOutOfRange { face, index: bad });
            continue;
        }
        let area = mesh.face_area(face);
        if !(area > DEGENERATE_AREA) {
            report.findings.push(Finding::DegenerateFace { face, area });
        }
        for k in 0..3 {
            let (a, b) = (idx[k], idx[(k + 1) % 3]);
            let key = (a.min(b), a.max(b));
            let e = edges.entry(key).or_insert((0, 0));
            e.0 += 1;
            if a < b {
                e.1 += 1;
            }
        }
    }

    for (&edge, &(uses, forward)) in &edges {
        match uses {
            1 => report.boundary_edges += 1,
            2 => {
                if forward != 1 {
                    report.findings.push(Finding::InconsistentWinding { edge });
                }
            }
            n => report.findings.push(Finding::NonManifoldEdge { edge, faces: n }),
        }
    }
    report
}
