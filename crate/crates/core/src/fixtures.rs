//! Reference robot shells and scenes shared by examples, tests and the CLI.

use alloc::vec::Vec;

use crate::geometry::{primitives, Material, TriMesh};
use crate::math::{pose, Point3, Quat, Vec3};

/// Four capped cylinders roughly matching the link envelopes of a 7-DoF
/// collaborative arm (radii 55 to 70 mm, lengths 0.2 to 0.38 m), stacked along +Z
/// with small gaps.
pub fn arm_links() -> TriMesh {
    let links = [(0.070, 0.33), (0.065, 0.32), (0.060, 0.38), (0.055, 0.20)];
    let mut z = 0.0;
    let mut parts: Vec<TriMesh> = Vec::new();
    for (r, len) in links {
        parts.push(primitives::cylinder_between(
            &Point3::new(0.0, 0.0, z),
            &Point3::new(0.0, 0.0, z + len),
            r,
            48,
            Material::Structural,
        ));
        z += len + 0.03;
    }
    TriMesh::merge(parts.iter())
}

/// Square wall of side `size` facing −Z, centered on the Z axis at `z`.
pub fn wall(z: f64, size: f64) -> TriMesh {
    primitives::plane_patch(size, size, 1, 1, Material::Structural).transformed(&pose(Vec3::new(0.0, 0.0, z), Quat::identity()))
}
