//! Closed-form mesh builders. All windings are counter-clockwise seen from
//! outside.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use super::{Material, TriMesh};
use crate::math::{frame_from_normal, pose, Point3, Vec3};

/// Axis-aligned box centered at the origin.
pub fn box_mesh(half: Vec3, material: Material) -> TriMesh {
    let vertices = (0..8)
        .map(|i| {
            let s = |bit: usize| if i & (1 << bit) != 0 { 1.0 } else { -1.0 };
            Point3::new(s(0) * half.x, s(1) * half.y, s(2) * half.z)
        })
        .collect();
    let faces = vec![
        [0, 2, 3], [0, 3, 1], // -z
        [4, 5, 7], [4, 7, 6], // +z
        [0, 1, 5], [0, 5, 4], // -y
        [2, 6, 7], [2, 7, 3], // +y
        [0, 4, 6], [0, 6, 2], // -x
        [1, 3, 7], [1, 7, 5], // +x
    ];
    TriMesh::new(vertices, faces, material)
}

/// `width × height` rectangle in the XY plane, centered at the origin, normal +Z.
pub fn plane_patch(width: f64, height: f64, nx: usize, ny: usize, material: Material) -> TriMesh {
    let (nx, ny) = (nx.max(1), ny.max(1));
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push(Point3::new(
                -0.5 * width + width * i as f64 / nx as f64,
                -0.5 * height + height * j as f64 / ny as f64,
                0.0,
            ));
        }
    }
    let idx = |i: usize, j: usize| (j * (nx + 1) + i) as u32;
    let mut faces = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    TriMesh::new(vertices, faces, material)
}

/// Icosphere refined until the deviation of every face centroid from the
/// true sphere is at most `chordal_tolerance`.
pub fn sphere(radius: f64, chordal_tolerance: f64, material: Material) -> TriMesh {
    let phi = (1.0 + libm::sqrt(5.0)) / 2.0;
    let raw = [
        (-1.0, phi, 0.0), (1.0, phi, 0.0), (-1.0, -phi, 0.0), (1.0, -phi, 0.0),
        (0.0, -1.0, phi), (0.0, 1.0, phi), (0.0, -1.0, -phi), (0.0, 1.0, -phi),
        (phi, 0.0, -1.0), (phi, 0.0, 1.0), (-phi, 0.0, -1.0), (-phi, 0.0, 1.0),
    ];
    let mut vertices: Vec<Point3> = raw
        .iter()
        .map(|&(x, y, z)| Point3::from(Vec3::new(x, y, z).normalize() * radius))
        .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    let tol = chordal_tolerance.max(radius * 1e-6);
    loop {
        let worst = faces
            .iter()
            .map(|f| {
                let c = (vertices[f[0] as usize].coords + vertices[f[1] as usize].coords + vertices[f[2] as usize].coords) / 3.0;
                radius - c.norm()
            })
            .fold(0.0, f64::max);
        if worst <= tol {
            break;
        }
        let mut midpoints: BTreeMap<(u32, u32), u32> = BTreeMap::new();
        let mut mid = |a: u32, b: u32, vertices: &mut Vec<Point3>| -> u32 {
            *midpoints.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let m = (vertices[a as usize].coords + vertices[b as usize].coords).normalize() * radius;
                vertices.push(Point3::from(m));
                (vertices.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = mid(a, b, &mut vertices);
            let bc = mid(b, c, &mut vertices);
            let ca = mid(c, a, &mut vertices);
            next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    TriMesh::new(vertices, faces, material)
}

/// Open tube of `radius` around +Z from `z = 0` to `z = length`.
pub fn cylinder_shell(radius: f64, length: f64, segments: usize, rows: usize, material: Material) -> TriMesh {
    let (segments, rows) = (segments.max(3), rows.max(1));
    let mut vertices = Vec::with_capacity(segments * (rows + 1));
    for j in 0..=rows {
        let z = length * j as f64 / rows as f64;
        for k in 0..segments {
            let a = TAU * k as f64 / segments as f64;
            vertices.push(Point3::new(radius * libm::cos(a), radius * libm::sin(a), z));
        }
    }
    let idx = |k: usize, j: usize| (j * segments + k % segments) as u32;
    let mut faces = Vec::with_capacity(2 * segments * rows);
    for j in 0..rows {
        for k in 0..segments {
            let (a, b, c, d) = (idx(k, j), idx(k + 1, j), idx(k + 1, j + 1), idx(k, j + 1));
            faces.push([a, b, c]);
            faces.push([a, c, d]);
        }
    }
    TriMesh::new(vertices, faces, material)
}

/// Closed cylinder around +Z with its base disk at the origin.
pub fn cylinder(radius: f64, height: f64, segments: usize, material: Material) -> TriMesh {
    let mut m = cylinder_shell(radius, height, segments, 1, material);
    let s = segments.max(3);
    let bottom = m.vertices.len() as u32;
    m.vertices.push(Point3::origin());
    m.vertices.push(Point3::new(0.0, 0.0, height));
    let top = bottom + 1;
    for k in 0..s {
        let (a, b) = (k as u32, ((k + 1) % s) as u32);
        m.faces.push([bottom, b, a]);
        m.faces.push([top, s as u32 + a, s as u32 + b]);
    }
    m.face_material = vec![material; m.faces.len()];
    m
}

/// Closed cylinder whose axis runs from `base` to `tip`.
pub fn cylinder_between(base: &Point3, tip: &Point3, radius: f64, segments: usize, material: Material) -> TriMesh {
    let axis = tip - base;
    let len = axis.norm();
    let local = cylinder(radius, len, segments, material);
    let rot = if len > 0.0 { frame_from_normal(&(axis / len)) } else { crate::math::Quat::identity() };
    local.transformed(&pose(base.coords, rot))
}

/// Flat annular prism around +Z: hole of `inner` radius, rim of `outer`
/// radius, base at `z = 0`. Vertex layout: inner-bottom, outer-bottom,
/// inner-top, outer-top rings of `segments` vertices each.
pub fn annulus_prism(inner: f64, outer: f64, height: f64, segments: usize, material: Material) -> TriMesh {
    let s = segments.max(3);
    let mut vertices = Vec::with_capacity(4 * s);
    for (r, z) in [(inner, 0.0), (outer, 0.0), (inner, height), (outer, height)] {
        for k in 0..s {
            let a = TAU * k as f64 / s as f64;
            vertices.push(Point3::new(r * libm::cos(a), r * libm::sin(a), z));
        }
    }
    let ring = |r: usize, k: usize| (r * s + k % s) as u32;
    let (ib, ob, it, ot) = (0, 1, 2, 3);
    let mut faces = Vec::with_capacity(8 * s);
    for k in 0..s {
        let n = k + 1;
        // outer wall
        faces.push([ring(ob, k), ring(ob, n), ring(ot, n)]);
        faces.push([ring(ob, k), ring(ot, n), ring(ot, k)]);
        // inner wall, facing the axis
        faces.push([ring(ib, k), ring(it, k), ring(it, n)]);
        faces.push([ring(ib, k), ring(it, n), ring(ib, n)]);
        // top
        faces.push([ring(it, k), ring(ot, k), ring(ot, n)]);
        faces.push([ring(it, k), ring(ot, n), ring(it, n)]);
        // bottom
        faces.push([ring(ib, k), ring(ib, n), ring(ob, n)]);
        faces.push([ring(ib, k), ring(ob, n), ring(ob, k)]);
    }
    TriMesh::new(vertices, faces, material)
}

/// Signed volume; positive for closed meshes with outward winding.
pub fn signed_volume(mesh: &TriMesh) -> f64 {
    (0..mesh.face_count())
        .map(|f| {
            let [a, b, c] = mesh.triangle(f);
            a.coords.dot(&b.coords.cross(&c.coords)) / 6.0
        })
        .sum()
}
