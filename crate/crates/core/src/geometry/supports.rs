use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{point_segment_distance, primitives, Footprint, GeometryError, Material, TriMesh};
use crate::math::Point3;
use crate::rng::{stream_rng, Stream};
use crate::spatial::PointGrid;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SupportParams {
    /// Minimum distance between support bases (m).
    pub spacing: f64,
    pub radius: f64,
    pub segments: usize,
}

impl Default for SupportParams {
    fn default() -> Self {
        Self { spacing: 0.02, radius: 0.002, segments: 12 }
    }
}

/// Cylindrical post from a dermis point to the matching covering point.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    pub face: usize,
    pub barycentric: [f64; 3],
    pub base: Point3,
    pub tip: Point3,
    pub radius: f64,
    pub mesh: TriMesh,
}

struct Candidate {
    face: usize,
    bary: [f64; 3],
}

/// Jittered barycentric grid on every face, shuffled, then greedily thinned
/// by the spacing and keep-out constraints. Deterministic in `seed`.
pub fn generate_supports(
    dermis: &TriMesh,
    covering: &TriMesh,
    keepouts: &[Footprint],
    params: &SupportParams,
    seed: u64,
) -> Result<Vec<Support>, GeometryError> {
    if !(params.spacing > 0.0 && params.spacing.is_finite()) {
        return Err(GeometryError::InvalidParameter("support spacing must be > 0"));
    }
    if !(params.radius > 0.0) {
        return Err(GeometryError::InvalidParameter("support radius must be > 0"));
    }
    if dermis.faces != covering.faces || dermis.vertices.len() != covering.vertices.len() {
        return Err(GeometryError::InvalidParameter("covering must share the dermis connectivity"));
    }

    let mut rng = stream_rng(seed, Stream::Supports, 0);
    let pitch = params.spacing / 2.0;
    let mut candidates = Vec::new();
    for f in 0..dermis.face_count() {
        if dermis.face_area(f) <= super::DEGENERATE_AREA {
            continue;
        }
        let [a, b, c] = dermis.triangle(f);
        let longest = (b - a).norm().max((c - b).norm()).max((a - c).norm());
        let m = libm::ceil(longest / pitch).max(1.0) as usize;
        let mf = m as f64;
        for i in 0..m {
            for j in 0..m - i {
                // upward cell
                let up = [(i, j), (i + 1, j), (i, j + 1)];
                candidates.push(Candidate { face: f, bary: jitter(&mut rng, up, mf) });
                if i + j + 2 <= m {
                    let down = [(i + 1, j), (i + 1, j + 1), (i, j + 1)];
                    candidates.push(Candidate { face: f, bary: jitter(&mut rng, down, mf) });
                }
            }
        }
    }
    candidates.shuffle(&mut rng);

    let mut grid = PointGrid::new(params.spacing);
    let mut out = Vec::new();
    for cand in candidates {
        let base = dermis.point_at(cand.face, cand.bary);
        let tip = covering.point_at(cand.face, cand.bary);
        if (tip - base).norm() <= 1e-12 {
            continue;
        }
        let blocked = keepouts
            .iter()
            .any(|k| point_segment_distance(&k.center, &base, &tip) < k.radius + params.radius);
        if blocked || grid.has_neighbor(&base) {
            continue;
        }
        grid.insert(base);
        let mesh = primitives::cylinder_between(&base, &tip, params.radius, params.segments, Material::Flexible);
        out.push(Support { face: cand.face, barycentric: cand.bary, base, tip, radius: params.radius, mesh });
    }
    if out.is_empty() {
        return Err(GeometryError::Placement("keep-outs or a zero-thickness covering leave no room"));
    }
    Ok(out)
}

/// Uniform point inside the sub-triangle with lattice corners `cell` on an
/// `m`-subdivided face, returned as face barycentrics `(w0, w1, w2)`.
fn jitter(rng: &mut impl Rng, cell: [(usize, usize); 3], m: f64) -> [f64; 3] {
    let r1: f64 = rng.random();
    let r2: f64 = rng.random();
    let s = libm::sqrt(r1);
    let w = [1.0 - s, s * (1.0 - r2), s * r2];
    let mut u = 0.0;
    let mut v = 0.0;
    for (k, &(i, j)) in cell.iter().enumerate() {
        u += w[k] * i as f64 / m;
        v += w[k] * j as f64 / m;
    }
    let w0 = (1.0 - u - v).max(0.0);
    let sum = w0 + u + v;
    [w0 / sum, u / sum, v / sum]
}
