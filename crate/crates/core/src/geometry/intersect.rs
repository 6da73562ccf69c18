//! Exact-arithmetic-free primitive intersection tests on `f64`.

use crate::math::{Point3, Vec3};

/// Hits closer than this along a ray are ignored (the ray origin sits on a surface).
pub const RAY_T_MIN: f64 = 1e-9;

/// Double-sided Möller–Trumbore. Returns the ray parameter of the hit; for a
/// unit `dir` that is the distance in meters.
pub fn ray_triangle(origin: &Point3, dir: &Vec3, tri: &[Point3; 3]) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det == 0.0 || !det.is_finite() {
        return None;
    }
    let inv = 1.0 / det;
    let s = origin - tri[0];
    let u = s.dot(&p) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(&e1);
    let v = dir.dot(&q) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(&q) * inv;
    (t > RAY_T_MIN).then_some(t)
}

/// Closed segment `p0..p1` against a triangle. Segments lying in the
/// triangle's plane are tested in 2D.
pub fn segment_triangle(p0: &Point3, p1: &Point3, tri: &[Point3; 3]) -> bool {
    let n = (tri[1] - tri[0]).cross(&(tri[2] - tri[0]));
    let nn = n.norm();
    if nn == 0.0 {
        return false;
    }
    let n = n / nn;
    let scale = [tri[1] - tri[0], tri[2] - tri[0], p1 - p0, p0 - tri[0]]
        .iter()
        .map(|v| v.norm())
        .fold(0.0, f64::max);
    let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
    let da = n.dot(&(p0 - tri[0]));
    let db = n.dot(&(p1 - tri[0]));
    if (da > eps && db > eps) || (da < -eps && db < -eps) {
        return false;
    }
    let (pa, pb) = (project(&n, p0), project(&n, p1));
    let t2 = [project(&n, &tri[0]), project(&n, &tri[1]), project(&n, &tri[2])];
    if da.abs() <= eps && db.abs() <= eps {
        return inside_2d(pa, &t2)
            || inside_2d(pb, &t2)
            || (0..3).any(|k| segments_cross_2d(pa, pb, t2[k], t2[(k + 1) % 3]));
    }
    let t = da / (da - db);
    let x = p0 + (p1 - p0) * t;
    inside_2d(project(&n, &x), &t2)
}

/// Drops the dominant axis of `n`.
fn project(n: &Vec3, p: &Point3) -> [f64; 2] {
    match n.iamax() {
        0 => [p.y, p.z],
        1 => [p.x, p.z],
        _ => [p.x, p.y],
    }
}

fn coplanar(a: &[Point3; 3], b: &[Point3; 3]) -> bool {
    let n = (a[1] - a[0]).cross(&(a[2] - a[0]));
    let scale = n.norm();
    if scale == 0.0 {
        return false;
    }
    let ext = (a[1] - a[0]).norm().max((a[2] - a[0]).norm());
    b.iter().all(|p| (n.dot(&(p - a[0])) / scale).abs() <= 1e-12 * ext.max(1.0))
}

fn orient2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_cross_2d(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let d1 = orient2(r, s, p);
    let d2 = orient2(r, s, q);
    let d3 = orient2(p, q, r);
    let d4 = orient2(p, q, s);
    ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
}

fn inside_2d(p: [f64; 2], t: &[[f64; 2]; 3]) -> bool {
    let a = orient2(t[0], t[1], p);
    let b = orient2(t[1], t[2], p);
    let c = orient2(t[2], t[0], p);
    (a >= 0.0 && b >= 0.0 && c >= 0.0) || (a <= 0.0 && b <= 0.0 && c <= 0.0)
}

fn coplanar_overlap(a: &[Point3; 3], b: &[Point3; 3]) -> bool {
    let n = (a[1] - a[0]).cross(&(a[2] - a[0]));
    // drop the dominant normal axis
    let drop = n.iamax();
    let proj = |p: &Point3| -> [f64; 2] {
        match drop {
            0 => [p.y, p.z],
            1 => [p.x, p.z],
            _ => [p.x, p.y],
        }
    };
    let ta = [proj(&a[0]), proj(&a[1]), proj(&a[2])];
    let tb = [proj(&b[0]), proj(&b[1]), proj(&b[2])];
    for i in 0..3 {
        for j in 0..3 {
            if segments_cross_2d(ta[i], ta[(i + 1) % 3], tb[j], tb[(j + 1) % 3]) {
                return true;
            }
        }
    }
    inside_2d(ta[0], &tb) || inside_2d(tb[0], &ta)
}

/// Triangle-triangle overlap (touching counts as intersecting).
pub fn triangles_intersect(a: &[Point3; 3], b: &[Point3; 3]) -> bool {
    if coplanar(a, b) {
        return coplanar_overlap(a, b);
    }
    (0..3).any(|k| segment_triangle(&a[k], &a[(k + 1) % 3], b))
        || (0..3).any(|k| segment_triangle(&b[k], &b[(k + 1) % 3], a))
}

/// Closest point on a triangle to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Point3, tri: &[Point3; 3]) -> Point3 {
    let [a, b, c] = *tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

pub fn point_segment_distance(p: &Point3, a: &Point3, b: &Point3) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 > 0.0 { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    (p - (a + ab * t)).norm()
}
