//! Bounding volume hierarchy over a triangle soup.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::intersect::ray_triangle;
use crate::math::{Point3, Vec3};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3,
    pub max: Point3,
}

impl Aabb {
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3>) -> Option<Aabb> {
        let mut it = points.into_iter();
        let first = *it.next()?;
        let mut b = Aabb { min: first, max: first };
        for p in it {
            b.grow(p);
        }
        Some(b)
    }

    fn grow(&mut self, p: &Point3) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    fn union(&self, o: &Aabb) -> Aabb {
        Aabb { min: self.min.inf(&o.min), max: self.max.sup(&o.max) }
    }

    /// Inflates each side so rounding in the slab test never drops a hit that
    /// the triangle test would report.
    fn padded(mut self) -> Aabb {
        for k in 0..3 {
            let pad = 1e-9 * (1.0 + self.min[k].abs().max(self.max[k].abs()));
            self.min[k] -= pad;
            self.max[k] += pad;
        }
        self
    }

    pub fn overlaps(&self, o: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= o.max[k] && o.min[k] <= self.max[k])
    }

    pub fn extent(&self) -> Vec3 {
        self.max - self.min
    }

    /// Entry parameter of the ray into the box within `[0, t_max]`.
    fn ray_entry(&self, origin: &Point3, dir: &Vec3, t_max: f64) -> Option<f64> {
        let mut t0 = 0.0f64;
        let mut t1 = t_max;
        for k in 0..3 {
            if dir[k] == 0.0 {
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let inv = 1.0 / dir[k];
            let mut a = (self.min[k] - origin[k]) * inv;
            let mut b = (self.max[k] - origin[k]) * inv;
            if a > b {
                core::mem::swap(&mut a, &mut b);
            }
            t0 = t0.max(a);
            t1 = t1.min(b);
            if t0 > t1 {
                return None;
            }
        }
        Some(t0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hit {
    pub triangle: usize,
    pub distance: f64,
}

impl Hit {
    /// Nearer distance wins; equal distances resolve to the lower index.
    fn better_than(&self, other: &Hit) -> bool {
        match self.distance.total_cmp(&other.distance) {
            Ordering::Less => true,
            Ordering::Equal => self.triangle < other.triangle,
            Ordering::Greater => false,
        }
    }
}

#[derive(Clone, Debug)]
struct Node {
    aabb: Aabb,
    /// Leaf: first index into `order`; interior: index of the left child
    /// (the right child follows the left subtree).
    start: u32,
    count: u32,
    right: u32,
}

/// Median-split BVH. The triangles themselves are borrowed at query time so
/// one hierarchy can index any slice it was built from.
#[derive(Clone, Debug)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(tris: &[[Point3; 3]]) -> Bvh {
        let boxes: Vec<Aabb> = tris
            .iter()
            .map(|t| Aabb::from_points(t.iter()).expect("three points").padded())
            .collect();
        let centroids: Vec<Point3> = tris
            .iter()
            .map(|t| Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0))
            .collect();
        let mut order: Vec<u32> = (0..tris.len() as u32).collect();
        let mut nodes = Vec::new();
        if !tris.is_empty() {
            build_node(&mut nodes, &mut order, 0, tris.len(), &boxes, &centroids);
        }
        Bvh { nodes, order }
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nearest hit with distance in `(RAY_T_MIN, t_max]`.
    pub fn nearest_hit(&self, tris: &[[Point3; 3]], origin: &Point3, dir: &Vec3, t_max: f64) -> Option<Hit> {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<Hit> = None;
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            let limit = best.map_or(t_max, |b| b.distance);
            let Some(entry) = node.aabb.ray_entry(origin, dir, limit) else { continue };
            if entry > limit {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                for &ti in &self.order[s..s + node.count as usize] {
                    let ti = ti as usize;
                    if let Some(d) = ray_triangle(origin, dir, &tris[ti]) {
                        if d > t_max {
                            continue;
                        }
                        let h = Hit { triangle: ti, distance: d };
                        if best.is_none_or(|b| h.better_than(&b)) {
                            best = Some(h);
                        }
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(ni + 1);
            }
        }
        best
    }

    /// Calls `visit` with every triangle index whose (padded) box overlaps `query`.
    pub fn for_each_overlap(&self, query: &Aabb, mut visit: impl FnMut(usize)) {
        if self.nodes.is_empty() {
            return;
        }
        let mut stack = vec![0u32];
        while let Some(ni) = stack.pop() {
            let node = &self.nodes[ni as usize];
            if !node.aabb.overlaps(query) {
                continue;
            }
            if node.count > 0 {
                let s = node.start as usize;
                self.order[s..s + node.count as usize].iter().for_each(|&t| visit(t as usize));
            } else {
                stack.push(node.right);
                stack.push(ni + 1);
            }
        }
    }
}

/// Reference implementation: test every triangle.
pub fn brute_force_hit(tris: &[[Point3; 3]], origin: &Point3, dir: &Vec3, t_max: f64) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for (ti, t) in tris.iter().enumerate() {
        if let Some(d) = ray_triangle(origin, dir, t) {
            let h = Hit { triangle: ti, distance: d };
            if d <= t_max && best.is_none_or(|b| h.better_than(&b)) {
                best = Some(h);
            }
        }
    }
    best
}

fn build_node(
    nodes: &mut Vec<Node>,
    order: &mut [u32],
    start: usize,
    end: usize,
    boxes: &[Aabb],
    centroids: &[Point3],
) -> u32 {
    let slice = &mut order[start..end];
    let mut aabb = boxes[slice[0] as usize];
    for &i in slice.iter() {
        aabb = aabb.union(&boxes[i as usize]);
    }
    let idx = nodes.len() as u32;
    nodes.push(Node { aabb, start: start as u32, count: (end - start) as u32, right: 0 });
    if end - start <= LEAF_SIZE {
        return idx;
    }
    let cb = Aabb::from_points(slice.iter().map(|&i| &centroids[i as usize])).expect("non-empty");
    let axis = cb.extent().imax();
    slice.sort_by(|&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    let mid = start + (end - start) / 2;
    let left = build_node(nodes, order, start, mid, boxes, centroids);
    debug_assert_eq!(left, idx + 1);
    let right = build_node(nodes, order, mid, end, boxes, centroids);
    let n = &mut nodes[idx as usize];
    n.count = 0;
    n.right = right;
    idx
}
