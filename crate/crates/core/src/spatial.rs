use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::math::Point3;

/// Uniform hash grid answering "is any stored point closer than `radius`".
pub(crate) struct PointGrid {
    cell: f64,
    radius: f64,
    cells: BTreeMap<(i64, i64, i64), Vec<Point3>>,
}

impl PointGrid {
    pub fn new(radius: f64) -> Self {
        Self { cell: radius.max(1e-9), radius, cells: BTreeMap::new() }
    }

    fn key(&self, p: &Point3) -> (i64, i64, i64) {
        let k = |x: f64| libm::floor(x / self.cell) as i64;
        (k(p.x), k(p.y), k(p.z))
    }

    pub fn has_neighbor(&self, p: &Point3) -> bool {
        if self.radius <= 0.0 {
            return false;
        }
        let (x, y, z) = self.key(p);
        let r2 = self.radius * self.radius;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    if let Some(pts) = self.cells.get(&(x + dx, y + dy, z + dz)) {
                        if pts.iter().any(|q| (q - p).norm_squared() < r2) {
                            return true;
                        }
                    }
                }
            }
        }
        false
    }

    pub fn insert(&mut self, p: Point3) {
        let k = self.key(&p);
        self.cells.entry(k).or_default().push(p);
    }
}
