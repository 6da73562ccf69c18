//! Multizone time-of-flight imager: one center ray per zone cast into a
//! scene snapshot, with additive Gaussian range noise.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::geometry::Hit;
use crate::kinematics::Snapshot;
use crate::math::{is_unit, Point3, Pose, Vec3};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TofError {
    #[error("zone ({i}, {j}) outside a {cols}x{rows} grid")]
    Index { i: usize, j: usize, cols: usize, rows: usize },
    #[error("invalid imager spec: {0}")]
    InvalidSpec(&'static str),
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TofSpec {
    /// Zones along the sensor X axis.
    pub cols: usize,
    /// Zones along the sensor Y axis.
    pub rows: usize,
    pub fov_x_deg: f64,
    pub fov_y_deg: f64,
    pub max_range: f64,
    pub rate_hz: f64,
    pub range_noise_sigma: f64,
}

impl Default for TofSpec {
    fn default() -> Self {
        Self { cols: 8, rows: 8, fov_x_deg: 45.0, fov_y_deg: 45.0, max_range: 4.0, rate_hz: 12.0, range_noise_sigma: 0.01 }
    }
}

impl TofSpec {
    pub fn check(&self) -> Result<(), TofError> {
        let fov_ok = |f: f64| f > 0.0 && f < 180.0;
        if self.cols == 0 || self.rows == 0 {
            return Err(TofError::InvalidSpec("grid must have at least one zone"));
        }
        if !fov_ok(self.fov_x_deg) || !fov_ok(self.fov_y_deg) {
            return Err(TofError::InvalidSpec("field of view must lie in (0, 180) degrees"));
        }
        if !(self.max_range > 0.0 && self.max_range.is_finite()) {
            return Err(TofError::InvalidSpec("max range must be > 0"));
        }
        if !(self.rate_hz > 0.0 && self.rate_hz.is_finite()) {
            return Err(TofError::InvalidSpec("rate must be > 0"));
        }
        if !(self.range_noise_sigma >= 0.0) {
            return Err(TofError::InvalidSpec("noise sigma must be >= 0"));
        }
        Ok(())
    }

    pub fn zones(&self) -> usize {
        self.cols * self.rows
    }

    pub fn period(&self) -> f64 {
        1.0 / self.rate_hz
    }

    /// Angles `(θx, θy)` in radians of zone `(i, j)` from boresight.
    pub fn zone_angles(&self, i: usize, j: usize) -> (f64, f64) {
        let frac = |k: usize, n: usize| (k as f64 + 0.5) / n as f64 - 0.5;
        (
            (frac(i, self.cols) * self.fov_x_deg).to_radians(),
            (frac(j, self.rows) * self.fov_y_deg).to_radians(),
        )
    }

    /// Unit direction of zone `(i, j)` in the sensor frame (boresight +Z).
    pub fn zone_direction(&self, i: usize, j: usize) -> Vec3 {
        let (ax, ay) = self.zone_angles(i, j);
        Vec3::new(libm::tan(ax), libm::tan(ay), 1.0).normalize()
    }

    /// Flat zone index; rows of constant `j`, `i` varies fastest.
    pub fn zone_index(&self, i: usize, j: usize) -> usize {
        j * self.cols + i
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Point3,
    pub direction: Vec3,
}

impl Ray {
    pub fn new(origin: Point3, direction: Vec3) -> Option<Self> {
        is_unit(&direction).then_some(Self { origin, direction })
    }

    pub fn at(&self, t: f64) -> Point3 {
        self.origin + self.direction * t
    }
}

/// World-space ray through the center of zone `(i, j)`.
pub fn zone_ray(sensor_pose: &Pose, i: usize, j: usize, spec: &TofSpec) -> Result<Ray, TofError> {
    if i >= spec.cols || j >= spec.rows {
        return Err(TofError::Index { i, j, cols: spec.cols, rows: spec.rows });
    }
    let dir = sensor_pose.rotation * spec.zone_direction(i, j);
    Ok(Ray { origin: Point3::from(sensor_pose.translation.vector), direction: dir.normalize() })
}

/// Nearest surface along `ray` within `max_range`, or `None` (no target).
pub fn raycast(scene: &Snapshot, ray: &Ray, max_range: f64) -> Option<Hit> {
    scene.raycast(&ray.origin, &ray.direction, max_range)
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TofFrame {
    pub sensor_id: u32,
    pub timestamp: f64,
    /// Per-zone range in meters, `None` when nothing is in range.
    pub distances: Vec<Option<f64>>,
}

impl TofFrame {
    pub fn valid(&self) -> impl Iterator<Item = bool> + '_ {
        self.distances.iter().map(Option::is_some)
    }

    pub fn valid_count(&self) -> usize {
        self.distances.iter().flatten().count()
    }
}

/// Smallest distance reported after noise; keeps readings strictly positive.
pub const MIN_REPORTED_RANGE: f64 = 1e-6;

/// Casts every zone ray and perturbs hits with N(0, σ²), clamped to
/// `(0, max_range]`.
pub fn capture_frame(
    sensor_id: u32,
    sensor_pose: &Pose,
    scene: &Snapshot,
    t: f64,
    spec: &TofSpec,
    rng: &mut impl Rng,
) -> Result<TofFrame, TofError> {
    spec.check()?;
    let noise = Normal::new(0.0, spec.range_noise_sigma).map_err(|_| TofError::InvalidSpec("noise sigma"))?;
    let mut distances = Vec::with_capacity(spec.zones());
    for j in 0..spec.rows {
        for i in 0..spec.cols {
            let ray = zone_ray(sensor_pose, i, j, spec)?;
            let d = raycast(scene, &ray, spec.max_range).map(|hit| {
                let n = if spec.range_noise_sigma > 0.0 { noise.sample(rng) } else { 0.0 };
                (hit.distance + n).clamp(MIN_REPORTED_RANGE, spec.max_range)
            });
            distances.push(d);
        }
    }
    Ok(TofFrame { sensor_id, timestamp: t, distances })
}

/// Strictly periodic capture times in `[0, duration)`.
pub fn frame_times(duration: f64, spec: &TofSpec) -> Vec<f64> {
    if !(duration > 0.0) {
        return Vec::new();
    }
    let period = spec.period();
    (0..)
        .map(|k| k as f64 * period)
        .take_while(|&t| t < duration - 1e-12 * duration.max(1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{primitives, Material};
    use crate::kinematics::Scene;
    use crate::rng::{stream_rng, Stream};
    use alloc::vec;

    fn wall(z: f64) -> Snapshot {
        let mut s = Scene::default();
        let w = primitives::plane_patch(40.0, 40.0, 1, 1, Material::Structural)
            .transformed(&crate::math::pose(Vec3::new(0.0, 0.0, z), crate::math::Quat::identity()));
        s.add_static(w, false);
        Snapshot::at(&s, 0.0).unwrap()
    }

    #[test]
    fn single_zone_looks_along_boresight() {
        let spec = TofSpec { cols: 1, rows: 1, ..TofSpec::default() };
        let r = zone_ray(&Pose::identity(), 0, 0, &spec).unwrap();
        assert_eq!(r.direction, Vec3::z());
    }

    #[test]
    fn central_and_corner_zone_angles() {
        let spec = TofSpec::default();
        let (a3, _) = spec.zone_angles(3, 0);
        let (a4, _) = spec.zone_angles(4, 0);
        assert!((a3.to_degrees() + 2.8125).abs() < 1e-12);
        assert!((a4.to_degrees() - 2.8125).abs() < 1e-12);
        let (cx, cy) = spec.zone_angles(0, 0);
        assert!((cx.to_degrees() + 19.6875).abs() < 1e-12);
        assert!((cy.to_degrees() + 19.6875).abs() < 1e-12);
    }

    #[test]
    fn out_of_range_zone() {
        assert!(matches!(zone_ray(&Pose::identity(), 8, 0, &TofSpec::default()), Err(TofError::Index { .. })));
    }

    #[test]
    fn perpendicular_wall_and_range_cutoff() {
        let r = Ray::new(Point3::origin(), Vec3::z()).unwrap();
        assert!((raycast(&wall(1.0), &r, 4.0).unwrap().distance - 1.0).abs() < 1e-12);
        assert!(raycast(&wall(5.0), &r, 4.0).is_none());
    }

    #[test]
    fn empty_scene_has_no_targets() {
        let snap = Snapshot::new(&[]);
        let mut rng = stream_rng(0, Stream::TofNoise, 0);
        let f = capture_frame(0, &Pose::identity(), &snap, 0.0, &TofSpec::default(), &mut rng).unwrap();
        assert_eq!(f.distances.len(), 64);
        assert!(f.distances.iter().all(Option::is_none));
    }

    #[test]
    fn noisy_frames_repeat_for_equal_seeds_and_stay_in_range() {
        let snap = wall(3.9);
        let spec = TofSpec { range_noise_sigma: 0.2, ..TofSpec::default() };
        let a = capture_frame(1, &Pose::identity(), &snap, 0.0, &spec, &mut stream_rng(9, Stream::TofNoise, 1)).unwrap();
        let b = capture_frame(1, &Pose::identity(), &snap, 0.0, &spec, &mut stream_rng(9, Stream::TofNoise, 1)).unwrap();
        assert_eq!(a, b);
        for d in a.distances.iter().flatten() {
            assert!(*d > 0.0 && *d <= 4.0);
        }
    }

    #[test]
    fn frame_times_are_periodic() {
        let spec = TofSpec::default();
        assert_eq!(frame_times(1.0, &spec).len(), 12);
        assert_eq!(frame_times(10.0, &spec).len(), 120);
        assert_eq!(frame_times(0.01, &spec), vec![0.0]);
        assert!(frame_times(0.0, &spec).is_empty());
    }
}
