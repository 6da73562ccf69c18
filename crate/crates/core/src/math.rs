//! Shared linear-algebra aliases and pose helpers.

use nalgebra::{Isometry3, Point3 as NaPoint3, Translation3, Unit, UnitQuaternion, Vector3};

pub type Vec3 = Vector3<f64>;
pub type Point3 = NaPoint3<f64>;
pub type Quat = UnitQuaternion<f64>;
pub type UnitVec3 = Unit<Vector3<f64>>;

/// Rigid transform: unit-quaternion rotation followed by a translation in meters.
pub type Pose = Isometry3<f64>;

/// Tolerance on unit-length checks for quaternions and direction vectors.
pub const UNIT_TOLERANCE: f64 = 1e-9;

pub fn pose(translation: Vec3, rotation: Quat) -> Pose {
    Isometry3::from_parts(Translation3::from(translation), rotation)
}

/// Builds a rotation from a raw `(w, x, y, z)` quaternion, rejecting anything
/// that is not already unit length within [`UNIT_TOLERANCE`].
pub fn quat_from_wxyz(w: f64, x: f64, y: f64, z: f64) -> Option<Quat> {
    let q = nalgebra::Quaternion::new(w, x, y, z);
    let n = q.norm();
    if !n.is_finite() || (n - 1.0).abs() > UNIT_TOLERANCE {
        return None;
    }
    Some(UnitQuaternion::new_normalize(q))
}

pub fn axis_angle(axis: Vec3, angle: f64) -> Quat {
    match Unit::try_new(axis, 1e-15) {
        Some(a) => UnitQuaternion::from_axis_angle(&a, angle),
        None => UnitQuaternion::identity(),
    }
}

/// Unit vector check used by the domain types.
pub fn is_unit(v: &Vec3) -> bool {
    (v.norm() - 1.0).abs() <= UNIT_TOLERANCE
}

/// Rotation taking +Z onto `normal`.
pub fn frame_from_normal(normal: &Vec3) -> Quat {
    let z = Vec3::z();
    UnitQuaternion::rotation_between(&z, normal).unwrap_or_else(|| {
        // antiparallel: half-turn about X
        UnitQuaternion::from_axis_angle(&Vec3::x_axis(), core::f64::consts::PI)
    })
}

/// An orthonormal tangent basis `(u, v)` with `u × v = normal`.
pub fn tangent_basis(normal: &Vec3) -> (Vec3, Vec3) {
    let q = frame_from_normal(normal);
    (q * Vec3::x(), q * Vec3::y())
}

/// Linear translation + spherical rotation interpolation, `s` in `[0, 1]`.
pub fn interpolate_pose(a: &Pose, b: &Pose, s: f64) -> Pose {
    let t = a.translation.vector.lerp(&b.translation.vector, s);
    let ra = a.rotation;
    let mut rb = b.rotation;
    // shortest arc
    if ra.coords.dot(&rb.coords) < 0.0 {
        rb = UnitQuaternion::new_unchecked(-rb.into_inner());
    }
    let r = ra.try_slerp(&rb, s, 1e-12).unwrap_or_else(|| {
        // nearly identical rotations
        UnitQuaternion::new_normalize(ra.into_inner().lerp(&rb.into_inner(), s))
    });
    pose(t, r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn composing_with_inverse_is_identity() {
        let p = pose(Vec3::new(0.1, -0.2, 0.3), axis_angle(Vec3::new(1.0, 2.0, 3.0), 0.7));
        let id = p * p.inverse();
        assert!(id.translation.vector.norm() < 1e-12);
        assert!(id.rotation.angle() < 1e-9);
    }

    #[test]
    fn slerp_midpoint_of_half_turn() {
        let a = Pose::identity();
        let b = pose(Vec3::zeros(), axis_angle(Vec3::z(), PI));
        let m = interpolate_pose(&a, &b, 0.5);
        assert!((m.rotation.angle() - PI / 2.0).abs() < 1e-9);
        let x = m.rotation * Vec3::x();
        assert!((x - Vec3::y()).norm() < 1e-9);
    }

    #[test]
    fn frame_from_normal_maps_z() {
        for n in [Vec3::z(), -Vec3::z(), Vec3::x(), Vec3::new(1.0, 1.0, -1.0).normalize()] {
            let q = frame_from_normal(&n);
            assert!((q * Vec3::z() - n).norm() < 1e-12);
            let (u, v) = tangent_basis(&n);
            assert!((u.cross(&v) - n).norm() < 1e-12);
        }
    }

    #[test]
    fn rejects_non_unit_quaternion() {
        assert!(quat_from_wxyz(1.0, 0.0, 0.0, 0.0).is_some());
        assert!(quat_from_wxyz(1.0, 0.1, 0.0, 0.0).is_none());
    }
}
