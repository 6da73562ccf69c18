//! Point clouds from logged ToF frames and robot kinematics.

use alloc::vec::Vec;

use nalgebra::{Matrix3, SymmetricEigen};

use super::AnalysisError;
use crate::kinematics::{sensor_world_pose, JointTrajectory, KinematicChain};
use crate::math::{Point3, Vec3};
use crate::tof::{TofFrame, TofSpec};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CloudPoint {
    pub position: Point3,
    pub sensor_id: u32,
    pub timestamp: f64,
}

#[derive(Clone, Debug, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PointCloud {
    pub points: Vec<CloudPoint>,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn positions(&self) -> Vec<Point3> {
        self.points.iter().map(|p| p.position).collect()
    }
}

/// Projects every valid zone into the world frame using the sensor pose at
/// the frame timestamp (joints interpolated linearly). Points are ordered by
/// timestamp, sensor, then zone.
pub fn reconstruct(
    frames: &[TofFrame],
    chain: &KinematicChain,
    trajectory: &JointTrajectory,
    spec: &TofSpec,
) -> Result<PointCloud, AnalysisError> {
    let mut order: Vec<&TofFrame> = frames.iter().collect();
    order.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp).then(a.sensor_id.cmp(&b.sensor_id)));
    let directions: Vec<Vec3> = (0..spec.rows)
        .flat_map(|j| (0..spec.cols).map(move |i| (i, j)))
        .map(|(i, j)| spec.zone_direction(i, j))
        .collect();
    let mut points = Vec::new();
    for f in order {
        let mount = chain.mount_for_site(f.sensor_id).ok_or(AnalysisError::UnknownSensor(f.sensor_id))?;
        if f.distances.len() != directions.len() {
            return Err(AnalysisError::FrameShape { expected: directions.len(), got: f.distances.len() });
        }
        let q = trajectory.at(f.timestamp)?;
        let pose = sensor_world_pose(chain, &q, mount)?;
        for (d, dir) in f.distances.iter().zip(&directions) {
            if let Some(d) = d {
                points.push(CloudPoint { position: pose * Point3::from(dir * *d), sensor_id: f.sensor_id, timestamp: f.timestamp });
            }
        }
    }
    Ok(PointCloud { points })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlaneFit {
    pub centroid: Point3,
    pub normal: Vec3,
    /// Root-mean-square point-to-plane distance.
    pub rms: f64,
}

/// Total least-squares plane (smallest-eigenvalue direction of the scatter).
pub fn plane_fit(points: &[Point3]) -> Option<PlaneFit> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let centroid = Point3::from(points.iter().fold(Vec3::zeros(), |acc, p| acc + p.coords) / n);
    let mut scatter = Matrix3::zeros();
    for p in points {
        let d = p - centroid;
        scatter += d * d.transpose();
    }
    let eig = SymmetricEigen::new(scatter);
    let k = eig.eigenvalues.imin();
    let normal = eig.eigenvectors.column(k).into_owned().normalize();
    let rms = libm::sqrt(points.iter().map(|p| { let h = (p - centroid).dot(&normal); h * h }).sum::<f64>() / n);
    Some(PlaneFit { centroid, normal, rms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{KinematicsError, SensorMount};
    use crate::math::Pose;
    use alloc::{string::String, vec, vec::Vec};

    fn one_sensor_chain() -> KinematicChain {
        let mount = SensorMount { link: 0, local: Pose::identity(), site_id: 7 };
        KinematicChain::new(vec![String::from("base")], vec![], vec![mount], Pose::identity()).unwrap()
    }

    #[test]
    fn empty_frames_empty_cloud() {
        let traj = JointTrajectory::hold(vec![], 0.0, 1.0).unwrap();
        let cloud = reconstruct(&[], &one_sensor_chain(), &traj, &TofSpec::default()).unwrap();
        assert!(cloud.is_empty());
    }

    #[test]
    fn unknown_sensor_and_domain() {
        let spec = TofSpec::default();
        let traj = JointTrajectory::hold(vec![], 0.0, 1.0).unwrap();
        let frame = |id, t| TofFrame { sensor_id: id, timestamp: t, distances: vec![Some(1.0); 64] };
        assert_eq!(reconstruct(&[frame(1, 0.0)], &one_sensor_chain(), &traj, &spec), Err(AnalysisError::UnknownSensor(1)));
        assert!(matches!(
            reconstruct(&[frame(7, 2.0)], &one_sensor_chain(), &traj, &spec),
            Err(AnalysisError::Kinematics(KinematicsError::Domain { .. }))
        ));
    }

    #[test]
    fn points_keep_logged_range() {
        let spec = TofSpec::default();
        let traj = JointTrajectory::hold(vec![], 0.0, 1.0).unwrap();
        let mut d: Vec<Option<f64>> = (0..64).map(|k| Some(0.5 + k as f64 * 0.01)).collect();
        d[5] = None;
        let frame = TofFrame { sensor_id: 7, timestamp: 0.5, distances: d.clone() };
        let cloud = reconstruct(&[frame], &one_sensor_chain(), &traj, &spec).unwrap();
        assert_eq!(cloud.len(), 63);
        let logged: Vec<f64> = d.into_iter().flatten().collect();
        for (p, l) in cloud.points.iter().zip(logged) {
            assert!((p.position.coords.norm() - l).abs() < 1e-12);
        }
    }

    #[test]
    fn plane_fit_recovers_tilted_plane() {
        let n = Vec3::new(1.0, 2.0, 2.0).normalize();
        let (u, v) = crate::math::tangent_basis(&n);
        let pts: Vec<Point3> = (0..100)
            .map(|k| Point3::from(n * 3.0 + u * (k % 10) as f64 * 0.1 + v * (k / 10) as f64 * 0.1))
            .collect();
        let fit = plane_fit(&pts).unwrap();
        assert!(fit.rms < 1e-12);
        assert!(fit.normal.dot(&n).abs() > 1.0 - 1e-12);
        assert!(plane_fit(&pts[..2]).is_none());
    }
}
