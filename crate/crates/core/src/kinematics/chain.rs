use alloc::string::String;
use alloc::vec::Vec;

use super::KinematicsError;
use crate::math::{axis_angle, is_unit, pose, Pose, Quat, Vec3};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum JointKind {
    Revolute,
    Prismatic,
}

/// Joint between link `i` and link `i + 1`. `origin` places the joint frame
/// in the parent link; motion happens about/along `axis` in that frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Joint {
    pub axis: Vec3,
    pub kind: JointKind,
    pub origin: Pose,
}

impl Joint {
    fn motion(&self, q: f64) -> Pose {
        match self.kind {
            JointKind::Revolute => pose(Vec3::zeros(), axis_angle(self.axis, q)),
            JointKind::Prismatic => pose(self.axis * q, Quat::identity()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorMount {
    pub link: usize,
    pub local: Pose,
    pub site_id: u32,
}

/// Unbranched chain: `joints.len() == links.len() - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct KinematicChain {
    pub links: Vec<String>,
    pub joints: Vec<Joint>,
    pub mounts: Vec<SensorMount>,
    pub base: Pose,
}

impl KinematicChain {
    pub fn new(links: Vec<String>, joints: Vec<Joint>, mounts: Vec<SensorMount>, base: Pose) -> Result<Self, KinematicsError> {
        if links.is_empty() || joints.len() + 1 != links.len() {
            return Err(KinematicsError::InvalidChain("joint count must equal link count - 1"));
        }
        if joints.iter().any(|j| !is_unit(&j.axis)) {
            return Err(KinematicsError::InvalidChain("joint axes must be unit vectors"));
        }
        if mounts.iter().any(|m| m.link >= links.len()) {
            return Err(KinematicsError::InvalidChain("mount references a missing link"));
        }
        Ok(Self { links, joints, mounts, base })
    }

    pub fn dof(&self) -> usize {
        self.joints.len()
    }

    pub fn mount_for_site(&self, site_id: u32) -> Option<usize> {
        self.mounts.iter().position(|m| m.site_id == site_id)
    }
}

/// World pose of every link, base first.
pub fn forward_kinematics(chain: &KinematicChain, q: &[f64]) -> Result<Vec<Pose>, KinematicsError> {
    if q.len() != chain.joints.len() {
        return Err(KinematicsError::Dimension { expected: chain.joints.len(), got: q.len() });
    }
    let mut poses = Vec::with_capacity(chain.links.len());
    let mut current = chain.base;
    poses.push(current);
    for (joint, &qi) in chain.joints.iter().zip(q) {
        current = current * joint.origin * joint.motion(qi);
        poses.push(current);
    }
    Ok(poses)
}

pub fn sensor_world_pose(chain: &KinematicChain, q: &[f64], mount_index: usize) -> Result<Pose, KinematicsError> {
    let mount = chain
        .mounts
        .get(mount_index)
        .ok_or(KinematicsError::Index { index: mount_index, len: chain.mounts.len() })?;
    let links = forward_kinematics(chain, q)?;
    Ok(links[mount.link] * mount.local)
}

/// Joint samples at strictly increasing times, interpolated linearly.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTrajectory {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
}

impl JointTrajectory {
    pub fn new(samples: Vec<(f64, Vec<f64>)>, dof: usize) -> Result<Self, KinematicsError> {
        if samples.is_empty() {
            return Err(KinematicsError::InvalidTrajectory("no samples"));
        }
        if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(KinematicsError::InvalidTrajectory("times must be strictly increasing"));
        }
        if let Some((_, v)) = samples.iter().find(|(_, v)| v.len() != dof) {
            return Err(KinematicsError::Dimension { expected: dof, got: v.len() });
        }
        if samples.iter().any(|(t, v)| !t.is_finite() || v.iter().any(|x| !x.is_finite())) {
            return Err(KinematicsError::InvalidTrajectory("non-finite sample"));
        }
        let (times, values) = samples.into_iter().unzip();
        Ok(Self { times, values })
    }

    /// Constant configuration over `[start, end]`.
    pub fn hold(q: Vec<f64>, start: f64, end: f64) -> Result<Self, KinematicsError> {
        let dof = q.len();
        Self::new(alloc::vec![(start, q.clone()), (end, q)], dof)
    }

    pub fn dof(&self) -> usize {
        self.values[0].len()
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn samples(&self) -> impl Iterator<Item = (f64, &[f64])> {
        self.times.iter().copied().zip(self.values.iter().map(|v| v.as_slice()))
    }

    pub fn at(&self, t: f64) -> Result<Vec<f64>, KinematicsError> {
        let (start, end) = (self.start(), self.end());
        if !(t >= start && t <= end) {
            return Err(KinematicsError::Domain { t, start, end });
        }
        let hi = self.times.partition_point(|&x| x < t);
        if self.times[hi] == t {
            return Ok(self.values[hi].clone());
        }
        let lo = hi - 1;
        let s = (t - self.times[lo]) / (self.times[hi] - self.times[lo]);
        Ok(self.values[lo].iter().zip(&self.values[hi]).map(|(a, b)| a + (b - a) * s).collect())
    }
}
