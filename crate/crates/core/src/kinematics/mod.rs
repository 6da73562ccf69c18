//! Serial kinematic chains with sensor mounts, joint trajectories, and the
//! time-varying scene the sensors observe.

mod chain;
mod scene;

pub use chain::{forward_kinematics, sensor_world_pose, Joint, JointKind, JointTrajectory, KinematicChain, SensorMount};
pub use scene::{scene_at, Motion, PosedMesh, PoseTrajectory, Scene, SceneObject, Snapshot};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KinematicsError {
    #[error("expected {expected} joint values, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("index {index} out of range ({len} available)")]
    Index { index: usize, len: usize },
    #[error("time {t} outside [{start}, {end}]")]
    Domain { t: f64, start: f64, end: f64 },
    #[error("invalid chain: {0}")]
    InvalidChain(&'static str),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(&'static str),
}
