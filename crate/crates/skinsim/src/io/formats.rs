//! JSON descriptions of kinematic chains, scenes and generated assemblies.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skinsim_core::geometry::{primitives, Finding, Material};
use skinsim_core::kinematics::{Joint, JointKind, KinematicChain, PoseTrajectory, Scene, SensorMount};
use skinsim_core::layout::{MountSpec, RingSpec, SurfaceSite};
use skinsim_core::math::{pose, quat_from_wxyz, Pose, Vec3};

use super::mesh::{read_mesh, Units};
use crate::error::{Error, Result};

/// Translation in meters and unit quaternion `[w, x, y, z]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PoseDto {
    #[serde(default)]
    pub translation: [f64; 3],
    #[serde(default = "identity_rotation")]
    pub rotation: [f64; 4],
}

fn identity_rotation() -> [f64; 4] {
    [1.0, 0.0, 0.0, 0.0]
}

impl Default for PoseDto {
    fn default() -> Self {
        Self { translation: [0.0; 3], rotation: identity_rotation() }
    }
}

impl PoseDto {
    pub fn to_pose(&self) -> Result<Pose> {
        let [w, x, y, z] = self.rotation;
        let q = quat_from_wxyz(w, x, y, z).ok_or_else(|| Error::validation(format!("rotation {:?} is not a unit quaternion", self.rotation)))?;
        Ok(pose(Vec3::from(self.translation), q))
    }

    pub fn from_pose(p: &Pose) -> Self {
        let q = p.rotation.quaternion();
        Self { translation: p.translation.vector.into(), rotation: [q.w, q.i, q.j, q.k] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointDto {
    pub axis: [f64; 3],
    #[serde(rename = "type")]
    pub kind: JointKind,
    #[serde(default)]
    pub origin: PoseDto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MountDto {
    pub link: usize,
    #[serde(default)]
    pub local: PoseDto,
    pub site_id: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainFile {
    pub links: Vec<String>,
    #[serde(default)]
    pub base: PoseDto,
    #[serde(default)]
    pub joints: Vec<JointDto>,
    #[serde(default)]
    pub mounts: Vec<MountDto>,
    /// Link carrying the generated skin; manifest sites without an explicit
    /// mount are attached here at their surface frame. Defaults to the last link.
    #[serde(default)]
    pub skin_link: Option<usize>,
}

impl ChainFile {
    /// Chain with explicit mounts plus one mount per manifest site not
    /// already mounted.
    pub fn build(&self, sites: &[SurfaceSite]) -> Result<KinematicChain> {
        let joints = self
            .joints
            .iter()
            .map(|j| Ok(Joint { axis: Vec3::from(j.axis), kind: j.kind, origin: j.origin.to_pose()? }))
            .collect::<Result<Vec<_>>>()?;
        let mut mounts = self
            .mounts
            .iter()
            .map(|m| Ok(SensorMount { link: m.link, local: m.local.to_pose()?, site_id: m.site_id }))
            .collect::<Result<Vec<_>>>()?;
        let skin_link = self.skin_link.unwrap_or(self.links.len().saturating_sub(1));
        for s in sites {
            if !mounts.iter().any(|m| m.site_id == s.site_id) {
                mounts.push(SensorMount { link: skin_link, local: s.frame(), site_id: s.site_id });
            }
        }
        Ok(KinematicChain::new(self.links.clone(), joints, mounts, self.base.to_pose()?)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ShapeDto {
    Box { half: [f64; 3] },
    Sphere { radius: f64, #[serde(default = "default_tolerance")] tolerance: f64 },
    Plane { width: f64, height: f64 },
    Cylinder { radius: f64, height: f64, #[serde(default = "default_segments")] segments: usize },
    Mesh { path: PathBuf, #[serde(default)] units: Units },
}

fn default_tolerance() -> f64 {
    1e-3
}

fn default_segments() -> usize {
    32
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KeyframeDto {
    pub t: f64,
    pub pose: PoseDto,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectDto {
    pub shape: ShapeDto,
    #[serde(default)]
    pub conductive: bool,
    /// Placement of the shape before any keyframed motion.
    #[serde(default)]
    pub pose: PoseDto,
    #[serde(default)]
    pub keyframes: Vec<KeyframeDto>,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default)]
    pub objects: Vec<ObjectDto>,
}

impl SceneFile {
    /// Mesh paths resolve against `base_dir`.
    pub fn build(&self, base_dir: &Path) -> Result<Scene> {
        let mut scene = Scene::default();
        for o in &self.objects {
            let m = Material::Structural;
            let positive = |x: f64, what: &str| if x > 0.0 && x.is_finite() { Ok(()) } else { Err(Error::validation(format!("scene: {what} must be > 0"))) };
            let mesh = match &o.shape {
                ShapeDto::Box { half } => {
                    half.iter().try_for_each(|&h| positive(h, "box half extent"))?;
                    primitives::box_mesh(Vec3::from(*half), m)
                }
                ShapeDto::Sphere { radius, tolerance } => {
                    positive(*radius, "sphere radius")?;
                    positive(*tolerance, "sphere tolerance")?;
                    primitives::sphere(*radius, *tolerance, m)
                }
                ShapeDto::Plane { width, height } => {
                    positive(*width, "plane width")?;
                    positive(*height, "plane height")?;
                    primitives::plane_patch(*width, *height, 1, 1, m)
                }
                ShapeDto::Cylinder { radius, height, segments } => {
                    positive(*radius, "cylinder radius")?;
                    positive(*height, "cylinder height")?;
                    primitives::cylinder(*radius, *height, *segments, m)
                }
                ShapeDto::Mesh { path, units } => read_mesh(&base_dir.join(path), *units)?,
            };
            let mesh = mesh.transformed(&o.pose.to_pose()?);
            if o.keyframes.is_empty() {
                scene.add_static(mesh, o.conductive);
            } else {
                let keys = o.keyframes.iter().map(|k| Ok((k.t, k.pose.to_pose()?))).collect::<Result<Vec<_>>>()?;
                scene.add_mover(mesh, o.conductive, PoseTrajectory::new(keys)?);
            }
        }
        Ok(scene)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestFiles {
    pub structural: String,
    pub conductive: String,
    pub flexible: String,
    pub obj: String,
}

/// Summary of a generated skin written next to its meshes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub sites: Vec<SurfaceSite>,
    pub ring: RingSpec,
    pub mount: MountSpec,
    pub support_count: usize,
    pub files: ManifestFiles,
    pub warnings: Vec<Finding>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_json_with_derived_mounts() {
        let text = r#"{
            "links": ["base", "link1"],
            "joints": [{"axis": [0, 0, 1], "type": "revolute", "origin": {"translation": [0, 0, 0.1]}}],
            "mounts": [{"link": 1, "site_id": 9}]
        }"#;
        let file: ChainFile = serde_json::from_str(text).unwrap();
        let site = SurfaceSite { site_id: 3, face_index: 0, barycentric: [1.0, 0.0, 0.0], position: [0.1, 0.0, 0.0].into(), normal: Vec3::x() };
        let chain = file.build(&[site]).unwrap();
        assert_eq!(chain.mounts.len(), 2);
        assert_eq!(chain.mounts[1].link, 1);
        let bad: ChainFile = serde_json::from_str(r#"{"links": ["a"], "base": {"rotation": [2, 0, 0, 0]}}"#).unwrap();
        assert!(bad.build(&[]).is_err());
    }

    #[test]
    fn scene_json_shapes_and_motion() {
        let text = r#"{"objects": [
            {"shape": {"type": "box", "half": [0.1, 0.1, 0.1]}, "conductive": true,
             "keyframes": [{"t": 0, "pose": {}}, {"t": 1, "pose": {"translation": [1, 0, 0]}}]},
            {"shape": {"type": "plane", "width": 2, "height": 2}, "pose": {"translation": [0, 0, 2]}}
        ]}"#;
        let file: SceneFile = serde_json::from_str(text).unwrap();
        let scene = file.build(Path::new(".")).unwrap();
        assert_eq!(scene.objects.len(), 2);
        assert_eq!(scene.time_domain(), Some((0.0, 1.0)));
        let bad: SceneFile = serde_json::from_str(r#"{"objects": [{"shape": {"type": "sphere", "radius": -1}}]}"#).unwrap();
        assert!(bad.build(Path::new(".")).is_err());
    }

    #[test]
    fn pose_dto_round_trip() {
        let p = pose(Vec3::new(1.0, 2.0, 3.0), skinsim_core::math::axis_angle(Vec3::y(), 0.4));
        let back = PoseDto::from_pose(&p).to_pose().unwrap();
        assert!((back.translation.vector - p.translation.vector).norm() < 1e-15);
        assert!(back.rotation.angle_to(&p.rotation) < 1e-12);
    }
}
