use alloc::vec::Vec;

use super::KinematicsError;
use crate::geometry::{closest_point_on_triangle, Aabb, Bvh, Hit, TriMesh};
use crate::math::{interpolate_pose, Point3, Pose, Vec3};

/// Pose keyframes at strictly increasing times; lerp + slerp in between.
#[derive(Clone, Debug, PartialEq)]
pub struct PoseTrajectory {
    keys: Vec<(f64, Pose)>,
}

impl PoseTrajectory {
    pub fn new(keys: Vec<(f64, Pose)>) -> Result<Self, KinematicsError> {
        if keys.is_empty() {
            return Err(KinematicsError::InvalidTrajectory("no keyframes"));
        }
        if keys.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(KinematicsError::InvalidTrajectory("keyframe times must be strictly increasing"));
        }
        Ok(Self { keys })
    }

    pub fn keys(&self) -> &[(f64, Pose)] {
        &self.keys
    }

    pub fn start(&self) -> f64 {
        self.keys[0].0
    }

    pub fn end(&self) -> f64 {
        self.keys[self.keys.len() - 1].0
    }

    pub fn at(&self, t: f64) -> Result<Pose, KinematicsError> {
        let (start, end) = (self.start(), self.end());
        if !(t >= start && t <= end) {
            return Err(KinematicsError::Domain { t, start, end });
        }
        let hi = self.keys.partition_point(|k| k.0 < t);
        if self.keys[hi].0 == t {
            return Ok(self.keys[hi].1);
        }
        let (t0, p0) = self.keys[hi - 1];
        let (t1, p1) = self.keys[hi];
        Ok(interpolate_pose(&p0, &p1, (t - t0) / (t1 - t0)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Motion {
    Static,
    Keyframed(PoseTrajectory),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneObject {
    pub mesh: TriMesh,
    pub conductive: bool,
    pub motion: Motion,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Scene {
    pub objects: Vec<SceneObject>,
}

impl Scene {
    pub fn add_static(&mut self, mesh: TriMesh, conductive: bool) {
        self.objects.push(SceneObject { mesh, conductive, motion: Motion::Static });
    }

    pub fn add_mover(&mut self, mesh: TriMesh, conductive: bool, trajectory: PoseTrajectory) {
        self.objects.push(SceneObject { mesh, conductive, motion: Motion::Keyframed(trajectory) });
    }

    /// Interval on which every mover is defined; `None` for static scenes.
    pub fn time_domain(&self) -> Option<(f64, f64)> {
        self.objects.iter().fold(None, |acc, o| match &o.motion {
            Motion::Static => acc,
            Motion::Keyframed(tr) => Some(match acc {
                None => (tr.start(), tr.end()),
                Some((a, b)) => (f64::max(a, tr.start()), f64::min(b, tr.end())),
            }),
        })
    }

    pub fn has_movers(&self) -> bool {
        self.objects.iter().any(|o| matches!(o.motion, Motion::Keyframed(_)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PosedMesh {
    pub mesh: TriMesh,
    pub conductive: bool,
}

/// Every object placed at time `t`.
pub fn scene_at(scene: &Scene, t: f64) -> Result<Vec<PosedMesh>, KinematicsError> {
    scene
        .objects
        .iter()
        .map(|o| {
            let mesh = match &o.motion {
                Motion::Static => o.mesh.clone(),
                Motion::Keyframed(tr) => o.mesh.transformed(&tr.at(t)?),
            };
            Ok(PosedMesh { mesh, conductive: o.conductive })
        })
        .collect()
}

/// Scene frozen at one instant, with a BVH for ray and proximity queries.
#[derive(Clone, Debug)]
pub struct Snapshot {
    triangles: Vec<[Point3; 3]>,
    conductive: Vec<bool>,
    bvh: Bvh,
}

impl Snapshot {
    pub fn new(posed: &[PosedMesh]) -> Self {
        let mut triangles = Vec::new();
        let mut conductive = Vec::new();
        for p in posed {
            for f in 0..p.mesh.face_count() {
                triangles.push(p.mesh.triangle(f));
                conductive.push(p.conductive);
            }
        }
        let bvh = Bvh::build(&triangles);
        Self { triangles, conductive, bvh }
    }

    pub fn at(scene: &Scene, t: f64) -> Result<Self, KinematicsError> {
        Ok(Self::new(&scene_at(scene, t)?))
    }

    pub fn triangles(&self) -> &[[Point3; 3]] {
        &self.triangles
    }

    /// Nearest hit within `(0, max_range]`.
    pub fn raycast(&self, origin: &Point3, dir: &Vec3, max_range: f64) -> Option<Hit> {
        self.bvh.nearest_hit(&self.triangles, origin, dir, max_range)
    }

    /// Distance from `p` to the closest conductive surface.
    pub fn conductive_distance(&self, p: &Point3) -> Option<f64> {
        if !self.conductive.iter().any(|&c| c) {
            return None;
        }
        // grow a query box until it holds a conductive triangle, then widen it
        // to the distance found so nothing nearer is missed
        let mut half = 0.01;
        loop {
            let mut best = f64::INFINITY;
            let q = Aabb { min: p - Vec3::repeat(half), max: p + Vec3::repeat(half) };
            self.bvh.for_each_overlap(&q, |i| {
                if self.conductive[i] {
                    let c = closest_point_on_triangle(p, &self.triangles[i]);
                    best = best.min((c - p).norm());
                }
            });
            if best <= half {
                return Some(best);
            }
            if best.is_finite() {
                half = best;
            } else {
                half *= 4.0;
                if half > 1e6 {
                    return None;
                }
            }
        }
    }
}
