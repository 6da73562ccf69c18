//! Parallel, unfused SC and ToF streams for a robot moving through a scene.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::kinematics::{sensor_world_pose, JointTrajectory, KinematicChain, KinematicsError, Scene, Snapshot};
use crate::math::Pose;
use crate::rng::{stream_rng, Stream};
use crate::sc::{capacitance, measure_counts, sc_times, ElectrodeModel, MeasurementSpec, ScError, ScSample};
use crate::tof::{capture_frame, frame_times, TofError, TofFrame, TofSpec};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("site {0} has no sensor mount")]
    UnknownSite(u32),
    #[error("duration must be finite and >= 0")]
    Duration,
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Sc(#[from] ScError),
    #[error(transparent)]
    Tof(#[from] TofError),
}

/// Covering compressed by `compression` at one site over `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PressEvent {
    pub site_id: u32,
    pub start: f64,
    pub end: f64,
    pub compression: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub chain: KinematicChain,
    pub trajectory: JointTrajectory,
    pub scene: Scene,
    /// One electrode per SC ring, located at the mount of its site.
    pub electrodes: Vec<ElectrodeModel>,
    /// Sites carrying a ToF imager.
    pub tof_sensors: Vec<u32>,
    pub tof: TofSpec,
    pub measurement: MeasurementSpec,
    /// Whether the imagers run (and disturb the rings).
    pub tof_enabled: bool,
    pub presses: Vec<PressEvent>,
    pub duration: f64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Record {
    Sc(ScSample),
    Tof(TofFrame),
}

impl Record {
    pub fn timestamp(&self) -> f64 {
        match self {
            Record::Sc(s) => s.timestamp,
            Record::Tof(f) => f.timestamp,
        }
    }

    fn key(&self) -> (u8, u32) {
        match self {
            Record::Sc(s) => (0, s.site_id),
            Record::Tof(f) => (1, f.sensor_id),
        }
    }
}

/// Chronological merge; ties resolve SC before ToF, then by id.
pub fn merge_records(sc: Vec<ScSample>, tof: Vec<TofFrame>) -> Vec<Record> {
    let mut out: Vec<Record> = sc.into_iter().map(Record::Sc).chain(tof.into_iter().map(Record::Tof)).collect();
    out.sort_by(|a, b| a.timestamp().total_cmp(&b.timestamp()).then(a.key().cmp(&b.key())));
    out
}

pub fn split_records(records: &[Record]) -> (Vec<ScSample>, Vec<TofFrame>) {
    let mut sc = Vec::new();
    let mut tof = Vec::new();
    for r in records {
        match r {
            Record::Sc(s) => sc.push(*s),
            Record::Tof(f) => tof.push(f.clone()),
        }
    }
    (sc, tof)
}

struct Snapshots<'a> {
    scene: &'a Scene,
    fixed: Option<Snapshot>,
    cache: BTreeMap<u64, Snapshot>,
}

impl<'a> Snapshots<'a> {
    fn new(scene: &'a Scene) -> Result<Self, KinematicsError> {
        let fixed = if scene.has_movers() { None } else { Some(Snapshot::at(scene, 0.0)?) };
        Ok(Self { scene, fixed, cache: BTreeMap::new() })
    }

    fn at(&mut self, t: f64) -> Result<&Snapshot, KinematicsError> {
        if let Some(s) = &self.fixed {
            return Ok(s);
        }
        if !self.cache.contains_key(&t.to_bits()) {
            self.cache.insert(t.to_bits(), Snapshot::at(self.scene, t)?);
        }
        Ok(&self.cache[&t.to_bits()])
    }
}

impl Simulation {
    fn pose(&self, site_id: u32, t: f64) -> Result<Pose, SimError> {
        let mount = self.chain.mount_for_site(site_id).ok_or(SimError::UnknownSite(site_id))?;
        Ok(sensor_world_pose(&self.chain, &self.trajectory.at(t)?, mount)?)
    }

    fn compression(&self, e: &ElectrodeModel, t: f64) -> Result<ElectrodeModel, ScError> {
        let delta = self
            .presses
            .iter()
            .filter(|p| p.site_id == e.site_id && p.start <= t && t < p.end)
            .map(|p| p.compression)
            .fold(e.compression, f64::max);
        e.with_compression(delta)
    }

    /// SC samples of every electrode and frames of every imager over
    /// `[0, duration)`. Each site draws from its own schedule and noise
    /// streams.
    pub fn run(&self) -> Result<Vec<Record>, SimError> {
        if !(self.duration >= 0.0 && self.duration.is_finite()) {
            return Err(SimError::Duration);
        }
        self.measurement.check()?;
        self.tof.check()?;
        let mut snaps = Snapshots::new(&self.scene)?;
        let mut sc = Vec::new();
        for e in &self.electrodes {
            e.check()?;
            let times = sc_times(self.duration, &self.measurement, &mut stream_rng(self.seed, Stream::ScSchedule, e.site_id as u64));
            let mut noise = stream_rng(self.seed, Stream::ScNoise, e.site_id as u64);
            for t in times {
                let pose = self.pose(e.site_id, t)?;
                let distance = snaps.at(t)?.conductive_distance(&pose.translation.vector.into());
                let c = capacitance(&self.compression(e, t)?, distance, true);
                sc.push(ScSample { site_id: e.site_id, timestamp: t, counts: measure_counts(c, &self.measurement, self.tof_enabled, &mut noise) });
            }
        }
        let mut tof = Vec::new();
        if self.tof_enabled {
            let times = frame_times(self.duration, &self.tof);
            for &id in &self.tof_sensors {
                let mut rng = stream_rng(self.seed, Stream::TofNoise, id as u64);
                for &t in &times {
                    let pose = self.pose(id, t)?;
                    tof.push(capture_frame(id, &pose, snaps.at(t)?, t, &self.tof, &mut rng)?);
                }
            }
        }
        Ok(merge_records(sc, tof))
    }
}
