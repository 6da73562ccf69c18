//! Reconstruction, SNR statistics, and tactile response analysis.

mod reconstruct;
mod snr;
pub mod stats;

pub use reconstruct::{plane_fit, reconstruct, CloudPoint, PlaneFit, PointCloud};
pub use snr::{
    evaluate_configurations, pressure_series, snr, snr_counts, split_by_label, table1, windowed_means, Activity,
    ActivityLabel, Cell, CellReport, ConfigurationTable, Covering, EvaluationOptions, Interval, LabeledCounts,
    OrderingChecks, PressureReport, PressureVerdict, RingLog, SnrReport, TofMode, DEFAULT_CONTACT_THRESHOLD,
    DEFAULT_MIN_RINGS, DEFAULT_MIN_SAMPLES, TABLE1,
};

use crate::kinematics::KinematicsError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("inactive signal has zero variance")]
    DegenerateSignal,
    #[error("insufficient samples: need {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("configuration {cell:?} has {got} rings, need {needed}")]
    InsufficientRings { cell: Cell, needed: usize, got: usize },
    #[error("configuration {0:?} given twice")]
    DuplicateCell(Cell),
    #[error("no mount for sensor {0}")]
    UnknownSensor(u32),
    #[error("frame has {got} zones, spec has {expected}")]
    FrameShape { expected: usize, got: usize },
    #[error("invalid labels: {0}")]
    InvalidLabels(&'static str),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
}
