use std::path::Path;

use serde_json::Value;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure category, mapped one-to-one onto process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Validation,
    Io,
    Numerical,
}

impl Kind {
    pub fn exit_code(self) -> i32 {
        match self {
            Kind::Validation => 2,
            Kind::Io => 3,
            Kind::Numerical => 4,
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct Error {
    pub kind: Kind,
    pub message: String,
    /// Machine-readable findings attached to the report.
    pub details: Option<Value>,
}

impl Error {
    pub fn new(kind: Kind, message: impl Into<String>) -> Self {
        Self { kind, message: message.into(), details: None }
    }

    pub fn validation(message: impl Into<String>) -> Self {
        Self::new(Kind::Validation, message)
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self::new(Kind::Numerical, message)
    }

    /// Unreadable or malformed input file.
    pub fn format(message: impl Into<String>) -> Self {
        Self::new(Kind::Io, message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(Kind::Io, format!("{}: {err}", path.display()))
    }

    pub fn with_details(mut self, details: Value) -> Self {
        self.details = Some(details);
        self
    }

    /// One-line JSON diagnostic for standard error.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::json!({ "error": self.kind, "message": self.message });
        if let Some(d) = &self.details {
            v["details"] = d.clone();
        }
        v.to_string()
    }
}

macro_rules! validation_from {
    ($($t:ty),*) => {$(
        impl From<$t> for Error {
            fn from(e: $t) -> Self {
                Error::validation(e.to_string())
            }
        }
    )*};
}

validation_from!(
    skinsim_core::kinematics::KinematicsError,
    skinsim_core::tof::TofError,
    skinsim_core::analysis::AnalysisError
);

impl From<skinsim_core::geometry::GeometryError> for Error {
    fn from(e: skinsim_core::geometry::GeometryError) -> Self {
        use skinsim_core::geometry::GeometryError;
        let details = match &e {
            GeometryError::InvalidMesh(report) => serde_json::to_value(&report.findings).ok(),
            GeometryError::SelfIntersection { pairs } => Some(serde_json::json!({ "self_intersections": pairs })),
            _ => None,
        };
        Error { kind: Kind::Validation, message: e.to_string(), details }
    }
}

impl From<skinsim_core::layout::LayoutError> for Error {
    fn from(e: skinsim_core::layout::LayoutError) -> Self {
        match e {
            skinsim_core::layout::LayoutError::Geometry(g) => g.into(),
            other => Error::validation(other.to_string()),
        }
    }
}

impl From<skinsim_core::sc::ScError> for Error {
    fn from(e: skinsim_core::sc::ScError) -> Self {
        use skinsim_core::sc::ScError;
        match e {
            ScError::Calibration { .. } | ScError::CalibrationInput(_) => Error::numerical(e.to_string()),
            other => Error::validation(other.to_string()),
        }
    }
}

impl From<skinsim_core::simulate::SimError> for Error {
    fn from(e: skinsim_core::simulate::SimError) -> Self {
        use skinsim_core::simulate::SimError;
        match e {
            SimError::Sc(s) => s.into(),
            other => Error::validation(other.to_string()),
        }
    }
}
