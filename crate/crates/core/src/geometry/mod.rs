//! Triangle meshes, validation, outward offsetting for the dermis and
//! covering, and support placement between the two layers.

mod bvh;
mod intersect;
mod mesh;
mod offset;
pub mod primitives;
mod supports;
mod validate;

use alloc::vec::Vec;

pub use bvh::{brute_force_hit, Aabb, Bvh, Hit};
pub use intersect::{
    closest_point_on_triangle, point_segment_distance, ray_triangle, segment_triangle,
    triangles_intersect, RAY_T_MIN,
};
pub use mesh::{Material, TriMesh};
pub use offset::{extrude_covering, find_self_intersections, offset_surface, OffsetDirection, OffsetResult, OffsetSpec};
pub use supports::{generate_supports, Support, SupportParams};
pub use validate::{validate_mesh, Finding, Severity, ValidationReport, DEGENERATE_AREA};

use crate::math::{is_unit, Point3, Vec3};

/// Keep-out disk on the surface around electronics.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Footprint {
    pub center: Point3,
    pub normal: Vec3,
    pub radius: f64,
}

impl Footprint {
    pub fn new(center: Point3, normal: Vec3, radius: f64) -> Result<Self, GeometryError> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(GeometryError::InvalidParameter("footprint radius must be > 0"));
        }
        if !is_unit(&normal) {
            return Err(GeometryError::InvalidParameter("footprint normal must be unit length"));
        }
        Ok(Self { center, normal, radius })
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("mesh failed validation with {} finding(s)", .0.errors().count())]
    InvalidMesh(ValidationReport),
    #[error("offset surface self-intersects ({} face pair(s))", .pairs.len())]
    SelfIntersection { pairs: Vec<(usize, usize)> },
    #[error("vertex {vertex} has no well-defined normal")]
    UndefinedNormal { vertex: usize },
    #[error("no support could be placed: {0}")]
    Placement(&'static str),
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
}
