//! Geodesics on flat cone surfaces: closed geodesics and systole by
//! unfolding, point distances, distance fields, Voronoi cells and
//! comparison polygons.

mod closed;
mod wedge;
mod distance;
mod field;
pub mod plane;
mod polygon;

pub use closed::{
    classify_family, enumerate_closed_geodesics, enumerate_closed_geodesics_with, saddle_connections, systole,
    systole_with, verify_local_geodesic, Enumeration, EnumerationOptions, SaddleConnection, Systole, DEFAULT_BUDGET,
};
pub use field::{
    sublevel_area, sublevel_area_richardson, voronoi_cells, DistanceField, SteinerGraph, SublevelArea, VoronoiCell,
    DEFAULT_MESH_H,
};
pub use polygon::{comparison_polygon, hexagon_constraints, voronoi_constraints, CenterDistance, ComparisonPolygon};
pub use distance::{boundary_curve, distance_to_curve, point_distance, point_distance_with, SurfacePoint};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeodesicError {
    #[error("cone angle {0} is below 2π; the surface is not nonpositively curved")]
    PositiveCurvature(f64),
    #[error("surface has boundary")]
    NotClosed,
    #[error("length bound must be positive, got {0}")]
    BadBound(f64),
    #[error("no closed geodesic of length at most {0}")]
    NoneFound(f64),
    #[error("unfolding exceeded the node budget of {0}")]
    BudgetExhausted(usize),
    #[error("invalid point: {0}")]
    BadPoint(String),
    #[error("invalid input: {0}")]
    BadInput(String),
}

/// How a closed geodesic was found.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum GeodesicKind {
    /// Smooth closed geodesic with orientation-reversing holonomy: the core
    /// of an embedded flat Möbius band.
    Soul,
    /// Core curve of a flat cylinder of parallel closed geodesics.
    Cylinder,
    /// Chain of saddle connections through cone points.
    SaddleChain,
}

/// Systolic loop families of the extremal surface.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    MobiusSoul,
    ShortBaseOrthogonal,
    LegOrthogonal,
    Other,
}

/// Straight piece of a path inside one face, in face coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathSegment {
    pub face: usize,
    pub entry: [f64; 2],
    pub exit: [f64; 2],
    /// Slot crossed when leaving the face, `None` when the piece ends at a
    /// vertex.
    pub exit_slot: Option<usize>,
}

impl PathSegment {
    pub fn length(&self) -> f64 {
        plane::norm(plane::sub(self.exit, self.entry))
    }
}

/// Passage of a path through a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Incidence {
    pub vertex: usize,
    /// Index of the segment ending at the vertex.
    pub after_segment: usize,
    /// Link angle of the incoming and outgoing directions.
    pub angle_in: f64,
    pub angle_out: f64,
    /// Angles between the two directions on either side.
    pub side_angles: (f64, f64),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GeodesicPath {
    pub kind: GeodesicKind,
    pub length: f64,
    pub closed: bool,
    pub segments: Vec<PathSegment>,
    pub incidences: Vec<Incidence>,
    /// Orientation character of the holonomy around the loop.
    pub orientation_reversing: bool,
}

impl GeodesicPath {
    pub fn faces(&self) -> Vec<usize> {
        self.segments.iter().map(|s| s.face).collect()
    }

    pub fn cone_points(&self) -> Vec<usize> {
        self.incidences.iter().map(|i| i.vertex).collect()
    }

    pub fn segment_length_sum(&self) -> f64 {
        self.segments.iter().map(PathSegment::length).sum()
    }
}
