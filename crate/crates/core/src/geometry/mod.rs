//! Planar geometry: splines, polygons, oriented boxes and visibility.

mod intervals;
mod obb;
mod point;
mod polygon;
mod spline;
mod visibility;

pub use intervals::{total_length, union, unobserved_intervals, Interval, SampledCurve};
pub use obb::{box_overlap, OrientedBox, VEHICLE_LENGTH, VEHICLE_WIDTH};
pub use point::{point_segment_distance, segments_intersect, Point};
pub use polygon::Polygon;
pub use spline::LaneSpline;
pub use visibility::{visibility_polygon, wrap_angle, SensorModel, VisibilityPolygon};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("need at least 2 waypoints, got {0}")]
    TooFewPoints(usize),
    #[error("waypoint {index} coincides with its predecessor")]
    DegenerateInput { index: usize },
    #[error("arc length {s} outside [0, {length}]")]
    OutOfDomain { s: f64, length: f64 },
    #[error("sensor origin lies inside occluder {index}")]
    OriginInsideOccluder { index: usize },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid box dimensions {length} x {width}")]
    InvalidBox { length: f64, width: f64 },
    #[error("invalid sensor: {0}")]
    InvalidSensor(String),
}

/// A planar region with a point-membership test.
pub trait Region {
    fn contains(&self, p: Point) -> bool;
}
