//! Intersection model, file ingestion and scenario generation.

mod file;
mod map;
mod scenario;
mod synthetic;

pub use file::{BuildingRecord, IntersectionFile, LaneRecord, MetaRecord, RouteRecord};
pub use map::{
    validate, Building, GeoOrigin, IntersectionMap, Lane, Route, Violation, BUILDING_BUFFER, GOAL_PAST_EXIT,
    ROUTE_GAP_TOLERANCE,
};
pub use scenario::{ego_start, generate_scenario, EgoStart, OtherVehicle, Scenario, ScenarioParams, VehicleState};
pub use synthetic::{synthetic_fourway, synthetic_fourway_file, FourWayParams, SYNTHETIC_SPEED_LIMIT};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("malformed intersection file: {0}")]
    Parse(String),
    #[error("{}", join(.0))]
    Invalid(Vec<Violation>),
    #[error("invalid configuration: {0}")]
    Config(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("unknown route {0}")]
    UnknownRoute(String),
    #[error("route {0} has no stop line far enough along to place the ego")]
    NoStopline(String),
    #[error("scenario generation saturated after {rejections} consecutive rejections")]
    Saturated { rejections: usize },
}
