//! Intersection file schema (JSON).
//!
//! ```json
//! {
//!   "meta": { "name": "main-and-state", "origin_lat": 42.28, "origin_lon": -83.74, "ego_route": "s_left" },
//!   "lanes": [ { "id": "s_in", "waypoints": [[1.75, -67.75], [1.75, -7.75]], "v_min": 0, "v_max": 12, "width": 3.5 } ],
//!   "routes": [ { "id": "s_left", "lane_ids": ["s_in", "s_left", "w_out"], "stopline_s": 60.0 } ],
//!   "buildings": [ { "id": "b0", "vertices": [[5.5, -67.75], [67.75, -67.75], [67.75, -5.5]] } ]
//! }
//! ```
//!
//! Lengths are meters, speeds m/s, coordinates in a local planar frame.

use serde::{Deserialize, Serialize};

use crate::geometry::Point;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntersectionFile {
    pub meta: MetaRecord,
    pub lanes: Vec<LaneRecord>,
    pub routes: Vec<RouteRecord>,
    #[serde(default)]
    pub buildings: Vec<BuildingRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaRecord {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub origin_lon: Option<f64>,
    /// Route the ego drives; defaults to the first route with a stop line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ego_route: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaneRecord {
    pub id: String,
    pub waypoints: Vec<Point>,
    pub v_min: f64,
    pub v_max: f64,
    pub width: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteRecord {
    pub id: String,
    pub lane_ids: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopline_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildingRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub vertices: Vec<Point>,
}

impl IntersectionFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("intersection file serializes")
    }
}
