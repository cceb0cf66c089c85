use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::geometry::{point_segment_distance, LaneSpline, Point, Polygon, SampledCurve};

use super::file::{BuildingRecord, IntersectionFile, LaneRecord, MetaRecord, RouteRecord};
use super::MapError;

/// Required clearance between buildings and the lane surface.
pub const BUILDING_BUFFER: f64 = 2.0;
/// Slack on the buffer rule for centerline discretization.
const BUFFER_TOLERANCE: f64 = 1e-3;
/// Largest tolerated gap between consecutive lanes of a route.
pub const ROUTE_GAP_TOLERANCE: f64 = 1e-3;
/// Centerline sampling used for the buffer rule.
const BUFFER_SAMPLE_STEP: f64 = 0.1;
/// Goal is placed this far past the start of the route's exit lane.
pub const GOAL_PAST_EXIT: f64 = 15.0;

#[derive(Clone, Debug, PartialEq)]
pub struct Lane {
    pub id: String,
    pub spline: LaneSpline,
    pub width: f64,
    pub v_min: f64,
    pub v_max: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Route {
    pub id: String,
    /// Indices into [`IntersectionMap::lanes`].
    pub lanes: Vec<usize>,
    /// Spline through the concatenated lane waypoints.
    pub spline: LaneSpline,
    pub stopline_s: Option<f64>,
}

impl Route {
    pub fn length(&self) -> f64 {
        self.spline.length()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Building {
    pub id: String,
    pub polygon: Polygon,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GeoOrigin {
    pub lat: f64,
    pub lon: f64,
}

/// Lanes, routes and buildings of one intersection. Immutable once built.
#[derive(Clone, Debug, PartialEq)]
pub struct IntersectionMap {
    pub name: String,
    pub origin_lat: Option<f64>,
    pub origin_lon: Option<f64>,
    pub lanes: Vec<Lane>,
    pub routes: Vec<Route>,
    pub buildings: Vec<Building>,
    ego_route: Option<String>,
    /// Lanes that directly follow each lane on some route.
    successors: Vec<Vec<usize>>,
}

/// One broken map invariant.
#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    DuplicateId {
        kind: &'static str,
        id: String,
    },
    InvalidLane {
        lane: String,
        reason: String,
    },
    EmptyRoute {
        route: String,
    },
    UnknownLane {
        route: String,
        lane: String,
    },
    DiscontinuousRoute {
        route: String,
        from: String,
        to: String,
        gap: f64,
    },
    InvalidStopline {
        route: String,
        stopline_s: f64,
    },
    InvalidBuilding {
        building: String,
        reason: String,
    },
    BufferViolation {
        building: String,
        lane: String,
        clearance: f64,
    },
    UnknownEgoRoute {
        route: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { kind, id } => write!(f, "duplicate {kind} id: {id}"),
            Violation::InvalidLane { lane, reason } => write!(f, "invalid lane: {lane}: {reason}"),
            Violation::EmptyRoute { route } => write!(f, "empty route: {route}"),
            Violation::UnknownLane { route, lane } => {
                write!(f, "unknown lane: {lane} (referenced by route {route})")
            }
            Violation::DiscontinuousRoute { route, from, to, gap } => {
                write!(f, "discontinuous route: {route} ({from} -> {to} gap {gap:.4} m)")
            }
            Violation::InvalidStopline { route, stopline_s } => {
                write!(f, "invalid stopline: {route} (stopline_s {stopline_s})")
            }
            Violation::InvalidBuilding { building, reason } => {
                write!(f, "invalid building: {building}: {reason}")
            }
            Violation::BufferViolation {
                building,
                lane,
                clearance,
            } => write!(
                f,
                "buffer violation: {building} (lane {lane}, clearance {clearance:.3} m < {BUILDING_BUFFER} m)"
            ),
            Violation::UnknownEgoRoute { route } => write!(f, "unknown ego route: {route}"),
        }
    }
}

fn building_id(index: usize, rec: &BuildingRecord) -> String {
    rec.id.clone().unwrap_or_else(|| format!("building-{index}"))
}

fn validate_lane(rec: &LaneRecord) -> Result<LaneSpline, Violation> {
    let bad = |reason: String| Violation::InvalidLane {
        lane: rec.id.clone(),
        reason,
    };
    if !(rec.width > 0.0 && rec.width.is_finite()) {
        return Err(bad(format!("width must be positive, got {}", rec.width)));
    }
    if !(rec.v_min >= 0.0 && rec.v_min <= rec.v_max && rec.v_max.is_finite()) {
        return Err(bad(format!(
            "speed bounds must satisfy 0 <= v_min <= v_max, got [{}, {}]",
            rec.v_min, rec.v_max
        )));
    }
    LaneSpline::from_waypoints(&rec.waypoints).map_err(|e| bad(e.to_string()))
}

/// Shortest distance between a sampled centerline and a polygon; negative
/// when the centerline enters the polygon.
fn centerline_clearance(curve: &SampledCurve, poly: &Polygon) -> f64 {
    let pts = curve.points();
    if pts.iter().any(|&p| poly.contains_point(p)) {
        return -1.0;
    }
    let mut best = pts
        .iter()
        .map(|&p| poly.boundary_distance(p))
        .fold(f64::INFINITY, f64::min);
    for &v in poly.vertices() {
        for w in pts.windows(2) {
            best = best.min(point_segment_distance(v, w[0], w[1]).0);
        }
    }
    best
}

/// Checks every map invariant, collecting all violations.
pub fn validate(file: &IntersectionFile) -> Vec<Violation> {
    validate_and_build(file).err().unwrap_or_default()
}

fn validate_and_build(file: &IntersectionFile) -> Result<IntersectionMap, Vec<Violation>> {
    let mut violations = Vec::new();

    let mut lane_index: HashMap<&str, usize> = HashMap::new();
    let mut lanes: Vec<Option<Lane>> = Vec::with_capacity(file.lanes.len());
    for (i, rec) in file.lanes.iter().enumerate() {
        if lane_index.insert(rec.id.as_str(), i).is_some() {
            violations.push(Violation::DuplicateId {
                kind: "lane",
                id: rec.id.clone(),
            });
        }
        match validate_lane(rec) {
            Ok(spline) => lanes.push(Some(Lane {
                id: rec.id.clone(),
                spline,
                width: rec.width,
                v_min: rec.v_min,
                v_max: rec.v_max,
            })),
            Err(v) => {
                violations.push(v);
                lanes.push(None);
            }
        }
    }

    let mut routes = Vec::with_capacity(file.routes.len());
    let mut route_ids = HashSet::new();
    for rec in &file.routes {
        if !route_ids.insert(rec.id.as_str()) {
            violations.push(Violation::DuplicateId {
                kind: "route",
                id: rec.id.clone(),
            });
        }
        if let Some(route) = build_route(rec, &lane_index, &lanes, &mut violations) {
            routes.push(route);
        }
    }

    let mut buildings = Vec::with_capacity(file.buildings.len());
    let mut building_ids = HashSet::new();
    for (i, rec) in file.buildings.iter().enumerate() {
        let id = building_id(i, rec);
        if !building_ids.insert(id.clone()) {
            violations.push(Violation::DuplicateId {
                kind: "building",
                id: id.clone(),
            });
        }
        match Polygon::new(rec.vertices.clone()) {
            Ok(polygon) => buildings.push(Building { id, polygon }),
            Err(e) => violations.push(Violation::InvalidBuilding {
                building: id,
                reason: e.to_string(),
            }),
        }
    }

    let sampled: Vec<Option<SampledCurve>> = lanes
        .iter()
        .map(|l| l.as_ref().map(|l| SampledCurve::new(&l.spline, BUFFER_SAMPLE_STEP)))
        .collect();
    for b in &buildings {
        let (min, max) = b.polygon.bounds();
        let center = (min + max) * 0.5;
        let radius = 0.5 * (max - min).norm();
        for (lane, curve) in lanes.iter().zip(&sampled) {
            let (Some(lane), Some(curve)) = (lane, curve) else {
                continue;
            };
            let reach = radius + 0.5 * lane.width + BUILDING_BUFFER;
            if !curve.near_disc(center, reach) {
                continue;
            }
            let clearance = centerline_clearance(curve, &b.polygon) - 0.5 * lane.width;
            if clearance < BUILDING_BUFFER - BUFFER_TOLERANCE {
                violations.push(Violation::BufferViolation {
                    building: b.id.clone(),
                    lane: lane.id.clone(),
                    clearance,
                });
            }
        }
    }

    if let Some(ego) = &file.meta.ego_route {
        if !route_ids.contains(ego.as_str()) {
            violations.push(Violation::UnknownEgoRoute { route: ego.clone() });
        }
    }

    if !violations.is_empty() {
        return Err(violations);
    }

    let lanes: Vec<Lane> = lanes.into_iter().map(Option::unwrap).collect();
    let mut successors = vec![Vec::new(); lanes.len()];
    for r in &routes {
        for w in r.lanes.windows(2) {
            if !successors[w[0]].contains(&w[1]) {
                successors[w[0]].push(w[1]);
            }
        }
    }
    Ok(IntersectionMap {
        name: file.meta.name.clone(),
        origin_lat: file.meta.origin_lat,
        origin_lon: file.meta.origin_lon,
        lanes,
        routes,
        buildings,
        ego_route: file.meta.ego_route.clone(),
        successors,
    })
}

fn build_route(
    rec: &RouteRecord,
    lane_index: &HashMap<&str, usize>,
    lanes: &[Option<Lane>],
    violations: &mut Vec<Violation>,
) -> Option<Route> {
    if rec.lane_ids.is_empty() {
        violations.push(Violation::EmptyRoute { route: rec.id.clone() });
        return None;
    }
    let mut ids = Vec::with_capacity(rec.lane_ids.len());
    for lid in &rec.lane_ids {
        match lane_index.get(lid.as_str()) {
            Some(&i) => ids.push(i),
            None => violations.push(Violation::UnknownLane {
                route: rec.id.clone(),
                lane: lid.clone(),
            }),
        }
    }
    if ids.len() != rec.lane_ids.len() {
        return None;
    }
    let parts: Option<Vec<&Lane>> = ids.iter().map(|&i| lanes[i].as_ref()).collect();
    // broken lanes were already reported
    let parts = parts?;

    let mut waypoints: Vec<Point> = parts[0].spline.control_points().to_vec();
    let mut ok = true;
    for w in parts.windows(2) {
        let gap = w[0].spline.end().distance(w[1].spline.start());
        if gap > ROUTE_GAP_TOLERANCE {
            violations.push(Violation::DiscontinuousRoute {
                route: rec.id.clone(),
                from: w[0].id.clone(),
                to: w[1].id.clone(),
                gap,
            });
            ok = false;
        }
        waypoints.extend_from_slice(&w[1].spline.control_points()[1..]);
    }
    if !ok {
        return None;
    }
    let spline = match LaneSpline::from_waypoints(&waypoints) {
        Ok(s) => s,
        Err(e) => {
            violations.push(Violation::InvalidLane {
                lane: rec.id.clone(),
                reason: format!("merged route spline: {e}"),
            });
            return None;
        }
    };
    if let Some(s) = rec.stopline_s {
        if !(s >= 0.0 && s <= spline.length()) {
            violations.push(Violation::InvalidStopline {
                route: rec.id.clone(),
                stopline_s: s,
            });
            return None;
        }
    }
    Some(Route {
        id: rec.id.clone(),
        lanes: ids,
        spline,
        stopline_s: rec.stopline_s,
    })
}

impl IntersectionMap {
    /// Validates `file` and builds the map.
    pub fn from_file(file: &IntersectionFile) -> Result<Self, MapError> {
        validate_and_build(file).map_err(MapError::Invalid)
    }

    pub fn from_json(text: &str) -> Result<Self, MapError> {
        let file = IntersectionFile::from_json(text).map_err(|e| MapError::Parse(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn to_file(&self) -> IntersectionFile {
        IntersectionFile {
            meta: MetaRecord {
                name: self.name.clone(),
                origin_lat: self.origin_lat,
                origin_lon: self.origin_lon,
                ego_route: self.ego_route.clone(),
            },
            lanes: self
                .lanes
                .iter()
                .map(|l| LaneRecord {
                    id: l.id.clone(),
                    waypoints: l.spline.control_points().to_vec(),
                    v_min: l.v_min,
                    v_max: l.v_max,
                    width: l.width,
                })
                .collect(),
            routes: self
                .routes
                .iter()
                .map(|r| RouteRecord {
                    id: r.id.clone(),
                    lane_ids: r.lanes.iter().map(|&i| self.lanes[i].id.clone()).collect(),
                    stopline_s: r.stopline_s,
                })
                .collect(),
            buildings: self
                .buildings
                .iter()
                .map(|b| BuildingRecord {
                    id: Some(b.id.clone()),
                    vertices: b.polygon.vertices().to_vec(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        self.to_file().to_json()
    }

    pub fn lane_index(&self, id: &str) -> Option<usize> {
        self.lanes.iter().position(|l| l.id == id)
    }

    pub fn route_index(&self, id: &str) -> Option<usize> {
        self.routes.iter().position(|r| r.id == id)
    }

    pub fn successors(&self, lane: usize) -> &[usize] {
        &self.successors[lane]
    }

    /// The configured ego route, else the first route with a stop line.
    pub fn default_ego_route(&self) -> Option<usize> {
        match &self.ego_route {
            Some(id) => self.route_index(id),
            None => self.routes.iter().position(|r| r.stopline_s.is_some()),
        }
    }

    /// Arc length where the route leaves the intersection: the start of its
    /// last lane (or the stop line for single-lane routes).
    pub fn exit_s(&self, route: usize) -> f64 {
        let r = &self.routes[route];
        if r.lanes.len() >= 2 {
            let last = &self.lanes[*r.lanes.last().unwrap()];
            (r.length() - last.spline.length()).max(0.0)
        } else {
            r.stopline_s.unwrap_or(r.length())
        }
    }

    /// Default goal on `route`: a fixed distance past the intersection exit.
    pub fn goal_s(&self, route: usize) -> f64 {
        (self.exit_s(route) + GOAL_PAST_EXIT).min(self.routes[route].length())
    }

    pub fn building_polygons(&self) -> Vec<Polygon> {
        self.buildings.iter().map(|b| b.polygon.clone()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lane(id: &str, pts: &[[f64; 2]]) -> LaneRecord {
        LaneRecord {
            id: id.into(),
            waypoints: pts.iter().map(|&p| p.into()).collect(),
            v_min: 0.0,
            v_max: 12.0,
            width: 3.5,
        }
    }

    fn base() -> IntersectionFile {
        IntersectionFile {
            meta: MetaRecord {
                name: "t".into(),
                origin_lat: None,
                origin_lon: None,
                ego_route: None,
            },
            lanes: vec![
                lane("a", &[[0.0, 0.0], [50.0, 0.0]]),
                lane("b", &[[50.0, 0.0], [100.0, 0.0]]),
            ],
            routes: vec![RouteRecord {
                id: "r".into(),
                lane_ids: vec!["a".into(), "b".into()],
                stopline_s: Some(50.0),
            }],
            buildings: vec![BuildingRecord {
                id: Some("house".into()),
                vertices: vec![[10.0, 10.0].into(), [20.0, 10.0].into(), [20.0, 20.0].into()],
            }],
        }
    }

    #[test]
    fn valid_map_builds() {
        let map = IntersectionMap::from_file(&base()).unwrap();
        assert_eq!(map.lanes.len(), 2);
        assert!((map.routes[0].length() - 100.0).abs() < 1e-9);
        assert_eq!(map.successors(0), &[1]);
        assert_eq!(map.default_ego_route(), Some(0));
        assert!((map.exit_s(0) - 50.0).abs() < 1e-9);
        assert!((map.goal_s(0) - 65.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_lane_is_named() {
        let mut f = base();
        f.routes[0].lane_ids.push("ghost".into());
        let err = IntersectionMap::from_file(&f).unwrap_err().to_string();
        assert!(err.contains("unknown lane: ghost"), "{err}");
    }

    #[test]
    fn discontinuous_route() {
        let mut f = base();
        f.lanes[1] = lane("b", &[[51.0, 0.0], [100.0, 0.0]]);
        let v = validate(&f);
        assert!(matches!(&v[0], Violation::DiscontinuousRoute { route, .. } if route == "r"));
    }

    #[test]
    fn building_in_roadway() {
        let mut f = base();
        f.buildings[0].vertices = vec![[10.0, -1.0].into(), [20.0, -1.0].into(), [20.0, 5.0].into()];
        let err = IntersectionMap::from_file(&f).unwrap_err().to_string();
        assert!(err.contains("buffer violation: house"), "{err}");
    }

    #[test]
    fn building_inside_buffer_but_off_lane() {
        let mut f = base();
        // lane edge at y = 1.75, building at y = 3.0: clearance 1.25 m
        f.buildings[0].vertices = vec![[10.0, 3.0].into(), [20.0, 3.0].into(), [20.0, 8.0].into()];
        let v = validate(&f);
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::BufferViolation { clearance, .. } => assert!((clearance - 1.25).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_speed_bounds() {
        let mut f = base();
        f.lanes[0].v_min = 5.0;
        f.lanes[0].v_max = 4.0;
        assert!(matches!(&validate(&f)[0], Violation::InvalidLane { lane, .. } if lane == "a"));
    }
}
