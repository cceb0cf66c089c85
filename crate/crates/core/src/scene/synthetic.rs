//! Synthetic four-way, un-signaled intersection.
//!
//! Two perpendicular two-lane roads (one lane per direction, right-hand
//! traffic) cross at the origin. The intersection box has half-size
//! `H = turn_radius + lane_width / 2`, which makes a right turn a quarter
//! circle of `turn_radius` about the box corner and a left turn a quarter
//! circle of `H + lane_width / 2` about the opposite corner. Each arm extends
//! `arm_length` beyond the box. Curb fillets follow the right turns, and a
//! building fills each quadrant with its rounded corner held
//! [`BUILDING_BUFFER`] away from the fillet.
//!
//! Everything is built for the south arm and rotated by exact quarter turns.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::geometry::Point;

use super::file::{BuildingRecord, IntersectionFile, LaneRecord, MetaRecord, RouteRecord};
use super::map::{IntersectionMap, BUILDING_BUFFER};
use super::MapError;

/// Waypoint spacing along every centerline.
const WAYPOINT_SPACING: f64 = 0.5;
const BUILDING_ARC_SEGMENTS: usize = 16;
/// Extra setback on top of the buffer, absorbing spline end effects.
const BUILDING_MARGIN: f64 = 0.05;
pub const SYNTHETIC_SPEED_LIMIT: f64 = 12.0;

const ARMS: [&str; 4] = ["s", "e", "n", "w"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FourWayParams {
    pub lane_width: f64,
    pub arm_length: f64,
    pub turn_radius: f64,
}

impl Default for FourWayParams {
    fn default() -> Self {
        Self {
            lane_width: 3.5,
            arm_length: 90.0,
            turn_radius: 14.0,
        }
    }
}

impl FourWayParams {
    /// Half-size of the intersection box.
    pub fn half_span(&self) -> f64 {
        self.turn_radius + 0.5 * self.lane_width
    }

    /// Radius of the curb fillet at each corner.
    pub fn curb_radius(&self) -> f64 {
        self.turn_radius - 0.5 * self.lane_width
    }
}

/// Rotates by `k` quarter turns counter-clockwise, exactly.
pub(crate) fn quarter_turn(p: Point, k: usize) -> Point {
    match k % 4 {
        0 => p,
        1 => Point::new(-p.y, p.x),
        2 => Point::new(-p.x, -p.y),
        _ => Point::new(p.y, -p.x),
    }
}

fn line(a: Point, b: Point) -> Vec<Point> {
    let n = ((a.distance(b) / WAYPOINT_SPACING).ceil() as usize).max(1);
    (0..=n).map(|i| a.lerp(b, i as f64 / n as f64)).collect()
}

fn arc(center: Point, radius: f64, from: f64, to: f64, spacing: f64) -> Vec<Point> {
    let n = (((to - from).abs() * radius / spacing).ceil() as usize).max(2);
    (0..=n)
        .map(|i| {
            let t = from + (to - from) * i as f64 / n as f64;
            center + Point::from_angle(t) * radius
        })
        .collect()
}

pub fn synthetic_fourway(params: FourWayParams) -> Result<IntersectionMap, MapError> {
    IntersectionMap::from_file(&synthetic_fourway_file(params)?)
}

pub fn synthetic_fourway_file(params: FourWayParams) -> Result<IntersectionFile, MapError> {
    let FourWayParams {
        lane_width: lw,
        arm_length: len,
        turn_radius: r,
    } = params;
    if !(lw > 0.0 && len > 0.0 && r > 0.0) || !(lw.is_finite() && len.is_finite() && r.is_finite()) {
        return Err(MapError::Config(format!(
            "lane_width, arm_length and turn_radius must be positive, got {lw}, {len}, {r}"
        )));
    }
    let h = params.half_span();
    // building corner radius about the fillet center
    let rho = params.curb_radius() - BUILDING_BUFFER - BUILDING_MARGIN;
    if rho <= 0.0 {
        return Err(MapError::Config(format!(
            "turn_radius {r} leaves no room for a building at the corner; need more than {}",
            0.5 * lw + BUILDING_BUFFER + BUILDING_MARGIN
        )));
    }
    if h >= len {
        return Err(MapError::Config(format!(
            "turn_radius {r} makes the intersection box (half-size {h}) longer than the arms ({len})"
        )));
    }

    let half = 0.5 * lw;
    // South arm, canonical frame.
    let in_lane = line(Point::new(half, -(h + len)), Point::new(half, -h));
    let out_lane = line(Point::new(-half, -h), Point::new(-half, -(h + len)));
    let straight = line(Point::new(half, -h), Point::new(half, h));
    let right = arc(Point::new(h, -h), r, PI, FRAC_PI_2, WAYPOINT_SPACING);
    let left = arc(Point::new(-h, -h), h + half, 0.0, FRAC_PI_2, WAYPOINT_SPACING);

    let rot = |pts: &[Point], k: usize| -> Vec<Point> { pts.iter().map(|&p| quarter_turn(p, k)).collect() };
    let lane = |id: String, waypoints: Vec<Point>| LaneRecord {
        id,
        waypoints,
        v_min: 0.0,
        v_max: SYNTHETIC_SPEED_LIMIT,
        width: lw,
    };

    let mut lanes = Vec::new();
    for (k, arm) in ARMS.iter().enumerate() {
        lanes.push(lane(format!("{arm}_in"), rot(&in_lane, k)));
        lanes.push(lane(format!("{arm}_out"), rot(&out_lane, k)));
    }
    let mut routes = Vec::new();
    for (k, arm) in ARMS.iter().enumerate() {
        for (turn, pts, target) in [
            ("left", &left, (k + 3) % 4),
            ("straight", &straight, (k + 2) % 4),
            ("right", &right, (k + 1) % 4),
        ] {
            let id = format!("{arm}_{turn}");
            lanes.push(lane(id.clone(), rot(pts, k)));
            routes.push(RouteRecord {
                id: id.clone(),
                lane_ids: vec![format!("{arm}_in"), id, format!("{}_out", ARMS[target])],
                stopline_s: Some(len),
            });
        }
    }

    // South-east quadrant building: straight edges 2 m off the lane edges,
    // rounded corner of radius `rho` about the fillet center (h, -h).
    let far = h + len;
    let edge = lw + BUILDING_BUFFER + BUILDING_MARGIN;
    let mut footprint = vec![Point::new(far, -far), Point::new(far, -edge)];
    footprint.extend(arc(
        Point::new(h, -h),
        rho,
        FRAC_PI_2,
        PI,
        rho * FRAC_PI_2 / BUILDING_ARC_SEGMENTS as f64,
    ));
    footprint.push(Point::new(edge, -far));
    let buildings = (0..4)
        .map(|k| BuildingRecord {
            id: Some(format!("building-{}{}", ARMS[k], ARMS[(k + 1) % 4])),
            vertices: rot(&footprint, k),
        })
        .collect();

    Ok(IntersectionFile {
        meta: MetaRecord {
            name: "synthetic-fourway".into(),
            origin_lat: None,
            origin_lon: None,
            ego_route: Some("s_left".into()),
        },
        lanes,
        routes,
        buildings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_map() -> IntersectionMap {
        synthetic_fourway(FourWayParams::default()).unwrap()
    }

    #[test]
    fn counts() {
        let map = default_map();
        // 8 arm lanes + 12 connectors
        assert_eq!(map.lanes.len(), 20);
        assert_eq!(map.routes.len(), 12);
        assert_eq!(map.buildings.len(), 4);
        assert_eq!(
            map.lanes
                .iter()
                .filter(|l| l.id.ends_with("_in") || l.id.ends_with("_out"))
                .count(),
            8
        );
    }

    #[test]
    fn through_route_length() {
        let map = default_map();
        let p = FourWayParams::default();
        // 2 arms + the box span 2H = 2 r + w
        let expected = 2.0 * p.arm_length + 2.0 * p.turn_radius + p.lane_width;
        for arm in ARMS {
            let r = &map.routes[map.route_index(&format!("{arm}_straight")).unwrap()];
            assert!((r.length() - expected).abs() < 1e-3, "{} vs {expected}", r.length());
        }
    }

    #[test]
    fn turn_lengths_are_quarter_circles() {
        let map = default_map();
        let p = FourWayParams::default();
        let right = &map.lanes[map.lane_index("s_right").unwrap()];
        let left = &map.lanes[map.lane_index("s_left").unwrap()];
        assert!((right.spline.length() - FRAC_PI_2 * p.turn_radius).abs() < 1e-3);
        assert!((left.spline.length() - FRAC_PI_2 * (p.half_span() + 0.5 * p.lane_width)).abs() < 1e-3);
    }

    #[test]
    fn stopline_and_ego_start() {
        let map = default_map();
        let ego = map.default_ego_route().unwrap();
        assert_eq!(map.routes[ego].id, "s_left");
        let stop = map.routes[ego].stopline_s.unwrap();
        assert_eq!(stop, 90.0);
        // stop line sits at the box edge y = -H
        let p = map.routes[ego].spline.eval(stop).unwrap();
        assert!((p.y + FourWayParams::default().half_span()).abs() < 1e-4, "{p:?}");
        let start = map.routes[ego].spline.eval(stop - 15.0).unwrap();
        assert!((p.distance(start) - 15.0).abs() < 1e-4);
    }

    #[test]
    fn rejects_infeasible_radius() {
        let too_tight = FourWayParams {
            turn_radius: 3.0,
            ..Default::default()
        };
        assert!(matches!(synthetic_fourway(too_tight), Err(MapError::Config(_))));
        let too_wide = FourWayParams {
            turn_radius: 100.0,
            ..Default::default()
        };
        assert!(matches!(synthetic_fourway(too_wide), Err(MapError::Config(_))));
        assert!(synthetic_fourway(FourWayParams {
            lane_width: -1.0,
            ..Default::default()
        })
        .is_err());
    }

    fn hausdorff(a: &[Point], b: &[Point]) -> f64 {
        let one_way = |a: &[Point], b: &[Point]| {
            a.iter()
                .map(|p| b.iter().map(|q| p.distance(*q)).fold(f64::INFINITY, f64::min))
                .fold(0.0, f64::max)
        };
        one_way(a, b).max(one_way(b, a))
    }

    #[test]
    fn fourfold_symmetry() {
        let map = default_map();
        let samples = |id: &str| -> Vec<Point> {
            let l = &map.lanes[map.lane_index(id).unwrap()];
            l.spline
                .sample_arclengths(0.5)
                .into_iter()
                .map(|s| l.spline.eval_clamped(s))
                .collect()
        };
        for suffix in ["in", "out", "left", "straight", "right"] {
            let base: Vec<Point> = samples(&format!("s_{suffix}"));
            for (k, arm) in ARMS.iter().enumerate().skip(1) {
                let rotated: Vec<Point> = base.iter().map(|&p| quarter_turn(p, k)).collect();
                let d = hausdorff(&rotated, &samples(&format!("{arm}_{suffix}")));
                assert!(d < 1e-6, "{arm}_{suffix}: {d}");
            }
        }
    }

    #[test]
    fn buildings_clear_the_road_surface() {
        let p = FourWayParams::default();
        let map = default_map();
        let (lw, h) = (p.lane_width, p.half_span());
        let c = Point::new(h, -h);
        for (k, b) in map.buildings.iter().enumerate() {
            for &v in b.polygon.vertices() {
                // back to the south-east quadrant
                let q = quarter_turn(v, 4 - k);
                let mut d = (q.x - lw).min(-q.y - lw);
                if q.x < h && q.y > -h {
                    d = d.min(p.curb_radius() - q.distance(c));
                }
                assert!(d >= BUILDING_BUFFER - 1e-9, "{} vertex {q:?}: {d}", b.id);
            }
        }
    }

    #[test]
    fn file_round_trip() {
        let file = synthetic_fourway_file(FourWayParams::default()).unwrap();
        let text = file.to_json();
        let back = IntersectionFile::from_json(&text).unwrap();
        assert_eq!(back, file);
        assert_eq!(
            IntersectionMap::from_file(&back).unwrap(),
            IntersectionMap::from_file(&file).unwrap()
        );
    }
}
