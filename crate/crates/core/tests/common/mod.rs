#![allow(dead_code)]

use std::f64::consts::PI;

use occlusion_risk::geometry::{LaneSpline, Point};
use occlusion_risk::planner::PlannerParams;
use occlusion_risk::risk::RiskDistribution;
use occlusion_risk::scene::{BuildingRecord, IntersectionFile, IntersectionMap, LaneRecord, MetaRecord, RouteRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn lane(id: &str, pts: &[[f64; 2]]) -> LaneRecord {
    LaneRecord {
        id: id.into(),
        waypoints: pts.iter().map(|&p| p.into()).collect(),
        v_min: 0.0,
        v_max: 12.0,
        width: 3.5,
    }
}

pub fn route(id: &str, lanes: &[&str], stopline_s: Option<f64>) -> RouteRecord {
    RouteRecord {
        id: id.into(),
        lane_ids: lanes.iter().map(|s| s.to_string()).collect(),
        stopline_s,
    }
}

pub fn building(id: &str, pts: &[[f64; 2]]) -> BuildingRecord {
    BuildingRecord {
        id: Some(id.into()),
        vertices: pts.iter().map(|&p| p.into()).collect(),
    }
}

pub fn map(lanes: Vec<LaneRecord>, routes: Vec<RouteRecord>, buildings: Vec<BuildingRecord>) -> IntersectionMap {
    IntersectionMap::from_file(&IntersectionFile {
        meta: MetaRecord {
            name: "test".into(),
            origin_lat: None,
            origin_lon: None,
            ego_route: None,
        },
        lanes,
        routes,
        buildings,
    })
    .expect("valid test map")
}

/// One straight lane along +x from the origin, no buildings.
pub fn straight_map(length: f64) -> IntersectionMap {
    map(
        vec![lane("a", &[[0.0, 0.0], [length, 0.0]])],
        vec![route("r", &["a"], Some(0.5 * length))],
        vec![],
    )
}

/// Quarter circle of radius 10 followed by a straight tail.
pub fn curved_route() -> LaneSpline {
    let mut pts: Vec<Point> = (0..=24)
        .map(|i| {
            let t = i as f64 / 24.0 * 0.5 * PI;
            Point::new(10.0 * t.sin(), 10.0 - 10.0 * t.cos())
        })
        .collect();
    for i in 1..=10 {
        pts.push(Point::new(10.0, 10.0 + 2.0 * i as f64));
    }
    LaneSpline::from_waypoints(&pts).unwrap()
}

/// Brute-force distance to a curve sampled at `n + 1` evenly spaced arc lengths.
pub fn brute_distance(route: &LaneSpline, p: Point, n: usize) -> f64 {
    let len = route.length();
    (0..=n)
        .map(|i| route.eval_clamped(len * i as f64 / n as f64).distance(p))
        .fold(f64::INFINITY, f64::min)
}

/// A randomized planning problem on a fixed route.
pub struct PlanInstance {
    pub s: f64,
    pub v: f64,
    pub risk: RiskDistribution,
}

/// Instances with up to 40 particles scattered around the ego's reach, some
/// inside and some outside the lateral gate.
pub fn plan_instances(route: &LaneSpline, n: usize, seed: u64) -> Vec<PlanInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = route.length();
    (0..n)
        .map(|_| {
            let s = rng.gen_range(0.0..len);
            let v = rng.gen_range(0.0..=12.0);
            let k = rng.gen_range(0..=40);
            let positions: Vec<Point> = (0..k)
                .map(|_| {
                    let u = rng.gen_range(s - 5.0..s + 25.0).clamp(0.0, len);
                    let (c, t) = route.pose_clamped(u);
                    c + t.perp() * rng.gen_range(-2.5..2.5)
                })
                .collect();
            PlanInstance {
                s,
                v,
                risk: RiskDistribution::from_positions(positions, 1.5),
            }
        })
        .collect()
}

/// Grid search written straight from the cost definitions, with distances to
/// the route taken from a dense sampling of it.
pub struct Oracle<'a> {
    pub route: &'a LaneSpline,
    pub params: PlannerParams,
    samples: Vec<Point>,
}

impl<'a> Oracle<'a> {
    pub fn new(route: &'a LaneSpline, params: PlannerParams, n_samples: usize) -> Self {
        let len = route.length();
        let samples = (0..=n_samples)
            .map(|i| route.eval_clamped(len * i as f64 / n_samples as f64))
            .collect();
        Self { route, params, samples }
    }

    fn gated(&self, risk: &RiskDistribution) -> Vec<Point> {
        risk.points
            .iter()
            .map(|p| p.position)
            .filter(|&p| {
                let d = self.samples.iter().map(|q| q.distance(p)).fold(f64::INFINITY, f64::min);
                d <= self.params.max_offset
            })
            .collect()
    }

    fn cost_gated(&self, s: f64, v: f64, a: f64, gated: &[Point]) -> f64 {
        let p = &self.params;
        let t = p.forecast_horizon;
        let s_hat = (s + v * t + 0.5 * a * t * t).clamp(0.0, self.route.length());
        let q = self.route.eval_clamped(s_hat);
        let mut j1 = 0.0;
        for x in gated {
            let r = q.distance(*x);
            if r < p.discard_radius {
                j1 += (-(r * r) / (p.sigma * p.sigma)).exp();
            }
        }
        j1 + p.lambda * (v + a * t - p.v_des).abs()
    }

    pub fn cost(&self, s: f64, v: f64, a: f64, risk: &RiskDistribution) -> f64 {
        self.cost_gated(s, v, a, &self.gated(risk))
    }

    pub fn interval(&self, v: f64) -> (f64, f64) {
        let p = &self.params;
        let t = p.forecast_horizon;
        (p.a_min.max((p.v_min - v) / t), p.a_max.min((p.v_max - v) / t))
    }

    /// Minimum cost over the interval ends and every multiple of `step` between them.
    pub fn min_cost(&self, s: f64, v: f64, risk: &RiskDistribution, step: f64) -> (f64, f64) {
        let gated = self.gated(risk);
        let (lo, hi) = self.interval(v);
        let mut grid = vec![lo, hi];
        let mut k = (lo / step).ceil() as i64;
        while (k as f64) * step <= hi {
            grid.push(k as f64 * step);
            k += 1;
        }
        grid.into_iter()
            .map(|a| (self.cost_gated(s, v, a, &gated), a))
            .fold((f64::INFINITY, 0.0), |best, x| if x.0 < best.0 { x } else { best })
    }
}
