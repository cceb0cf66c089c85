//! Longitudinal acceleration planning against a risk distribution.
//!
//! The planner minimizes `J1(a) + λ J2(a)` over the feasible accelerations,
//! where `J1` sums a Gaussian potential of each relevant particle around the
//! ego's forecast position and `J2` penalizes deviation from the desired
//! speed. The minimization is an exhaustive sweep over a fine grid.

mod index;

pub use index::RouteIndex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{LaneSpline, Point, VEHICLE_LENGTH, VEHICLE_WIDTH};
use crate::risk::RiskDistribution;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerParams {
    /// `T_f`, seconds.
    pub forecast_horizon: f64,
    /// `σ`, meters.
    pub sigma: f64,
    /// `b̄`: particles farther than this from the ego route are ignored.
    pub max_offset: f64,
    pub lambda: f64,
    pub v_des: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub a_min: f64,
    pub a_max: f64,
    /// Particles at least this far from the forecast ego position contribute
    /// nothing.
    pub discard_radius: f64,
    /// Spacing of the acceleration grid.
    pub grid_step: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        let sigma = 0.5 * VEHICLE_LENGTH;
        Self {
            forecast_horizon: 1.5,
            sigma,
            max_offset: 0.75 * VEHICLE_WIDTH,
            lambda: 16384.0 * 1e-6,
            v_des: 10.0,
            v_min: 0.0,
            v_max: 12.0,
            a_min: -8.0,
            a_max: 2.5,
            discard_radius: 2.0 * sigma,
            grid_step: 0.005,
        }
    }
}

impl PlannerParams {
    pub fn validate(&self) -> Result<(), PlanError> {
        let bad = |msg: String| Err(PlanError::InvalidParams(msg));
        for (name, v) in [
            ("forecast_horizon", self.forecast_horizon),
            ("sigma", self.sigma),
            ("max_offset", self.max_offset),
            ("grid_step", self.grid_step),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return bad(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.discard_radius > 0.0) {
            return bad(format!("discard_radius must be positive, got {}", self.discard_radius));
        }
        if !(self.a_min < 0.0 && 0.0 < self.a_max) {
            return bad(format!("need a_min < 0 < a_max, got [{}, {}]", self.a_min, self.a_max));
        }
        if !(self.v_min <= self.v_des && self.v_des <= self.v_max) {
            return bad(format!(
                "need v_min <= v_des <= v_max, got {} / {} / {}",
                self.v_min, self.v_des, self.v_max
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("no feasible acceleration at v = {v}: interval [{lo}, {hi}] is empty")]
    Infeasible { v: f64, lo: f64, hi: f64 },
    #[error("invalid planner parameters: {0}")]
    InvalidParams(String),
}

/// Ego state along its route.
#[derive(Clone, Copy, Debug)]
pub struct EgoPrediction<'a> {
    pub route: &'a LaneSpline,
    pub s: f64,
    pub v: f64,
}

/// Forecast arc length `s + v T + a T² / 2`, clamped to the route.
pub fn predicted_s(ego: &EgoPrediction<'_>, a: f64, horizon: f64) -> f64 {
    (ego.s + ego.v * horizon + 0.5 * a * horizon * horizon).clamp(0.0, ego.route.length())
}

/// Global minimum distance from `p` to `route`.
pub fn min_distance_to_route(route: &LaneSpline, p: Point) -> f64 {
    RouteIndex::new(route).distance(p)
}

#[inline]
fn potential(r2: f64, params: &PlannerParams) -> f64 {
    if r2 < params.discard_radius * params.discard_radius {
        (-r2 / (params.sigma * params.sigma)).exp()
    } else {
        0.0
    }
}

/// `J1(a)`: sum of `exp(-r²/σ²)` over particles within `b̄` of the route and
/// closer than the discard radius to the forecast ego position.
pub fn safety_cost(a: f64, ego: &EgoPrediction<'_>, risk: &RiskDistribution, params: &PlannerParams) -> f64 {
    let index = RouteIndex::new(ego.route);
    safety_cost_indexed(a, ego, risk, params, &index)
}

fn safety_cost_indexed(
    a: f64,
    ego: &EgoPrediction<'_>,
    risk: &RiskDistribution,
    params: &PlannerParams,
    index: &RouteIndex,
) -> f64 {
    let q = ego.route.eval_clamped(predicted_s(ego, a, params.forecast_horizon));
    let mut sum = 0.0;
    for pt in &risk.points {
        let d = index.distance(pt.position);
        if d <= params.max_offset {
            sum += potential(q.distance_squared(pt.position), params);
        }
    }
    sum
}

/// `J2(a) = |v + a T - v_des|`.
pub fn speed_cost(a: f64, v: f64, params: &PlannerParams) -> f64 {
    (v + a * params.forecast_horizon - params.v_des).abs()
}

/// `J1 + λ J2`.
pub fn total_cost(a: f64, ego: &EgoPrediction<'_>, risk: &RiskDistribution, params: &PlannerParams) -> f64 {
    safety_cost(a, ego, risk, params) + params.lambda * speed_cost(a, ego.v, params)
}

/// Accelerations keeping both `a` and the forecast speed in bounds. A speed
/// marginally outside its bounds is projected back first.
pub fn feasible_interval(v: f64, params: &PlannerParams) -> Result<(f64, f64), PlanError> {
    if !(params.v_min <= params.v_max) {
        return Err(PlanError::Infeasible {
            v,
            lo: f64::NAN,
            hi: f64::NAN,
        });
    }
    let vp = v.clamp(params.v_min, params.v_max);
    let t = params.forecast_horizon;
    let lo = params.a_min.max((params.v_min - vp) / t);
    let hi = params.a_max.min((params.v_max - vp) / t);
    if !(lo <= hi) {
        return Err(PlanError::Infeasible { v, lo, hi });
    }
    Ok((lo, hi))
}

/// Multiples of `step` strictly inside `(lo, hi)`, bracketed by `lo` and
/// `hi` themselves.
pub fn acceleration_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let mut grid = vec![lo];
    let first = (lo / step).floor() as i64 + 1;
    let last = (hi / step).ceil() as i64 - 1;
    for k in first..=last {
        let a = k as f64 * step;
        if a > lo && a < hi {
            grid.push(a);
        }
    }
    if hi > lo {
        grid.push(hi);
    }
    grid
}

/// Planner output.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plan {
    pub accel: f64,
    pub cost: f64,
    /// Particles that contributed to at least one candidate.
    pub n_relevant: usize,
}

/// Planner bound to one ego route.
#[derive(Clone, Debug)]
pub struct Planner {
    params: PlannerParams,
    index: RouteIndex,
}

impl Planner {
    pub fn new(route: &LaneSpline, params: PlannerParams) -> Result<Self, PlanError> {
        params.validate()?;
        Ok(Self {
            params,
            index: RouteIndex::new(route),
        })
    }

    pub fn params(&self) -> &PlannerParams {
        &self.params
    }

    pub fn route(&self) -> &LaneSpline {
        self.index.spline()
    }

    /// Minimizer of `J1 + λ J2` on the grid; ties go to the smaller
    /// acceleration.
    pub fn plan(&self, s: f64, v: f64, risk: &RiskDistribution) -> Result<Plan, PlanError> {
        let p = &self.params;
        let route = self.index.spline();
        let ego = EgoPrediction { route, s, v };
        let (lo, hi) = feasible_interval(v, p)?;
        let grid = acceleration_grid(lo, hi, p.grid_step);
        let (xs, ys): (Vec<f64>, Vec<f64>) = grid
            .iter()
            .map(|&a| {
                let q = route.eval_clamped(predicted_s(&ego, a, p.forecast_horizon));
                (q.x, q.y)
            })
            .unzip();
        let (mut min, mut max) = (
            Point::new(f64::INFINITY, f64::INFINITY),
            Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for (&x, &y) in xs.iter().zip(&ys) {
            min = Point::new(min.x.min(x), min.y.min(y));
            max = Point::new(max.x.max(x), max.y.max(y));
        }

        let reach = p.discard_radius;
        let reach2 = reach * reach;
        let mut j1 = vec![0.0; grid.len()];
        let mut n_relevant = 0;
        for pt in &risk.points {
            let pos = pt.position;
            if pos.x < min.x - reach || pos.x > max.x + reach || pos.y < min.y - reach || pos.y > max.y + reach {
                continue;
            }
            let near = xs
                .iter()
                .zip(&ys)
                .any(|(&x, &y)| (x - pos.x) * (x - pos.x) + (y - pos.y) * (y - pos.y) < reach2);
            if !near {
                continue;
            }
            match self.index.distance_within(pos, p.max_offset) {
                Some(d) if d <= p.max_offset => {}
                _ => continue,
            }
            n_relevant += 1;
            for (k, acc) in j1.iter_mut().enumerate() {
                let q = Point::new(xs[k], ys[k]);
                *acc += potential(q.distance_squared(pos), p);
            }
        }

        let mut best = (f64::INFINITY, 0.0);
        for (k, &a) in grid.iter().enumerate() {
            let cost = j1[k] + p.lambda * speed_cost(a, v, p);
            if cost < best.0 {
                best = (cost, a);
            }
        }
        Ok(Plan {
            accel: best.1,
            cost: best.0,
            n_relevant,
        })
    }
}

/// One-shot planning; see [`Planner::plan`].
pub fn plan(ego: &EgoPrediction<'_>, risk: &RiskDistribution, params: &PlannerParams) -> Result<f64, PlanError> {
    Ok(Planner::new(ego.route, *params)?.plan(ego.s, ego.v, risk)?.accel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight() -> LaneSpline {
        LaneSpline::from_waypoints(&[Point::new(0.0, 0.0), Point::new(100.0, 0.0)]).unwrap()
    }

    #[test]
    fn speed_cost_arithmetic() {
        let p = PlannerParams::default();
        assert_eq!(speed_cost(0.0, 10.0, &p), 0.0);
        assert_eq!(speed_cost(-2.0, 10.0, &p), 3.0);
        assert_eq!(speed_cost(2.5, 4.0, &p), 2.25);
    }

    #[test]
    fn safety_cost_single_particles() {
        let p = PlannerParams::default();
        let route = straight();
        let ego = EgoPrediction {
            route: &route,
            s: 0.0,
            v: 0.0,
        };
        // the forecast position at a = 0 is the origin
        let at = |x: f64| RiskDistribution::from_positions([Point::new(x, 0.0)], 1.5);
        assert_eq!(safety_cost(0.0, &ego, &RiskDistribution::empty(1.5), &p), 0.0);
        assert!((safety_cost(0.0, &ego, &at(0.0), &p) - 1.0).abs() < 1e-12);
        assert!((safety_cost(0.0, &ego, &at(p.sigma), &p) - (-1.0f64).exp()).abs() < 1e-12);
        assert_eq!(safety_cost(0.0, &ego, &at(2.0 * p.sigma), &p), 0.0);
        // off the route by more than b̄
        let off = RiskDistribution::from_positions([Point::new(0.5, 1.5)], 1.5);
        assert_eq!(safety_cost(0.0, &ego, &off, &p), 0.0);
    }

    #[test]
    fn route_distance_examples() {
        let route = straight();
        assert!((min_distance_to_route(&route, Point::new(50.0, 2.0)) - 2.0).abs() < 1e-9);
        assert!((min_distance_to_route(&route, Point::new(-5.0, 0.0)) - 5.0).abs() < 1e-9);
    }

    #[test]
    fn empty_risk_plans() {
        let p = PlannerParams::default();
        let route = straight();
        let empty = RiskDistribution::empty(1.5);
        let cruise = EgoPrediction {
            route: &route,
            s: 0.0,
            v: 10.0,
        };
        assert_eq!(plan(&cruise, &empty, &p).unwrap(), 0.0);
        let slow = EgoPrediction { v: 4.0, ..cruise };
        assert_eq!(plan(&slow, &empty, &p).unwrap(), 2.5);
    }

    #[test]
    fn dense_cluster_forces_hardest_braking() {
        let p = PlannerParams::default();
        let route = straight();
        // at 10 m/s the speed floor binds before a_min: v + a T >= 0
        let ego = EgoPrediction {
            route: &route,
            s: 0.0,
            v: 10.0,
        };
        // cluster from just past the hardest-braking forecast (s = 7.5) to
        // beyond the undecelerated one (s = 15)
        let risk = RiskDistribution::from_positions((0..1200).map(|i| Point::new(8.0 + 0.01 * i as f64, 0.0)), 1.5);
        assert_eq!(plan(&ego, &risk, &p).unwrap(), -10.0 / 1.5);
        // at 12 m/s the full a_min is available
        let fast = EgoPrediction { v: 12.0, ..ego };
        let risk = RiskDistribution::from_positions((0..1500).map(|i| Point::new(10.0 + 0.01 * i as f64, 0.0)), 1.5);
        assert_eq!(plan(&fast, &risk, &p).unwrap(), p.a_min);
    }

    #[test]
    fn feasibility_edges() {
        let p = PlannerParams::default();
        assert_eq!(feasible_interval(12.0, &p).unwrap(), (-8.0, 0.0));
        assert_eq!(feasible_interval(0.0, &p).unwrap(), (0.0, 2.5));
        assert_eq!(feasible_interval(12.0 + 1e-12, &p).unwrap(), (-8.0, 0.0));
        let broken = PlannerParams {
            v_min: 5.0,
            v_max: 4.0,
            ..p
        };
        assert!(matches!(
            feasible_interval(4.5, &broken),
            Err(PlanError::Infeasible { .. })
        ));
    }

    #[test]
    fn grid_endpoints() {
        let g = acceleration_grid(-8.0, 2.5, 0.005);
        assert_eq!(g.len(), 2101);
        assert_eq!(g[0], -8.0);
        assert_eq!(g[2100], 2.5);
        assert!(g.contains(&0.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        let g = acceleration_grid(-20.0 / 3.0, 4.0 / 3.0, 0.005);
        assert!(g.contains(&0.0));
        assert_eq!(g[1], -6.665);
        assert_eq!(acceleration_grid(0.0, 0.0, 0.005), vec![0.0]);
    }
}
