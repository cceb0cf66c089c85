use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{OrientedBox, VEHICLE_LENGTH};

use super::map::IntersectionMap;
use super::ScenarioError;

/// Kinematic state of a vehicle on a route.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VehicleState {
    pub route: usize,
    pub s: f64,
    pub v: f64,
    pub bbox: OrientedBox,
}

impl VehicleState {
    /// Places a vehicle-sized box on `route` at `s`; `None` once the vehicle
    /// has left the route (or before it enters).
    pub fn on_route(map: &IntersectionMap, route: usize, s: f64, v: f64) -> Option<Self> {
        let spline = &map.routes[route].spline;
        if s < 0.0 || s > spline.length() {
            return None;
        }
        let (center, tangent) = spline.pose_clamped(s);
        Some(Self {
            route,
            s,
            v,
            bbox: OrientedBox::vehicle(center, tangent.angle()),
        })
    }
}

/// A non-reactive vehicle at constant speed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OtherVehicle {
    pub route: usize,
    pub speed: f64,
    pub s0: f64,
}

impl OtherVehicle {
    pub fn s_at(&self, t: f64) -> f64 {
        self.s0 + self.speed * t
    }

    pub fn state_at(&self, map: &IntersectionMap, t: f64) -> Option<VehicleState> {
        VehicleState::on_route(map, self.route, self.s_at(t), self.speed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EgoStart {
    pub route: usize,
    pub s0: f64,
    pub v0: f64,
    pub goal_s: f64,
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub map: Arc<IntersectionMap>,
    pub ego: EgoStart,
    pub others: Vec<OtherVehicle>,
    pub seed: u64,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.map, &other.map) || self.map == other.map)
            && self.ego == other.ego
            && self.others == other.others
            && self.seed == other.seed
    }
}

/// Knobs of the scenario generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScenarioParams {
    pub speed_min: f64,
    pub speed_max: f64,
    /// Ego starts this far before the stop line.
    pub ego_lead: f64,
    pub ego_speed: f64,
    /// Window over which other vehicles must stay collision-free.
    pub horizon: f64,
    pub rollout_step: f64,
    pub max_rejections: usize,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        Self {
            speed_min: 4.0,
            speed_max: 12.0,
            ego_lead: 15.0,
            ego_speed: 10.0,
            horizon: 30.0,
            rollout_step: 0.1,
            max_rejections: 10_000,
        }
    }
}

/// Ego start state for `route`: `ego_lead` before the stop line.
pub fn ego_start(map: &IntersectionMap, route: usize, params: &ScenarioParams) -> Result<EgoStart, ScenarioError> {
    let r = map
        .routes
        .get(route)
        .ok_or(ScenarioError::UnknownRoute(route.to_string()))?;
    let stop = r.stopline_s.ok_or_else(|| ScenarioError::NoStopline(r.id.clone()))?;
    let s0 = stop - params.ego_lead;
    if s0 < 0.0 {
        return Err(ScenarioError::NoStopline(r.id.clone()));
    }
    Ok(EgoStart {
        route,
        s0,
        v0: params.ego_speed,
        goal_s: map.goal_s(route),
    })
}

/// Draws `n_others` vehicles on uniformly random routes with uniform speed
/// and start offset, redrawing any vehicle that overlaps the ego at `t = 0`
/// or any already accepted vehicle during the constant-speed rollout.
pub fn generate_scenario(
    map: &Arc<IntersectionMap>,
    n_others: usize,
    ego_route: usize,
    seed: u64,
    params: &ScenarioParams,
) -> Result<Scenario, ScenarioError> {
    let ego = ego_start(map, ego_route, params)?;
    let ego_box = VehicleState::on_route(map, ego.route, ego.s0, ego.v0)
        .expect("ego start lies on its route")
        .bbox;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_steps = (params.horizon / params.rollout_step).round() as usize;
    let times: Vec<f64> = (0..=n_steps).map(|k| k as f64 * params.rollout_step).collect();

    let mut others = Vec::with_capacity(n_others);
    // accepted vehicles' boxes at each rollout time
    let mut accepted: Vec<Vec<Option<OrientedBox>>> = Vec::with_capacity(n_others);

    for _ in 0..n_others {
        let mut rejections = 0;
        loop {
            let route = rng.gen_range(0..map.routes.len());
            let speed = rng.gen_range(params.speed_min..=params.speed_max);
            let max_s0 = (map.routes[route].length() - VEHICLE_LENGTH).max(0.0);
            let s0 = rng.gen_range(0.0..=max_s0);
            let cand = OtherVehicle { route, speed, s0 };

            let boxes: Vec<Option<OrientedBox>> =
                times.iter().map(|&t| cand.state_at(map, t).map(|st| st.bbox)).collect();
            let start_clear = boxes[0].is_none_or(|b| !b.overlaps(&ego_box));
            let clear = start_clear
                && accepted.iter().all(|other| {
                    boxes
                        .iter()
                        .zip(other)
                        .all(|(a, b)| !matches!((a, b), (Some(a), Some(b)) if a.overlaps(b)))
                });
            if clear {
                others.push(cand);
                accepted.push(boxes);
                break;
            }
            rejections += 1;
            if rejections >= params.max_rejections {
                return Err(ScenarioError::Saturated { rejections });
            }
        }
    }

    Ok(Scenario {
        map: Arc::clone(map),
        ego,
        others,
        seed,
    })
}
