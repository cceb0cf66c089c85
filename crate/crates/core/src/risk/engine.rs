use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::{
    union, visibility_polygon, Interval, LaneSpline, OrientedBox, Point, Polygon, SampledCurve, SensorModel,
    VisibilityPolygon,
};
use crate::rng::StreamKey;
use crate::scene::{IntersectionMap, VehicleState};

use super::particles::{propagate, sample_particles, to_cartesian};
use super::{RiskConfig, RiskError, RiskMode};

/// Where the ego looks from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EgoView {
    pub position: Point,
    pub heading: f64,
    pub sensor: SensorModel,
}

/// One forecast particle in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RiskPoint {
    pub position: Point,
    /// Lane the particle was sampled on.
    pub source_lane: usize,
    /// Lane and arc length after the forecast, past any lane hand-off.
    pub lane: usize,
    pub s: f64,
    pub b: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RiskDistribution {
    pub points: Vec<RiskPoint>,
    pub horizon: f64,
}

impl RiskDistribution {
    pub fn empty(horizon: f64) -> Self {
        Self {
            points: Vec::new(),
            horizon,
        }
    }

    pub fn from_positions(positions: impl IntoIterator<Item = Point>, horizon: f64) -> Self {
        let points = positions
            .into_iter()
            .map(|position| RiskPoint {
                position,
                source_lane: 0,
                lane: 0,
                s: 0.0,
                b: 0.0,
            })
            .collect();
        Self { points, horizon }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Per-lane sampling support for one step.
#[derive(Clone, Debug, PartialEq)]
pub struct LaneIntervals {
    pub unobserved: Vec<Vec<Interval>>,
    pub observed: Vec<Vec<Interval>>,
    /// Indices into `others` of the vehicles some sensor ray landed on.
    pub observed_vehicles: Vec<usize>,
}

impl LaneIntervals {
    /// Sampling support for `mode`.
    pub fn support(&self, mode: RiskMode) -> Vec<Vec<Interval>> {
        match mode {
            RiskMode::OcclusionAware => self
                .unobserved
                .iter()
                .zip(&self.observed)
                .map(|(u, o)| union(u, o))
                .collect(),
            RiskMode::ObservedOnly => self.observed.clone(),
        }
    }
}

fn footprint_intervals(vehicle: &OrientedBox, curves: &[SampledCurve]) -> Vec<Vec<Interval>> {
    curves
        .iter()
        .map(|c| {
            if c.near_disc(vehicle.center, vehicle.radius()) {
                c.inside(vehicle)
            } else {
                Vec::new()
            }
        })
        .collect()
}

/// Per-lane arc-length intervals whose centerline samples (every `step`)
/// fall inside `vehicle`.
pub fn observed_vehicle_intervals(vehicle: &OrientedBox, lanes: &[LaneSpline], step: f64) -> Vec<Vec<Interval>> {
    let curves: Vec<SampledCurve> = lanes.iter().map(|l| SampledCurve::new(l, step)).collect();
    footprint_intervals(vehicle, &curves)
}

/// Risk assessment against one map, with centerline samples cached.
#[derive(Clone, Debug)]
pub struct RiskEngine {
    config: RiskConfig,
    curves: Vec<SampledCurve>,
    buildings: Vec<Polygon>,
}

impl RiskEngine {
    pub fn new(map: &IntersectionMap, config: RiskConfig) -> Result<Self, RiskError> {
        config.validate()?;
        Ok(Self {
            config,
            curves: map
                .lanes
                .iter()
                .map(|l| SampledCurve::new(&l.spline, config.sample_step))
                .collect(),
            buildings: map.building_polygons(),
        })
    }

    pub fn config(&self) -> &RiskConfig {
        &self.config
    }

    /// Observable polygon with buildings and vehicle boxes as occluders.
    pub fn visibility(&self, ego: &EgoView, others: &[VehicleState]) -> Result<VisibilityPolygon, RiskError> {
        let mut occluders = self.buildings.clone();
        occluders.extend(others.iter().map(|o| o.bbox.to_polygon()));
        Ok(visibility_polygon(ego.position, ego.heading, &occluders, &ego.sensor)?)
    }

    pub fn lane_intervals(&self, ego: &EgoView, others: &[VehicleState]) -> Result<LaneIntervals, RiskError> {
        let visible = self.visibility(ego, others)?;
        let n_buildings = self.buildings.len();
        let observed_vehicles: Vec<usize> = visible
            .seen_occluders()
            .into_iter()
            .filter(|&i| i >= n_buildings)
            .map(|i| i - n_buildings)
            .collect();

        let mut observed = vec![Vec::new(); self.curves.len()];
        for &i in &observed_vehicles {
            for (acc, ivs) in observed
                .iter_mut()
                .zip(footprint_intervals(&others[i].bbox, &self.curves))
            {
                if !ivs.is_empty() {
                    *acc = union(acc, &ivs);
                }
            }
        }
        let unobserved = match self.config.mode {
            RiskMode::OcclusionAware => self.curves.iter().map(|c| c.outside(&visible)).collect(),
            RiskMode::ObservedOnly => vec![Vec::new(); self.curves.len()],
        };
        Ok(LaneIntervals {
            unobserved,
            observed,
            observed_vehicles,
        })
    }

    /// Forecast risk distribution for one planning step.
    pub fn assess(
        &self,
        map: &IntersectionMap,
        ego: &EgoView,
        others: &[VehicleState],
        key: StreamKey,
    ) -> Result<RiskDistribution, RiskError> {
        let support = self.lane_intervals(ego, others)?.support(self.config.mode);
        Ok(self.sample(map, &support, key))
    }

    /// Samples, forecasts and places particles over per-lane `support`.
    pub fn sample(&self, map: &IntersectionMap, support: &[Vec<Interval>], key: StreamKey) -> RiskDistribution {
        let horizon = self.config.forecast_horizon;
        let mut points = Vec::new();
        for (k, ivs) in support.iter().enumerate() {
            if ivs.is_empty() {
                continue;
            }
            let lane = &map.lanes[k];
            let mut rng = key.lane_rng(k);
            let particles = sample_particles(k, (lane.v_min, lane.v_max), ivs, &self.config, &mut rng);
            points.reserve(particles.len());
            for p in propagate(&particles, horizon) {
                let (lane_idx, s) = hand_off(map, p.lane, p.s_hat, &mut rng);
                points.push(RiskPoint {
                    position: to_cartesian(&map.lanes[lane_idx].spline, s, p.b),
                    source_lane: k,
                    lane: lane_idx,
                    s,
                    b: p.b,
                });
            }
        }
        RiskDistribution { points, horizon }
    }
}

/// Moves a forecast past the end of its lane onto a successor chosen
/// uniformly at random, or clamps it to the lane end if there is none.
fn hand_off(map: &IntersectionMap, mut lane: usize, mut s: f64, rng: &mut ChaCha8Rng) -> (usize, f64) {
    loop {
        let len = map.lanes[lane].spline.length();
        if s <= len {
            return (lane, s);
        }
        let next = map.successors(lane);
        if next.is_empty() {
            return (lane, len);
        }
        s -= len;
        lane = next[rng.gen_range(0..next.len())];
    }
}

/// One-shot assessment; see [`RiskEngine::assess`].
pub fn assess(
    map: &IntersectionMap,
    ego: &EgoView,
    others: &[VehicleState],
    config: &RiskConfig,
    key: StreamKey,
) -> Result<RiskDistribution, RiskError> {
    RiskEngine::new(map, *config)?.assess(map, ego, others, key)
}
