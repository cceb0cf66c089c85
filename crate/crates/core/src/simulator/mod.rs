//! Closed-loop episodes and Monte Carlo batches.
//!
//! Every replan period the ego senses, assesses risk and plans an
//! acceleration, which is held over the integration substeps until the next
//! replan. Other vehicles follow their routes at constant speed.

use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{OrientedBox, Point, SensorModel};
use crate::planner::{PlanError, Planner, PlannerParams};
use crate::risk::{EgoView, RiskConfig, RiskEngine, RiskError, RiskMode};
use crate::rng::{derive_seed, StreamKey};
use crate::scene::{generate_scenario, IntersectionMap, Scenario, ScenarioError, ScenarioParams, VehicleState};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeConfig {
    /// `T_p`, seconds.
    pub replan_period: f64,
    pub dt: f64,
    pub time_limit: f64,
    pub risk: RiskConfig,
    pub planner: PlannerParams,
    pub sensor: SensorModel,
    /// Keep every step's particles in the result.
    pub capture_particles: bool,
    /// Measure planning wall time; off by default so results stay bit-stable.
    pub record_timing: bool,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            replan_period: 0.1,
            dt: 0.02,
            time_limit: 30.0,
            risk: RiskConfig::default(),
            planner: PlannerParams::default(),
            sensor: SensorModel::default(),
            capture_particles: false,
            record_timing: false,
        }
    }
}

impl EpisodeConfig {
    pub fn with_mode(mut self, mode: RiskMode) -> Self {
        self.risk.mode = mode;
        self
    }

    /// Substeps per replan period.
    pub fn substeps(&self) -> usize {
        (self.replan_period / self.dt).round() as usize
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.dt <= self.replan_period) {
            return bad(format!(
                "need 0 < dt <= T_p, got dt = {}, T_p = {}",
                self.dt, self.replan_period
            ));
        }
        let ratio = self.replan_period / self.dt;
        if (ratio - ratio.round()).abs() * self.dt > 1e-9 {
            return bad(format!(
                "T_p = {} is not a multiple of dt = {}",
                self.replan_period, self.dt
            ));
        }
        if !(self.time_limit > 0.0 && self.time_limit.is_finite()) {
            return bad(format!("time_limit must be positive, got {}", self.time_limit));
        }
        self.risk.validate()?;
        self.planner.validate()?;
        self.sensor.validate().map_err(RiskError::from)?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    GoalReached,
    Collision,
    Timeout,
}

impl Outcome {
    pub fn name(self) -> &'static str {
        match self {
            Outcome::GoalReached => "goal_reached",
            Outcome::Collision => "collision",
            Outcome::Timeout => "timeout",
        }
    }
}

/// Ego state at the start of a substep, with the acceleration held over it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: f64,
    pub s: f64,
    pub v: f64,
    pub a: f64,
    pub x: f64,
    pub y: f64,
    /// Size of the latest risk distribution.
    pub n_particles: usize,
    /// Seconds spent assessing and planning at this substep (0 unless timed).
    pub plan_wall_time: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ParticleFrame {
    pub t: f64,
    /// `(lane, position)` per particle.
    pub points: Vec<(usize, Point)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult {
    pub outcome: Outcome,
    pub trace: Vec<TraceRecord>,
    pub collision_time: Option<f64>,
    pub particles: Vec<ParticleFrame>,
}

impl EpisodeResult {
    /// Time of the last record.
    pub fn duration(&self) -> f64 {
        self.trace.last().map_or(0.0, |r| r.t)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Risk(#[from] RiskError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("invalid episode configuration: {0}")]
    InvalidConfig(String),
}

fn ego_box(map: &IntersectionMap, route: usize, s: f64) -> (Point, f64, OrientedBox) {
    let (c, tangent) = map.routes[route].spline.pose_clamped(s);
    let heading = tangent.angle();
    (c, heading, OrientedBox::vehicle(c, heading))
}

pub fn run_episode(scenario: &Scenario, config: &EpisodeConfig) -> Result<EpisodeResult, SimError> {
    config.validate()?;
    let map = &*scenario.map;
    let ego = scenario.ego;
    let route = &map.routes[ego.route];
    let engine = RiskEngine::new(map, config.risk)?;
    let planner = Planner::new(&route.spline, config.planner)?;
    let pp = &config.planner;

    let substeps = config.substeps();
    let dt = config.dt;
    let n_max = (config.time_limit / dt).round() as usize;

    let (mut s, mut v, mut a) = (ego.s0, ego.v0, 0.0);
    let mut n_particles = 0;
    let mut trace = Vec::with_capacity(n_max + 1);
    let mut particles = Vec::new();
    let others_at =
        |t: f64| -> Vec<VehicleState> { scenario.others.iter().filter_map(|o| o.state_at(map, t)).collect() };

    for i in 0..n_max {
        let t = i as f64 * dt;
        let (pos, heading, _) = ego_box(map, ego.route, s);
        let mut wall = 0.0;
        if i % substeps == 0 {
            let started = config.record_timing.then(Instant::now);
            let view = EgoView {
                position: pos,
                heading,
                sensor: config.sensor,
            };
            let step = (i / substeps) as u64;
            let risk = engine.assess(map, &view, &others_at(t), StreamKey::new(scenario.seed, step))?;
            a = planner.plan(s, v, &risk)?.accel;
            n_particles = risk.len();
            if config.capture_particles {
                particles.push(ParticleFrame {
                    t,
                    points: risk.points.iter().map(|p| (p.source_lane, p.position)).collect(),
                });
            }
            if let Some(started) = started {
                wall = started.elapsed().as_secs_f64();
            }
        }
        trace.push(TraceRecord {
            t,
            s,
            v,
            a,
            x: pos.x,
            y: pos.y,
            n_particles,
            plan_wall_time: wall,
        });

        s += v * dt + 0.5 * a * dt * dt;
        v = (v + a * dt).clamp(pp.v_min, pp.v_max);
        let t_next = (i + 1) as f64 * dt;

        let (pos, _, bbox) = ego_box(map, ego.route, s);
        let collided = others_at(t_next).iter().any(|o| o.bbox.overlaps(&bbox));
        let outcome = if collided {
            Some(Outcome::Collision)
        } else if s >= ego.goal_s {
            Some(Outcome::GoalReached)
        } else if i + 1 == n_max {
            Some(Outcome::Timeout)
        } else {
            None
        };
        if let Some(outcome) = outcome {
            trace.push(TraceRecord {
                t: t_next,
                s,
                v,
                a,
                x: pos.x,
                y: pos.y,
                n_particles,
                plan_wall_time: 0.0,
            });
            return Ok(EpisodeResult {
                outcome,
                trace,
                collision_time: collided.then_some(t_next),
                particles,
            });
        }
    }
    unreachable!("the last substep always ends the episode")
}

/// What to run in a batch.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchSpec {
    pub n_scenarios: usize,
    pub n_others: usize,
    pub modes: Vec<RiskMode>,
    pub base_seed: u64,
    pub parallelism: usize,
    /// Ego route; the map's default when absent.
    pub ego_route: Option<usize>,
    pub scenario: ScenarioParams,
}

impl Default for BatchSpec {
    fn default() -> Self {
        Self {
            n_scenarios: 1,
            n_others: 5,
            modes: RiskMode::ALL.to_vec(),
            base_seed: 0,
            parallelism: 1,
            ego_route: None,
            scenario: ScenarioParams::default(),
        }
    }
}

/// One scenario under one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchRecord {
    pub scenario_id: usize,
    pub seed: u64,
    pub mode: RiskMode,
    pub result: Result<EpisodeResult, SimError>,
}

/// Scenario `i` of a batch under `base_seed`.
pub fn batch_scenario(
    map: &Arc<IntersectionMap>,
    spec: &BatchSpec,
    ego_route: usize,
    i: usize,
) -> Result<Scenario, ScenarioError> {
    let seed = derive_seed(spec.base_seed, i as u64);
    generate_scenario(map, spec.n_others, ego_route, seed, &spec.scenario)
}

/// Runs every scenario under every mode; results are ordered by scenario,
/// then by the order of `spec.modes`, independent of `spec.parallelism`.
pub fn run_batch(
    map: &Arc<IntersectionMap>,
    spec: &BatchSpec,
    config: &EpisodeConfig,
) -> Result<Vec<BatchRecord>, SimError> {
    if spec.n_scenarios < 1 {
        return Err(SimError::InvalidConfig("n_scenarios must be at least 1".into()));
    }
    if spec.parallelism < 1 {
        return Err(SimError::InvalidConfig("parallelism must be at least 1".into()));
    }
    config.validate()?;
    let ego_route = match spec.ego_route.or_else(|| map.default_ego_route()) {
        Some(r) if r < map.routes.len() => r,
        _ => return Err(ScenarioError::UnknownRoute("ego".into()).into()),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.parallelism)
        .build()
        .map_err(|e| SimError::InvalidConfig(format!("worker pool: {e}")))?;

    let per_scenario: Vec<Vec<BatchRecord>> = pool.install(|| {
        (0..spec.n_scenarios)
            .into_par_iter()
            .map(|i| {
                let seed = derive_seed(spec.base_seed, i as u64);
                let scenario = batch_scenario(map, spec, ego_route, i);
                spec.modes
                    .iter()
                    .map(|&mode| BatchRecord {
                        scenario_id: i,
                        seed,
                        mode,
                        result: match &scenario {
                            Ok(sc) => run_episode(sc, &config.with_mode(mode)),
                            Err(e) => Err(e.clone().into()),
                        },
                    })
                    .collect()
            })
            .collect()
    });
    Ok(per_scenario.into_iter().flatten().collect())
}
