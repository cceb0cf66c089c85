//! Particle-based risk over hidden and observed road regions.
//!
//! Each lane's centerline is split into unobserved intervals (outside the
//! ego's observable polygon) and the footprints of observed vehicles. Both
//! are filled with hypothetical vehicles at uniform position, speed and
//! lateral offset, forecast at constant speed over `T_f` and mapped back to
//! the plane.

mod engine;
mod particles;

pub use engine::{assess, observed_vehicle_intervals, EgoView, LaneIntervals, RiskDistribution, RiskEngine, RiskPoint};
pub use particles::{particle_count, propagate, sample_particles, to_cartesian, Particle, Propagated};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, VEHICLE_WIDTH};

pub const FORECAST_HORIZON: f64 = 1.5;
/// Particles per 100 m of interval.
pub const PARTICLE_DENSITY: f64 = 32768.0;
pub const MAX_PARTICLES_PER_LANE: usize = 32768;
pub const MAX_OFFSET: f64 = 0.75 * VEHICLE_WIDTH;
/// Centerline sampling step for interval extraction.
pub const SAMPLE_STEP: f64 = 0.25;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RiskMode {
    /// Occluded and out-of-range regions plus observed vehicles.
    OcclusionAware,
    /// Observed vehicles only.
    ObservedOnly,
}

impl RiskMode {
    pub const ALL: [RiskMode; 2] = [RiskMode::OcclusionAware, RiskMode::ObservedOnly];

    pub fn name(self) -> &'static str {
        match self {
            RiskMode::OcclusionAware => "occlusion_aware",
            RiskMode::ObservedOnly => "observed_only",
        }
    }
}

impl fmt::Display for RiskMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RiskMode {
    type Err = RiskError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "occlusion_aware" => Ok(RiskMode::OcclusionAware),
            "observed_only" => Ok(RiskMode::ObservedOnly),
            other => Err(RiskError::InvalidConfig(format!(
                "unknown risk mode {other:?} (expected occlusion_aware or observed_only)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RiskConfig {
    /// `T_f`, seconds.
    pub forecast_horizon: f64,
    pub particle_density: f64,
    pub max_particles_per_lane: usize,
    /// `b̄`, meters.
    pub max_offset: f64,
    pub mode: RiskMode,
    pub sample_step: f64,
}

impl Default for RiskConfig {
    fn default() -> Self {
        Self {
            forecast_horizon: FORECAST_HORIZON,
            particle_density: PARTICLE_DENSITY,
            max_particles_per_lane: MAX_PARTICLES_PER_LANE,
            max_offset: MAX_OFFSET,
            mode: RiskMode::OcclusionAware,
            sample_step: SAMPLE_STEP,
        }
    }
}

impl RiskConfig {
    pub fn validate(&self) -> Result<(), RiskError> {
        let positive = [
            ("forecast_horizon", self.forecast_horizon),
            ("particle_density", self.particle_density),
            ("max_offset", self.max_offset),
            ("sample_step", self.sample_step),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(RiskError::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_particles_per_lane < 1 {
            return Err(RiskError::InvalidConfig(
                "max_particles_per_lane must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RiskError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("invalid risk configuration: {0}")]
    InvalidConfig(String),
}
