//! Named simulation parameters settable with `--set KEY=VALUE`.

use occlusion_risk::geometry::{VEHICLE_LENGTH, VEHICLE_WIDTH};
use occlusion_risk::metrics::A_THRESH;
use occlusion_risk::simulator::EpisodeConfig;

/// Everything a run can tune numerically.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub episode: EpisodeConfig,
    pub a_thresh: f64,
}

impl Default for Params {
    fn default() -> Self {
        Self {
            episode: EpisodeConfig::default(),
            a_thresh: A_THRESH,
        }
    }
}

/// Key and meaning, in `--print-params` order.
pub const KEYS: &[(&str, &str)] = &[
    ("T_f", "forecast horizon, s"),
    ("T_p", "replanning period, s"),
    ("l_v", "vehicle length, m"),
    ("w_v", "vehicle width, m"),
    ("sigma", "risk kernel width, m"),
    ("b_bar", "maximum lateral offset, m"),
    ("lambda", "speed tracking weight"),
    ("v_des", "desired speed, m/s"),
    ("v_min", "minimum ego speed, m/s"),
    ("v_max", "maximum ego speed, m/s"),
    ("a_min", "minimum ego acceleration, m/s^2"),
    ("a_max", "maximum ego acceleration, m/s^2"),
    ("a_thresh", "discomfort threshold, m/s^2"),
    ("density", "particles per 100 m of unobserved lane"),
    ("max_particles", "particle cap per lane"),
    (
        "discard_radius",
        "particles farther than this from the ego forecast are ignored, m",
    ),
    ("grid_step", "planner acceleration grid spacing, m/s^2"),
    ("sample_step", "centerline sampling step for unobserved intervals, m"),
    ("sensor_range", "sensor range, m"),
    ("dt", "integration substep, s"),
    ("time_limit", "episode timeout, s"),
];

impl Params {
    pub fn get(&self, key: &str) -> Option<f64> {
        let e = &self.episode;
        Some(match key {
            "T_f" => e.planner.forecast_horizon,
            "T_p" => e.replan_period,
            "l_v" => VEHICLE_LENGTH,
            "w_v" => VEHICLE_WIDTH,
            "sigma" => e.planner.sigma,
            "b_bar" => e.planner.max_offset,
            "lambda" => e.planner.lambda,
            "v_des" => e.planner.v_des,
            "v_min" => e.planner.v_min,
            "v_max" => e.planner.v_max,
            "a_min" => e.planner.a_min,
            "a_max" => e.planner.a_max,
            "a_thresh" => self.a_thresh,
            "density" => e.risk.particle_density,
            "max_particles" => e.risk.max_particles_per_lane as f64,
            "discard_radius" => e.planner.discard_radius,
            "grid_step" => e.planner.grid_step,
            "sample_step" => e.risk.sample_step,
            "sensor_range" => e.sensor.max_range,
            "dt" => e.dt,
            "time_limit" => e.time_limit,
            _ => return None,
        })
    }

    pub fn set(&mut self, key: &str, value: f64) -> Result<(), String> {
        if !value.is_finite() {
            return Err(format!("{key} must be finite, got {value}"));
        }
        let e = &mut self.episode;
        match key {
            "T_f" => {
                e.planner.forecast_horizon = value;
                e.risk.forecast_horizon = value;
            }
            "T_p" => e.replan_period = value,
            "l_v" | "w_v" => {
                let fixed = self.get(key).unwrap();
                if value != fixed {
                    return Err(format!("{key} is fixed at {fixed} m"));
                }
            }
            "sigma" => e.planner.sigma = value,
            "b_bar" => {
                e.planner.max_offset = value;
                e.risk.max_offset = value;
            }
            "lambda" => e.planner.lambda = value,
            "v_des" => e.planner.v_des = value,
            "v_min" => e.planner.v_min = value,
            "v_max" => e.planner.v_max = value,
            "a_min" => e.planner.a_min = value,
            "a_max" => e.planner.a_max = value,
            "a_thresh" => {
                if value <= 0.0 {
                    return Err(format!("a_thresh must be positive, got {value}"));
                }
                self.a_thresh = value;
            }
            "density" => e.risk.particle_density = value,
            "max_particles" => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(format!("max_particles must be a positive integer, got {value}"));
                }
                e.risk.max_particles_per_lane = value as usize;
            }
            "discard_radius" => e.planner.discard_radius = value,
            "grid_step" => e.planner.grid_step = value,
            "sample_step" => e.risk.sample_step = value,
            "sensor_range" => e.sensor.max_range = value,
            "dt" => e.dt = value,
            "time_limit" => e.time_limit = value,
            _ => {
                let known: Vec<&str> = KEYS.iter().map(|k| k.0).collect();
                return Err(format!("unknown parameter {key:?}; known: {}", known.join(", ")));
            }
        }
        Ok(())
    }

    /// Applies a `KEY=VALUE` assignment.
    pub fn assign(&mut self, text: &str) -> Result<(), String> {
        let (key, value) = text
            .split_once('=')
            .ok_or_else(|| format!("expected KEY=VALUE, got {text:?}"))?;
        let key = key.trim();
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| format!("{key}: {:?} is not a number", value.trim()))?;
        self.set(key, value)
    }

    pub fn validate(&self) -> Result<(), String> {
        self.episode.validate().map_err(|e| e.to_string())
    }

    /// One `KEY=VALUE` line per parameter.
    pub fn listing(&self) -> String {
        KEYS.iter()
            .map(|&(k, _)| format!("{k}={}\n", self.get(k).unwrap()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_key_round_trips() {
        for &(k, _) in KEYS {
            let mut p = Params::default();
            let v = p.get(k).unwrap();
            p.set(k, v).unwrap();
            assert_eq!(p, Params::default(), "{k}");
        }
    }

    #[test]
    fn table_values() {
        let p = Params::default();
        let expect = [
            ("T_f", 1.5),
            ("T_p", 0.1),
            ("l_v", 4.88),
            ("w_v", 1.86),
            ("sigma", 2.44),
            ("lambda", 0.016384),
            ("v_des", 10.0),
            ("v_min", 0.0),
            ("v_max", 12.0),
            ("a_min", -8.0),
            ("a_max", 2.5),
            ("a_thresh", 4.0),
            ("density", 32768.0),
        ];
        for (k, v) in expect {
            assert_eq!(p.get(k), Some(v), "{k}");
        }
        assert!((p.get("b_bar").unwrap() - 1.395).abs() < 1e-12);
    }

    #[test]
    fn assignments() {
        let mut p = Params::default();
        p.assign("T_f = 2").unwrap();
        assert_eq!(p.episode.risk.forecast_horizon, 2.0);
        assert_eq!(p.episode.planner.forecast_horizon, 2.0);
        assert!(p.assign("T_f").is_err());
        assert!(p.assign("nope=1").is_err());
        assert!(p.assign("lambda=abc").is_err());
        assert!(p.assign("l_v=5").is_err());
        assert!(p.assign("max_particles=2.5").is_err());
    }
}
