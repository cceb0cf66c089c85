//! Collision rates, discomfort scores, profile bands and CDF tables.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::risk::RiskMode;
use crate::simulator::{BatchRecord, EpisodeResult, Outcome};

/// Half the maximum deceleration.
pub const A_THRESH: f64 = 4.0;
/// Percentiles reported per profile bin: the median and bands of ±15, ±30
/// and ±45 points around it.
pub const BAND_PERCENTILES: [f64; 7] = [5.0, 20.0, 35.0, 50.0, 65.0, 80.0, 95.0];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("{0} needs at least one value")]
    Empty(&'static str),
    #[error("{0}")]
    Domain(String),
}

/// Percentage of episodes ending in a collision; timeouts count toward the
/// total only.
pub fn collision_rate<'a>(results: impl IntoIterator<Item = &'a EpisodeResult>) -> Result<f64, MetricsError> {
    let outcomes: Vec<Outcome> = results.into_iter().map(|r| r.outcome).collect();
    collision_rate_of(&outcomes)
}

pub fn collision_rate_of(outcomes: &[Outcome]) -> Result<f64, MetricsError> {
    if outcomes.is_empty() {
        return Err(MetricsError::Empty("collision_rate"));
    }
    let hits = outcomes.iter().filter(|&&o| o == Outcome::Collision).count();
    Ok(100.0 * hits as f64 / outcomes.len() as f64)
}

/// `1/T ∫ max(0, |a| - a_thresh) dt` by the trapezoidal rule over the
/// samples `(t_i, a_i)`.
pub fn discomfort(times: &[f64], accels: &[f64], a_thresh: f64, duration: f64) -> Result<f64, MetricsError> {
    if !(duration > 0.0) {
        return Err(MetricsError::Domain(format!(
            "duration must be positive, got {duration}"
        )));
    }
    if times.len() != accels.len() {
        return Err(MetricsError::Domain(format!(
            "{} times but {} accelerations",
            times.len(),
            accels.len()
        )));
    }
    let excess = |a: f64| (a.abs() - a_thresh).max(0.0);
    let integral: f64 = times
        .windows(2)
        .zip(accels.windows(2))
        .map(|(t, a)| 0.5 * (excess(a[0]) + excess(a[1])) * (t[1] - t[0]))
        .sum();
    Ok(integral / duration)
}

/// Discomfort of one episode over its whole trace, which stops at the
/// collision for collision episodes; `None` for timeouts.
pub fn episode_discomfort(result: &EpisodeResult, a_thresh: f64) -> Option<f64> {
    if result.outcome == Outcome::Timeout || result.trace.len() < 2 {
        return None;
    }
    let t: Vec<f64> = result.trace.iter().map(|r| r.t).collect();
    let a: Vec<f64> = result.trace.iter().map(|r| r.a).collect();
    discomfort(&t, &a, a_thresh, result.duration()).ok()
}

/// Percentile `q` in `[0, 100]` of sorted `values`, interpolating linearly
/// between closest ranks.
pub fn percentile_sorted(sorted: &[f64], q: f64) -> Result<f64, MetricsError> {
    if sorted.is_empty() {
        return Err(MetricsError::Empty("percentile"));
    }
    if !(0.0..=100.0).contains(&q) {
        return Err(MetricsError::Domain(format!("percentile {q} outside [0, 100]")));
    }
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    Ok(sorted[lo] + (sorted[hi] - sorted[lo]) * (rank - lo as f64))
}

pub fn percentile(values: &[f64], q: f64) -> Result<f64, MetricsError> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    percentile_sorted(&sorted, q)
}

/// Empirical CDF: sorted values with cumulative fractions `(i + 1) / n`.
pub fn cdf(values: &[f64]) -> Result<Vec<(f64, f64)>, MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty("cdf"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect())
}

/// Percentile bands of speed and acceleration per time bin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileBands {
    pub bin: f64,
    pub rows: Vec<BandRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandRow {
    pub t: f64,
    /// Episodes still running at `t`.
    pub active: usize,
    /// Values at [`BAND_PERCENTILES`].
    pub v: [f64; 7],
    pub a: [f64; 7],
}

/// Value of each active episode at the start of each bin (the latest record
/// at or before it), summarized by [`BAND_PERCENTILES`]. An episode is active
/// in a bin if its trace runs past the bin start.
pub fn profile_bands<'a>(
    results: impl IntoIterator<Item = &'a EpisodeResult>,
    bin: f64,
) -> Result<ProfileBands, MetricsError> {
    if !(bin > 0.0 && bin.is_finite()) {
        return Err(MetricsError::Domain(format!("bin width must be positive, got {bin}")));
    }
    let results: Vec<&EpisodeResult> = results.into_iter().filter(|r| !r.trace.is_empty()).collect();
    let horizon = results.iter().map(|r| r.duration()).fold(0.0, f64::max);
    let mut rows = Vec::new();
    let mut j = 0usize;
    loop {
        let t = j as f64 * bin;
        if t >= horizon {
            break;
        }
        let mut vs = Vec::new();
        let mut accs = Vec::new();
        for r in &results {
            if r.duration() <= t {
                continue;
            }
            let k = r.trace.partition_point(|rec| rec.t <= t + 1e-9).max(1) - 1;
            vs.push(r.trace[k].v);
            accs.push(r.trace[k].a);
        }
        vs.sort_by(f64::total_cmp);
        accs.sort_by(f64::total_cmp);
        let mut v = [0.0; 7];
        let mut a = [0.0; 7];
        for (i, &q) in BAND_PERCENTILES.iter().enumerate() {
            v[i] = percentile_sorted(&vs, q)?;
            a[i] = percentile_sorted(&accs, q)?;
        }
        rows.push(BandRow {
            t,
            active: vs.len(),
            v,
            a,
        });
        j += 1;
    }
    Ok(ProfileBands { bin, rows })
}

/// Aggregates of one mode at one intersection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeSummary {
    pub name: String,
    pub mode: RiskMode,
    /// Completed episodes (scenarios that failed to generate excluded).
    pub n: usize,
    pub collisions: usize,
    pub timeouts: usize,
    pub generation_failures: usize,
    pub collision_rate: f64,
    /// Per-episode scores, goal and collision episodes only, in scenario order.
    pub discomfort: Vec<f64>,
    pub discomfort_median: Option<f64>,
    pub discomfort_p95: Option<f64>,
    pub lat: Option<f64>,
    pub lon: Option<f64>,
}

/// Per-mode summaries of a batch, in order of first appearance.
pub fn summarize(
    name: &str,
    origin: Option<(f64, f64)>,
    records: &[BatchRecord],
    a_thresh: f64,
) -> Result<Vec<ModeSummary>, MetricsError> {
    let mut modes: Vec<RiskMode> = Vec::new();
    for r in records {
        if !modes.contains(&r.mode) {
            modes.push(r.mode);
        }
    }
    modes
        .into_iter()
        .map(|mode| {
            let of_mode: Vec<&BatchRecord> = records.iter().filter(|r| r.mode == mode).collect();
            let done: Vec<&EpisodeResult> = of_mode.iter().filter_map(|r| r.result.as_ref().ok()).collect();
            let outcomes: Vec<Outcome> = done.iter().map(|r| r.outcome).collect();
            let scores: Vec<f64> = done.iter().filter_map(|r| episode_discomfort(r, a_thresh)).collect();
            let stat = |q: f64| percentile(&scores, q).ok();
            Ok(ModeSummary {
                name: name.to_string(),
                mode,
                n: done.len(),
                collisions: outcomes.iter().filter(|&&o| o == Outcome::Collision).count(),
                timeouts: outcomes.iter().filter(|&&o| o == Outcome::Timeout).count(),
                generation_failures: of_mode.len() - done.len(),
                collision_rate: collision_rate_of(&outcomes)?,
                discomfort_median: stat(50.0),
                discomfort_p95: stat(95.0),
                discomfort: scores,
                lat: origin.map(|o| o.0),
                lon: origin.map(|o| o.1),
            })
        })
        .collect()
}
