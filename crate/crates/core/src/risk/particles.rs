use rand::Rng;

use crate::geometry::{total_length, Interval, LaneSpline, Point};

use super::RiskConfig;

/// A hypothesized hidden vehicle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Particle {
    pub lane: usize,
    pub s: f64,
    pub v: f64,
    pub b: f64,
}

/// A particle after the forecast horizon, still in lane coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Propagated {
    pub lane: usize,
    pub s_hat: f64,
    pub b: f64,
}

/// Particles allotted to `total` meters of intervals.
pub fn particle_count(total: f64, config: &RiskConfig) -> usize {
    if total <= 0.0 {
        return 0;
    }
    let n = (config.particle_density * total / 100.0).round();
    (n as usize).min(config.max_particles_per_lane)
}

/// Draws particles uniformly over the union of `intervals` with speeds
/// uniform in `[v_min, v_max]` and offsets uniform in `[-b̄, b̄]`.
pub fn sample_particles<R: Rng + ?Sized>(
    lane: usize,
    (v_min, v_max): (f64, f64),
    intervals: &[Interval],
    config: &RiskConfig,
    rng: &mut R,
) -> Vec<Particle> {
    let total = total_length(intervals);
    let n = particle_count(total, config);
    if n == 0 {
        return Vec::new();
    }
    let mut cumulative = Vec::with_capacity(intervals.len());
    let mut acc = 0.0;
    for iv in intervals {
        acc += iv.length();
        cumulative.push(acc);
    }
    let b_max = config.max_offset;
    (0..n)
        .map(|_| {
            let u = rng.gen::<f64>() * total;
            let k = cumulative.partition_point(|&c| c <= u).min(intervals.len() - 1);
            let before = if k == 0 { 0.0 } else { cumulative[k - 1] };
            let iv = intervals[k];
            let s = (iv.lo + (u - before)).clamp(iv.lo, iv.hi);
            let v = v_min + rng.gen::<f64>() * (v_max - v_min);
            let b = b_max * (2.0 * rng.gen::<f64>() - 1.0);
            Particle { lane, s, v, b }
        })
        .collect()
}

/// Constant-speed forecast `ŝ = s + v T_f`.
pub fn propagate(particles: &[Particle], horizon: f64) -> Vec<Propagated> {
    particles
        .iter()
        .map(|p| Propagated {
            lane: p.lane,
            s_hat: p.s + p.v * horizon,
            b: p.b,
        })
        .collect()
}

/// Point offset by `b` along the unit normal of `lane` at `s_hat`.
pub fn to_cartesian(lane: &LaneSpline, s_hat: f64, b: f64) -> Point {
    let (c, tangent) = lane.pose_clamped(s_hat);
    c + tangent.perp() * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::risk::RiskConfig;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn counts_follow_density_and_cap() {
        let cfg = RiskConfig::default();
        assert_eq!(particle_count(100.0, &cfg), 32768);
        assert_eq!(particle_count(200.0, &cfg), 32768);
        assert_eq!(particle_count(50.0, &cfg), 16384);
        assert_eq!(particle_count(0.0, &cfg), 0);
    }

    #[test]
    fn empty_intervals_give_no_particles() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(sample_particles(0, (0.0, 12.0), &[], &RiskConfig::default(), &mut rng).is_empty());
    }

    #[test]
    fn samples_respect_union_and_bounds() {
        let cfg = RiskConfig::default();
        let ivs = [Interval::new(0.0, 5.0), Interval::new(20.0, 25.0)];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ps = sample_particles(4, (2.0, 9.0), &ivs, &cfg, &mut rng);
        assert_eq!(ps.len(), 3277);
        for p in &ps {
            assert_eq!(p.lane, 4);
            assert!(ivs.iter().any(|iv| iv.contains(p.s)));
            assert!((2.0..=9.0).contains(&p.v));
            assert!(p.b.abs() <= cfg.max_offset);
        }
        let first = ps.iter().filter(|p| p.s <= 5.0).count() as f64 / ps.len() as f64;
        assert!((first - 0.5).abs() < 0.05);
    }

    #[test]
    fn propagation_arithmetic() {
        let p = Particle {
            lane: 1,
            s: 10.0,
            v: 5.0,
            b: 0.3,
        };
        let out = propagate(&[p], 1.5);
        assert_eq!(
            out[0],
            Propagated {
                lane: 1,
                s_hat: 17.5,
                b: 0.3
            }
        );
        let still = Particle { v: 0.0, ..p };
        assert_eq!(propagate(&[still], 1.5)[0].s_hat, 10.0);
    }

    #[test]
    fn straight_lane_offset() {
        let lane = LaneSpline::from_waypoints(&[Point::new(0.0, 0.0), Point::new(10.0, 0.0)]).unwrap();
        let p = to_cartesian(&lane, 3.0, 1.0);
        assert!((p.x - 3.0).abs() < 1e-12 && (p.y - 1.0).abs() < 1e-12);
        assert_eq!(to_cartesian(&lane, 3.0, 0.0), lane.eval(3.0).unwrap());
    }
}
