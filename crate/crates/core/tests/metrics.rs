use occlusion_risk::metrics::{
    cdf, collision_rate, collision_rate_of, discomfort, percentile, profile_bands, BAND_PERCENTILES,
};
use occlusion_risk::simulator::{EpisodeResult, Outcome, TraceRecord};
use proptest::prelude::*;

fn episode(outcome: Outcome, dt: f64, v: impl Fn(f64) -> f64, a: impl Fn(f64) -> f64, n: usize) -> EpisodeResult {
    let trace: Vec<TraceRecord> = (0..=n)
        .map(|i| {
            let t = i as f64 * dt;
            TraceRecord {
                t,
                s: 0.0,
                v: v(t),
                a: a(t),
                x: 0.0,
                y: 0.0,
                n_particles: 0,
                plan_wall_time: 0.0,
            }
        })
        .collect();
    EpisodeResult {
        outcome,
        collision_time: (outcome == Outcome::Collision).then_some(n as f64 * dt),
        trace,
        particles: Vec::new(),
    }
}

fn outcomes(collisions: usize, n: usize) -> Vec<Outcome> {
    (0..n)
        .map(|i| {
            if i < collisions {
                Outcome::Collision
            } else {
                Outcome::GoalReached
            }
        })
        .collect()
}

#[test]
fn rate_examples() {
    assert_eq!(collision_rate_of(&outcomes(0, 100)).unwrap(), 0.0);
    assert_eq!(collision_rate_of(&outcomes(5, 100)).unwrap(), 5.0);
    assert_eq!(collision_rate_of(&outcomes(29, 2000)).unwrap(), 1.45);
    let results: Vec<EpisodeResult> = [
        Outcome::Collision,
        Outcome::Timeout,
        Outcome::GoalReached,
        Outcome::GoalReached,
    ]
    .into_iter()
    .map(|o| episode(o, 0.1, |_| 5.0, |_| 0.0, 3))
    .collect();
    assert_eq!(collision_rate(&results).unwrap(), 25.0);
    assert!(collision_rate(&[]).is_err());
}

#[test]
fn discomfort_examples() {
    let dt = 0.02;
    let n = 1000;
    let t_end = n as f64 * dt;
    let t: Vec<f64> = (0..=n).map(|i| i as f64 * dt).collect();
    let flat = |a: f64| vec![a; t.len()];
    assert_eq!(discomfort(&t, &flat(-4.0), 4.0, t_end).unwrap(), 0.0);
    assert_eq!(discomfort(&t, &flat(2.5), 4.0, t_end).unwrap(), 0.0);
    assert_eq!(discomfort(&t, &flat(-8.0), 4.0, t_end).unwrap(), 4.0);
    let half: Vec<f64> = t.iter().map(|&x| if x <= 0.5 * t_end { -8.0 } else { 0.0 }).collect();
    assert!((discomfort(&t, &half, 4.0, t_end).unwrap() - 2.0).abs() <= dt * 8.0 / t_end);
    assert!(discomfort(&t, &half, 4.0, 0.0).is_err());
    assert!(discomfort(&t, &half, 4.0, -1.0).is_err());
}

#[test]
fn cdf_examples() {
    assert_eq!(cdf(&[1.0]).unwrap(), vec![(1.0, 1.0)]);
    assert_eq!(
        cdf(&[3.0, 1.0, 2.0]).unwrap(),
        vec![(1.0, 1.0 / 3.0), (2.0, 2.0 / 3.0), (3.0, 1.0)]
    );
    assert!(cdf(&[]).is_err());

    // 73 per-intersection rates: the reported 95th percentile sits between the
    // CDF steps that straddle 0.95
    let rates: Vec<f64> = (0..73).map(|i| ((i * 37) % 73) as f64 * 0.13).collect();
    let table = cdf(&rates).unwrap();
    let p95 = percentile(&rates, 95.0).unwrap();
    let k = table.iter().position(|&(_, f)| f >= 0.95).unwrap();
    assert!(table[k - 1].0 <= p95 && p95 <= table[k].0);
    assert!(table[k - 1].1 < 0.95);
}

#[test]
fn bands_of_identical_and_paired_episodes() {
    let same: Vec<EpisodeResult> = (0..5)
        .map(|_| episode(Outcome::GoalReached, 0.02, |t| 10.0 - t, |_| -1.0, 200))
        .collect();
    let bands = profile_bands(&same, 0.5).unwrap();
    assert_eq!(bands.rows.len(), 8);
    for row in &bands.rows {
        assert_eq!(row.active, 5);
        assert!(row.v.iter().all(|&x| (x - (10.0 - row.t)).abs() < 1e-9));
        assert!(row.a.iter().all(|&x| x == -1.0));
    }

    let pair = [
        episode(Outcome::GoalReached, 0.02, |_| 8.0, |_| 0.0, 100),
        episode(Outcome::GoalReached, 0.02, |_| 12.0, |_| 0.0, 100),
    ];
    let bands = profile_bands(&pair, 0.5).unwrap();
    for row in &bands.rows {
        assert_eq!(row.v[3], 10.0);
    }
}

/// Linear-interpolation percentile from a plain sort.
fn oracle_percentile(mut xs: Vec<f64>, q: f64) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = q / 100.0 * (xs.len() - 1) as f64;
    let i = h.floor() as usize;
    if i + 1 < xs.len() {
        xs[i] + (h - i as f64) * (xs[i + 1] - xs[i])
    } else {
        xs[i]
    }
}

#[test]
fn bands_of_a_ramp_family_match_a_sort_oracle() {
    let dt = 0.02;
    let family: Vec<(f64, f64, usize)> = (0..100)
        .map(|i| {
            let v0 = 4.0 + (i % 9) as f64;
            let slope = -0.5 + 0.01 * ((i * 7) % 100) as f64;
            let n = 150 + (i * 13) % 200;
            (v0, slope, n)
        })
        .collect();
    let results: Vec<EpisodeResult> = family
        .iter()
        .map(|&(v0, k, n)| episode(Outcome::GoalReached, dt, move |t| v0 + k * t, move |_| k, n))
        .collect();
    let bin = 0.2;
    let bands = profile_bands(&results, bin).unwrap();
    for row in &bands.rows {
        let active: Vec<&(f64, f64, usize)> = family.iter().filter(|&&(_, _, n)| n as f64 * dt > row.t).collect();
        assert_eq!(row.active, active.len());
        // bins start on the trace grid, so the sample at the bin start is exact
        let vs: Vec<f64> = active.iter().map(|&&(v0, k, _)| v0 + k * row.t).collect();
        let accs: Vec<f64> = active.iter().map(|&&(_, k, _)| k).collect();
        for (i, &q) in BAND_PERCENTILES.iter().enumerate() {
            assert!((row.v[i] - oracle_percentile(vs.clone(), q)).abs() < 1e-9);
            assert!((row.a[i] - oracle_percentile(accs.clone(), q)).abs() < 1e-9);
        }
        assert!(row.v.windows(2).all(|w| w[0] <= w[1]));
        assert!(row.a.windows(2).all(|w| w[0] <= w[1]));
    }
}

proptest! {
    #[test]
    fn collision_numerators_add(a in 1usize..300, ca in 0usize..300, b in 1usize..300, cb in 0usize..300) {
        let (ca, cb) = (ca.min(a), cb.min(b));
        let mut both = outcomes(ca, a);
        both.extend(outcomes(cb, b));
        let lhs = collision_rate_of(&both).unwrap() * (a + b) as f64;
        let rhs = collision_rate_of(&outcomes(ca, a)).unwrap() * a as f64 + collision_rate_of(&outcomes(cb, b)).unwrap() * b as f64;
        prop_assert!((lhs - rhs).abs() < 1e-9 * lhs.max(1.0));
        let r = collision_rate_of(&both).unwrap();
        prop_assert!((0.0..=100.0).contains(&r));
    }

    #[test]
    fn discomfort_ignores_sign_and_falls_with_threshold(
        accels in proptest::collection::vec(-8.0..2.5f64, 2..200),
        lo in 0.5..4.0f64,
        extra in 0.0..4.0f64,
    ) {
        let t: Vec<f64> = (0..accels.len()).map(|i| i as f64 * 0.02).collect();
        let duration = t[t.len() - 1];
        let flipped: Vec<f64> = accels.iter().map(|a| -a).collect();
        let d = discomfort(&t, &accels, lo, duration).unwrap();
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d, discomfort(&t, &flipped, lo, duration).unwrap());
        prop_assert!(discomfort(&t, &accels, lo + extra, duration).unwrap() <= d);
    }

    #[test]
    fn cdf_is_a_staircase_to_one(values in proptest::collection::vec(-100.0..100.0f64, 1..100)) {
        let table = cdf(&values).unwrap();
        prop_assert_eq!(table.len(), values.len());
        prop_assert!(table.windows(2).all(|w| w[0].0 <= w[1].0 && w[0].1 < w[1].1));
        prop_assert_eq!(table.last().unwrap().1, 1.0);
    }
}
