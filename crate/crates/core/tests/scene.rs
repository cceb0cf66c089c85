mod common;

use std::sync::Arc;

use occlusion_risk::scene::{
    generate_scenario, synthetic_fourway, synthetic_fourway_file, validate, FourWayParams, IntersectionFile,
    IntersectionMap, ScenarioParams, Violation, GOAL_PAST_EXIT,
};
use proptest::prelude::*;

fn fourway() -> Arc<IntersectionMap> {
    Arc::new(synthetic_fourway(FourWayParams::default()).unwrap())
}

#[test]
fn synthetic_file_round_trips_through_json() {
    let file = synthetic_fourway_file(FourWayParams::default()).unwrap();
    let text = file.to_json();
    assert_eq!(IntersectionFile::from_json(&text).unwrap(), file);
    let map = IntersectionMap::from_json(&text).unwrap();
    assert_eq!(map, *fourway());
    assert_eq!(map.to_file(), file);
    assert!(validate(&file).is_empty());
}

#[test]
fn every_violation_is_collected() {
    let mut file = synthetic_fourway_file(FourWayParams::default()).unwrap();
    file.routes[0].lane_ids.push("ghost".into());
    file.routes[1].stopline_s = Some(-3.0);
    let dup = file.lanes[0].clone();
    file.lanes.push(dup);
    let v = validate(&file);
    assert!(v
        .iter()
        .any(|x| matches!(x, Violation::UnknownLane { lane, .. } if lane == "ghost")));
    assert!(v.iter().any(|x| matches!(x, Violation::InvalidStopline { .. })));
    assert!(v
        .iter()
        .any(|x| matches!(x, Violation::DuplicateId { kind: "lane", .. })));
    assert!(IntersectionMap::from_file(&file).is_err());
}

#[test]
fn goal_lies_past_the_exit() {
    let m = fourway();
    for r in 0..m.routes.len() {
        assert!(m.goal_s(r) > m.exit_s(r));
        assert!(m.goal_s(r) <= m.routes[r].length());
        assert!((m.goal_s(r) - m.exit_s(r) - GOAL_PAST_EXIT).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scenarios_are_valid_and_reproducible(seed in any::<u64>(), n in 0usize..=5) {
        let m = fourway();
        let ego = m.default_ego_route().unwrap();
        let params = ScenarioParams::default();
        let sc = generate_scenario(&m, n, ego, seed, &params).unwrap();
        prop_assert_eq!(&sc, &generate_scenario(&m, n, ego, seed, &params).unwrap());

        let stop = m.routes[ego].stopline_s.unwrap();
        prop_assert_eq!(sc.ego.s0, stop - params.ego_lead);
        prop_assert_eq!(sc.ego.v0, params.ego_speed);
        prop_assert_eq!(sc.ego.goal_s, m.goal_s(ego));
        prop_assert_eq!(sc.others.len(), n);
        for o in &sc.others {
            prop_assert!(o.speed >= params.speed_min && o.speed <= params.speed_max);
            prop_assert!(o.s0 >= 0.0 && o.s0 <= m.routes[o.route].length());
        }
        // pairwise clear at every rollout sample
        let steps = (params.horizon / params.rollout_step).round() as usize;
        for k in 0..=steps {
            let t = k as f64 * params.rollout_step;
            let boxes: Vec<_> = sc.others.iter().filter_map(|o| o.state_at(&m, t)).collect();
            for i in 0..boxes.len() {
                for j in i + 1..boxes.len() {
                    prop_assert!(!boxes[i].bbox.overlaps(&boxes[j].bbox), "overlap at t = {}", t);
                }
            }
        }
    }
}
