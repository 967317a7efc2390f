use std::sync::Arc;

use proptest::prelude::*;

use riskwarn::perception::{build_perceived_world, Awareness, DriverErrorState};
use riskwarn::world::{DrivingPath, TrafficObject, VehicleState, WorldSnapshot};

fn lane(y: f64) -> Arc<DrivingPath> {
    Arc::new(DrivingPath::from_xy(&[[0.0, y], [300.0, y]]).unwrap())
}

fn world(ego_speed: f64, speeds: &[f64]) -> WorldSnapshot {
    WorldSnapshot {
        ego: VehicleState::new(lane(0.0), 10.0, ego_speed, 1.0).unwrap(),
        others: speeds
            .iter()
            .enumerate()
            .map(|(i, &v)| TrafficObject {
                id: format!("v{i}"),
                state: VehicleState::new(lane(3.5 * i as f64), 20.0 + 10.0 * i as f64, v, 1.0).unwrap(),
            })
            .collect(),
    }
}

fn errors(ne: f64, fe: f64, ie: f64, v_off: f64) -> DriverErrorState {
    DriverErrorState {
        ne,
        fe,
        ie,
        v_off,
        a_intent: -1.5,
        t_intent: 3.0,
        predicted_path: Some(lane(-3.5)),
        ..DriverErrorState::none("v0")
    }
}

proptest! {
    #[test]
    fn errors_touch_only_the_target(
        ego in 0.0f64..20.0,
        speeds in prop::collection::vec(0.0f64..20.0, 1..4),
        ne in 0.0f64..=1.0,
        fe in 0.0f64..=1.0,
        ie in 0.0f64..=1.0,
        v_off in -8.0f64..8.0,
    ) {
        let w = world(ego, &speeds);
        let p = build_perceived_world(&w, &errors(ne, fe, ie, v_off)).unwrap();
        prop_assert_eq!(&p.ego, &w.ego);
        prop_assert_eq!(p.objects.len(), w.others.len());
        for (po, o) in p.objects.iter().zip(&w.others).skip(1) {
            prop_assert_eq!(&po.state, &o.state);
            prop_assert_eq!(po.awareness, Awareness::Aware);
            prop_assert!(po.plan.is_hold());
        }
        let target = &p.objects[0];
        prop_assert!(target.state.speed >= 0.0);
        prop_assert_eq!(target.awareness == Awareness::NotAware, ne >= 0.5);
    }

    #[test]
    fn zero_errors_are_the_identity(
        ego in 0.0f64..20.0,
        speeds in prop::collection::vec(0.0f64..20.0, 1..4),
        v_off in -8.0f64..8.0,
    ) {
        let w = world(ego, &speeds);
        let p = build_perceived_world(&w, &errors(0.0, 0.0, 0.0, v_off)).unwrap();
        for (po, o) in p.objects.iter().zip(&w.others) {
            prop_assert_eq!(&po.state, &o.state);
            prop_assert_eq!(po.awareness, Awareness::Aware);
            prop_assert!(po.plan.is_hold());
        }
    }
}
