//! Built-in scenario geometries. Coordinates in meters, the ego starts near
//! the origin driving toward +x, lanes are 3.5 m wide.
//!
//! The shipped `scenarios/*.toml` files are exported from these builders.

use std::collections::BTreeMap;

use super::{EventAction, ScenarioFile, ScenarioName, ScenarioSpec, ScriptedEvent, VehicleSpec, EGO_ID};

const LANE: f64 = 3.5;

const R_CAR: f64 = 1.0;
const R_MOTORCYCLE: f64 = 0.8;
const R_BICYCLE: f64 = 0.6;
const R_PEDESTRIAN: f64 = 0.4;

pub fn builtin_file(name: ScenarioName) -> ScenarioFile {
    match name {
        ScenarioName::MotorcycleLaneChange => motorcycle_lane_change(),
        ScenarioName::CarOvertaking => car_overtaking(),
        ScenarioName::PriorityIntersection => priority_intersection(),
        ScenarioName::CurveIntersection => curve_intersection(),
        ScenarioName::BicycleCutin => bicycle_cutin(),
        ScenarioName::PedestrianCutin => pedestrian_cutin(),
    }
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

fn pts(raw: &[(f64, f64)]) -> Vec<[f64; 2]> {
    raw.iter().map(|&(x, y)| [round3(x), round3(y)]).collect()
}

/// Straight run at `y0`, linear lane change over `length` to `y1`, straight on.
fn lane_change(x_start: f64, y0: f64, x_branch: f64, length: f64, y1: f64, x_end: f64) -> Vec<[f64; 2]> {
    pts(&[(x_start, y0), (x_branch, y0), (x_branch + length, y1), (x_end, y1)])
}

fn vehicle(id: &str, path: &str, arc_position: f64, speed: f64, radius: f64) -> VehicleSpec {
    VehicleSpec {
        id: id.into(),
        path: path.into(),
        arc_position: round3(arc_position),
        speed,
        footprint_radius: radius,
    }
}

fn switch(time: f64, vehicle: &str, path: &str) -> ScriptedEvent {
    ScriptedEvent {
        time,
        vehicle: vehicle.into(),
        action: EventAction::SwitchPath { path: path.into() },
    }
}

fn accel(time: f64, vehicle: &str, segments: &[(f64, f64)]) -> ScriptedEvent {
    ScriptedEvent {
        time,
        vehicle: vehicle.into(),
        action: EventAction::Plan {
            segments: segments.iter().map(|&(a, d)| [a, d]).collect(),
        },
    }
}

struct Base {
    name: ScenarioName,
    duration: f64,
    ego_desired_speed: f64,
    ego_v_max: f64,
    target: &'static str,
    predicted_path: Option<&'static str>,
}

impl Base {
    fn spec(
        &self,
        variation: u8,
        paths: Vec<(&str, Vec<[f64; 2]>)>,
        vehicles: Vec<VehicleSpec>,
        events: Vec<ScriptedEvent>,
    ) -> ScenarioSpec {
        ScenarioSpec {
            name: self.name,
            variation,
            duration: self.duration,
            ego_desired_speed: self.ego_desired_speed,
            ego_v_max: self.ego_v_max,
            target_object: self.target.into(),
            target_predicted_path: self.predicted_path.map(Into::into),
            paths: paths
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect::<BTreeMap<_, _>>(),
            vehicles,
            events,
        }
    }
}

/// The rider changes to the left lane to pass a slow car and meets a car
/// already driving on that lane.
fn motorcycle_lane_change() -> ScenarioFile {
    let base = Base {
        name: ScenarioName::MotorcycleLaneChange,
        duration: 14.0,
        ego_desired_speed: 12.0,
        ego_v_max: 14.0,
        target: "car",
        predicted_path: None,
    };
    // (start x of the car on the left lane, time of the rider's late brake)
    let table = [(1, 52.0, 9.0), (2, 40.0, 8.4), (3, 32.0, 8.0)];
    let variations = table
        .iter()
        .map(|&(k, car_x, brake_t)| {
            let paths = vec![
                (EGO_ID, lane_change(-50.0, 0.0, 70.0, 30.0, LANE, 600.0)),
                ("right_lane", pts(&[(-100.0, 0.0), (600.0, 0.0)])),
                ("left_lane", pts(&[(-200.0, LANE), (600.0, LANE)])),
            ];
            let vehicles = vec![
                vehicle(EGO_ID, EGO_ID, 50.0, 11.0, R_MOTORCYCLE),
                vehicle("slow_car", "right_lane", 100.0 + 75.0, 5.0, R_CAR),
                vehicle("car", "left_lane", 200.0 + car_x, 8.0, R_CAR),
            ];
            let events = vec![accel(brake_t, EGO_ID, &[(-2.5, 1.2)])];
            base.spec(k, paths, vehicles, events)
        })
        .collect();
    ScenarioFile {
        name: base.name,
        varied_axis: "starting distance of the car on the neighboring lane".into(),
        variations,
    }
}

/// A faster car passes on the left lane, cuts in ahead of the ego and then
/// slows down below the ego's speed.
fn car_overtaking() -> ScenarioFile {
    let base = Base {
        name: ScenarioName::CarOvertaking,
        duration: 14.0,
        ego_desired_speed: 12.0,
        ego_v_max: 14.0,
        target: "car",
        predicted_path: Some("left_lane"),
    };
    // (time at which the cut-in begins)
    let table = [(1, 6.0), (2, 5.4), (3, 5.0)];
    let cut_length = 20.0;
    let variations = table
        .iter()
        .map(|&(k, t_cut)| {
            let car_x = -15.0 + 16.0 * t_cut;
            let paths = vec![
                (EGO_ID, pts(&[(-50.0, 0.0), (600.0, 0.0)])),
                ("left_lane", pts(&[(-200.0, LANE), (600.0, LANE)])),
                ("cut_in", lane_change(-200.0, LANE, car_x, cut_length, 0.0, 600.0)),
            ];
            let vehicles = vec![
                vehicle(EGO_ID, EGO_ID, 50.0, 11.0, R_CAR),
                vehicle("car", "left_lane", 200.0 - 15.0, 16.0, R_CAR),
            ];
            let t_merged = t_cut + cut_length / 16.0;
            let events = vec![
                switch(t_cut, "car", "cut_in"),
                accel(t_merged, "car", &[(-3.0, 11.0 / 3.0)]),
                accel(t_merged + 3.2, EGO_ID, &[(-3.0, 2.0)]),
            ];
            base.spec(k, paths, vehicles, events)
        })
        .collect();
    ScenarioFile {
        name: base.name,
        varied_axis: "timing of the overtaking car's cut-in".into(),
        variations,
    }
}

/// The ego on the minor road yields to a car crossing on the priority road.
fn priority_intersection() -> ScenarioFile {
    let base = Base {
        name: ScenarioName::PriorityIntersection,
        duration: 12.0,
        ego_desired_speed: 10.0,
        ego_v_max: 12.0,
        target: "car",
        predicted_path: None,
    };
    // (speed of the priority car)
    let table = [(1, 10.0), (2, 8.75), (3, 8.0)];
    let x_cross = 50.0 + LANE / 2.0;
    let variations = table
        .iter()
        .map(|&(k, speed)| {
            let paths = vec![
                (EGO_ID, pts(&[(-50.0, 0.0), (300.0, 0.0)])),
                ("priority_road", pts(&[(x_cross, -200.0), (x_cross, 200.0)])),
            ];
            let vehicles = vec![
                vehicle(EGO_ID, EGO_ID, 50.0, 9.0, R_CAR),
                vehicle("car", "priority_road", 200.0 - 60.0, speed, R_CAR),
            ];
            let events = vec![accel(2.5, EGO_ID, &[(-2.5, 2.0)])];
            base.spec(k, paths, vehicles, events)
        })
        .collect();
    ScenarioFile {
        name: base.name,
        varied_axis: "velocity of the priority car".into(),
        variations,
    }
}

/// The ego turns left across the lane of an oncoming car and slows down to
/// let it pass.
fn curve_intersection() -> ScenarioFile {
    let base = Base {
        name: ScenarioName::CurveIntersection,
        duration: 12.0,
        ego_desired_speed: 9.0,
        ego_v_max: 10.0,
        target: "car",
        predicted_path: None,
    };
    let radius = 12.0;
    let mut turn: Vec<(f64, f64)> = vec![(-100.0, 0.0)];
    let steps = 12;
    for i in 0..=steps {
        let th = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
        turn.push((radius * th.sin(), radius * (1.0 - th.cos())));
    }
    turn.push((radius, 200.0));
    // (speed of the oncoming car)
    let table = [(1, 10.6), (2, 10.4), (3, 10.2)];
    let variations = table
        .iter()
        .map(|&(k, speed)| {
            let paths = vec![
                (EGO_ID, pts(&turn)),
                ("oncoming_lane", pts(&[(300.0, LANE), (-300.0, LANE)])),
            ];
            let vehicles = vec![
                vehicle(EGO_ID, EGO_ID, 70.0, 8.0, R_CAR),
                vehicle("car", "oncoming_lane", 300.0 - 66.0, speed, R_CAR),
            ];
            let events = vec![accel(1.5, EGO_ID, &[(-2.0, 2.0)])];
            base.spec(k, paths, vehicles, events)
        })
        .collect();
    ScenarioFile {
        name: base.name,
        varied_axis: "velocity of the oncoming car".into(),
        variations,
    }
}

/// A bicycle on the bike lane swerves into the ego lane ahead; the ego
/// brakes down to the bicycle's speed.
fn bicycle_cutin() -> ScenarioFile {
    let base = Base {
        name: ScenarioName::BicycleCutin,
        duration: 12.0,
        ego_desired_speed: 8.0,
        ego_v_max: 10.0,
        target: "bicycle",
        predicted_path: Some("bike_lane"),
    };
    let y_bike = -2.5;
    let t_cut = 2.0;
    // (starting x of the bicycle)
    let table = [(1, 20.0), (2, 17.5), (3, 15.5)];
    let variations = table
        .iter()
        .map(|&(k, x0)| {
            let x_branch = x0 + 5.0 * t_cut;
            let paths = vec![
                (EGO_ID, pts(&[(-50.0, 0.0), (300.0, 0.0)])),
                ("bike_lane", pts(&[(0.0, y_bike), (300.0, y_bike)])),
                ("swerve", lane_change(0.0, y_bike, x_branch, 8.0, 0.0, 300.0)),
            ];
            let vehicles = vec![
                vehicle(EGO_ID, EGO_ID, 50.0, 8.0, R_CAR),
                vehicle("bicycle", "bike_lane", x0, 5.0, R_BICYCLE),
            ];
            let events = vec![
                switch(t_cut, "bicycle", "swerve"),
                accel(t_cut + 0.4, EGO_ID, &[(-2.0, 1.5)]),
            ];
            base.spec(k, paths, vehicles, events)
        })
        .collect();
    ScenarioFile {
        name: base.name,
        varied_axis: "starting distance of the bicycle".into(),
        variations,
    }
}

/// A pedestrian walking on the sidewalk suddenly turns to cross the road.
fn pedestrian_cutin() -> ScenarioFile {
    let base = Base {
        name: ScenarioName::PedestrianCutin,
        duration: 12.0,
        ego_desired_speed: 6.0,
        ego_v_max: 8.0,
        target: "pedestrian",
        predicted_path: Some("sidewalk"),
    };
    let y_walk = -4.0;
    let t_cut = 1.5;
    // (starting x of the pedestrian)
    let table = [(1, 28.7), (2, 26.3), (3, 24.5)];
    let variations = table
        .iter()
        .map(|&(k, x0)| {
            let x_turn = x0 + 1.5 * t_cut;
            let paths = vec![
                (EGO_ID, pts(&[(-50.0, 0.0), (300.0, 0.0)])),
                ("sidewalk", pts(&[(0.0, y_walk), (300.0, y_walk)])),
                ("crossing", pts(&[(0.0, y_walk), (x_turn, y_walk), (x_turn, 30.0)])),
            ];
            let vehicles = vec![
                vehicle(EGO_ID, EGO_ID, 50.0, 6.0, R_CAR),
                vehicle("pedestrian", "sidewalk", x0, 1.5, R_PEDESTRIAN),
            ];
            let events = vec![
                switch(t_cut, "pedestrian", "crossing"),
                accel(t_cut + 0.5, EGO_ID, &[(-2.0, 1.5)]),
            ];
            base.spec(k, paths, vehicles, events)
        })
        .collect();
    ScenarioFile {
        name: base.name,
        varied_axis: "starting distance of the pedestrian".into(),
        variations,
    }
}
