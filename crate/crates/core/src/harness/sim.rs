//! Time-stepped episode simulation.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::perception::{perceived_plan, predict_toward, DriverErrorState, PlanningSetup};
use crate::personalization::{DriverProfile, ModelParameters};
use crate::planner::SpeedLimits;
use crate::risk::warning_signal;
use crate::scenarios::{
    plan_from_pairs, EpisodeConfig, EpisodeKey, EventAction, ModelKind, Scenario, EGO_ID,
};
use crate::world::{grid_steps, predict, DrivingPath, MotionPlan, TrafficObject, VehicleState, WorldSnapshot};

/// Time headway between two vehicles: the clearance along the follower's
/// heading divided by the follower's speed, for whichever vehicle has the
/// other inside its corridor ahead. `None` when neither does. Overlapping
/// footprints give 0.
pub fn time_gap(a: &VehicleState, b: &VehicleState) -> Option<f64> {
    let reach = a.footprint_radius + b.footprint_radius;
    let pa = a.world_position();
    let pb = b.world_position();
    if (pb.position - pa.position).norm() <= reach {
        return Some(0.0);
    }
    let headway = |follower: &VehicleState, fpose: &crate::world::Pose, lpose: &crate::world::Pose| {
        let d = lpose.position - fpose.position;
        let (sin, cos) = fpose.heading.sin_cos();
        let lon = d.x * cos + d.y * sin;
        let lat = -d.x * sin + d.y * cos;
        if lon <= 0.0 || lat.abs() >= reach {
            return None;
        }
        let clearance = (lon - reach).max(0.0);
        if follower.speed > 1e-6 {
            Some(clearance / follower.speed)
        } else if clearance == 0.0 {
            Some(0.0)
        } else {
            None
        }
    };
    match (headway(a, &pa, &pb), headway(b, &pb, &pa)) {
        (Some(x), Some(y)) => Some(x.min(y)),
        (x, y) => x.or(y),
    }
}

#[derive(Debug, Clone)]
struct SimVehicle {
    id: String,
    path: Arc<DrivingPath>,
    arc: f64,
    speed: f64,
    radius: f64,
    plan: MotionPlan,
    plan_elapsed: f64,
}

impl SimVehicle {
    fn state(&self) -> VehicleState {
        VehicleState {
            path: self.path.clone(),
            arc_position: self.arc,
            speed: self.speed,
            footprint_radius: self.radius,
        }
    }

    fn step(&mut self, dt: f64) {
        let (dist, speed) = self.plan.after(self.plan_elapsed).advance(self.speed, dt);
        self.plan_elapsed += dt;
        self.arc += dist;
        self.speed = speed;
        let len = self.path.length();
        if self.arc >= len {
            self.arc = len;
            self.speed = 0.0;
        }
    }
}

/// Scripted traffic: every vehicle follows its initial state and events.
#[derive(Debug, Clone)]
pub struct ScriptedTraffic {
    scenario: Arc<Scenario>,
    vehicles: Vec<SimVehicle>,
    next_event: usize,
    events: Vec<usize>,
}

impl ScriptedTraffic {
    pub fn new(scenario: Arc<Scenario>) -> Result<Self> {
        let mut vehicles = Vec::with_capacity(scenario.spec.vehicles.len());
        for v in &scenario.spec.vehicles {
            let path = scenario
                .path(&v.path)
                .ok_or_else(|| Error::input(format!("unknown path '{}'", v.path)))?
                .clone();
            vehicles.push(SimVehicle {
                id: v.id.clone(),
                path,
                arc: v.arc_position,
                speed: v.speed,
                radius: v.footprint_radius,
                plan: MotionPlan::hold(),
                plan_elapsed: 0.0,
            });
        }
        // Ego first, then the others in file order.
        vehicles.sort_by_key(|v| v.id != EGO_ID);
        let mut events: Vec<usize> = (0..scenario.spec.events.len()).collect();
        events.sort_by(|&a, &b| {
            scenario.spec.events[a]
                .time
                .total_cmp(&scenario.spec.events[b].time)
                .then(a.cmp(&b))
        });
        Ok(Self {
            scenario,
            vehicles,
            next_event: 0,
            events,
        })
    }

    /// Applies all events due at time `t`.
    pub fn apply_events(&mut self, t: f64) -> Result<()> {
        while let Some(&idx) = self.events.get(self.next_event) {
            let event = &self.scenario.spec.events[idx];
            if event.time > t + 1e-9 {
                break;
            }
            let vehicle = self
                .vehicles
                .iter_mut()
                .find(|v| v.id == event.vehicle)
                .ok_or_else(|| Error::input(format!("event for unknown vehicle '{}'", event.vehicle)))?;
            match &event.action {
                EventAction::SwitchPath { path } => {
                    let new_path = self
                        .scenario
                        .path(path)
                        .ok_or_else(|| Error::input(format!("unknown path '{path}'")))?
                        .clone();
                    let here = vehicle.path.pose_at(vehicle.arc).position;
                    vehicle.arc = new_path.project(&here);
                    vehicle.path = new_path;
                }
                EventAction::Plan { segments } => {
                    vehicle.plan = plan_from_pairs(segments)?;
                    vehicle.plan_elapsed = 0.0;
                }
            }
            self.next_event += 1;
        }
        Ok(())
    }

    pub fn step(&mut self, dt: f64) {
        for v in &mut self.vehicles {
            v.step(dt);
        }
    }

    pub fn snapshot(&self) -> WorldSnapshot {
        let ego = self.vehicles[0].state();
        let others = self.vehicles[1..]
            .iter()
            .map(|v| TrafficObject {
                id: v.id.clone(),
                state: v.state(),
            })
            .collect();
        WorldSnapshot { ego, others }
    }
}

/// Per-step record of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceStep {
    pub t: f64,
    pub ego_speed: f64,
    pub risk: f64,
    pub warning: f64,
    /// Planned driver behavior (human-based model only).
    pub target_velocity: Option<f64>,
    /// Smallest time gap to any other vehicle at this step.
    pub time_gap: Option<f64>,
}

/// Scripted-motion ground truth of an episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundTruth {
    pub min_timegap: Option<f64>,
    /// First time the minimum was reached.
    pub min_timegap_time: Option<f64>,
    /// Footprints overlapped at some step.
    pub collision: bool,
}

impl GroundTruth {
    pub fn is_critical(&self, threshold: f64) -> bool {
        self.min_timegap.is_some_and(|g| g < threshold)
    }
}

/// Complete per-step output of one simulated episode.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeRun {
    pub key: EpisodeKey,
    pub steps: Vec<TraceStep>,
    pub truth: GroundTruth,
}

impl EpisodeRun {
    /// First time the warning signal reaches `theta`.
    pub fn warning_time(&self, theta: f64) -> Option<f64> {
        self.steps.iter().find(|s| s.warning >= theta).map(|s| s.t)
    }

    pub fn peak_warning(&self) -> f64 {
        self.steps.iter().map(|s| s.warning).fold(0.0, f64::max)
    }
}

/// Error state the episode imposes on the scenario's target object.
pub fn episode_errors(config: &EpisodeConfig, params: &ModelParameters) -> DriverErrorState {
    let (ne, fe, ie) = config.error.levels();
    DriverErrorState {
        ne,
        fe,
        ie,
        target_object: config.scenario.spec.target_object.clone(),
        v_off: params.v_off,
        a_intent: params.a_intent,
        t_intent: params.t_intent,
        predicted_path: config.scenario.predicted_path().cloned(),
    }
}

pub fn planning_setup(scenario: &Scenario, params: &ModelParameters) -> PlanningSetup {
    PlanningSetup {
        planner: params.planner_config(),
        risk: params.risk_model(),
        limits: SpeedLimits {
            v_desired: scenario.spec.ego_desired_speed,
            v_max: scenario.spec.ego_v_max,
        },
    }
}

/// Risk and target velocity of one model at one instant.
pub fn evaluate_step(
    world: &WorldSnapshot,
    model: ModelKind,
    profile: &DriverProfile,
    errors: &DriverErrorState,
    setup: &PlanningSetup,
) -> Result<(f64, Option<f64>)> {
    let risk = &setup.risk;
    let others: Vec<_> = world
        .others
        .iter()
        .map(|o| predict(&o.state, &MotionPlan::hold(), risk.horizon(), risk.dt))
        .collect();
    match model {
        ModelKind::Baseline => {
            let ego = predict(&world.ego, &MotionPlan::hold(), risk.horizon(), risk.dt);
            Ok((risk.risk_to_all(&ego, &others, profile.alpha)?, None))
        }
        ModelKind::HumanBased => {
            let v_tar = perceived_plan(world, errors, profile, setup)?.target_velocity;
            let ego = predict_toward(&world.ego, v_tar, setup);
            Ok((risk.risk_to_all(&ego, &others, profile.alpha)?, Some(v_tar)))
        }
    }
}

/// Simulates an episode and records every step.
pub fn simulate(config: &EpisodeConfig, params: &ModelParameters) -> Result<EpisodeRun> {
    params.validate()?;
    let scenario = &config.scenario;
    let profile = match config.model {
        ModelKind::Baseline => params.baseline_profile(),
        ModelKind::HumanBased => params.profile_for(config.driver),
    };
    let errors = episode_errors(config, params);
    let setup = planning_setup(scenario, params);

    let mut traffic = ScriptedTraffic::new(scenario.clone())?;
    let n = grid_steps(scenario.spec.duration, params.dt_sim);
    let mut steps = Vec::with_capacity(n + 1);
    let mut truth = GroundTruth {
        min_timegap: None,
        min_timegap_time: None,
        collision: false,
    };

    for k in 0..=n {
        let t = k as f64 * params.dt_sim;
        traffic.apply_events(t)?;
        let world = traffic.snapshot();

        let (risk, target_velocity) = evaluate_step(&world, config.model, &profile, &errors, &setup)?;
        let warning = warning_signal(risk, &profile);

        let mut gap: Option<f64> = None;
        for o in &world.others {
            let reach = world.ego.footprint_radius + o.state.footprint_radius;
            let dist = (o.state.world_position().position - world.ego.world_position().position).norm();
            if dist < reach {
                truth.collision = true;
            }
            if let Some(g) = time_gap(&world.ego, &o.state) {
                gap = Some(gap.map_or(g, |x| x.min(g)));
            }
        }
        if let Some(g) = gap {
            if truth.min_timegap.is_none_or(|m| g < m) {
                truth.min_timegap = Some(g);
                truth.min_timegap_time = Some(t);
            }
        }

        steps.push(TraceStep {
            t,
            ego_speed: world.ego.speed,
            risk,
            warning,
            target_velocity,
            time_gap: gap,
        });
        traffic.step(params.dt_sim);
    }

    Ok(EpisodeRun {
        key: config.key(),
        steps,
        truth,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lane() -> Arc<DrivingPath> {
        Arc::new(DrivingPath::from_xy(&[[0.0, 0.0], [500.0, 0.0]]).unwrap())
    }

    #[test]
    fn headway_to_lead() {
        let ego = VehicleState::new(lane(), 0.0, 10.0, 1.0).unwrap();
        let lead = VehicleState::new(lane(), 22.0, 10.0, 1.0).unwrap();
        assert!((time_gap(&ego, &lead).unwrap() - 2.0).abs() < 1e-12);
        // Symmetric in argument order.
        assert_eq!(time_gap(&ego, &lead), time_gap(&lead, &ego));
    }

    #[test]
    fn no_headway_for_adjacent_lane() {
        let side = Arc::new(DrivingPath::from_xy(&[[0.0, 3.5], [500.0, 3.5]]).unwrap());
        let ego = VehicleState::new(lane(), 0.0, 10.0, 1.0).unwrap();
        let other = VehicleState::new(side, 10.0, 10.0, 1.0).unwrap();
        assert_eq!(time_gap(&ego, &other), None);
    }

    #[test]
    fn overlap_is_zero_gap() {
        let ego = VehicleState::new(lane(), 10.0, 0.0, 1.0).unwrap();
        let other = VehicleState::new(lane(), 11.0, 0.0, 1.0).unwrap();
        assert_eq!(time_gap(&ego, &other), Some(0.0));
    }

    #[test]
    fn follower_behind_ego_counts() {
        let ego = VehicleState::new(lane(), 30.0, 5.0, 1.0).unwrap();
        let chaser = VehicleState::new(lane(), 10.0, 9.0, 1.0).unwrap();
        assert!((time_gap(&ego, &chaser).unwrap() - 2.0).abs() < 1e-12);
    }
}
