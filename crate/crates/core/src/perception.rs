//! Perceived world construction from driver errors, and planning on it.
//!
//! The driver-error state (notice, forecast and inference error) distorts
//! how one target object is perceived: it may be dropped from the risk set,
//! its speed may be misjudged, or its path or acceleration intent may be
//! inferred wrongly. The planner run on that distorted world yields the
//! target velocity the driver is likely to choose.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::personalization::DriverProfile;
use crate::planner::{plan, sample_velocities, PlanOutcome, PlannerConfig, SpeedLimits};
use crate::risk::RiskModel;
use crate::world::{predict, DrivingPath, MotionPlan, Prediction, VehicleState, WorldSnapshot};

/// Error values at or above this level switch the perceived quantity.
pub const ERROR_SWITCH_LEVEL: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct DriverErrorState {
    /// Notice error in [0, 1].
    pub ne: f64,
    /// Forecast error in [0, 1].
    pub fe: f64,
    /// Inference error in [0, 1].
    pub ie: f64,
    /// Id of the object the errors apply to.
    pub target_object: String,
    pub v_off: f64,
    pub a_intent: f64,
    pub t_intent: f64,
    /// Path the driver wrongly expects the target to take, if the scenario
    /// offers one.
    pub predicted_path: Option<Arc<DrivingPath>>,
}

impl DriverErrorState {
    /// Error-free driver.
    pub fn none(target_object: impl Into<String>) -> Self {
        Self {
            ne: 0.0,
            fe: 0.0,
            ie: 0.0,
            target_object: target_object.into(),
            v_off: 0.0,
            a_intent: 0.0,
            t_intent: 1.0,
            predicted_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("NE", self.ne), ("FE", self.fe), ("IE", self.ie)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::input(format!("{name} must be in [0, 1], got {v}")));
            }
        }
        Ok(())
    }

    pub fn is_error_free(&self) -> bool {
        self.ne == 0.0 && self.fe == 0.0 && self.ie == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Awareness {
    Aware,
    NotAware,
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be in [0, 1], got {v}")))
    }
}

pub fn apply_notice_error(ne: f64) -> Result<Awareness> {
    check_unit("NE", ne)?;
    Ok(if ne < ERROR_SWITCH_LEVEL {
        Awareness::Aware
    } else {
        Awareness::NotAware
    })
}

/// Perceived speed of the object, never negative.
pub fn apply_forecast_error(v_obj: f64, fe: f64, v_off: f64) -> f64 {
    (v_obj + fe * v_off).max(0.0)
}

/// Perceived path and motion of the object.
pub fn apply_inference_error(
    ie: f64,
    p_obj: &Arc<DrivingPath>,
    p_pred: Option<&Arc<DrivingPath>>,
    a_intent: f64,
    t_intent: f64,
) -> Result<(Arc<DrivingPath>, MotionPlan)> {
    check_unit("IE", ie)?;
    if ie < ERROR_SWITCH_LEVEL {
        return Ok((p_obj.clone(), MotionPlan::hold()));
    }
    match p_pred {
        Some(p) => Ok((p.clone(), MotionPlan::hold())),
        None => Ok((p_obj.clone(), MotionPlan::single(a_intent, t_intent)?)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceivedObject {
    pub id: String,
    pub awareness: Awareness,
    /// Perceived path, position and speed.
    pub state: VehicleState,
    /// Perceived motion; constant velocity unless an intent is inferred.
    pub plan: MotionPlan,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerceivedWorld {
    pub ego: VehicleState,
    pub objects: Vec<PerceivedObject>,
}

impl PerceivedWorld {
    /// The world exactly as it is, all objects noticed.
    pub fn objective(world: &WorldSnapshot) -> Self {
        Self {
            ego: world.ego.clone(),
            objects: world
                .others
                .iter()
                .map(|o| PerceivedObject {
                    id: o.id.clone(),
                    awareness: Awareness::Aware,
                    state: o.state.clone(),
                    plan: MotionPlan::hold(),
                })
                .collect(),
        }
    }

    /// Objects that enter the driver's risk evaluation.
    pub fn risk_set(&self) -> impl Iterator<Item = &PerceivedObject> {
        self.objects
            .iter()
            .filter(|o| o.awareness == Awareness::Aware)
    }
}

pub fn build_perceived_world(
    world: &WorldSnapshot,
    errors: &DriverErrorState,
) -> Result<PerceivedWorld> {
    errors.validate()?;
    let mut perceived = PerceivedWorld::objective(world);
    let Some(target) = perceived
        .objects
        .iter_mut()
        .find(|o| o.id == errors.target_object)
    else {
        if errors.is_error_free() {
            return Ok(perceived);
        }
        return Err(Error::input(format!(
            "unknown target object '{}'",
            errors.target_object
        )));
    };

    target.awareness = apply_notice_error(errors.ne)?;
    let speed = apply_forecast_error(target.state.speed, errors.fe, errors.v_off);
    let (path, plan) = apply_inference_error(
        errors.ie,
        &target.state.path,
        errors.predicted_path.as_ref(),
        errors.a_intent,
        errors.t_intent,
    )?;
    let arc_position = if Arc::ptr_eq(&path, &target.state.path) {
        target.state.arc_position
    } else {
        path.project(&target.state.world_position().position)
    };
    target.state = VehicleState {
        path,
        arc_position,
        speed,
        footprint_radius: target.state.footprint_radius,
    };
    target.plan = plan;
    Ok(perceived)
}

/// Planner inputs that do not depend on the world.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanningSetup {
    pub planner: PlannerConfig,
    pub risk: RiskModel,
    pub limits: SpeedLimits,
}

/// Ego prediction toward target velocity `v` with the planner's ramp.
pub fn predict_toward(ego: &VehicleState, v: f64, setup: &PlanningSetup) -> Prediction {
    let ramp = MotionPlan::ramp(ego.speed, v, setup.planner.a_ramp);
    predict(ego, &ramp, setup.risk.horizon(), setup.risk.dt)
}

/// Runs the planner on a perceived world with the profile's risk factor.
pub fn plan_on(
    world: &PerceivedWorld,
    profile: &DriverProfile,
    setup: &PlanningSetup,
) -> Result<PlanOutcome> {
    let horizon = setup.risk.horizon();
    let others: Vec<Prediction> = world
        .risk_set()
        .map(|o| predict(&o.state, &o.plan, horizon, setup.risk.dt))
        .collect();
    let samples = sample_velocities(
        world.ego.speed,
        setup.limits.v_max,
        setup.planner.n_samples,
    )?;
    plan(
        world.ego.speed,
        setup.limits,
        &samples,
        &setup.planner.gains,
        |v| {
            let ego = predict_toward(&world.ego, v, setup);
            setup.risk.risk_to_all(&ego, &others, profile.alpha)
        },
    )
}

/// Plan on the objective world.
pub fn objective_plan(
    world: &WorldSnapshot,
    profile: &DriverProfile,
    setup: &PlanningSetup,
) -> Result<PlanOutcome> {
    plan_on(&PerceivedWorld::objective(world), profile, setup)
}

/// The driver behavior expected under the given driver errors.
pub fn perceived_plan(
    world: &WorldSnapshot,
    errors: &DriverErrorState,
    profile: &DriverProfile,
    setup: &PlanningSetup,
) -> Result<PlanOutcome> {
    let perceived = build_perceived_world(world, errors)?;
    plan_on(&perceived, profile, setup)
}
