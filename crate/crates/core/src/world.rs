//! Geometric and kinematic substrate: polyline paths, point-mass vehicle
//! states and motion prediction along paths.

use std::sync::Arc;

use nalgebra::{Point2, Vector2};

use crate::error::{Error, Result};

/// Position and heading of a point on a path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Point2<f64>,
    /// Radians, counter-clockwise from the world x-axis.
    pub heading: f64,
}

/// A 2D polyline parametrized by arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct DrivingPath {
    points: Vec<Point2<f64>>,
    arc: Vec<f64>,
    headings: Vec<f64>,
}

impl DrivingPath {
    pub fn new(points: Vec<Point2<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::input("a driving path needs at least 2 points"));
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::input("driving path points must be finite"));
        }

        let mut arc = Vec::with_capacity(points.len());
        let mut headings = Vec::with_capacity(points.len());
        arc.push(0.0);
        for (i, pair) in points.windows(2).enumerate() {
            let d = pair[1] - pair[0];
            let len = d.norm();
            if len <= 0.0 {
                return Err(Error::input(format!(
                    "driving path points {i} and {} coincide",
                    i + 1
                )));
            }
            arc.push(arc[i] + len);
            headings.push(d.y.atan2(d.x));
        }
        // The last point carries the heading of the final segment.
        headings.push(*headings.last().expect("at least one segment"));

        Ok(Self {
            points,
            arc,
            headings,
        })
    }

    pub fn from_xy(points: &[[f64; 2]]) -> Result<Self> {
        Self::new(points.iter().map(|p| Point2::new(p[0], p[1])).collect())
    }

    pub fn points(&self) -> &[Point2<f64>] {
        &self.points
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.arc
    }

    pub fn headings(&self) -> &[f64] {
        &self.headings
    }

    pub fn length(&self) -> f64 {
        *self.arc.last().expect("non-empty path")
    }

    /// Index of the segment containing arc length `s` (already clamped).
    /// Interior vertices belong to the outgoing segment.
    fn segment_index(&self, s: f64) -> usize {
        let last_segment = self.points.len() - 2;
        // First vertex with arc > s, minus one.
        let upper = self.arc.partition_point(|&a| a <= s);
        upper.saturating_sub(1).min(last_segment)
    }

    /// Point and heading at arc length `s`, clamped to the path extent.
    pub fn pose_at(&self, s: f64) -> Pose {
        let s = s.clamp(0.0, self.length());
        let i = self.segment_index(s);
        let seg_len = self.arc[i + 1] - self.arc[i];
        let t = (s - self.arc[i]) / seg_len;
        let position = self.points[i] + (self.points[i + 1] - self.points[i]) * t;
        Pose {
            position,
            heading: self.headings[i],
        }
    }

    /// Arc length of the point on the path closest to `p`.
    pub fn project(&self, p: &Point2<f64>) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for (i, pair) in self.points.windows(2).enumerate() {
            let d: Vector2<f64> = pair[1] - pair[0];
            let len2 = d.norm_squared();
            let t = ((p - pair[0]).dot(&d) / len2).clamp(0.0, 1.0);
            let q = pair[0] + d * t;
            let dist2 = (p - q).norm_squared();
            if dist2 < best.0 {
                best = (dist2, self.arc[i] + t * len2.sqrt());
            }
        }
        best.1
    }
}

/// One constant-acceleration piece of a [`MotionPlan`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlanSegment {
    pub acceleration: f64,
    pub duration: f64,
}

/// Piecewise-constant acceleration profile. After the last segment the
/// vehicle holds its final speed; speed never goes below zero.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MotionPlan {
    segments: Vec<PlanSegment>,
}

impl MotionPlan {
    /// Constant velocity.
    pub fn hold() -> Self {
        Self::default()
    }

    pub fn new(segments: Vec<PlanSegment>) -> Result<Self> {
        for seg in &segments {
            if !(seg.duration > 0.0 && seg.duration.is_finite()) {
                return Err(Error::input(format!(
                    "plan segment duration must be positive and finite, got {}",
                    seg.duration
                )));
            }
            if !seg.acceleration.is_finite() {
                return Err(Error::input("plan segment acceleration must be finite"));
            }
        }
        Ok(Self { segments })
    }

    pub fn single(acceleration: f64, duration: f64) -> Result<Self> {
        Self::new(vec![PlanSegment {
            acceleration,
            duration,
        }])
    }

    /// Constant-acceleration ramp from `current` to `target` speed at
    /// magnitude `accel`, then hold. Equal speeds give the empty plan.
    pub fn ramp(current: f64, target: f64, accel: f64) -> Self {
        if target == current || accel <= 0.0 {
            return Self::hold();
        }
        let delta = target - current;
        Self {
            segments: vec![PlanSegment {
                acceleration: accel.copysign(delta),
                duration: delta.abs() / accel,
            }],
        }
    }

    pub fn segments(&self) -> &[PlanSegment] {
        &self.segments
    }

    pub fn is_hold(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    /// The part of the plan remaining after `elapsed` seconds.
    pub fn after(&self, elapsed: f64) -> Self {
        let mut remaining = elapsed;
        let mut out = Vec::new();
        for seg in &self.segments {
            if remaining >= seg.duration {
                remaining -= seg.duration;
                continue;
            }
            out.push(PlanSegment {
                acceleration: seg.acceleration,
                duration: seg.duration - remaining.max(0.0),
            });
            remaining = 0.0;
        }
        // Drop slivers left over from floating-point subtraction.
        out.retain(|s| s.duration > 1e-12);
        Self { segments: out }
    }

    /// Distance travelled and final speed after `t` seconds from `speed`.
    pub fn advance(&self, speed: f64, t: f64) -> (f64, f64) {
        let mut v = speed.max(0.0);
        let mut dist = 0.0;
        let mut left = t.max(0.0);
        for seg in &self.segments {
            if left <= 0.0 {
                break;
            }
            let dt = left.min(seg.duration);
            let (d, v_end) = constant_accel(v, seg.acceleration, dt);
            dist += d;
            v = v_end;
            left -= dt;
        }
        dist += v * left;
        (dist, v)
    }
}

fn constant_accel(v: f64, a: f64, dt: f64) -> (f64, f64) {
    if a < 0.0 {
        let t_stop = v / -a;
        if t_stop <= dt {
            return (v * v / (2.0 * -a), 0.0);
        }
    }
    (v * dt + 0.5 * a * dt * dt, v + a * dt)
}

/// Point-mass vehicle on a path.
#[derive(Debug, Clone, PartialEq)]
pub struct VehicleState {
    pub path: Arc<DrivingPath>,
    pub arc_position: f64,
    pub speed: f64,
    /// Used only for ground-truth criticality.
    pub footprint_radius: f64,
}

impl VehicleState {
    pub fn new(
        path: Arc<DrivingPath>,
        arc_position: f64,
        speed: f64,
        footprint_radius: f64,
    ) -> Result<Self> {
        if !(speed >= 0.0 && speed.is_finite()) {
            return Err(Error::input(format!("speed must be >= 0, got {speed}")));
        }
        if !(0.0..=path.length()).contains(&arc_position) {
            return Err(Error::input(format!(
                "arc position {arc_position} outside path [0, {}]",
                path.length()
            )));
        }
        if !(footprint_radius >= 0.0 && footprint_radius.is_finite()) {
            return Err(Error::input("footprint radius must be >= 0"));
        }
        Ok(Self {
            path,
            arc_position,
            speed,
            footprint_radius,
        })
    }

    pub fn world_position(&self) -> Pose {
        self.path.pose_at(self.arc_position)
    }
}

/// A non-ego vehicle with its identifier.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficObject {
    pub id: String,
    pub state: VehicleState,
}

/// Objective traffic state at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WorldSnapshot {
    pub ego: VehicleState,
    pub others: Vec<TrafficObject>,
}

impl WorldSnapshot {
    pub fn object(&self, id: &str) -> Option<&TrafficObject> {
        self.others.iter().find(|o| o.id == id)
    }
}

/// One predicted sample at future offset `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictedSample {
    pub t: f64,
    pub arc_position: f64,
    pub position: Point2<f64>,
    pub heading: f64,
    pub speed: f64,
}

pub type Prediction = Vec<PredictedSample>;

/// Number of grid intervals for a horizon at step `dt`.
pub fn grid_steps(horizon: f64, dt: f64) -> usize {
    (horizon / dt).round() as usize
}

/// Predicts `state` along its path under `plan`, sampled at 0, dt, .., horizon.
pub fn predict(state: &VehicleState, plan: &MotionPlan, horizon: f64, dt: f64) -> Prediction {
    let n = grid_steps(horizon, dt);
    let len = state.path.length();
    (0..=n)
        .map(|k| {
            let t = k as f64 * dt;
            let (dist, mut speed) = plan.advance(state.speed, t);
            let mut arc = state.arc_position + dist;
            if arc >= len {
                arc = len;
                speed = 0.0;
            }
            let pose = state.path.pose_at(arc);
            PredictedSample {
                t,
                arc_position: arc,
                position: pose.position,
                heading: pose.heading,
                speed,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use std::f64::consts::FRAC_PI_2;

    use super::*;

    fn straight(len: f64) -> Arc<DrivingPath> {
        Arc::new(DrivingPath::from_xy(&[[0.0, 0.0], [len, 0.0]]).unwrap())
    }

    fn l_shape() -> Arc<DrivingPath> {
        Arc::new(DrivingPath::from_xy(&[[0.0, 0.0], [10.0, 0.0], [10.0, 10.0]]).unwrap())
    }

    #[test]
    fn rejects_degenerate_paths() {
        assert!(DrivingPath::from_xy(&[[0.0, 0.0]]).is_err());
        assert!(DrivingPath::from_xy(&[[0.0, 0.0], [0.0, 0.0]]).is_err());
        assert!(DrivingPath::from_xy(&[[0.0, 0.0], [f64::NAN, 1.0]]).is_err());
    }

    #[test]
    fn position_on_straight_path() {
        let v = VehicleState::new(straight(100.0), 5.0, 0.0, 1.0).unwrap();
        let pose = v.world_position();
        assert_eq!(pose.position, Point2::new(5.0, 0.0));
        assert_eq!(pose.heading, 0.0);

        let v = VehicleState::new(straight(100.0), 0.0, 0.0, 1.0).unwrap();
        assert_eq!(v.world_position().position, Point2::new(0.0, 0.0));
    }

    #[test]
    fn position_after_corner() {
        let v = VehicleState::new(l_shape(), 12.0, 0.0, 1.0).unwrap();
        let pose = v.world_position();
        assert!((pose.position - Point2::new(10.0, 2.0)).norm() < 1e-12);
        assert!((pose.heading - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn state_validation() {
        assert!(VehicleState::new(straight(10.0), 11.0, 1.0, 1.0).is_err());
        assert!(VehicleState::new(straight(10.0), 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn projection_recovers_arc() {
        let p = l_shape();
        assert!((p.project(&Point2::new(10.5, 4.0)) - 14.0).abs() < 1e-12);
        assert!((p.project(&Point2::new(3.0, -2.0)) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn constant_velocity_prediction() {
        let v = VehicleState::new(straight(200.0), 0.0, 10.0, 1.0).unwrap();
        let pred = predict(&v, &MotionPlan::hold(), 8.0, 0.2);
        assert_eq!(pred.len(), 41);
        for (k, s) in pred.iter().enumerate() {
            let expected = 2.0 * k as f64;
            assert!((s.arc_position - expected).abs() <= 1e-9 * expected.max(1.0));
        }
    }

    #[test]
    fn decelerating_prediction_matches_closed_form() {
        let v = VehicleState::new(straight(200.0), 0.0, 10.0, 1.0).unwrap();
        let plan = MotionPlan::single(-1.5, 3.0).unwrap();
        let pred = predict(&v, &plan, 8.0, 0.2);
        let at3 = &pred[15];
        assert!((at3.t - 3.0).abs() < 1e-12);
        assert!((at3.speed - 5.5).abs() < 1e-9);
        assert!((at3.arc_position - 23.25).abs() < 1e-9);
        // Holds 5.5 m/s afterwards.
        assert!((pred[40].speed - 5.5).abs() < 1e-9);
    }

    #[test]
    fn speed_clamps_at_zero() {
        let v = VehicleState::new(straight(200.0), 0.0, 2.0, 1.0).unwrap();
        let plan = MotionPlan::single(-1.5, 3.0).unwrap();
        let (d, speed) = plan.advance(2.0, 4.0 / 3.0);
        assert!(speed.abs() < 1e-12);
        assert!((d - 4.0 / 3.0).abs() < 1e-12);
        let pred = predict(&v, &plan, 8.0, 0.2);
        for s in pred.iter().filter(|s| s.t >= 4.0 / 3.0) {
            assert_eq!(s.speed, 0.0);
            assert!((s.arc_position - 4.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn vehicle_stops_at_path_end() {
        let v = VehicleState::new(straight(10.0), 5.0, 10.0, 1.0).unwrap();
        let pred = predict(&v, &MotionPlan::hold(), 2.0, 0.2);
        let last = pred.last().unwrap();
        assert_eq!(last.arc_position, 10.0);
        assert_eq!(last.speed, 0.0);
    }

    #[test]
    fn plan_after_trims_segments() {
        let plan = MotionPlan::new(vec![
            PlanSegment { acceleration: 1.0, duration: 2.0 },
            PlanSegment { acceleration: -1.0, duration: 1.0 },
        ])
        .unwrap();
        let rest = plan.after(2.5);
        assert_eq!(rest.segments().len(), 1);
        assert!((rest.segments()[0].duration - 0.5).abs() < 1e-12);
        assert!(plan.after(5.0).is_hold());
    }

    #[test]
    fn ramp_plan_shape() {
        assert!(MotionPlan::ramp(7.0, 7.0, 2.0).is_hold());
        let up = MotionPlan::ramp(4.0, 10.0, 2.0);
        assert_eq!(up.segments()[0].acceleration, 2.0);
        assert!((up.segments()[0].duration - 3.0).abs() < 1e-12);
        let down = MotionPlan::ramp(10.0, 4.0, 2.0);
        assert_eq!(down.segments()[0].acceleration, -2.0);
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        fn plan_strategy() -> impl Strategy<Value = MotionPlan> {
            prop::collection::vec((-4.0f64..3.0, 0.1f64..4.0), 0..4).prop_map(|segs| {
                MotionPlan::new(
                    segs.into_iter()
                        .map(|(a, d)| PlanSegment { acceleration: a, duration: d })
                        .collect(),
                )
                .unwrap()
            })
        }

        proptest! {
            #[test]
            fn prediction_is_monotone_and_non_negative(
                speed in 0.0f64..20.0,
                start in 0.0f64..50.0,
                plan in plan_strategy(),
            ) {
                let v = VehicleState::new(straight(150.0), start, speed, 1.0).unwrap();
                let pred = predict(&v, &plan, 8.0, 0.2);
                for w in pred.windows(2) {
                    prop_assert!(w[1].arc_position >= w[0].arc_position);
                }
                prop_assert!(pred.iter().all(|s| s.speed >= 0.0));
            }

            #[test]
            fn constant_velocity_advance_is_exact(speed in 0.0f64..30.0) {
                let v = VehicleState::new(straight(1000.0), 0.0, speed, 1.0).unwrap();
                for s in predict(&v, &MotionPlan::hold(), 8.0, 0.2) {
                    let expected = speed * s.t;
                    prop_assert!((s.arc_position - expected).abs() <= 1e-9 * expected.max(1e-9));
                }
            }
        }
    }
}
