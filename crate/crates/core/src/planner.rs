//! Velocity-sampling behavior planner: every candidate target velocity is
//! scored with `C = R - U + O` and the cheapest one is the planned behavior.

use crate::error::{Error, Result};

/// Candidate target velocities, ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocitySampleSet {
    samples: Vec<f64>,
}

impl VelocitySampleSet {
    pub fn new(mut samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::input("velocity sample set is empty"));
        }
        if samples.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::input("velocity samples must be finite and >= 0"));
        }
        samples.sort_by(f64::total_cmp);
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn contains(&self, v: f64) -> bool {
        self.samples.contains(&v)
    }
}

/// `n` evenly spaced velocities over `[0, v_max]` plus the current speed.
pub fn sample_velocities(current: f64, v_max: f64, n: usize) -> Result<VelocitySampleSet> {
    if !(v_max > 0.0 && v_max.is_finite()) {
        return Err(Error::param(format!("v_max must be > 0, got {v_max}")));
    }
    if n < 2 {
        return Err(Error::param("at least two velocity samples are required"));
    }
    let step = v_max / (n - 1) as f64;
    let mut samples: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    // Pin the upper end exactly.
    samples[n - 1] = v_max;
    let current = current.max(0.0);
    if samples.iter().all(|s| (s - current).abs() > 1e-9) {
        samples.push(current);
    }
    VelocitySampleSet::new(samples)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostGains {
    pub k_r: f64,
    pub k_u: f64,
    pub k_o: f64,
    /// Normalization speed of the comfort term (m/s).
    pub v_ref: f64,
}

impl CostGains {
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            k_r: self.k_r * factor,
            k_u: self.k_u * factor,
            k_o: self.k_o * factor,
            v_ref: self.v_ref,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlannerConfig {
    pub gains: CostGains,
    pub n_samples: usize,
    /// Magnitude of the acceleration ramp toward a candidate (m/s²).
    pub a_ramp: f64,
}

/// Speed bounds of the vehicle being planned for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedLimits {
    pub v_desired: f64,
    pub v_max: f64,
}

/// Time-to-goal utility, saturating at the desired speed.
pub fn utility(v: f64, v_desired: f64, k_u: f64) -> f64 {
    k_u * v.min(v_desired).max(0.0) / v_desired
}

/// Penalty on the size of the velocity change.
pub fn comfort_penalty(v: f64, current: f64, k_o: f64, v_ref: f64) -> f64 {
    k_o * (v - current).abs() / v_ref
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostBreakdown {
    pub velocity: f64,
    /// Gain-weighted risk term.
    pub risk: f64,
    pub utility: f64,
    pub comfort: f64,
    pub total: f64,
}

impl CostBreakdown {
    pub fn new(velocity: f64, risk: f64, utility: f64, comfort: f64) -> Self {
        Self {
            velocity,
            risk,
            utility,
            comfort,
            total: risk - utility + comfort,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanOutcome {
    pub target_velocity: f64,
    pub costs: Vec<CostBreakdown>,
}

/// Ordering used to pick the plan: lowest cost, then the candidate closest
/// to the current speed, then the higher velocity.
pub fn prefer(a: &CostBreakdown, b: &CostBreakdown, current: f64) -> std::cmp::Ordering {
    a.total
        .total_cmp(&b.total)
        .then_with(|| {
            (a.velocity - current)
                .abs()
                .total_cmp(&(b.velocity - current).abs())
        })
        .then_with(|| b.velocity.total_cmp(&a.velocity))
}

/// Scores every sample with `risk_of` and returns the argmin and the full table.
pub fn plan<F>(
    current_speed: f64,
    limits: SpeedLimits,
    samples: &VelocitySampleSet,
    gains: &CostGains,
    mut risk_of: F,
) -> Result<PlanOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    if samples.is_empty() {
        return Err(Error::input("velocity sample set is empty"));
    }
    if limits.v_desired.is_nan() || limits.v_desired <= 0.0 {
        return Err(Error::param("desired speed must be > 0"));
    }
    let mut costs = Vec::with_capacity(samples.len());
    for &v in samples.samples() {
        let risk = gains.k_r * risk_of(v)?;
        costs.push(CostBreakdown::new(
            v,
            risk,
            utility(v, limits.v_desired, gains.k_u),
            comfort_penalty(v, current_speed, gains.k_o, gains.v_ref),
        ));
    }
    let best = costs
        .iter()
        .min_by(|a, b| prefer(a, b, current_speed))
        .expect("non-empty cost table");
    Ok(PlanOutcome {
        target_velocity: best.velocity,
        costs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gains() -> CostGains {
        CostGains { k_r: 1.0, k_u: 0.15, k_o: 0.05, v_ref: 10.0 }
    }

    #[test]
    fn even_grid() {
        let s = sample_velocities(0.0, 10.0, 21).unwrap();
        assert_eq!(s.len(), 21);
        for (i, v) in s.samples().iter().enumerate() {
            assert!((v - 0.5 * i as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn current_speed_is_inserted() {
        let s = sample_velocities(7.3, 10.0, 21).unwrap();
        assert_eq!(s.len(), 22);
        assert!(s.contains(7.3));
        assert!(s.samples().windows(2).all(|w| w[0] < w[1]));
        // Already on the grid.
        assert_eq!(sample_velocities(5.0, 10.0, 21).unwrap().len(), 21);
    }

    #[test]
    fn two_samples() {
        let s = sample_velocities(0.0, 10.0, 2).unwrap();
        assert_eq!(s.samples(), &[0.0, 10.0]);
        assert!(sample_velocities(0.0, 10.0, 1).is_err());
        assert!(sample_velocities(0.0, 0.0, 5).is_err());
    }

    #[test]
    fn utility_shape() {
        assert_eq!(utility(10.0, 10.0, 0.15), 0.15);
        assert_eq!(utility(0.0, 10.0, 0.15), 0.0);
        assert_eq!(utility(20.0, 10.0, 0.15), 0.15);
    }

    #[test]
    fn comfort_shape() {
        assert_eq!(comfort_penalty(6.0, 6.0, 0.05, 10.0), 0.0);
        let one = comfort_penalty(7.0, 6.0, 0.05, 10.0);
        let two = comfort_penalty(8.0, 6.0, 0.05, 10.0);
        assert!((two - 2.0 * one).abs() < 1e-15);
        assert_eq!(comfort_penalty(3.0, 9.0, 0.0, 10.0), 0.0);
    }

    #[test]
    fn free_road_goes_to_desired_speed() {
        let limits = SpeedLimits { v_desired: 10.0, v_max: 10.0 };
        let s = sample_velocities(6.0, 10.0, 21).unwrap();
        let out = plan(6.0, limits, &s, &gains(), |_| Ok(0.0)).unwrap();
        assert_eq!(out.target_velocity, 10.0);
        assert_eq!(out.costs.len(), 21);
    }

    #[test]
    fn risk_ahead_pulls_speed_down() {
        let limits = SpeedLimits { v_desired: 10.0, v_max: 10.0 };
        let s = sample_velocities(8.0, 10.0, 21).unwrap();
        // Risk rising steeply with speed.
        let out = plan(8.0, limits, &s, &gains(), |v| Ok(0.01 * v * v)).unwrap();
        assert!(out.target_velocity < 8.0);
    }

    #[test]
    fn ties_prefer_current_speed_then_higher() {
        let limits = SpeedLimits { v_desired: 10.0, v_max: 10.0 };
        let s = VelocitySampleSet::new(vec![2.0, 4.0, 6.0]).unwrap();
        let flat = CostGains { k_r: 1.0, k_u: 0.0, k_o: 0.0, v_ref: 10.0 };
        let out = plan(4.0, limits, &s, &flat, |_| Ok(0.5)).unwrap();
        assert_eq!(out.target_velocity, 4.0);
        // Equidistant from 4: 2 and 6 tie, the higher wins.
        let s = VelocitySampleSet::new(vec![2.0, 6.0]).unwrap();
        let out = plan(4.0, limits, &s, &flat, |_| Ok(0.5)).unwrap();
        assert_eq!(out.target_velocity, 6.0);
    }

    #[test]
    fn empty_set_is_rejected() {
        assert!(VelocitySampleSet::new(vec![]).is_err());
    }

    #[test]
    fn risk_errors_propagate() {
        let limits = SpeedLimits { v_desired: 10.0, v_max: 10.0 };
        let s = sample_velocities(5.0, 10.0, 3).unwrap();
        let out = plan(5.0, limits, &s, &gains(), |_| Err(Error::input("boom")));
        assert!(out.is_err());
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        proptest! {
            #[test]
            fn plan_returns_a_sample_and_the_table_minimum(
                current in 0.0f64..15.0,
                v_max in 1.0f64..20.0,
                n in 2usize..30,
                risks in prop::collection::vec(0.0f64..1.0, 31),
            ) {
                let limits = SpeedLimits { v_desired: v_max, v_max };
                let s = sample_velocities(current, v_max, n).unwrap();
                let mut i = 0;
                let out = plan(current, limits, &s, &gains(), |_| { i += 1; Ok(risks[i - 1]) }).unwrap();
                prop_assert!(s.contains(out.target_velocity));
                let min = out.costs.iter().map(|c| c.total).fold(f64::INFINITY, f64::min);
                let chosen = out.costs.iter().find(|c| c.velocity == out.target_velocity).unwrap();
                prop_assert_eq!(chosen.total, min);
                for c in &out.costs {
                    prop_assert_eq!(c.total, c.risk - c.utility + c.comfort);
                }
            }

            #[test]
            fn riskless_comfortless_plan_is_largest_capped_sample(
                current in 0.0f64..15.0,
                v_max in 1.0f64..20.0,
                v_des_frac in 0.05f64..1.0,
                n in 2usize..30,
            ) {
                let v_desired = v_max * v_des_frac;
                let limits = SpeedLimits { v_desired, v_max };
                let s = sample_velocities(current, v_max, n).unwrap();
                let g = CostGains { k_o: 0.0, ..gains() };
                let out = plan(current, limits, &s, &g, |_| Ok(0.0)).unwrap();
                let below: Vec<f64> = s.samples().iter().copied().filter(|v| *v <= v_desired).collect();
                let best_utility = below.iter().copied().fold(0.0f64, f64::max);
                prop_assert!(out.target_velocity >= best_utility);
                prop_assert!(utility(out.target_velocity, v_desired, g.k_u) == utility(best_utility, v_desired, g.k_u)
                    || out.target_velocity >= v_desired);
            }

            #[test]
            fn uniform_gain_scaling_keeps_argmin(
                current in 0.0f64..15.0,
                risks in prop::collection::vec(0.0f64..1.0, 31),
                exp in -6i32..6,
            ) {
                let limits = SpeedLimits { v_desired: 10.0, v_max: 10.0 };
                let s = sample_velocities(current, 10.0, 21).unwrap();
                let factor = 2f64.powi(exp);
                let mut i = 0;
                let a = plan(current, limits, &s, &gains(), |_| { i += 1; Ok(risks[i - 1]) }).unwrap();
                let mut j = 0;
                let b = plan(current, limits, &s, &gains().scaled(factor), |_| { j += 1; Ok(risks[j - 1]) }).unwrap();
                prop_assert_eq!(a.target_velocity, b.target_velocity);
            }
        }
    }
}
