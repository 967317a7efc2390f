//! Stochastic collision risk: Gaussian overlap per predicted timestep,
//! survival-weighted integration over the prediction horizon and the
//! personalized warning signal.

use nalgebra::{Matrix2, Point2, Rotation2};

use crate::error::{Error, Result};
use crate::personalization::DriverProfile;
use crate::world::Prediction;

/// Growth of positional uncertainty over the prediction horizon.
///
/// Standard deviations grow linearly from `sigma0_*` and saturate at
/// `growth_horizon`; the risk factor scales only the growth term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyConfig {
    pub sigma0_long: f64,
    pub sigma0_lat: f64,
    pub sigma_max_long: f64,
    pub sigma_max_lat: f64,
    pub growth_horizon: f64,
}

impl UncertaintyConfig {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.sigma0_long,
            self.sigma0_lat,
            self.sigma_max_long,
            self.sigma_max_lat,
            self.growth_horizon,
        ];
        if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::param("uncertainty values must be positive and finite"));
        }
        if self.sigma_max_long < self.sigma0_long || self.sigma_max_lat < self.sigma0_lat {
            return Err(Error::param("sigma_max must be >= sigma0"));
        }
        Ok(())
    }

    /// Path-frame standard deviations (longitudinal, lateral) at offset `s`.
    pub fn std_devs(&self, s: f64, alpha: f64) -> (f64, f64) {
        let growth = alpha * (s / self.growth_horizon).min(1.0);
        (
            self.sigma0_long + growth * self.sigma_max_long,
            self.sigma0_lat + growth * self.sigma_max_lat,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalConfig {
    /// Decay time constant in seconds.
    pub tau: f64,
    /// Prediction horizon in seconds.
    pub s_max: f64,
}

impl SurvivalConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::param("tau must be positive"));
        }
        if !(self.s_max > 0.0 && self.s_max.is_finite()) {
            return Err(Error::param("s_max must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskProfileSample {
    pub s: f64,
    pub p_coll: f64,
}

/// World-frame covariance at future offset `s` for a vehicle heading `heading`.
pub fn covariance_at(
    cfg: &UncertaintyConfig,
    s: f64,
    alpha: f64,
    heading: f64,
) -> Result<Matrix2<f64>> {
    if alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::param(format!("risk factor must be > 0, got {alpha}")));
    }
    let (sl, st) = cfg.std_devs(s.max(0.0), alpha);
    let local = Matrix2::new(sl * sl, 0.0, 0.0, st * st);
    let rot = Rotation2::new(heading);
    let r = rot.matrix();
    Ok(r * local * r.transpose())
}

/// Overlap of two 2D Gaussians, scaled by the collision area `area`.
pub fn collision_probability(
    mu1: &Point2<f64>,
    mu2: &Point2<f64>,
    s1: &Matrix2<f64>,
    s2: &Matrix2<f64>,
    area: f64,
) -> Result<f64> {
    let sum = s1 + s2;
    let det = sum.determinant();
    if !det.is_finite() || det <= f64::EPSILON {
        return Err(Error::NumericDegeneracy(format!(
            "covariance sum is singular (det = {det})"
        )));
    }
    // Closed-form inverse of a 2x2 matrix.
    let inv = Matrix2::new(sum[(1, 1)], -sum[(0, 1)], -sum[(1, 0)], sum[(0, 0)]) / det;
    let d = mu2 - mu1;
    let mahalanobis2 = (d.transpose() * inv * d)[(0, 0)];
    let norm = 1.0 / (std::f64::consts::TAU * det.sqrt());
    Ok(area * norm * (-0.5 * mahalanobis2).exp())
}

pub fn survival(s: f64, cfg: &SurvivalConfig) -> f64 {
    (-s / cfg.tau).exp()
}

/// Trapezoidal quadrature of `p_coll(s) * survival(s)` over the profile.
pub fn integrate_risk(profile: &[RiskProfileSample], cfg: &SurvivalConfig) -> f64 {
    profile
        .windows(2)
        .map(|w| {
            let f0 = w[0].p_coll * survival(w[0].s, cfg);
            let f1 = w[1].p_coll * survival(w[1].s, cfg);
            0.5 * (f0 + f1) * (w[1].s - w[0].s)
        })
        .sum()
}

/// Everything needed to turn two predictions into a risk value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskModel {
    pub ego_uncertainty: UncertaintyConfig,
    pub other_uncertainty: UncertaintyConfig,
    pub survival: SurvivalConfig,
    /// Collision area that makes the Gaussian overlap dimensionless (m²).
    pub collision_area: f64,
    /// Prediction sample step (s).
    pub dt: f64,
}

impl RiskModel {
    pub fn validate(&self) -> Result<()> {
        self.ego_uncertainty.validate()?;
        self.other_uncertainty.validate()?;
        self.survival.validate()?;
        if !(self.collision_area > 0.0 && self.collision_area.is_finite()) {
            return Err(Error::param("collision area must be positive"));
        }
        if !(self.dt > 0.0 && self.dt <= self.survival.s_max) {
            return Err(Error::param("prediction step must be in (0, s_max]"));
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.survival.s_max
    }

    /// Collision-probability profile between two predictions.
    pub fn profile(
        &self,
        ego: &Prediction,
        other: &Prediction,
        alpha: f64,
    ) -> Result<Vec<RiskProfileSample>> {
        if ego.len() != other.len() {
            return Err(Error::input(format!(
                "prediction grids differ in length ({} vs {})",
                ego.len(),
                other.len()
            )));
        }
        ego.iter()
            .zip(other)
            .map(|(a, b)| {
                if (a.t - b.t).abs() > 1e-9 {
                    return Err(Error::input(format!(
                        "prediction grids differ at t = {} vs {}",
                        a.t, b.t
                    )));
                }
                let s1 = covariance_at(&self.ego_uncertainty, a.t, alpha, a.heading)?;
                let s2 = covariance_at(&self.other_uncertainty, b.t, alpha, b.heading)?;
                let p = collision_probability(&a.position, &b.position, &s1, &s2, self.collision_area)?;
                Ok(RiskProfileSample { s: a.t, p_coll: p })
            })
            .collect()
    }

    /// Survival-weighted risk between the ego prediction and one other vehicle.
    pub fn risk_between(&self, ego: &Prediction, other: &Prediction, alpha: f64) -> Result<f64> {
        let profile = self.profile(ego, other, alpha)?;
        Ok(integrate_risk(&profile, &self.survival))
    }

    /// Total risk against a set of other vehicles.
    pub fn risk_to_all<'a>(
        &self,
        ego: &Prediction,
        others: impl IntoIterator<Item = &'a Prediction>,
        alpha: f64,
    ) -> Result<f64> {
        let mut total = 0.0;
        for other in others {
            total += self.risk_between(ego, other, alpha)?;
        }
        Ok(total)
    }
}

/// Warning signal: the risk weighted by the driver's risk weight.
pub fn warning_signal(risk: f64, profile: &DriverProfile) -> f64 {
    profile.weight * risk
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, PI};
    use std::sync::Arc;

    use super::*;
    use crate::personalization::{profile_for, DriverType};
    use crate::world::{predict, DrivingPath, MotionPlan, VehicleState};

    fn unc() -> UncertaintyConfig {
        UncertaintyConfig {
            sigma0_long: 0.5,
            sigma0_lat: 0.5,
            sigma_max_long: 6.0,
            sigma_max_lat: 1.5,
            growth_horizon: 8.0,
        }
    }

    fn model() -> RiskModel {
        RiskModel {
            ego_uncertainty: unc(),
            other_uncertainty: unc(),
            survival: SurvivalConfig { tau: 4.0, s_max: 8.0 },
            collision_area: 4.0,
            dt: 0.2,
        }
    }

    #[test]
    fn covariance_without_growth() {
        for alpha in [0.04, 0.5, 1.0] {
            let c = covariance_at(&unc(), 0.0, alpha, 0.0).unwrap();
            assert!((c - Matrix2::new(0.25, 0.0, 0.0, 0.25)).norm() < 1e-15);
        }
    }

    #[test]
    fn covariance_full_saturation() {
        let c = covariance_at(&unc(), 8.0, 1.0, 0.0).unwrap();
        assert!((c[(0, 0)] - 6.5f64.powi(2)).abs() < 1e-12);
        assert!((c[(1, 1)] - 2.0f64.powi(2)).abs() < 1e-12);
        // Saturates past the horizon.
        assert_eq!(c, covariance_at(&unc(), 12.0, 1.0, 0.0).unwrap());
    }

    #[test]
    fn covariance_rotation() {
        let c = covariance_at(&unc(), 4.0, 1.0, FRAC_PI_2).unwrap();
        let (sl, st) = unc().std_devs(4.0, 1.0);
        assert!((c[(0, 0)] - st * st).abs() < 1e-12);
        assert!((c[(1, 1)] - sl * sl).abs() < 1e-12);
        assert!(c[(0, 1)].abs() < 1e-12);
        assert!((c[(0, 1)] - c[(1, 0)]).abs() < 1e-15);
    }

    #[test]
    fn covariance_rejects_non_positive_alpha() {
        assert!(matches!(
            covariance_at(&unc(), 1.0, 0.0, 0.0),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn unit_covariance_peak() {
        let p = Point2::origin();
        let v = collision_probability(&p, &p, &Matrix2::identity(), &Matrix2::identity(), 1.0)
            .unwrap();
        assert!((v - 1.0 / (4.0 * PI)).abs() < 1e-15);
        assert!((v - 0.07958).abs() < 1e-5);
    }

    #[test]
    fn singular_sum_is_rejected() {
        let p = Point2::origin();
        let z = Matrix2::zeros();
        assert!(matches!(
            collision_probability(&p, &p, &z, &z, 1.0),
            Err(Error::NumericDegeneracy(_))
        ));
    }

    #[test]
    fn overlap_decays_along_ray() {
        let s = Matrix2::new(2.0, 0.3, 0.3, 1.0);
        let o = Point2::origin();
        let mut last = f64::INFINITY;
        for k in 0..50 {
            let mu = Point2::new(0.7 * k as f64, 0.4 * k as f64);
            let v = collision_probability(&o, &mu, &s, &s, 4.0).unwrap();
            assert!(v < last);
            last = v;
        }
        assert!(last < 1e-12);
    }

    #[test]
    fn survival_values() {
        let cfg = SurvivalConfig { tau: 4.0, s_max: 8.0 };
        assert_eq!(survival(0.0, &cfg), 1.0);
        assert!((survival(4.0, &cfg) - (-1.0f64).exp()).abs() < 1e-15);
        assert!((survival(4.0, &cfg) - 0.3679).abs() < 1e-4);
        let grid: Vec<f64> = (0..=40).map(|k| survival(0.2 * k as f64, &cfg)).collect();
        assert!(grid.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn empty_and_zero_profiles() {
        let cfg = SurvivalConfig { tau: 4.0, s_max: 8.0 };
        assert_eq!(integrate_risk(&[], &cfg), 0.0);
        let zeros: Vec<_> = (0..=40)
            .map(|k| RiskProfileSample { s: 0.2 * k as f64, p_coll: 0.0 })
            .collect();
        assert_eq!(integrate_risk(&zeros, &cfg), 0.0);
    }

    fn constant_profile(c: f64, dt: f64, s_max: f64) -> Vec<RiskProfileSample> {
        let n = (s_max / dt).round() as usize;
        (0..=n)
            .map(|k| RiskProfileSample { s: k as f64 * dt, p_coll: c })
            .collect()
    }

    #[test]
    fn constant_profile_matches_closed_form() {
        let cfg = SurvivalConfig { tau: 4.0, s_max: 8.0 };
        let c = 0.3;
        let exact = c * cfg.tau * (1.0 - (-cfg.s_max / cfg.tau).exp());
        let got = integrate_risk(&constant_profile(c, 0.05, 8.0), &cfg);
        assert!(((got - exact) / exact).abs() < 1e-3);
    }

    #[test]
    fn quadrature_converges_on_halving() {
        let cfg = SurvivalConfig { tau: 4.0, s_max: 8.0 };
        let smooth = |dt: f64| -> Vec<RiskProfileSample> {
            let n = (8.0 / dt).round() as usize;
            (0..=n)
                .map(|k| {
                    let s = k as f64 * dt;
                    RiskProfileSample { s, p_coll: 0.2 * (-(s - 3.0).powi(2) / 2.0).exp() }
                })
                .collect()
        };
        let coarse = integrate_risk(&smooth(0.2), &cfg);
        let fine = integrate_risk(&smooth(0.1), &cfg);
        assert!(((coarse - fine) / fine).abs() < 5e-3);
    }

    fn straight(y: f64, reverse: bool) -> Arc<DrivingPath> {
        let pts = if reverse {
            [[200.0, y], [-200.0, y]]
        } else {
            [[-200.0, y], [200.0, y]]
        };
        Arc::new(DrivingPath::from_xy(&pts).unwrap())
    }

    #[test]
    fn converging_pair_is_riskier_than_diverging_pair() {
        let m = model();
        let ego = VehicleState::new(straight(0.0, false), 200.0, 10.0, 1.0).unwrap();
        // Oncoming on the same line, 60 m ahead.
        let toward = VehicleState::new(straight(0.0, true), 140.0, 10.0, 1.0).unwrap();
        // Mirror: 60 m behind and driving away.
        let away = VehicleState::new(straight(0.0, true), 260.0, 10.0, 1.0).unwrap();
        let pe = predict(&ego, &MotionPlan::hold(), 8.0, 0.2);
        let pt = predict(&toward, &MotionPlan::hold(), 8.0, 0.2);
        let pa = predict(&away, &MotionPlan::hold(), 8.0, 0.2);
        let r_toward = m.risk_between(&pe, &pt, 0.5).unwrap();
        let r_away = m.risk_between(&pe, &pa, 0.5).unwrap();
        assert!(r_toward > r_away);
        assert_eq!(m.risk_to_all(&pe, std::iter::empty(), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn mismatched_grids_are_rejected() {
        let m = model();
        let ego = VehicleState::new(straight(0.0, false), 200.0, 10.0, 1.0).unwrap();
        let a = predict(&ego, &MotionPlan::hold(), 8.0, 0.2);
        let b = predict(&ego, &MotionPlan::hold(), 8.0, 0.1);
        assert!(matches!(m.risk_between(&a, &b, 0.5), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn warning_signal_weights() {
        let normal = profile_for(DriverType::Normal);
        let defensive = profile_for(DriverType::Defensive);
        assert_eq!(warning_signal(0.37, &normal), 0.37);
        assert!((warning_signal(0.02, &defensive) - 0.2).abs() < 1e-15);
        for t in DriverType::ALL {
            assert_eq!(warning_signal(0.0, &profile_for(t)), 0.0);
        }
    }

    mod props {
        use proptest::prelude::*;

        use super::*;

        fn spd() -> impl Strategy<Value = Matrix2<f64>> {
            (0.1f64..5.0, 0.1f64..5.0, -PI..PI).prop_map(|(a, b, th)| {
                let r = *Rotation2::new(th).matrix();
                r * Matrix2::new(a * a, 0.0, 0.0, b * b) * r.transpose()
            })
        }

        proptest! {
            #[test]
            fn overlap_is_symmetric(
                x1 in -10.0f64..10.0, y1 in -10.0f64..10.0,
                x2 in -10.0f64..10.0, y2 in -10.0f64..10.0,
                s1 in spd(), s2 in spd(),
            ) {
                let (m1, m2) = (Point2::new(x1, y1), Point2::new(x2, y2));
                let a = collision_probability(&m1, &m2, &s1, &s2, 4.0).unwrap();
                let b = collision_probability(&m2, &m1, &s2, &s1, 4.0).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
            }

            #[test]
            fn overlap_peaks_at_coincident_means(
                x in -10.0f64..10.0, y in -10.0f64..10.0,
                s1 in spd(), s2 in spd(),
            ) {
                let o = Point2::origin();
                let peak = collision_probability(&o, &o, &s1, &s2, 4.0).unwrap();
                let off = collision_probability(&o, &Point2::new(x, y), &s1, &s2, 4.0).unwrap();
                prop_assert!(off <= peak);
            }

            #[test]
            fn integration_is_monotone(
                base in prop::collection::vec(0.0f64..1.0, 41),
                bump in prop::collection::vec(0.0f64..1.0, 41),
            ) {
                let cfg = SurvivalConfig { tau: 4.0, s_max: 8.0 };
                let lo: Vec<_> = base.iter().enumerate()
                    .map(|(k, &p)| RiskProfileSample { s: 0.2 * k as f64, p_coll: p })
                    .collect();
                let hi: Vec<_> = lo.iter().zip(&bump)
                    .map(|(s, &b)| RiskProfileSample { s: s.s, p_coll: s.p_coll + b })
                    .collect();
                prop_assert!(integrate_risk(&hi, &cfg) >= integrate_risk(&lo, &cfg));
            }

            #[test]
            fn warning_is_linear(r in 0.0f64..10.0, w in 0.01f64..20.0, k in 0.1f64..10.0) {
                let p = DriverProfile { driver_type: DriverType::Normal, alpha: 0.5, weight: w };
                let scaled = DriverProfile { weight: w * k, ..p };
                prop_assert!((warning_signal(k * r, &p) - k * warning_signal(r, &p)).abs() <= 1e-12 * (k * r * w).max(1.0));
                prop_assert!((warning_signal(r, &scaled) - k * warning_signal(r, &p)).abs() <= 1e-12 * (k * r * w).max(1.0));
            }
        }
    }
}
