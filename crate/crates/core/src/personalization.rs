//! Driver types, their risk factor and risk weight, and the full parameter
//! registry shared by the baseline and the human-based model.
//!
//! Parameter files are flat TOML, one key per parameter. Any key may be
//! omitted, in which case the default below applies.
//!
//! | key              | meaning                                          | default |
//! |------------------|--------------------------------------------------|---------|
//! | `v_off`          | forecast-error velocity offset (m/s)             | -4      |
//! | `a_intent`       | inference-error acceleration (m/s²)              | -1.5    |
//! | `t_intent`       | inference-error acceleration duration (s)        | 3       |
//! | `alpha_def`      | risk factor, defensive                           | 1       |
//! | `alpha_norm`     | risk factor, normal (also the baseline)          | 0.5     |
//! | `alpha_conf`     | risk factor, confident                           | 0.04    |
//! | `w_def`          | risk weight, defensive                           | 10      |
//! | `w_norm`         | risk weight, normal (also the baseline)          | 1       |
//! | `w_conf`         | risk weight, confident                           | 0.1     |
//! | `s_max`          | prediction horizon (s)                           | 8       |
//! | `a_coll`         | collision area normalizing the overlap (m²)      | 4       |
//! | `sigma0_long`    | initial longitudinal std dev (m)                 | 0.5     |
//! | `sigma0_lat`     | initial lateral std dev (m)                      | 0.5     |
//! | `sigma_max_long` | longitudinal std-dev growth at horizon (m)       | 3       |
//! | `sigma_max_lat`  | lateral std-dev growth at horizon (m)            | 0.75    |
//! | `tau`            | survival decay time constant (s)                 | 4       |
//! | `dt_predict`     | prediction sample step (s)                       | 0.2     |
//! | `dt_sim`         | simulation step (s)                              | 0.1     |
//! | `k_r`            | planner risk gain                                | 100     |
//! | `k_u`            | planner utility gain                             | 0.15    |
//! | `k_o`            | planner comfort gain                             | 0.05    |
//! | `v_ref`          | comfort normalization speed (m/s)                | 10      |
//! | `a_ramp`         | planner ramp acceleration magnitude (m/s²)       | 2       |
//! | `n_samples`      | planner velocity sample count                    | 21      |
//! | `theta`          | warning threshold                                | see [`DEFAULT_THETA`] |
//! | `critical_timegap` | ground-truth time-gap threshold (s)            | 1       |
//! | `reaction_margin`  | minimum warning lead before the gap minimum (s)| 0.5     |

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::planner::{CostGains, PlannerConfig};
use crate::risk::{RiskModel, SurvivalConfig, UncertaintyConfig};

/// Warning threshold produced by [`crate::harness::calibrate_threshold`] on
/// the built-in scenario set with the other defaults in this module
/// (grid point 10^-1.1).
pub const DEFAULT_THETA: f64 = 0.079_432_823_472_428_14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriverType {
    Defensive,
    Normal,
    Confident,
}

impl DriverType {
    pub const ALL: [DriverType; 3] = [DriverType::Defensive, DriverType::Normal, DriverType::Confident];

    pub fn as_str(self) -> &'static str {
        match self {
            DriverType::Defensive => "defensive",
            DriverType::Normal => "normal",
            DriverType::Confident => "confident",
        }
    }
}

impl fmt::Display for DriverType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DriverType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "defensive" => Ok(DriverType::Defensive),
            "normal" => Ok(DriverType::Normal),
            "confident" => Ok(DriverType::Confident),
            other => Err(Error::input(format!("unknown driver type '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverProfile {
    pub driver_type: DriverType,
    /// Risk factor scaling the uncertainty growth.
    pub alpha: f64,
    /// Risk weight applied to the warning signal.
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParameters {
    pub v_off: f64,
    pub a_intent: f64,
    pub t_intent: f64,
    pub alpha_def: f64,
    pub alpha_norm: f64,
    pub alpha_conf: f64,
    pub w_def: f64,
    pub w_norm: f64,
    pub w_conf: f64,
    pub s_max: f64,

    pub a_coll: f64,
    pub sigma0_long: f64,
    pub sigma0_lat: f64,
    pub sigma_max_long: f64,
    pub sigma_max_lat: f64,
    pub tau: f64,
    pub dt_predict: f64,
    pub dt_sim: f64,
    pub k_r: f64,
    pub k_u: f64,
    pub k_o: f64,
    pub v_ref: f64,
    pub a_ramp: f64,
    pub n_samples: usize,
    pub theta: f64,
    pub critical_timegap: f64,
    pub reaction_margin: f64,
}

impl Default for ModelParameters {
    fn default() -> Self {
        Self {
            v_off: -4.0,
            a_intent: -1.5,
            t_intent: 3.0,
            alpha_def: 1.0,
            alpha_norm: 0.5,
            alpha_conf: 0.04,
            w_def: 10.0,
            w_norm: 1.0,
            w_conf: 0.1,
            s_max: 8.0,

            a_coll: 4.0,
            sigma0_long: 0.5,
            sigma0_lat: 0.5,
            sigma_max_long: 3.0,
            sigma_max_lat: 0.75,
            tau: 4.0,
            dt_predict: 0.2,
            dt_sim: 0.1,
            k_r: 100.0,
            k_u: 0.15,
            k_o: 0.05,
            v_ref: 10.0,
            a_ramp: 2.0,
            n_samples: 21,
            theta: DEFAULT_THETA,
            critical_timegap: 1.0,
            reaction_margin: 0.5,
        }
    }
}

impl ModelParameters {
    pub fn validate(&self) -> Result<()> {
        let named = [
            ("v_off", self.v_off),
            ("a_intent", self.a_intent),
            ("t_intent", self.t_intent),
            ("alpha_def", self.alpha_def),
            ("alpha_norm", self.alpha_norm),
            ("alpha_conf", self.alpha_conf),
            ("w_def", self.w_def),
            ("w_norm", self.w_norm),
            ("w_conf", self.w_conf),
            ("s_max", self.s_max),
            ("a_coll", self.a_coll),
            ("sigma0_long", self.sigma0_long),
            ("sigma0_lat", self.sigma0_lat),
            ("sigma_max_long", self.sigma_max_long),
            ("sigma_max_lat", self.sigma_max_lat),
            ("tau", self.tau),
            ("dt_predict", self.dt_predict),
            ("dt_sim", self.dt_sim),
            ("k_r", self.k_r),
            ("k_u", self.k_u),
            ("k_o", self.k_o),
            ("v_ref", self.v_ref),
            ("a_ramp", self.a_ramp),
            ("theta", self.theta),
            ("critical_timegap", self.critical_timegap),
            ("reaction_margin", self.reaction_margin),
        ];
        if let Some((name, _)) = named.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::param(format!("{name} must be finite")));
        }
        let positive = [
            ("alpha_def", self.alpha_def),
            ("alpha_norm", self.alpha_norm),
            ("alpha_conf", self.alpha_conf),
            ("w_def", self.w_def),
            ("w_norm", self.w_norm),
            ("w_conf", self.w_conf),
            ("s_max", self.s_max),
            ("t_intent", self.t_intent),
            ("dt_sim", self.dt_sim),
            ("v_ref", self.v_ref),
            ("a_ramp", self.a_ramp),
            ("theta", self.theta),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v <= 0.0) {
            return Err(Error::param(format!("{name} must be > 0")));
        }
        if self.n_samples < 2 {
            return Err(Error::param("n_samples must be >= 2"));
        }
        if self.k_r < 0.0 || self.k_u < 0.0 || self.k_o < 0.0 {
            return Err(Error::param("planner gains must be >= 0"));
        }
        if self.critical_timegap < 0.0 || self.reaction_margin < 0.0 {
            return Err(Error::param("criticality thresholds must be >= 0"));
        }
        self.risk_model().validate()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let params: Self = toml::from_str(text).map_err(|e| Error::parse("parameter file", e))?;
        params.validate()?;
        Ok(params)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Parse { message, .. } => Error::parse(path.display().to_string(), message),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("parameters always serialize")
    }

    pub fn profile_for(&self, driver_type: DriverType) -> DriverProfile {
        let (alpha, weight) = match driver_type {
            DriverType::Defensive => (self.alpha_def, self.w_def),
            DriverType::Normal => (self.alpha_norm, self.w_norm),
            DriverType::Confident => (self.alpha_conf, self.w_conf),
        };
        DriverProfile {
            driver_type,
            alpha,
            weight,
        }
    }

    /// The baseline model uses the normal driver's parametrization.
    pub fn baseline_profile(&self) -> DriverProfile {
        self.profile_for(DriverType::Normal)
    }

    /// Risk weight for an arbitrary risk factor, linear between the
    /// confident and defensive calibration points. Not an exact fit of the
    /// tabulated normal weight; tabulated types use [`Self::profile_for`].
    pub fn interpolated_weight(&self, alpha: f64) -> f64 {
        let span = self.alpha_def - self.alpha_conf;
        self.w_conf + (self.w_def - self.w_conf) * (alpha - self.alpha_conf) / span
    }

    pub fn uncertainty(&self) -> UncertaintyConfig {
        UncertaintyConfig {
            sigma0_long: self.sigma0_long,
            sigma0_lat: self.sigma0_lat,
            sigma_max_long: self.sigma_max_long,
            sigma_max_lat: self.sigma_max_lat,
            growth_horizon: self.s_max,
        }
    }

    pub fn risk_model(&self) -> RiskModel {
        RiskModel {
            ego_uncertainty: self.uncertainty(),
            other_uncertainty: self.uncertainty(),
            survival: SurvivalConfig {
                tau: self.tau,
                s_max: self.s_max,
            },
            collision_area: self.a_coll,
            dt: self.dt_predict,
        }
    }

    pub fn planner_config(&self) -> PlannerConfig {
        PlannerConfig {
            gains: CostGains {
                k_r: self.k_r,
                k_u: self.k_u,
                k_o: self.k_o,
                v_ref: self.v_ref,
            },
            n_samples: self.n_samples,
            a_ramp: self.a_ramp,
        }
    }
}

/// Profile of a driver type under the default parameters.
pub fn profile_for(driver_type: DriverType) -> DriverProfile {
    ModelParameters::default().profile_for(driver_type)
}

/// Profile used by the baseline model under the default parameters.
pub fn baseline_profile() -> DriverProfile {
    ModelParameters::default().baseline_profile()
}
