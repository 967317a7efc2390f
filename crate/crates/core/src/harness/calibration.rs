//! Warning-threshold calibration.
//!
//! Episodes are simulated once; the warning signal does not depend on the
//! threshold, so every grid value is evaluated on the same traces.

use rayon::prelude::*;

use super::{simulate, EpisodeResult, EpisodeRun};
use crate::error::{Error, Result};
use crate::personalization::{DriverType, ModelParameters};
use crate::scenarios::{variation_grid, ErrorVariant, ModelKind, ScenarioCatalog};

/// Log-spaced candidates 10^(-4 + k/20), k = 0..=100.
pub fn threshold_grid() -> Vec<f64> {
    (0..=100).map(|k| 10f64.powf(-4.0 + k as f64 / 20.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub theta: f64,
    /// Largest warning signal among defensive no-error episodes.
    pub defensive_peak: f64,
    pub baseline_fp: usize,
    pub confident_fp: usize,
}

fn false_positives<'a>(
    runs: impl Iterator<Item = &'a EpisodeRun>,
    params: &ModelParameters,
) -> usize {
    runs.map(|r| EpisodeResult::from_run(r.clone(), params, false))
        .filter(|r| r.warning_time.is_some() && !r.critical)
        .count()
}

/// Smallest grid threshold for which defensive drivers without errors never
/// get a warning and confident drivers without errors get fewer false
/// positives than the baseline.
pub fn calibrate_threshold(catalog: &ScenarioCatalog, params: &ModelParameters) -> Result<Calibration> {
    params.validate()?;
    let configs: Vec<_> = variation_grid(catalog)
        .into_iter()
        .filter(|c| c.error == ErrorVariant::None)
        .filter(|c| c.model == ModelKind::Baseline || c.driver != DriverType::Normal)
        .collect();
    let runs: Vec<EpisodeRun> = configs
        .par_iter()
        .map(|c| simulate(c, params))
        .collect::<Result<_>>()?;

    // the baseline does not depend on the driver type; count it once
    let baseline = || {
        runs.iter()
            .filter(|r| r.key.model == ModelKind::Baseline && r.key.driver == DriverType::Normal)
    };
    let human = |d: DriverType| {
        runs.iter()
            .filter(move |r| r.key.model == ModelKind::HumanBased && r.key.driver == d)
    };
    let defensive_peak = human(DriverType::Defensive)
        .map(EpisodeRun::peak_warning)
        .fold(0.0, f64::max);

    for theta in threshold_grid() {
        if defensive_peak >= theta {
            continue;
        }
        let p = ModelParameters {
            theta,
            ..*params
        };
        let baseline_fp = false_positives(baseline(), &p);
        let confident_fp = false_positives(human(DriverType::Confident), &p);
        if confident_fp < baseline_fp {
            return Ok(Calibration {
                theta,
                defensive_peak,
                baseline_fp,
                confident_fp,
            });
        }
    }
    Err(Error::input(format!(
        "no threshold on the grid satisfies both guidelines (defensive peak {defensive_peak:.4})"
    )))
}
