//! Episode simulation, warning evaluation against scripted ground truth,
//! baseline-vs-human-based comparison and report emission.

mod calibration;
mod report;
mod sim;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::personalization::{DriverType, ModelParameters};
use crate::scenarios::{
    variation_grid, EpisodeConfig, EpisodeKey, ErrorVariant, ModelKind, ScenarioCatalog,
    ScenarioName,
};

pub use calibration::{calibrate_threshold, threshold_grid, Calibration};
pub use report::{
    emit_reports, episodes_csv, format_summary_table, parse_episodes_csv, read_results,
    summary_csv, EPISODES_HEADER,
};
pub use sim::{
    episode_errors, evaluate_step, planning_setup, simulate, time_gap, EpisodeRun, GroundTruth,
    ScriptedTraffic, TraceStep,
};

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeResult {
    pub key: EpisodeKey,
    /// First time the warning signal reached the threshold.
    pub warning_time: Option<f64>,
    /// Ground truth: the scripted motion came closer than the critical time gap.
    pub critical: bool,
    pub min_timegap: Option<f64>,
    pub min_timegap_time: Option<f64>,
    pub trace: Option<Vec<TraceStep>>,
}

impl EpisodeResult {
    /// Times and gaps are rounded to the 1 ms resolution of the reports so
    /// that results read back from disk compare equal.
    pub fn from_run(run: EpisodeRun, params: &ModelParameters, keep_trace: bool) -> Self {
        Self {
            key: run.key,
            warning_time: run.warning_time(params.theta).map(report::round3),
            critical: run.truth.is_critical(params.critical_timegap),
            min_timegap: run.truth.min_timegap.map(report::round3),
            min_timegap_time: run.truth.min_timegap_time.map(report::round3),
            trace: keep_trace.then_some(run.steps),
        }
    }

    fn false_positive(&self) -> bool {
        self.warning_time.is_some() && !self.critical
    }

    fn false_negative(&self, margin: f64) -> bool {
        if !self.critical {
            return false;
        }
        match (self.warning_time, self.min_timegap_time) {
            (Some(w), Some(t_min)) => w > t_min - margin + 1e-9,
            (Some(_), None) => false,
            (None, _) => true,
        }
    }
}

pub fn run_episode(config: &EpisodeConfig, params: &ModelParameters) -> Result<EpisodeResult> {
    run_episode_traced(config, params, false)
}

pub fn run_episode_traced(
    config: &EpisodeConfig,
    params: &ModelParameters,
    keep_trace: bool,
) -> Result<EpisodeResult> {
    let run = simulate(config, params)?;
    Ok(EpisodeResult::from_run(run, params, keep_trace))
}

/// Identifies one configuration independent of the model under test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigKey {
    pub scenario: ScenarioName,
    pub variation: u8,
    pub driver: DriverType,
    pub error: ErrorVariant,
}

impl From<EpisodeKey> for ConfigKey {
    fn from(k: EpisodeKey) -> Self {
        Self {
            scenario: k.scenario,
            variation: k.variation,
            driver: k.driver,
            error: k.error,
        }
    }
}

/// Warning-error reduction of the human-based model over the baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorReduction {
    None = 0,
    FalsePositive = 1,
    FalseNegative = 2,
}

impl ErrorReduction {
    pub fn code(self) -> u8 {
        self as u8
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRecord {
    pub key: ConfigKey,
    /// Baseline warning time minus human-based warning time, when both warn.
    pub delta_t: Option<f64>,
    pub error_code: ErrorReduction,
}

pub fn classify(
    baseline: &EpisodeResult,
    human: &EpisodeResult,
    reaction_margin: f64,
) -> Result<ComparisonRecord> {
    if baseline.key.model != ModelKind::Baseline || human.key.model != ModelKind::HumanBased {
        return Err(Error::input("classify expects a baseline and a human-based result"));
    }
    let key = ConfigKey::from(baseline.key);
    if key != ConfigKey::from(human.key) {
        return Err(Error::input(format!(
            "results belong to different configurations: {:?} vs {:?}",
            baseline.key, human.key
        )));
    }
    let delta_t = match (baseline.warning_time, human.warning_time) {
        (Some(b), Some(h)) => Some(b - h),
        _ => None,
    };
    let error_code = if baseline.false_positive() && !human.false_positive() {
        ErrorReduction::FalsePositive
    } else if baseline.false_negative(reaction_margin) && !human.false_negative(reaction_margin) {
        ErrorReduction::FalseNegative
    } else {
        ErrorReduction::None
    };
    Ok(ComparisonRecord {
        key,
        delta_t,
        error_code,
    })
}

/// Pairs baseline and human-based results of the same configuration.
pub fn compare(results: &[EpisodeResult], reaction_margin: f64) -> Result<Vec<ComparisonRecord>> {
    let mut pairs: BTreeMap<ConfigKey, [Option<&EpisodeResult>; 2]> = BTreeMap::new();
    for r in results {
        let slot = match r.key.model {
            ModelKind::Baseline => 0,
            ModelKind::HumanBased => 1,
        };
        let entry = pairs.entry(r.key.into()).or_default();
        if entry[slot].replace(r).is_some() {
            return Err(Error::input(format!("duplicate result for {:?}", r.key)));
        }
    }
    pairs
        .into_iter()
        .map(|(key, pair)| match pair {
            [Some(b), Some(h)] => classify(b, h, reaction_margin),
            _ => Err(Error::input(format!("configuration {key:?} lacks one of the two models"))),
        })
        .collect()
}

/// Warning-time and error-reduction statistics of one driver type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverSummary {
    pub driver: DriverType,
    /// Number of error episodes where both models warned.
    pub timed: usize,
    pub mean: Option<f64>,
    /// Population variance.
    pub variance: Option<f64>,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub episodes: usize,
    pub fp_reduction_pct: f64,
    pub fn_reduction_pct: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryStatistics {
    pub rows: Vec<DriverSummary>,
}

impl SummaryStatistics {
    pub fn row(&self, driver: DriverType) -> Option<&DriverSummary> {
        self.rows.iter().find(|r| r.driver == driver)
    }
}

pub fn summarize(records: &[ComparisonRecord]) -> Result<SummaryStatistics> {
    if records.is_empty() {
        return Err(Error::input("no comparison records to summarize"));
    }
    let mut rows = Vec::new();
    for driver in DriverType::ALL {
        let mine: Vec<_> = records.iter().filter(|r| r.key.driver == driver).collect();
        if mine.is_empty() {
            continue;
        }
        let deltas: Vec<f64> = mine
            .iter()
            .filter(|r| r.key.error != ErrorVariant::None)
            .filter_map(|r| r.delta_t)
            .collect();
        let (mean, variance, min, max) = if deltas.is_empty() {
            (None, None, None, None)
        } else {
            let n = deltas.len() as f64;
            let mean = deltas.iter().sum::<f64>() / n;
            let var = deltas.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
            let min = deltas.iter().copied().fold(f64::INFINITY, f64::min);
            let max = deltas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (Some(mean), Some(var), Some(min), Some(max))
        };
        let pct = |code: ErrorReduction| {
            100.0 * mine.iter().filter(|r| r.error_code == code).count() as f64 / mine.len() as f64
        };
        rows.push(DriverSummary {
            driver,
            timed: deltas.len(),
            mean,
            variance,
            min,
            max,
            episodes: mine.len(),
            fp_reduction_pct: pct(ErrorReduction::FalsePositive),
            fn_reduction_pct: pct(ErrorReduction::FalseNegative),
        });
    }
    Ok(SummaryStatistics { rows })
}

/// Runs every configuration of the grid, `jobs` at a time. The returned
/// results are sorted by episode key regardless of execution order.
pub fn run_sweep(
    catalog: &ScenarioCatalog,
    params: &ModelParameters,
    jobs: usize,
) -> Result<Vec<EpisodeResult>> {
    params.validate()?;
    let grid = variation_grid(catalog);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::input(format!("cannot start worker pool: {e}")))?;
    let mut results: Vec<EpisodeResult> = pool.install(|| {
        grid.par_iter()
            .map(|config| run_episode(config, params))
            .collect::<Result<_>>()
    })?;
    results.sort_by_key(|r| r.key);
    Ok(results)
}
