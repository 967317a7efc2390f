//! CSV report files.
//!
//! `episodes.csv` holds one row per simulated episode. The FN decision also
//! needs the time at which the minimum time gap occurred, which lives in
//! `ground_truth.csv` (one row per scenario variation) so that a report can be
//! recomputed from disk alone.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{compare, summarize, EpisodeResult, SummaryStatistics};
use crate::error::{Error, Result};
use crate::personalization::DriverType;
use crate::scenarios::{EpisodeKey, ErrorVariant, ModelKind, ScenarioName};

pub const EPISODES_HEADER: [&str; 8] = [
    "scenario",
    "variation",
    "driver_type",
    "error_variant",
    "model",
    "warning_time",
    "critical",
    "min_timegap",
];

const GROUND_TRUTH_HEADER: [&str; 5] = [
    "scenario",
    "variation",
    "critical",
    "min_timegap",
    "min_timegap_time",
];

pub(crate) fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn fmt3(x: Option<f64>) -> String {
    match x {
        // avoid printing "-0.000"
        Some(v) => format!("{:.3}", round3(v) + 0.0),
        None => String::new(),
    }
}

fn parse_opt(field: &str, what: &str) -> Result<Option<f64>> {
    if field.trim().is_empty() {
        return Ok(None);
    }
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|e| Error::parse(what, format!("'{field}': {e}")))?;
    if !v.is_finite() {
        return Err(Error::parse(what, format!("non-finite value '{field}'")));
    }
    Ok(Some(v))
}

#[derive(Debug, Serialize, Deserialize)]
struct EpisodeRow {
    scenario: String,
    variation: u8,
    driver_type: String,
    error_variant: String,
    model: String,
    warning_time: String,
    critical: u8,
    min_timegap: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct TruthRow {
    scenario: String,
    variation: u8,
    critical: u8,
    min_timegap: String,
    min_timegap_time: String,
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_text<T: Serialize>(header: &[&str], rows: &[T]) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(header).map_err(|e| Error::parse("csv", e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::parse("csv", e))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::parse("csv", e))?;
    String::from_utf8(bytes).map_err(|e| Error::parse("csv", e))
}

pub fn episodes_csv(results: &[EpisodeResult]) -> Result<String> {
    let rows: Vec<_> = results
        .iter()
        .map(|r| EpisodeRow {
            scenario: r.key.scenario.to_string(),
            variation: r.key.variation,
            driver_type: r.key.driver.to_string(),
            error_variant: r.key.error.to_string(),
            model: r.key.model.to_string(),
            warning_time: fmt3(r.warning_time),
            critical: r.critical as u8,
            min_timegap: fmt3(r.min_timegap),
        })
        .collect();
    csv_text(&EPISODES_HEADER, &rows)
}

fn ground_truth_csv(results: &[EpisodeResult]) -> Result<String> {
    let mut rows: Vec<TruthRow> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for r in results {
        if seen.insert((r.key.scenario, r.key.variation)) {
            rows.push(TruthRow {
                scenario: r.key.scenario.to_string(),
                variation: r.key.variation,
                critical: r.critical as u8,
                min_timegap: fmt3(r.min_timegap),
                min_timegap_time: fmt3(r.min_timegap_time),
            });
        }
    }
    csv_text(&GROUND_TRUTH_HEADER, &rows)
}

fn heatmap_columns() -> Vec<(ScenarioName, u8)> {
    ScenarioName::ALL
        .into_iter()
        .flat_map(|s| (1..=3).map(move |k| (s, k)))
        .collect()
}

fn heatmap<F>(driver: DriverType, records: &[super::ComparisonRecord], cell: F) -> String
where
    F: Fn(&super::ComparisonRecord) -> String,
{
    let cols = heatmap_columns();
    let mut out = String::from("error_variant");
    for (s, k) in &cols {
        let _ = write!(out, ",{s}-{k}");
    }
    out.push('\n');
    for error in ErrorVariant::ALL {
        out.push_str(error.as_str());
        for &(s, k) in &cols {
            out.push(',');
            if let Some(r) = records.iter().find(|r| {
                r.key.driver == driver && r.key.error == error && r.key.scenario == s && r.key.variation == k
            }) {
                out.push_str(&cell(r));
            }
        }
        out.push('\n');
    }
    out
}

pub fn summary_csv(summary: &SummaryStatistics) -> String {
    let mut out = String::from("driver_type,abs,var,min,max,fp,fn\n");
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.driver,
            fmt3(r.mean),
            fmt3(r.variance),
            fmt3(r.min),
            fmt3(r.max),
            fmt3(Some(r.fp_reduction_pct)),
            fmt3(Some(r.fn_reduction_pct)),
        );
    }
    out
}

/// Human-readable version of the summary for the terminal.
pub fn format_summary_table(summary: &SummaryStatistics) -> String {
    let cell = |x: Option<f64>| x.map_or_else(|| "-".to_string(), |v| format!("{:.3}", v + 0.0));
    let mut out = format!(
        "{:<10} {:>8} {:>8} {:>8} {:>8} {:>8} {:>8}\n",
        "driver", "abs[s]", "var", "min[s]", "max[s]", "FP[%]", "FN[%]"
    );
    for r in &summary.rows {
        let _ = writeln!(
            out,
            "{:<10} {:>8} {:>8} {:>8} {:>8} {:>8.3} {:>8.3}",
            r.driver.as_str(),
            cell(r.mean),
            cell(r.variance),
            cell(r.min),
            cell(r.max),
            r.fp_reduction_pct,
            r.fn_reduction_pct
        );
    }
    out
}

/// Writes episodes, ground truth, the six heatmaps and the summary into
/// `out_dir`, creating it if needed.
pub fn emit_reports(
    results: &[EpisodeResult],
    reaction_margin: f64,
    out_dir: &Path,
) -> Result<SummaryStatistics> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let records = compare(results, reaction_margin)?;
    let summary = summarize(&records)?;

    write_file(&out_dir.join("episodes.csv"), &episodes_csv(results)?)?;
    write_file(&out_dir.join("ground_truth.csv"), &ground_truth_csv(results)?)?;
    for driver in DriverType::ALL {
        let time = heatmap(driver, &records, |r| fmt3(r.delta_t));
        let err = heatmap(driver, &records, |r| r.error_code.code().to_string());
        write_file(&out_dir.join(format!("heatmap_time_{driver}.csv")), &time)?;
        write_file(&out_dir.join(format!("heatmap_error_{driver}.csv")), &err)?;
    }
    write_file(&out_dir.join("summary.csv"), &summary_csv(&summary))?;
    Ok(summary)
}

/// Parses the text of an `episodes.csv` file. Ground-truth timing is left
/// empty.
pub fn parse_episodes_csv(text: &str) -> Result<Vec<EpisodeResult>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::parse("episodes.csv", e))?;
    if header.iter().ne(EPISODES_HEADER) {
        return Err(Error::parse("episodes.csv", "unexpected header"));
    }
    let mut out = Vec::new();
    for row in reader.deserialize::<EpisodeRow>() {
        let row = row.map_err(|e| Error::parse("episodes.csv", e))?;
        if row.critical > 1 {
            return Err(Error::parse("episodes.csv", "critical must be 0 or 1"));
        }
        let key = EpisodeKey {
            scenario: row.scenario.parse::<ScenarioName>()?,
            variation: row.variation,
            driver: row.driver_type.parse::<DriverType>()?,
            error: row.error_variant.parse::<ErrorVariant>()?,
            model: row.model.parse::<ModelKind>()?,
        };
        out.push(EpisodeResult {
            key,
            warning_time: parse_opt(&row.warning_time, "warning_time")?,
            critical: row.critical == 1,
            min_timegap: parse_opt(&row.min_timegap, "min_timegap")?,
            min_timegap_time: None,
            trace: None,
        });
    }
    Ok(out)
}

/// Reads the results written by [`emit_reports`] back from `dir`.
pub fn read_results(dir: &Path) -> Result<Vec<EpisodeResult>> {
    let path = dir.join("episodes.csv");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut results = parse_episodes_csv(&text)?;
    if results.is_empty() {
        return Err(Error::input(format!("{} contains no episodes", path.display())));
    }

    let path = dir.join("ground_truth.csv");
    let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut truth = std::collections::BTreeMap::new();
    for row in reader.deserialize::<TruthRow>() {
        let row = row.map_err(|e| Error::parse("ground_truth.csv", e))?;
        let name = row.scenario.parse::<ScenarioName>()?;
        truth.insert((name, row.variation), parse_opt(&row.min_timegap_time, "min_timegap_time")?);
    }
    for r in &mut results {
        r.min_timegap_time = *truth.get(&(r.key.scenario, r.key.variation)).ok_or_else(|| {
            Error::input(format!(
                "ground_truth.csv lacks {}-{}",
                r.key.scenario, r.key.variation
            ))
        })?;
    }
    Ok(results)
}
