use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use riskwarn::harness::{
    calibrate_threshold, compare, emit_reports, format_summary_table, read_results,
    run_episode_traced, run_sweep, summarize, EpisodeResult,
};
use riskwarn::personalization::{DriverType, ModelParameters};
use riskwarn::scenarios::{
    builtin_file, EpisodeConfig, ErrorVariant, ModelKind, ScenarioCatalog, ScenarioName,
};

#[derive(Parser)]
#[command(name = "riskwarn", version, about = "Human-based driving risk warnings")]
struct Cli {
    /// Parameter file (TOML); defaults are used when absent.
    #[arg(long, global = true, env = "RISKWARN_PARAMS")]
    params: Option<PathBuf>,

    /// Directory with scenario files replacing the built-in set.
    #[arg(long, global = true)]
    scenario_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a single episode.
    Run {
        #[arg(long)]
        scenario: ScenarioName,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        variation: u8,
        #[arg(long, default_value = "none")]
        error: ErrorVariant,
        #[arg(long, default_value = "normal")]
        driver: DriverType,
        #[arg(long, default_value = "human")]
        model: ModelKind,
        /// Print the per-step trace.
        #[arg(long)]
        trace: bool,
    },
    /// Run the full experiment grid and write the reports.
    Sweep {
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Print the summary table of a finished sweep.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Search the warning threshold satisfying the driver-type guidelines.
    Calibrate,
    /// Write the built-in scenario files.
    ExportScenarios {
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_params(path: Option<&Path>) -> riskwarn::Result<ModelParameters> {
    match path {
        Some(p) => ModelParameters::load(p),
        None => Ok(ModelParameters::default()),
    }
}

fn load_catalog(dir: Option<&Path>) -> riskwarn::Result<ScenarioCatalog> {
    match dir {
        Some(d) => ScenarioCatalog::from_dir(d),
        None => Ok(ScenarioCatalog::builtin()),
    }
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), |v| format!("{v:.3}"))
}

fn print_episode(r: &EpisodeResult) {
    let k = r.key;
    println!(
        "scenario={} variation={} driver_type={} error_variant={} model={}",
        k.scenario, k.variation, k.driver, k.error, k.model
    );
    println!(
        "warning_time={} critical={} min_timegap={} min_timegap_time={}",
        opt(r.warning_time),
        r.critical,
        opt(r.min_timegap),
        opt(r.min_timegap_time)
    );
    if let Some(trace) = &r.trace {
        println!("t,ego_speed,risk,warning,target_velocity,time_gap");
        for s in trace {
            println!(
                "{:.3},{:.3},{:.6},{:.6},{},{}",
                s.t,
                s.ego_speed,
                s.risk,
                s.warning,
                s.target_velocity.map_or(String::new(), |v| format!("{v:.3}")),
                s.time_gap.map_or(String::new(), |v| format!("{v:.3}")),
            );
        }
    }
}

fn execute(cli: Cli) -> riskwarn::Result<()> {
    let params = load_params(cli.params.as_deref())?;
    params.validate()?;
    match cli.command {
        Command::Run {
            scenario,
            variation,
            error,
            driver,
            model,
            trace,
        } => {
            let catalog = load_catalog(cli.scenario_dir.as_deref())?;
            let sc = catalog.get(scenario, variation).ok_or_else(|| {
                riskwarn::Error::InvalidInput(format!("no scenario {scenario}-{variation}"))
            })?;
            let config = EpisodeConfig {
                scenario: Arc::clone(sc),
                error,
                driver,
                model,
            };
            print_episode(&run_episode_traced(&config, &params, trace)?);
        }
        Command::Sweep { out, jobs } => {
            let catalog = load_catalog(cli.scenario_dir.as_deref())?;
            let jobs = jobs.unwrap_or_else(|| {
                std::thread::available_parallelism().map_or(1, |n| n.get())
            });
            let results = run_sweep(&catalog, &params, jobs)?;
            let summary = emit_reports(&results, params.reaction_margin, &out)?;
            eprintln!("{} episodes written to {}", results.len(), out.display());
            print!("{}", format_summary_table(&summary));
        }
        Command::Report { input } => {
            let results = read_results(&input)?;
            let summary = summarize(&compare(&results, params.reaction_margin)?)?;
            print!("{}", format_summary_table(&summary));
        }
        Command::Calibrate => {
            let catalog = load_catalog(cli.scenario_dir.as_deref())?;
            let c = calibrate_threshold(&catalog, &params)?;
            println!("theta={}", c.theta);
            println!("defensive_peak={:.6}", c.defensive_peak);
            println!("baseline_fp={} confident_fp={}", c.baseline_fp, c.confident_fp);
        }
        Command::ExportScenarios { out } => {
            std::fs::create_dir_all(&out).map_err(|e| riskwarn::Error::Io {
                path: out.clone(),
                source: e,
            })?;
            for name in ScenarioName::ALL {
                let path = out.join(format!("{name}.toml"));
                std::fs::write(&path, builtin_file(name).to_toml_string())
                    .map_err(|e| riskwarn::Error::Io { path, source: e })?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
