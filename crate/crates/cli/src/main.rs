//! Command-line simulator for UAV swarm MIMO placement experiments.
//!
//! Verbs: `centralized`, `force-field`, `baseline` (init/ura), `montecarlo`,
//! and `sweep`. Scenarios come from a flat JSON config (all fields optional,
//! defaults reproduce the reference scenario); reports go out as CSV or JSON.
//! Exit code 0 on success; on failure a machine-readable error object is
//! printed to stderr.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use swarm_mimo::harness::{
    self, massive_mimo_dims, monte_carlo, run_trial, Method, MonteCarloSummary, ReportFormat,
    ScenarioConfig, TrialReport,
};

#[derive(Parser)]
#[command(name = "swarm-mimo", version, about = "UAV swarm MIMO placement simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum BaselineKind {
    Init,
    Ura,
}

#[derive(Args)]
struct CommonArgs {
    /// Scenario config JSON; defaults reproduce the reference scenario.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct TrialArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Seed override; defaults to the first configured seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Minimal-travel centralized optimization of one scenario realization.
    Centralized(TrialArgs),
    /// Distributed force-field repositioning of one scenario realization.
    ForceField(TrialArgs),
    /// Non-optimizing baselines: the raw initial placement or the rigid URA.
    Baseline {
        #[command(flatten)]
        trial: TrialArgs,
        #[arg(long, value_enum)]
        kind: BaselineKind,
    },
    /// Runs every configured seed and aggregates final metrics.
    Montecarlo(CommonArgs),
    /// Monte-Carlo aggregation over a grid of one scenario parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// One of: rician-k-db, roi-distance-m, m-x, m-total.
        #[arg(long)]
        param: String,
        /// Comma-separated parameter values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Vec<f64>,
    },
}

fn load_config(path: &Option<PathBuf>) -> Result<ScenarioConfig, String> {
    let Some(path) = path else {
        return Ok(ScenarioConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))
}

fn write_output(path: &Option<PathBuf>, body: &str) -> Result<(), String> {
    match path {
        Some(path) => fs::write(path, body).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => {
            print!("{body}");
            std::io::stdout().flush().map_err(|e| e.to_string())
        }
    }
}

fn emit_trial(report: &TrialReport, common: &CommonArgs) -> Result<(), String> {
    match (&common.out, common.format) {
        (Some(path), Format::Csv) => {
            harness::emit_report(report, ReportFormat::Csv, path).map_err(|e| e.to_string())
        }
        (Some(path), Format::Json) => {
            harness::emit_report(report, ReportFormat::Json, path).map_err(|e| e.to_string())
        }
        (None, Format::Csv) => write_output(&None, &harness::trial_csv(report)),
        (None, Format::Json) => {
            let body = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
            write_output(&None, &body)
        }
    }
}

fn run_single(args: &TrialArgs, method: Method) -> Result<(), String> {
    let mut cfg = load_config(&args.common.config)?;
    cfg.method = method;
    let seed = args.seed.unwrap_or_else(|| cfg.seeds.first().copied().unwrap_or(0));
    let report = run_trial(&cfg, seed).map_err(|e| e.to_string())?;
    emit_trial(&report, &args.common)
}

fn montecarlo_csv(summary: &MonteCarloSummary) -> String {
    let mut out =
        String::from("seed,sum_rate,capacity,bound,gram_residual,mean_travel,max_travel,converged,iterations\n");
    for trial in &summary.trials {
        let s = &trial.summary;
        out.push_str(&format!(
            "{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{},{}\n",
            trial.seed,
            s.final_sum_rate,
            s.final_capacity,
            s.final_bound,
            s.final_gram_residual,
            s.mean_travel,
            s.max_travel,
            s.converged,
            s.iterations,
        ));
    }
    out
}

fn run_montecarlo(common: &CommonArgs) -> Result<(), String> {
    let cfg = load_config(&common.config)?;
    let summary = monte_carlo(&cfg).map_err(|e| e.to_string())?;
    match common.format {
        Format::Csv => write_output(&common.out, &montecarlo_csv(&summary)),
        Format::Json => {
            let body = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
            write_output(&common.out, &body)
        }
    }
}

/// Applies one sweep parameter value to a base config.
fn apply_param(cfg: &mut ScenarioConfig, param: &str, value: f64) -> Result<(), String> {
    match param {
        "rician-k-db" => cfg.rician_k_db = Some(value),
        "roi-distance-m" => cfg.roi_distance_m = value,
        "m-x" => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(format!("m-x must be a positive integer, got {value}"));
            }
            cfg.m_x = value as usize;
            cfg.n_uavs = cfg.m_x * cfg.m_z;
        }
        "m-total" => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(format!("m-total must be a positive integer, got {value}"));
            }
            let (m_x, m_z) = massive_mimo_dims(value as usize).map_err(|e| e.to_string())?;
            cfg.m_x = m_x;
            cfg.m_z = m_z;
        }
        other => {
            return Err(format!(
                "unknown sweep parameter '{other}' (expected rician-k-db, roi-distance-m, m-x, or m-total)"
            ))
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct SweepPoint {
    value: f64,
    summary: MonteCarloSummary,
}

fn run_sweep(common: &CommonArgs, param: &str, values: &[f64]) -> Result<(), String> {
    if values.is_empty() {
        return Err("sweep needs at least one value".into());
    }
    let base = load_config(&common.config)?;
    let mut points = Vec::new();
    for &value in values {
        let mut cfg = base.clone();
        apply_param(&mut cfg, param, value)?;
        let summary = monte_carlo(&cfg).map_err(|e| e.to_string())?;
        points.push(SweepPoint { value, summary });
    }
    match common.format {
        Format::Csv => {
            let mut out = String::from(
                "param,value,sum_rate_mean,sum_rate_std,capacity_mean,bound_mean,gram_residual_mean,mean_travel_mean,max_travel_max,converged_trials,total_trials\n",
            );
            for point in &points {
                let s = &point.summary;
                out.push_str(&format!(
                    "{},{},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{},{}\n",
                    param,
                    point.value,
                    s.sum_rate.mean,
                    s.sum_rate.std,
                    s.capacity.mean,
                    s.bound.mean,
                    s.gram_residual.mean,
                    s.mean_travel.mean,
                    s.max_travel.max,
                    s.converged_trials,
                    s.total_trials,
                ));
            }
            write_output(&common.out, &out)
        }
        Format::Json => {
            let body = serde_json::to_string_pretty(&points).map_err(|e| e.to_string())?;
            write_output(&common.out, &body)
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match &cli.command {
        Command::Centralized(args) => run_single(args, Method::Centralized),
        Command::ForceField(args) => run_single(args, Method::ForceField),
        Command::Baseline { trial, kind } => {
            let method = match kind {
                BaselineKind::Init => Method::Init,
                BaselineKind::Ura => Method::Ura,
            };
            run_single(trial, method)
        }
        Command::Montecarlo(common) => run_montecarlo(common),
        Command::Sweep { common, param, values } => run_sweep(common, param, values),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("{}", json!({ "error": message }));
            ExitCode::FAILURE
        }
    }
}
