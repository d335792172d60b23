//! Scenario construction, trial running, Monte-Carlo aggregation, and report
//! emission.
//!
//! The default configuration reproduces the reference scenario: a 6x2 array
//! with 6 m apertures at 5 GHz, mounted 10 m high and tilted 0.043 rad toward
//! a swarm initialized uniformly in a 10 x 300 x 300 m box centered 2 km down
//! boresight, 10 dBm per UAV into a -111 dBm noise floor. Placement draws and
//! disturbance draws use separate seed streams, so changing the disturbance
//! seed never moves the initial positions.

use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::time::Instant;

use nalgebra::Vector3;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centralized::bcd_solve;
use crate::channel::{
    apply_shadowing, estimate_channel, los_channel, perturb_positions, rician_channel,
    DisturbanceConfig, Scaling,
};
use crate::force_field::{kp_guarantee_bound, run_force_field_on_grid, FfConfig};
use crate::geometry::{env_constants, EnvConstants, GroundArray, SwarmState};
use crate::metrics::{db_to_linear, lmmse_sum_rate, LinkBudget, RateReport};
use crate::optimal_set::ura_baseline;
use crate::rng::{stream, StreamPurpose};
use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Positioning method run by a trial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Evaluate the random initial placement as-is.
    Init,
    /// Rigid planar grid at the mean range, centroid-aligned.
    Ura,
    /// Minimal-travel block coordinate descent.
    Centralized,
    /// Distributed force-field protocol.
    ForceField,
}

/// Force-field runtime settings (gain expressed as a fraction of the
/// per-axis convergence bound).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FfSettings {
    pub k_p_fraction: f64,
    pub iterations: usize,
    pub stall_threshold_m: Option<f64>,
}

impl Default for FfSettings {
    fn default() -> Self {
        Self { k_p_fraction: 0.3, iterations: 100, stall_threshold_m: None }
    }
}

/// Centralized solver settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BcdSettings {
    pub tolerance_m: f64,
    pub max_iterations: usize,
}

impl Default for BcdSettings {
    fn default() -> Self {
        Self { tolerance_m: 1e-5, max_iterations: 5 }
    }
}

/// Flat scenario description; all physical quantities SI, dB fields suffixed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub frequency_hz: f64,
    pub m_x: usize,
    pub m_z: usize,
    pub aperture_x_m: f64,
    pub aperture_z_m: f64,
    pub gs_height_m: f64,
    pub elevation_tilt_rad: f64,
    pub roi_distance_m: f64,
    pub box_x_m: f64,
    pub box_y_m: f64,
    pub box_z_m: f64,
    pub n_uavs: usize,
    pub tx_power_dbm: f64,
    pub noise_psd_dbm_hz: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    /// Rician K-factor in dB; absent means pure LOS.
    pub rician_k_db: Option<f64>,
    pub shadowing_sigma_db: f64,
    pub est_training_symbols: u32,
    pub motion_sigma_m: f64,
    pub disturbance_seed: u64,
    pub seeds: Vec<u64>,
    pub method: Method,
    pub ff: FfSettings,
    pub bcd: BcdSettings,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            frequency_hz: 5e9,
            m_x: 6,
            m_z: 2,
            aperture_x_m: 6.0,
            aperture_z_m: 6.0,
            gs_height_m: 10.0,
            elevation_tilt_rad: 0.043,
            roi_distance_m: 2000.0,
            box_x_m: 10.0,
            box_y_m: 300.0,
            box_z_m: 300.0,
            n_uavs: 12,
            tx_power_dbm: 10.0,
            noise_psd_dbm_hz: -174.0,
            bandwidth_hz: 1e6,
            noise_figure_db: 3.0,
            rician_k_db: None,
            shadowing_sigma_db: 0.0,
            est_training_symbols: 10,
            motion_sigma_m: 0.0,
            disturbance_seed: 0,
            seeds: vec![0],
            method: Method::Centralized,
            ff: FfSettings::default(),
            bcd: BcdSettings::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.frequency_hz
    }

    pub fn ground_array(&self) -> Result<GroundArray> {
        Ok(GroundArray::new(
            self.m_x,
            self.m_z,
            self.aperture_x_m / self.m_x as f64,
            self.aperture_z_m / self.m_z as f64,
        )?
        .with_pose(self.elevation_tilt_rad, self.gs_height_m))
    }

    pub fn link_budget(&self) -> Result<LinkBudget> {
        LinkBudget::from_db(
            self.tx_power_dbm,
            self.noise_psd_dbm_hz,
            self.bandwidth_hz,
            self.noise_figure_db,
        )
    }

    /// Disturbance switches bound to a trial seed: the per-trial stream key
    /// mixes the scenario disturbance seed with the trial's own seed.
    pub fn disturbances_for_trial(&self, trial_seed: u64) -> DisturbanceConfig {
        DisturbanceConfig {
            rician_k: self.rician_k_db.map_or(f64::INFINITY, db_to_linear),
            shadowing_sigma_db: self.shadowing_sigma_db,
            est_training_symbols: self.est_training_symbols,
            motion_sigma: self.motion_sigma_m,
            rng_seed: self.disturbance_seed ^ trial_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.frequency_hz <= 0.0 {
            return Err(Error::InvalidConfig("frequency must be positive".into()));
        }
        if self.n_uavs == 0 {
            return Err(Error::InvalidConfig("need at least one UAV".into()));
        }
        if self.roi_distance_m <= 0.0 {
            return Err(Error::InvalidConfig("roi distance must be positive".into()));
        }
        if self.box_x_m < 0.0 || self.box_y_m < 0.0 || self.box_z_m < 0.0 {
            return Err(Error::InvalidConfig("box sides must be non-negative".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("need at least one seed".into()));
        }
        self.ground_array()?;
        self.link_budget()?;
        Ok(())
    }
}

/// One row of a trial trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub iteration: usize,
    pub sum_rate: f64,
    pub capacity: f64,
    pub bound: f64,
    pub gram_residual: f64,
    pub mean_travel: f64,
    pub max_travel: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub final_sum_rate: f64,
    pub final_capacity: f64,
    pub final_bound: f64,
    pub final_gram_residual: f64,
    pub mean_travel: f64,
    pub max_travel: f64,
    pub converged: bool,
    pub iterations: usize,
    pub wall_time_s: f64,
}

/// Full record of one seeded trial.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub seed: u64,
    pub method: Method,
    pub rows: Vec<TrialRow>,
    pub summary: TrialSummary,
    pub config: ScenarioConfig,
}

/// Builds the scenario realization for one seed.
pub fn build_scenario(
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<(SwarmState, GroundArray, EnvConstants, LinkBudget)> {
    cfg.validate()?;
    let gs = cfg.ground_array()?;
    let budget = cfg.link_budget()?;
    // box center sits roi_distance down boresight, axes world-aligned
    let center = gs.frame_to_world(Vector3::new(0.0, cfg.roi_distance_m, 0.0));
    let mut rng = stream(seed, StreamPurpose::InitialPlacement, 0, 0);
    let mut positions = Vec::with_capacity(cfg.n_uavs);
    for _ in 0..cfg.n_uavs {
        let world = Vector3::new(
            center.x + (rng.random::<f64>() - 0.5) * cfg.box_x_m,
            center.y + (rng.random::<f64>() - 0.5) * cfg.box_y_m,
            center.z + (rng.random::<f64>() - 0.5) * cfg.box_z_m,
        );
        positions.push(gs.world_to_frame(world));
    }
    let swarm = SwarmState::new(positions);
    for (index, p) in swarm.positions().iter().enumerate() {
        if p.y <= 0.0 {
            return Err(Error::BehindArray { index, y: p.y });
        }
    }
    let env = env_constants(&gs, &swarm, cfg.wavelength())?;
    Ok((swarm, gs, env, budget))
}

/// Evaluates a placement under the configured disturbances (one realization).
pub fn evaluate_placement(
    positions: &SwarmState,
    gs: &GroundArray,
    env: &EnvConstants,
    budget: &LinkBudget,
    disturbances: &DisturbanceConfig,
    round: u64,
) -> Result<RateReport> {
    let seed = disturbances.rng_seed;
    let actual = if disturbances.motion_sigma > 0.0 {
        perturb_positions(
            positions,
            disturbances.motion_sigma,
            &mut stream(seed, StreamPurpose::MotionError, round, 0),
        )
    } else {
        positions.clone()
    };
    let mut h = los_channel(&actual, gs, env.wavelength(), Scaling::PathLoss)?;
    if disturbances.rician_k.is_finite() {
        h = rician_channel(&h, disturbances.rician_k, &mut stream(seed, StreamPurpose::NlosFading, round, 0))?;
    }
    if disturbances.shadowing_sigma_db > 0.0 {
        h = apply_shadowing(
            &h,
            disturbances.shadowing_sigma_db,
            &mut stream(seed, StreamPurpose::Shadowing, round, 0),
        );
    }
    let h_est = if disturbances.est_training_symbols > 0 {
        let snr_rx = budget.rho() * h.frobenius_norm_squared() / (h.m() * h.n()) as f64;
        estimate_channel(
            &h,
            snr_rx,
            disturbances.est_training_symbols,
            &mut stream(seed, StreamPurpose::EstimationError, round, 0),
        )?
    } else {
        h.clone()
    };
    lmmse_sum_rate(&h, &h_est, budget)
}

fn travel_stats(travel: &[f64]) -> (f64, f64) {
    if travel.is_empty() {
        return (0.0, 0.0);
    }
    let mean = travel.iter().sum::<f64>() / travel.len() as f64;
    let max = travel.iter().fold(0.0f64, |a, &b| a.max(b));
    (mean, max)
}

fn row_from_report(iteration: usize, report: &RateReport, travel: &[f64]) -> TrialRow {
    let (mean_travel, max_travel) = travel_stats(travel);
    TrialRow {
        iteration,
        sum_rate: report.sum_rate,
        capacity: report.capacity,
        bound: report.single_user_bound,
        gram_residual: report.gram_residual,
        mean_travel,
        max_travel,
    }
}

/// Array dimensions for a fixed-aperture sweep over the total antenna count:
/// the divisor pair with `M_x/M_z` closest to 2 (ties toward wider arrays).
pub fn massive_mimo_dims(m_total: usize) -> Result<(usize, usize)> {
    if m_total == 0 {
        return Err(Error::InvalidConfig("antenna count must be positive".into()));
    }
    let mut best: Option<(usize, usize, f64)> = None;
    for m_z in 1..=m_total {
        if m_total % m_z != 0 {
            continue;
        }
        let m_x = m_total / m_z;
        let score = (m_x as f64 / m_z as f64 - 2.0).abs();
        let better = match best {
            None => true,
            Some((bx, _, bs)) => score < bs - 1e-12 || (score < bs + 1e-12 && m_x > bx),
        };
        if better {
            best = Some((m_x, m_z, score));
        }
    }
    let (m_x, m_z, _) = best.unwrap();
    Ok((m_x, m_z))
}

/// Picks the full sub-grid used by the force-field path when `N < M`.
pub fn ff_grid_dims(n: usize, gs: &GroundArray) -> Result<(usize, usize)> {
    for gz in (1..=gs.m_z().min(n)).rev() {
        if n % gz == 0 && n / gz <= gs.m_x() {
            return Ok((n / gz, gz));
        }
    }
    Err(Error::GridMismatch { n, mx: gs.m_x(), mz: gs.m_z() })
}

/// Runs one seeded trial of the configured method.
pub fn run_trial(cfg: &ScenarioConfig, seed: u64) -> Result<TrialReport> {
    let start = Instant::now();
    let (init, gs, env, budget) = build_scenario(cfg, seed)?;
    let disturbances = cfg.disturbances_for_trial(seed);
    let zeros = vec![0.0; init.n()];

    let (rows, converged, iterations) = match cfg.method {
        Method::Init => {
            let report = evaluate_placement(&init, &gs, &env, &budget, &disturbances, 0)?;
            (vec![row_from_report(0, &report, &zeros)], true, 1)
        }
        Method::Ura => {
            let placed = ura_baseline(&init, &env, &gs)?;
            let travel = init.travel_to(&placed)?;
            let report = evaluate_placement(&placed, &gs, &env, &budget, &disturbances, 0)?;
            (vec![row_from_report(0, &report, &travel)], true, 1)
        }
        Method::Centralized => {
            let sol = bcd_solve(&init, &env, &gs, cfg.bcd.tolerance_m, cfg.bcd.max_iterations)?;
            let mut rows = Vec::with_capacity(sol.history.len());
            for (k, step) in sol.history.iter().enumerate() {
                let travel = init.travel_to(&step.positions)?;
                let report =
                    evaluate_placement(&step.positions, &gs, &env, &budget, &disturbances, k as u64)?;
                rows.push(row_from_report(k, &report, &travel));
            }
            (rows, sol.converged, sol.iterations)
        }
        Method::ForceField => {
            let grid = ff_grid_dims(init.n(), &gs)?;
            let (bound_x, _) = kp_guarantee_bound(&init, &env);
            let ff_cfg = FfConfig {
                k_p: cfg.ff.k_p_fraction * bound_x,
                iterations: cfg.ff.iterations,
                stall_threshold: cfg.ff.stall_threshold_m,
            };
            let traj = run_force_field_on_grid(&init, &gs, &env, &ff_cfg, &disturbances, &budget, grid)?;
            let rows = traj
                .rates
                .iter()
                .zip(&traj.cumulative_travel)
                .enumerate()
                .map(|(k, (report, travel))| row_from_report(k, report, travel))
                .collect();
            (rows, traj.stalled || traj.rounds_executed == cfg.ff.iterations, traj.rounds_executed)
        }
    };

    let last = rows.last().expect("every method emits at least one row");
    let summary = TrialSummary {
        final_sum_rate: last.sum_rate,
        final_capacity: last.capacity,
        final_bound: last.bound,
        final_gram_residual: last.gram_residual,
        mean_travel: last.mean_travel,
        max_travel: last.max_travel,
        converged,
        iterations,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    Ok(TrialReport { seed, method: cfg.method, rows, summary, config: cfg.clone() })
}

/// Mean/std/min/max of one aggregated metric.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricStats {
    fn from_samples(samples: &[f64]) -> Self {
        let n = samples.len().max(1) as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / n;
        Self {
            mean,
            std: var.sqrt(),
            min: samples.iter().copied().fold(f64::INFINITY, f64::min),
            max: samples.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Aggregate over all seeds of a configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloSummary {
    pub sum_rate: MetricStats,
    pub capacity: MetricStats,
    pub bound: MetricStats,
    pub gram_residual: MetricStats,
    pub mean_travel: MetricStats,
    pub max_travel: MetricStats,
    pub converged_trials: usize,
    pub total_trials: usize,
    pub failures: Vec<(u64, String)>,
    pub trials: Vec<TrialReport>,
}

/// Runs every configured seed (in parallel) and aggregates final metrics.
pub fn monte_carlo(cfg: &ScenarioConfig) -> Result<MonteCarloSummary> {
    cfg.validate()?;
    let outcomes: Vec<(u64, Result<TrialReport>)> = cfg
        .seeds
        .par_iter()
        .map(|&seed| (seed, run_trial(cfg, seed)))
        .collect();
    let mut trials = Vec::new();
    let mut failures = Vec::new();
    for (seed, outcome) in outcomes {
        match outcome {
            Ok(report) => trials.push(report),
            Err(err) => failures.push((seed, err.to_string())),
        }
    }
    let take = |f: fn(&TrialSummary) -> f64| -> Vec<f64> { trials.iter().map(|t| f(&t.summary)).collect() };
    Ok(MonteCarloSummary {
        sum_rate: MetricStats::from_samples(&take(|s| s.final_sum_rate)),
        capacity: MetricStats::from_samples(&take(|s| s.final_capacity)),
        bound: MetricStats::from_samples(&take(|s| s.final_bound)),
        gram_residual: MetricStats::from_samples(&take(|s| s.final_gram_residual)),
        mean_travel: MetricStats::from_samples(&take(|s| s.mean_travel)),
        max_travel: MetricStats::from_samples(&take(|s| s.max_travel)),
        converged_trials: trials.iter().filter(|t| t.summary.converged).count(),
        total_trials: trials.len(),
        failures,
        trials,
    })
}

/// Report output format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

pub const CSV_HEADER: &str = "iteration,sum_rate,capacity,bound,gram_residual,mean_travel,max_travel";

fn sig9(v: f64) -> String {
    format!("{v:.8e}")
}

/// Renders the per-iteration rows as CSV (9 significant digits).
pub fn trial_csv(report: &TrialReport) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in &report.rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.iteration,
            sig9(row.sum_rate),
            sig9(row.capacity),
            sig9(row.bound),
            sig9(row.gram_residual),
            sig9(row.mean_travel),
            sig9(row.max_travel),
        ));
    }
    out
}

/// Writes a trial report to `path` in the requested format.
pub fn emit_report(report: &TrialReport, format: ReportFormat, path: &Path) -> Result<()> {
    let wrap = |source: std::io::Error| Error::Io { path: path.display().to_string(), source };
    let mut file = fs::File::create(path).map_err(wrap)?;
    match format {
        ReportFormat::Csv => file.write_all(trial_csv(report).as_bytes()).map_err(wrap)?,
        ReportFormat::Json => {
            let body = serde_json::to_string_pretty(report)
                .map_err(|e| Error::InvalidConfig(format!("serialization failed: {e}")))?;
            file.write_all(body.as_bytes()).map_err(wrap)?;
        }
    }
    Ok(())
}
