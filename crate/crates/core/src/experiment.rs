//! Seeded Monte-Carlo sweeps over one scenario parameter.
//!
//! A sweep is described by a TOML file:
//!
//! ```toml
//! seed = 7
//! trials = 50
//! modes = ["active", "passive"]
//!
//! [sweep]
//! axis = "aod_ratio_alice"
//! values = [0.0, 0.06, 0.12, 0.18]
//!
//! [scenario]          # every key optional, defaults are the baseline
//! irs_elements = 10
//! p_f_dbm = 10.0
//! ```
//!
//! Trial `t` draws its channels with a seed derived from `(seed, t)` alone,
//! so every axis value and mode sees the same realizations.

use crate::evaluation::{report, PerformanceReport, DEFAULT_GRID_N};
use crate::geometry::{
    grid_factors, synthesize_channels, ChannelModel, NetworkGeometry, PathLoss, Point, RicianModel,
};
use crate::jitter::{uncertainty_radii, JitterBounds};
use crate::robust::{
    alternate_optimize, AoTrace, Init, Mode, RobustConfig, RobustError, StopReason,
};
use crate::units::{db_to_amplitude, dbm_to_watts};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("output error: {0}")]
    Output(String),
}

/// Physical scenario; powers in dBm, gains in dB, positions in meters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub ubs_pos: Point,
    pub irs_pos: Point,
    pub alice_pos: Point,
    pub eve_pos: Point,
    pub ubs_antennas: usize,
    pub irs_elements: usize,
    pub wavelength: f64,
    /// Element spacing of both arrays, in wavelengths.
    pub spacing_wavelengths: f64,
    pub p_peak_dbm: f64,
    pub p_f_dbm: f64,
    pub tau_max_db: f64,
    pub sigma_i2_dbm: f64,
    pub sigma_u2_dbm: f64,
    pub sigma_e2_dbm: f64,
    pub eta_u: f64,
    pub eta_e: f64,
    /// Jitter half-range as a fraction of the nominal elevation angle.
    pub aod_ratio_alice: f64,
    pub aod_ratio_eve: f64,
    /// Ratio for the UBS–IRS link; follows Alice's when absent.
    pub aod_ratio_irs: Option<f64>,
    pub a_l_db: f64,
    pub a_n_db: f64,
    pub alpha_l: f64,
    pub alpha_n: f64,
    pub rician_a: f64,
    pub rician_b: f64,
    pub epsilon: f64,
    pub max_iters: usize,
    /// Interior-point iteration cap per subproblem.
    pub solver_max_iter: usize,
}

impl Default for Scenario {
    #[allow(clippy::approx_constant)]
    fn default() -> Self {
        let geo = NetworkGeometry::default();
        let model = ChannelModel::default();
        Scenario {
            ubs_pos: geo.ubs_pos,
            irs_pos: geo.irs_pos,
            alice_pos: geo.alice_pos,
            eve_pos: geo.eve_pos,
            ubs_antennas: geo.n(),
            irs_elements: geo.m(),
            wavelength: geo.wavelength,
            spacing_wavelengths: geo.b_b / geo.wavelength,
            p_peak_dbm: 40.0,
            p_f_dbm: 10.0,
            tau_max_db: 30.0,
            sigma_i2_dbm: -10.0,
            sigma_u2_dbm: -10.0,
            sigma_e2_dbm: -10.0,
            eta_u: 4.5,
            eta_e: 1.0,
            aod_ratio_alice: 0.02,
            aod_ratio_eve: 0.04,
            aod_ratio_irs: None,
            a_l_db: -2.14,
            a_n_db: -3.14,
            alpha_l: model.path_loss.alpha_l,
            alpha_n: model.path_loss.alpha_n,
            rician_a: model.rician.a,
            rician_b: model.rician.b,
            epsilon: 1e-4,
            max_iters: 100,
            solver_max_iter: RobustConfig::default().solver_max_iter,
        }
    }
}

impl Scenario {
    pub fn geometry(&self) -> NetworkGeometry {
        let (n_x, n_y) = grid_factors(self.ubs_antennas);
        let (m_x, m_y) = grid_factors(self.irs_elements);
        let spacing = self.spacing_wavelengths * self.wavelength;
        NetworkGeometry {
            ubs_pos: self.ubs_pos,
            irs_pos: self.irs_pos,
            alice_pos: self.alice_pos,
            eve_pos: self.eve_pos,
            n_x,
            n_y,
            m_x,
            m_y,
            b_b: spacing,
            b_irs: spacing,
            wavelength: self.wavelength,
        }
    }

    pub fn channel_model(&self) -> ChannelModel {
        ChannelModel {
            path_loss: PathLoss::from_db(self.a_l_db, self.a_n_db, self.alpha_l, self.alpha_n),
            rician: RicianModel {
                a: self.rician_a,
                b: self.rician_b,
            },
        }
    }

    pub fn robust_config(&self, mode: Mode) -> RobustConfig {
        RobustConfig {
            eta_u: self.eta_u,
            eta_e: self.eta_e,
            p_peak: dbm_to_watts(self.p_peak_dbm),
            p_f: dbm_to_watts(self.p_f_dbm),
            tau_max: db_to_amplitude(self.tau_max_db),
            sigma_i2: dbm_to_watts(self.sigma_i2_dbm),
            sigma_u2: dbm_to_watts(self.sigma_u2_dbm),
            sigma_e2: dbm_to_watts(self.sigma_e2_dbm),
            epsilon: self.epsilon,
            max_iters: self.max_iters,
            solver_max_iter: self.solver_max_iter,
            ..RobustConfig::default().with_mode(mode)
        }
    }

    pub fn irs_ratio(&self) -> f64 {
        self.aod_ratio_irs.unwrap_or(self.aod_ratio_alice)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        if self.ubs_antennas == 0 {
            return bad("scenario.ubs_antennas must be at least 1".into());
        }
        for (name, r) in [
            ("aod_ratio_alice", self.aod_ratio_alice),
            ("aod_ratio_eve", self.aod_ratio_eve),
            ("aod_ratio_irs", self.irs_ratio()),
        ] {
            if !(r >= 0.0 && r.is_finite()) {
                return bad(format!(
                    "scenario.{name} must be a nonnegative number, got {r}"
                ));
            }
        }
        self.geometry()
            .validate()
            .map_err(|e| ExperimentError::Config(format!("scenario geometry: {e}")))?;
        self.robust_config(Mode::Active)
            .validate()
            .map_err(|e| ExperimentError::Config(format!("scenario: {e}")))
    }
}

/// Swept parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    AodRatioAlice,
    AodRatioEve,
    /// IRS element count.
    #[serde(rename = "M")]
    M,
    /// UBS antenna count.
    #[serde(rename = "N")]
    N,
    TauMaxDb,
    #[serde(rename = "P_F_dbm")]
    PFDbm,
    /// Secrecy-rate requirement `η_U − η_E`, with `η_E` held fixed.
    AsrThreshold,
    /// UBS height in meters.
    UavAltitude,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        f.write_str(&s)
    }
}

impl Axis {
    /// The scenario with this axis set to `value`.
    pub fn apply(&self, base: &Scenario, value: f64) -> Result<Scenario, ExperimentError> {
        let mut s = base.clone();
        let count = |v: f64| {
            if v >= 0.0 && v.fract() == 0.0 && v <= 4096.0 {
                Ok(v as usize)
            } else {
                Err(ExperimentError::Config(format!(
                    "sweep value {v} for axis {self} is not a count"
                )))
            }
        };
        match self {
            Axis::AodRatioAlice => s.aod_ratio_alice = value,
            Axis::AodRatioEve => s.aod_ratio_eve = value,
            Axis::M => s.irs_elements = count(value)?,
            Axis::N => s.ubs_antennas = count(value)?,
            Axis::TauMaxDb => s.tau_max_db = value,
            Axis::PFDbm => s.p_f_dbm = value,
            Axis::AsrThreshold => s.eta_u = s.eta_e + value,
            Axis::UavAltitude => s.ubs_pos[2] = value,
        }
        s.validate()?;
        Ok(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub axis: Axis,
    pub values: Vec<f64>,
}

fn default_trials() -> usize {
    50
}

fn default_modes() -> Vec<Mode> {
    vec![Mode::Active, Mode::Passive]
}

fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}

fn default_audit_samples() -> usize {
    200
}

fn default_failure_budget() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_modes")]
    pub modes: Vec<Mode>,
    /// Grid points per angle for the worst-case secrecy rate.
    #[serde(default = "default_grid_n")]
    pub grid_n: usize,
    #[serde(default = "default_audit_samples")]
    pub audit_samples: usize,
    /// Largest tolerated fraction of runs ending in a solver failure.
    #[serde(default = "default_failure_budget")]
    pub failure_budget: f64,
    #[serde(default)]
    pub scenario: Scenario,
    pub sweep: SweepAxis,
}

impl SweepConfig {
    pub fn new(axis: Axis, values: Vec<f64>) -> Self {
        SweepConfig {
            seed: 0,
            trials: default_trials(),
            modes: default_modes(),
            grid_n: default_grid_n(),
            audit_samples: default_audit_samples(),
            failure_budget: default_failure_budget(),
            scenario: Scenario::default(),
            sweep: SweepAxis { axis, values },
        }
    }

    /// Parses and validates a TOML document. Errors carry the location
    /// reported by the parser.
    pub fn from_toml(text: &str) -> Result<Self, ExperimentError> {
        let cfg: SweepConfig =
            toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self, ExperimentError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ExperimentError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: &str| Err(ExperimentError::Config(m.to_string()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.sweep.values.is_empty() {
            return bad("sweep.values must not be empty");
        }
        if self.modes.is_empty() {
            return bad("modes must not be empty");
        }
        if self.grid_n < 2 {
            return bad("grid_n must be at least 2");
        }
        if !(0.0..=1.0).contains(&self.failure_budget) {
            return bad("failure_budget must lie in [0, 1]");
        }
        if self.sweep.values.iter().any(|v| !v.is_finite()) {
            return bad("sweep.values must be finite");
        }
        self.scenario.validate()?;
        for &v in &self.sweep.values {
            self.sweep.axis.apply(&self.scenario, v)?;
        }
        Ok(())
    }
}

/// SplitMix64 finalizer of `seed + t·γ`: trial seeds depend on `(seed, t)`
/// only.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut z = seed.wrapping_add(trial.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// How one run ended.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Solved,
    /// No robust design exists from the start point.
    Infeasible,
    /// The solver gave up before any feasible point was found.
    SolverFailure,
}

/// One optimized run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial: usize,
    pub seed: u64,
    pub outcome: Outcome,
    pub power_dbm: Option<f64>,
    pub iterations: Option<usize>,
    pub stop_reason: Option<StopReason>,
    pub report: Option<PerformanceReport>,
}

/// Channels, radii and AO for one scenario, mode and seed.
pub fn run_trial(
    scenario: &Scenario,
    mode: Mode,
    seed: u64,
    grid_n: usize,
    audit_samples: usize,
) -> Result<(AoTrace, PerformanceReport), RobustError> {
    let geo = scenario.geometry();
    let ch = synthesize_channels(&geo, &scenario.channel_model(), seed)
        .map_err(|e| RobustError::InvalidConfig(e.to_string()))?;
    let bounds = JitterBounds::from_ratios(
        &ch.angles,
        scenario.aod_ratio_alice,
        scenario.aod_ratio_eve,
        scenario.irs_ratio(),
    );
    let unc = uncertainty_radii(&ch, &bounds);
    let config = scenario.robust_config(mode);
    let trace = alternate_optimize(&ch, &unc, &config, &Init::Heuristic)?;
    let rep = report(
        &trace.state,
        &ch,
        &unc,
        &config,
        grid_n,
        audit_samples,
        seed,
    );
    Ok((trace, rep))
}

fn classify(e: &RobustError) -> Outcome {
    match e {
        RobustError::Infeasible | RobustError::InitializationFailed(_) => Outcome::Infeasible,
        _ => Outcome::SolverFailure,
    }
}

/// One CSV row: a summary over the trials of one axis value and mode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub mode: Mode,
    /// Mean of `10 log₁₀(‖w‖² / 1 mW)` over solved trials; NaN if none.
    #[serde(deserialize_with = "nan_from_null")]
    pub mean_power_dbm: f64,
    #[serde(deserialize_with = "nan_from_null")]
    pub std_power_dbm: f64,
    pub infeasible: usize,
    #[serde(deserialize_with = "nan_from_null")]
    pub mean_iters: f64,
    /// Mean worst-case secrecy rate over solved trials.
    #[serde(deserialize_with = "nan_from_null")]
    pub mean_rsec: f64,
}

/// JSON has no NaN and writes `null` in its place; read it back as NaN.
fn nan_from_null<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

/// Per-row tallies that do not go to CSV. `solved + infeasible +
/// solver_failures` equals the trial count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowDetail {
    pub solved: usize,
    pub infeasible: usize,
    pub solver_failures: usize,
    /// Solved runs whose alternation stopped on a solver failure after
    /// the start; their last accepted state is kept.
    pub early_stops: usize,
    pub trials: Vec<TrialResult>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub seed: u64,
    pub trials: usize,
    pub rows: Vec<SweepRow>,
    pub details: Vec<RowDetail>,
}

impl SweepResult {
    pub fn empty(axis: Axis, seed: u64, trials: usize) -> Self {
        SweepResult {
            axis,
            seed,
            trials,
            rows: Vec::new(),
            details: Vec::new(),
        }
    }

    /// Runs that ended in a solver failure, over all rows.
    pub fn solver_failures(&self) -> usize {
        self.details
            .iter()
            .map(|d| d.solver_failures + d.early_stops)
            .sum()
    }

    pub fn total_runs(&self) -> usize {
        self.rows.len() * self.trials
    }

    pub fn row(&self, value: f64, mode: Mode) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.axis_value == value && r.mode == mode)
    }
}

/// Mean and sample standard deviation.
fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Runs every axis value × mode × trial.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult, ExperimentError> {
    cfg.validate()?;
    let mut result = SweepResult::empty(cfg.sweep.axis, cfg.seed, cfg.trials);
    for &value in &cfg.sweep.values {
        let scenario = cfg.sweep.axis.apply(&cfg.scenario, value)?;
        for &mode in &cfg.modes {
            let mut detail = RowDetail {
                solved: 0,
                infeasible: 0,
                solver_failures: 0,
                early_stops: 0,
                trials: Vec::new(),
            };
            let (mut powers, mut iters, mut rsec) = (Vec::new(), Vec::new(), Vec::new());
            for t in 0..cfg.trials {
                let seed = trial_seed(cfg.seed, t as u64);
                let mut tr = TrialResult {
                    trial: t,
                    seed,
                    outcome: Outcome::Solved,
                    power_dbm: None,
                    iterations: None,
                    stop_reason: None,
                    report: None,
                };
                match run_trial(&scenario, mode, seed, cfg.grid_n, cfg.audit_samples) {
                    Ok((trace, rep)) => {
                        detail.solved += 1;
                        if trace.stop_reason == StopReason::SolverFailure {
                            detail.early_stops += 1;
                        }
                        powers.push(rep.power_dbm);
                        iters.push(trace.iterations.len() as f64 - 1.0);
                        rsec.push(rep.worst_case.secrecy_rate);
                        tr.power_dbm = Some(rep.power_dbm);
                        tr.iterations = Some(trace.iterations.len() - 1);
                        tr.stop_reason = Some(trace.stop_reason);
                        tr.report = Some(rep);
                    }
                    Err(e) => {
                        tr.outcome = classify(&e);
                        match tr.outcome {
                            Outcome::Infeasible => detail.infeasible += 1,
                            _ => detail.solver_failures += 1,
                        }
                        log::debug!("{} = {value}, {mode:?}, trial {t}: {e}", cfg.sweep.axis);
                    }
                }
                detail.trials.push(tr);
            }
            let (mean_power_dbm, std_power_dbm) = mean_std(&powers);
            log::info!(
                "{} = {value} {mode:?}: {:.3} dBm over {} solved, {} infeasible, {} failures",
                cfg.sweep.axis,
                mean_power_dbm,
                detail.solved,
                detail.infeasible,
                detail.solver_failures
            );
            result.rows.push(SweepRow {
                axis_value: value,
                mode,
                mean_power_dbm,
                std_power_dbm,
                infeasible: detail.infeasible,
                mean_iters: mean_std(&iters).0,
                mean_rsec: mean_std(&rsec).0,
            });
            result.details.push(detail);
        }
    }
    Ok(result)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// CSV rows with a header, or the full result as pretty JSON.
pub fn render(result: &SweepResult, format: Format) -> Result<String, ExperimentError> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            w.write_record([
                "axis_value",
                "mode",
                "mean_power_dbm",
                "std_power_dbm",
                "infeasible",
                "mean_iters",
                "mean_rsec",
            ])
            .map_err(|e| ExperimentError::Output(e.to_string()))?;
            for row in &result.rows {
                w.serialize(row)
                    .map_err(|e| ExperimentError::Output(e.to_string()))?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| ExperimentError::Output(e.to_string()))?;
            String::from_utf8(bytes).map_err(|e| ExperimentError::Output(e.to_string()))
        }
        Format::Json => {
            serde_json::to_string_pretty(result).map_err(|e| ExperimentError::Output(e.to_string()))
        }
    }
}

pub fn emit(result: &SweepResult, format: Format, path: &Path) -> Result<(), ExperimentError> {
    std::fs::write(path, render(result, format)?)?;
    Ok(())
}
