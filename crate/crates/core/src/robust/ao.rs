//! Alternating optimization driver.

use super::subproblem::{check_dims, v_step, w_step, WStep};
use super::{BeamState, RobustConfig, RobustError, RobustProblem};
use crate::geometry::ChannelSet;
use crate::jitter::UncertaintySet;
use crate::units::watts_to_dbm;
use crate::{CVector, C64};
use conic::{Residuals, Status};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::time::Instant;

/// Number of random-phase restarts tried after the equal-phase start fails.
pub const INIT_RETRIES: usize = 10;

/// Amplitude ladder of the weaker equal-phase starts: `SHRINK^k` for
/// `k = 1..=SHRINK_STEPS` times the peak-safe amplitude.
const SHRINK: f64 = 0.3;
const SHRINK_STEPS: usize = 4;

/// Starting point of the alternation.
#[derive(Clone, Debug, Default, PartialEq)]
pub enum Init {
    /// Equal-phase `v` with a budget-safe amplitude, then random phases.
    #[default]
    Heuristic,
    /// Use `v` as `v⁽⁰⁾` and `w` as the first expansion point.
    Given(BeamState),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// Relative power change fell below `ε`.
    Converged,
    /// The v-step came back infeasible.
    VSubproblemInfeasible,
    /// A subproblem ended without an optimal or infeasible verdict. The
    /// last accepted state is kept.
    SolverFailure,
    MaxIterations,
}

/// One alternation round. Iteration 0 is the initial w-step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AoIteration {
    pub iteration: usize,
    pub power_w: f64,
    pub power_dbm: f64,
    pub alpha_u: Option<f64>,
    pub alpha_e: Option<f64>,
    pub w_status: Status,
    pub v_status: Option<Status>,
    pub w_residuals: Residuals,
    pub v_residuals: Option<Residuals>,
    pub solver_iterations: usize,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AoTrace {
    pub iterations: Vec<AoIteration>,
    /// `‖w⁽ᵏ⁾‖²` in watts, starting with the initial point.
    pub powers: Vec<f64>,
    pub stop_reason: StopReason,
    pub state: BeamState,
    pub init_attempts: usize,
    pub elapsed_ms: f64,
}

impl AoTrace {
    pub fn final_power(&self) -> f64 {
        self.state.power()
    }

    /// Largest increase `p⁽ᵏ⁺¹⁾ − p⁽ᵏ⁾` along the trace (negative when
    /// strictly decreasing).
    pub fn max_increase(&self) -> f64 {
        self.powers
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace is plain data")
    }
}

/// MRT towards Alice's direct channel with twice the power needed to hit
/// the rate target without any IRS help.
fn mrt_start(p: &RobustProblem) -> CVector {
    let h = &p.alice.h;
    let gain = h.norm_squared();
    if gain == 0.0 {
        return CVector::from_element(
            p.n(),
            C64::new((p.config.p_peak / p.n() as f64).sqrt(), 0.0),
        );
    }
    let power = (2.0 * p.alice.sinr_target() * p.alice.noise / gain).min(p.config.p_peak);
    h.scale((power / gain).sqrt())
}

/// Common amplitude `min(τ_max, √(P_F / (M (σ_I² + p̄))))` of `v⁽⁰⁾`, where
/// `p̄` is the mean power incident on an element. With `peak` set, `p̄` is
/// the most any beamformer within `P_peak` can deliver, so the start keeps
/// the amplification budget whatever the first w-step returns.
fn start_amplitude(p: &RobustProblem, w: &CVector, peak: bool) -> f64 {
    let tau = p.config.effective_tau_max();
    if !p.amplifies() {
        return tau;
    }
    let m = p.m() as f64;
    let incident = if peak {
        let s = p.h_i.singular_values();
        s.max().powi(2) * p.config.p_peak / m
    } else {
        (&p.h_i * w).norm_squared() / m
    };
    let budget = (p.config.p_f / (m * (p.config.effective_sigma_i2() + incident))).sqrt();
    tau.min(budget)
}

/// Finds `(w⁽⁰⁾, v⁽⁰⁾)`: `v⁽⁰⁾` from the heuristic, `w⁽⁰⁾` from a w-step.
pub fn initial_state(
    p: &RobustProblem,
    init: &Init,
) -> Result<(BeamState, WStep, usize), RobustError> {
    match init {
        Init::Given(s) => {
            check_dims(p, &s.w, &s.v)?;
            let step = w_step(p, &s.w, &s.v)?;
            Ok((
                BeamState {
                    w: step.w.clone(),
                    v: s.v.clone(),
                },
                step,
                1,
            ))
        }
        Init::Heuristic => {
            let w = mrt_start(p);
            let (mrt_amp, safe_amp) = (start_amplitude(p, &w, false), start_amplitude(p, &w, true));
            // Equal phases at the MRT-sized and the peak-safe amplitude, then
            // weaker equal-phase starts (a large ‖v‖ also inflates the
            // cascaded error term), then random phases at the peak-safe one.
            let mut starts = vec![(mrt_amp, false)];
            if safe_amp != mrt_amp {
                starts.push((safe_amp, false));
            }
            starts.extend((1..=SHRINK_STEPS).map(|k| (safe_amp * SHRINK.powi(k as i32), false)));
            starts.extend((0..INIT_RETRIES).map(|_| (safe_amp, true)));
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let mut last = RobustError::InitializationFailed(0);
            let mut infeasible_seen = false;
            let mut attempts = 0;
            for (amp, random) in starts {
                attempts += 1;
                let v = CVector::from_fn(p.m(), |_, _| {
                    let phase = if random {
                        rng.random_range(0.0..TAU)
                    } else {
                        0.0
                    };
                    C64::from_polar(amp, phase)
                });
                match w_step(p, &w, &v) {
                    Ok(step) => {
                        return Ok((
                            BeamState {
                                w: step.w.clone(),
                                v,
                            },
                            step,
                            attempts,
                        ))
                    }
                    Err(e) => {
                        log::debug!("start attempt {attempts} failed: {e}");
                        infeasible_seen |= e == RobustError::Infeasible;
                        last = e;
                    }
                }
            }
            log::info!("initialization failed, last error: {last}");
            // Only a start that the solver proved infeasible says something
            // about the problem; numerical breakdowns on every start surface
            // as the solver error.
            if infeasible_seen {
                Err(RobustError::InitializationFailed(attempts))
            } else {
                Err(last)
            }
        }
    }
}

/// Runs the alternation on physical channels.
pub fn alternate_optimize(
    ch: &ChannelSet,
    unc: &UncertaintySet,
    config: &RobustConfig,
    init: &Init,
) -> Result<AoTrace, RobustError> {
    let p = RobustProblem::new(ch, unc, config)?;
    run(&p, init)
}

/// Runs the alternation on a prepared problem.
pub fn run(p: &RobustProblem, init: &Init) -> Result<AoTrace, RobustError> {
    let start = Instant::now();
    let (mut state, step0, init_attempts) = initial_state(p, init)?;
    let ms = |t: &Instant| t.elapsed().as_secs_f64() * 1e3;
    let mut powers = vec![step0.power];
    let mut iterations = vec![AoIteration {
        iteration: 0,
        power_w: step0.power,
        power_dbm: watts_to_dbm(step0.power),
        alpha_u: None,
        alpha_e: None,
        w_status: step0.status,
        v_status: None,
        w_residuals: step0.residuals,
        v_residuals: None,
        solver_iterations: step0.solver_iterations,
        elapsed_ms: ms(&start),
    }];
    let mut stop_reason = StopReason::MaxIterations;

    for k in 1..=p.config.max_iters {
        let ws = match w_step(p, &state.w, &state.v) {
            Ok(ws) => ws,
            Err(e) => {
                log::warn!("w-step {k} failed: {e}");
                stop_reason = StopReason::SolverFailure;
                break;
            }
        };
        let previous = *powers.last().expect("initial power recorded");
        state.w = ws.w.clone();
        powers.push(ws.power);
        let mut record = AoIteration {
            iteration: k,
            power_w: ws.power,
            power_dbm: watts_to_dbm(ws.power),
            alpha_u: None,
            alpha_e: None,
            w_status: ws.status,
            v_status: None,
            w_residuals: ws.residuals,
            v_residuals: None,
            solver_iterations: ws.solver_iterations,
            elapsed_ms: 0.0,
        };

        let mut stop = None;
        if p.m() > 0 {
            match v_step(p, &state.w, &state.v) {
                Ok(vs) => {
                    record.alpha_u = Some(vs.alpha_u);
                    record.alpha_e = Some(vs.alpha_e);
                    record.v_status = Some(vs.status);
                    record.v_residuals = Some(vs.residuals);
                    record.solver_iterations += vs.solver_iterations;
                    state.v = vs.v;
                }
                Err(RobustError::Infeasible) => {
                    record.v_status = Some(Status::PrimalInfeasible);
                    stop = Some(StopReason::VSubproblemInfeasible);
                }
                Err(e) => {
                    log::warn!("v-step {k} failed: {e}");
                    if let RobustError::Solver(s) = e {
                        record.v_status = Some(s);
                    }
                    stop = Some(StopReason::SolverFailure);
                }
            }
        }
        record.elapsed_ms = ms(&start);
        iterations.push(record);
        if let Some(reason) = stop {
            stop_reason = reason;
            break;
        }
        if (ws.power - previous).abs() / previous < p.config.epsilon {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    Ok(AoTrace {
        iterations,
        powers,
        stop_reason,
        state,
        init_attempts,
        elapsed_ms: ms(&start),
    })
}
