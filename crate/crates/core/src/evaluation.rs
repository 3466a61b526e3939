//! Ground-truth evaluation of a beamforming state.
//!
//! Rates here come from exact channels: a jitter realization re-synthesizes
//! the UBS steering vectors at the offset angles instead of using the
//! first-order model the optimizer relies on. That makes the worst-case
//! numbers an independent check of the linearization and of the
//! S-procedure bounds.
//!
//! The worst case over the jitter box is taken on a grid. Alice's signal
//! depends on two of the three links (UBS–Alice and UBS–IRS) and enters as
//! a sum of one term per link, so the `grid_n²` points of each link are
//! evaluated once and combined pairwise. Grid endpoints are the box edges,
//! so the vertices are always included.

use crate::geometry::{AngleDeviation, AngleOffset, ChannelSet};
use crate::jitter::{sample_perturbation, ChannelErrors, JitterBounds, UncertaintySet};
use crate::robust::{amplification_power, BeamState, Mode, RobustConfig};
use crate::units::watts_to_dbm;
use crate::{CMatrix, CVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Grid points per angle used when none is given.
pub const DEFAULT_GRID_N: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sinr {
    pub alice: f64,
    pub eve: f64,
}

impl Sinr {
    pub fn rates(&self) -> (f64, f64) {
        (rate(self.alice), rate(self.eve))
    }
}

/// `log₂(1 + γ)`.
pub fn rate(sinr: f64) -> f64 {
    (1.0 + sinr.max(0.0)).log2()
}

/// `[R_U − R_E]⁺`.
pub fn secrecy_rate(rate_u: f64, rate_e: f64) -> f64 {
    (rate_u - rate_e).max(0.0)
}

/// Received amplitude `(hᴴ + vᴴ diag(h_irsᴴ) H_I) w`.
pub fn received_amplitude(
    h: &CVector,
    h_irs: &CVector,
    h_i: &CMatrix,
    w: &CVector,
    v: &CVector,
) -> C64 {
    let direct = h.dotc(w);
    if v.is_empty() {
        return direct;
    }
    let hw = h_i * w;
    direct
        + v.iter()
            .zip(h_irs.iter())
            .zip(hw.iter())
            .map(|((v, h), x)| v.conj() * h.conj() * x)
            .sum::<C64>()
}

/// Noise at a receiver: `σ_I² ‖vᴴ diag(h_irs)‖² + σ²`.
pub fn noise_power(h_irs: &CVector, v: &CVector, sigma_i2: f64, sigma2: f64) -> f64 {
    sigma_i2
        * h_irs
            .iter()
            .zip(v.iter())
            .map(|(h, v)| h.norm_sqr() * v.norm_sqr())
            .sum::<f64>()
        + sigma2
}

fn sinr_on(ch: &ChannelSet, state: &BeamState, config: &RobustConfig) -> Sinr {
    let sigma_i2 = config.effective_sigma_i2();
    let (w, v) = (&state.w, &state.v);
    let su = received_amplitude(&ch.h_u, &ch.h_iu, &ch.h_i, w, v).norm_sqr();
    let se = received_amplitude(&ch.h_e, &ch.h_ie, &ch.h_i, w, v).norm_sqr();
    Sinr {
        alice: su / noise_power(&ch.h_iu, v, sigma_i2, config.sigma_u2),
        eve: se / noise_power(&ch.h_ie, v, sigma_i2, config.sigma_e2),
    }
}

/// SINRs on exact channels, jittered by `dev` when given.
pub fn sinr(
    state: &BeamState,
    ch: &ChannelSet,
    config: &RobustConfig,
    dev: Option<&AngleDeviation>,
) -> Sinr {
    match dev {
        Some(d) => sinr_on(&ch.perturbed(d), state, config),
        None => sinr_on(ch, state, config),
    }
}

/// SINRs with additive channel errors, as seen by the linearized model.
pub fn sinr_with_errors(
    state: &BeamState,
    ch: &ChannelSet,
    config: &RobustConfig,
    err: &ChannelErrors,
) -> Sinr {
    let mut shifted = ch.clone();
    shifted.h_u = &ch.h_u + &err.dh_u;
    shifted.h_e = &ch.h_e + &err.dh_e;
    shifted.h_i = &ch.h_i + &err.dh_i;
    sinr_on(&shifted, state, config)
}

/// Alice's SINR written with the reflection matrix `Θ` (diagonal, `Θ_mm`
/// the conjugate of `v_m`): `|(h_Uᴴ + h_IUᴴ Θ H_I) w|² / (σ_I² ‖h_IUᴴ Θ‖² + σ_U²)`.
pub fn sinr_theta_form(
    w: &CVector,
    theta: &CMatrix,
    h: &CVector,
    h_irs: &CVector,
    h_i: &CMatrix,
    sigma_i2: f64,
    sigma2: f64,
) -> f64 {
    let row = h_irs.adjoint() * theta;
    let signal = (h.adjoint() * w)[(0, 0)] + (&row * h_i * w)[(0, 0)];
    signal.norm_sqr() / (sigma_i2 * row.norm_squared() + sigma2)
}

/// `linspace(−b, b, n)`, or the single point 0 for an empty interval.
fn axis(b: f64, n: usize) -> Vec<f64> {
    if b == 0.0 || n < 2 {
        return vec![0.0];
    }
    (0..n)
        .map(|i| -b + 2.0 * b * i as f64 / (n - 1) as f64)
        .collect()
}

fn grid(b1: f64, b2: f64, n: usize) -> Vec<AngleOffset> {
    let (x, y) = (axis(b1, n), axis(b2, n));
    x.iter()
        .flat_map(|&a| {
            y.iter().map(move |&e| AngleOffset {
                d_azimuth: a,
                d_elevation: e,
            })
        })
        .collect()
}

/// Worst-case rates over the jitter box.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    /// Smallest rate at Alice.
    pub rate_u: f64,
    /// Largest rate at Eve.
    pub rate_e: f64,
    pub secrecy_rate: f64,
    pub points: usize,
}

/// Minimum Alice rate and maximum Eve rate over a `grid_n × grid_n` grid of
/// `(Δω, Δφ)` per link, with exact channels at every point.
pub fn worst_case_rates(
    state: &BeamState,
    ch: &ChannelSet,
    bounds: &JitterBounds,
    config: &RobustConfig,
    grid_n: usize,
) -> WorstCase {
    let (w, v) = (&state.w, &state.v);
    let sigma_i2 = config.effective_sigma_i2();
    let irs_grid = grid(bounds.i1, bounds.i2, grid_n);
    // Cascaded contribution per IRS-link grid point; the IRS-to-ground
    // channels do not move with the UAV.
    let cascade: Vec<CVector> = irs_grid
        .iter()
        .map(|off| {
            let dev = AngleDeviation {
                irs: *off,
                ..Default::default()
            };
            &ch.perturbed(&dev).h_i * w
        })
        .collect();
    let through = |h_irs: &CVector| -> Vec<C64> {
        cascade
            .iter()
            .map(|hw| {
                v.iter()
                    .zip(h_irs.iter())
                    .zip(hw.iter())
                    .map(|((v, h), x)| v.conj() * h.conj() * x)
                    .sum()
            })
            .collect()
    };
    let (c_u, c_e) = (through(&ch.h_iu), through(&ch.h_ie));
    let direct = |b1: f64, b2: f64, pick: &dyn Fn(&ChannelSet) -> C64, alice: bool| -> Vec<C64> {
        grid(b1, b2, grid_n)
            .iter()
            .map(|off| {
                let dev = if alice {
                    AngleDeviation {
                        alice: *off,
                        ..Default::default()
                    }
                } else {
                    AngleDeviation {
                        eve: *off,
                        ..Default::default()
                    }
                };
                pick(&ch.perturbed(&dev))
            })
            .collect()
    };
    let d_u = direct(bounds.u1, bounds.u2, &|c| c.h_u.dotc(w), true);
    let d_e = direct(bounds.e1, bounds.e2, &|c| c.h_e.dotc(w), false);
    let n_u = noise_power(&ch.h_iu, v, sigma_i2, config.sigma_u2);
    let n_e = noise_power(&ch.h_ie, v, sigma_i2, config.sigma_e2);

    let fold = |d: &[C64], c: &[C64], better: fn(f64, f64) -> f64, init: f64| {
        d.iter()
            .flat_map(|a| c.iter().map(move |b| (a + b).norm_sqr()))
            .fold(init, better)
    };
    let min_u = fold(&d_u, &c_u, f64::min, f64::INFINITY);
    let max_e = fold(&d_e, &c_e, f64::max, 0.0);
    let (rate_u, rate_e) = (rate(min_u / n_u), rate(max_e / n_e));
    WorstCase {
        rate_u,
        rate_e,
        secrecy_rate: secrecy_rate(rate_u, rate_e),
        points: d_u.len().max(d_e.len()) * irs_grid.len(),
    }
}

/// Margins of every constraint of the robust problem; nonnegative means
/// satisfied. Rate margins are relative to the SINR threshold so that they
/// are dimensionless.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// `min |s_U|² / (γ_U β_A) − 1` over the sampled linearized errors.
    pub alice_rate: f64,
    /// `min 1 − |s_E|² / (γ_E β_E)`; `None` without an eavesdropper.
    pub eve_rate: Option<f64>,
    /// `(P_F − amplification power) / P_F`; `None` for a passive surface.
    pub amplification: Option<f64>,
    /// `(P_peak − ‖w‖²) / P_peak`.
    pub peak_power: f64,
    /// `min_m (τ − |v_m|) / τ` with the cap of the configured mode.
    pub magnitude: f64,
    pub samples: usize,
}

impl Margins {
    /// Whether every margin is at least `-tol`.
    pub fn passes(&self, tol: f64) -> bool {
        let opt = |m: Option<f64>| m.is_none_or(|x| x >= -tol);
        self.alice_rate >= -tol
            && opt(self.eve_rate)
            && opt(self.amplification)
            && self.peak_power >= -tol
            && self.magnitude >= -tol
    }
}

/// Checks the robust rate constraints on `samples` jitter draws (plus the
/// box vertices) through the linearized error model, and the budgets
/// directly.
pub fn audit(
    state: &BeamState,
    ch: &ChannelSet,
    unc: &UncertaintySet,
    config: &RobustConfig,
    samples: usize,
    seed: u64,
) -> Margins {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = unc.bounds;
    let devs = bounds
        .corners()
        .into_iter()
        .chain((0..samples).map(|_| sample_perturbation(&bounds, &mut rng)));
    let target_u = 2f64.powf(config.eta_u) - 1.0;
    let target_e = 2f64.powf(config.eta_e) - 1.0;
    let (mut alice, mut eve, mut count) = (f64::INFINITY, f64::INFINITY, 0);
    for dev in devs {
        let s = sinr_with_errors(state, ch, config, &unc.linearized_errors(ch, &dev));
        alice = alice.min(s.alice / target_u - 1.0);
        eve = eve.min(1.0 - s.eve / target_e);
        count += 1;
    }
    let tau = config.effective_tau_max();
    let magnitude = state
        .v
        .iter()
        .map(|v| (tau - v.norm()) / tau.max(f64::MIN_POSITIVE))
        .fold(f64::INFINITY, f64::min);
    Margins {
        alice_rate: alice,
        eve_rate: config.eavesdropper.then_some(eve),
        amplification: (config.mode == Mode::Active && !state.v.is_empty()).then(|| {
            (config.p_f - amplification_power(&state.w, &state.v, &ch.h_i, config.sigma_i2))
                / config.p_f
        }),
        peak_power: (config.p_peak - state.power()) / config.p_peak,
        magnitude: if magnitude.is_finite() {
            magnitude
        } else {
            1.0
        },
        samples: count,
    }
}

/// Everything reported about one optimized state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub power_w: f64,
    pub power_dbm: f64,
    /// Nominal (jitter-free) quantities.
    pub sinr_u: f64,
    pub sinr_e: f64,
    pub rate_u: f64,
    pub rate_e: f64,
    pub secrecy_rate: f64,
    pub worst_case: WorstCase,
    /// Power drawn by the active IRS, zero for a passive one.
    pub amplification_power_w: f64,
    pub margins: Margins,
}

/// Nominal rates, grid worst case and audit in one report.
pub fn report(
    state: &BeamState,
    ch: &ChannelSet,
    unc: &UncertaintySet,
    config: &RobustConfig,
    grid_n: usize,
    samples: usize,
    seed: u64,
) -> PerformanceReport {
    let s = sinr(state, ch, config, None);
    let (rate_u, rate_e) = s.rates();
    let amp = if config.mode == Mode::Active {
        amplification_power(&state.w, &state.v, &ch.h_i, config.sigma_i2)
    } else {
        0.0
    };
    PerformanceReport {
        power_w: state.power(),
        power_dbm: watts_to_dbm(state.power()),
        sinr_u: s.alice,
        sinr_e: s.eve,
        rate_u,
        rate_e,
        secrecy_rate: secrecy_rate(rate_u, rate_e),
        worst_case: worst_case_rates(state, ch, &unc.bounds, config, grid_n),
        amplification_power_w: amp,
        margins: audit(state, ch, unc, config, samples, seed),
    }
}
