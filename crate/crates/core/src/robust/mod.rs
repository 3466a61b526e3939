//! Robust power minimization by alternating optimization.
//!
//! The worst-case rate constraints at Alice and Eve are nonconvex in the
//! beamformer `w` and the reflection vector `v`. Each alternating step fixes
//! one block, linearizes Alice's received power around the current iterate
//! (see [`minorant`]), and turns both robust constraints into LMIs via the
//! S-procedure (see [`lmi`]). The resulting cone programs are solved by
//! [`conic`].
//!
//! Internally every channel is divided by the receiver noise amplitude
//! `σ_U` and every noise power by `σ_U²`. SINRs are unchanged and the
//! problem data stays well scaled. The amplification budget of the active
//! IRS is divided by `P_F`.

pub mod ao;
pub mod lmi;
pub mod minorant;
pub mod subproblem;

pub use ao::{alternate_optimize, initial_state, AoIteration, AoTrace, Init, StopReason};
pub use lmi::{
    build_alice_lmi, build_amp_constraint, build_eve_lmi, build_magnitude_constraints,
    AffineHermitian, AffineSoc, AmpConstraint, Basis, ScalarAffine, SlackVars,
};
pub use minorant::{error_vector, minorant_terms, stack_u, FreeBlock, Link, MinorantTerms};
pub use subproblem::{solve_v_subproblem, solve_w_subproblem, VStep, WStep};

use crate::geometry::ChannelSet;
use crate::jitter::UncertaintySet;
use crate::{CMatrix, CVector};
use conic::Status;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Active,
    Passive,
}

/// Targets, budgets and noise levels of the robust problem. Powers are in
/// watts, rates in bits/s/Hz and `tau_max` is a linear amplitude ratio.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobustConfig {
    /// Minimum worst-case rate at Alice.
    pub eta_u: f64,
    /// Maximum worst-case rate at Eve.
    pub eta_e: f64,
    pub p_peak: f64,
    /// Amplification power budget of the active IRS.
    pub p_f: f64,
    pub tau_max: f64,
    /// Thermal noise added by the active IRS elements.
    pub sigma_i2: f64,
    pub sigma_u2: f64,
    pub sigma_e2: f64,
    /// Relative power change that ends the alternation.
    pub epsilon: f64,
    pub mode: Mode,
    /// With `false` Eve's leakage constraint is dropped and the problem
    /// becomes plain robust power minimization towards Alice.
    #[serde(default = "enabled")]
    pub eavesdropper: bool,
    pub max_iters: usize,
    pub solver_tol: f64,
    pub solver_max_iter: usize,
}

fn enabled() -> bool {
    true
}

impl Default for RobustConfig {
    fn default() -> Self {
        use crate::units::{db_to_amplitude, dbm_to_watts};
        RobustConfig {
            eta_u: 4.5,
            eta_e: 1.0,
            p_peak: dbm_to_watts(40.0),
            p_f: dbm_to_watts(10.0),
            tau_max: db_to_amplitude(30.0),
            sigma_i2: dbm_to_watts(-10.0),
            sigma_u2: dbm_to_watts(-10.0),
            sigma_e2: dbm_to_watts(-10.0),
            epsilon: 1e-4,
            mode: Mode::Active,
            eavesdropper: true,
            max_iters: 100,
            solver_tol: 1e-8,
            solver_max_iter: 200,
        }
    }
}

impl RobustConfig {
    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn without_eavesdropper(mut self) -> Self {
        self.eavesdropper = false;
        self
    }

    /// Amplitude cap that applies in the configured mode. A passive
    /// surface cannot amplify.
    pub fn effective_tau_max(&self) -> f64 {
        match self.mode {
            Mode::Active => self.tau_max,
            Mode::Passive => 1.0,
        }
    }

    /// IRS noise that applies in the configured mode. A passive surface
    /// adds none.
    pub fn effective_sigma_i2(&self) -> f64 {
        match self.mode {
            Mode::Active => self.sigma_i2,
            Mode::Passive => 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), RobustError> {
        let bad = |msg: &str| Err(RobustError::InvalidConfig(msg.to_string()));
        let all = [
            self.eta_u,
            self.eta_e,
            self.p_peak,
            self.p_f,
            self.tau_max,
            self.sigma_i2,
            self.sigma_u2,
            self.sigma_e2,
            self.epsilon,
            self.solver_tol,
        ];
        if all.iter().any(|x| !x.is_finite()) {
            return bad("non-finite parameter");
        }
        if self.eta_u <= 0.0
            || (self.eavesdropper && !(0.0 < self.eta_e && self.eta_e < self.eta_u))
        {
            return bad("rate targets must satisfy 0 < eta_e < eta_u");
        }
        if self.p_peak <= 0.0 || self.p_f <= 0.0 || self.sigma_u2 <= 0.0 || self.sigma_e2 <= 0.0 {
            return bad("powers must be positive");
        }
        if self.sigma_i2 < 0.0 || self.tau_max < 0.0 {
            return bad("IRS noise and amplitude cap must be nonnegative");
        }
        if self.epsilon <= 0.0 || self.solver_tol <= 0.0 || self.max_iters == 0 {
            return bad("tolerances and iteration limits must be positive");
        }
        Ok(())
    }
}

/// Beamformer (√W) and IRS reflection vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BeamState {
    pub w: CVector,
    pub v: CVector,
}

impl BeamState {
    pub fn power(&self) -> f64 {
        self.w.norm_squared()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum RobustError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("subproblem infeasible")]
    Infeasible,
    #[error("conic solver stopped with {0:?}")]
    Solver(Status),
    #[error("no feasible starting point after {0} attempts")]
    InitializationFailed(usize),
}

/// Per-receiver data of the normalized problem.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkData {
    pub h: CVector,
    /// Cascaded channel `diag(h_irsᴴ) H_I`.
    pub g: CMatrix,
    /// IRS-to-receiver channel.
    pub h_irs: CVector,
    pub xi_h: f64,
    pub xi_g: f64,
    /// Receiver noise.
    pub noise: f64,
    /// IRS noise power per element before the IRS-to-receiver channel.
    pub irs_noise: f64,
    /// Rate threshold in bits/s/Hz.
    pub eta: f64,
}

impl LinkData {
    /// `2^η − 1`.
    pub fn sinr_target(&self) -> f64 {
        2f64.powf(self.eta) - 1.0
    }

    /// Amplified IRS noise reaching the receiver, `Σ |h_m|² |v_m|²`
    /// (without the noise power factor).
    pub fn irs_gain(&self, v: &CVector) -> f64 {
        self.h_irs
            .iter()
            .zip(v.iter())
            .map(|(h, v)| h.norm_sqr() * v.norm_sqr())
            .sum()
    }

    /// Interference-plus-noise power `σ_I² Σ|h_m|²|v_m|² + σ²`.
    pub fn noise_power(&self, v: &CVector) -> f64 {
        self.irs_noise * self.irs_gain(v) + self.noise
    }
}

/// Normalized problem data shared by both subproblems.
#[derive(Clone, Debug, PartialEq)]
pub struct RobustProblem {
    pub alice: LinkData,
    pub eve: LinkData,
    /// Physical UBS-to-IRS channel, used by the amplification budget.
    pub h_i: CMatrix,
    pub config: RobustConfig,
    /// Amplitude the channels were divided by.
    pub scale: f64,
}

impl RobustProblem {
    pub fn new(
        ch: &ChannelSet,
        unc: &UncertaintySet,
        config: &RobustConfig,
    ) -> Result<Self, RobustError> {
        config.validate()?;
        let (n, m) = (ch.h_u.len(), ch.h_i.nrows());
        if ch.h_e.len() != n || ch.h_i.ncols() != n || ch.h_iu.len() != m || ch.h_ie.len() != m {
            return Err(RobustError::Dimension("inconsistent channel set".into()));
        }
        let scale = config.sigma_u2.sqrt();
        let power = config.sigma_u2;
        // Multiplies the normalized IRS channel, so it stays physical.
        let irs_noise = config.effective_sigma_i2();
        let link = |h: &CVector, h_irs: &CVector, xi_h: f64, xi_g: f64, noise: f64, eta: f64| {
            let h_irs = h_irs.unscale(scale);
            LinkData {
                h: h.unscale(scale),
                g: crate::geometry::cascaded_channel(&h_irs, &ch.h_i).expect("checked dimensions"),
                h_irs,
                xi_h: xi_h / scale,
                xi_g: xi_g / scale,
                noise: noise / power,
                irs_noise,
                eta,
            }
        };
        Ok(RobustProblem {
            alice: link(
                &ch.h_u,
                &ch.h_iu,
                unc.xi_uh,
                unc.xi_ug,
                config.sigma_u2,
                config.eta_u,
            ),
            eve: link(
                &ch.h_e,
                &ch.h_ie,
                unc.xi_eh,
                unc.xi_eg,
                config.sigma_e2,
                config.eta_e,
            ),
            h_i: ch.h_i.clone(),
            config: config.clone(),
            scale,
        })
    }

    pub fn n(&self) -> usize {
        self.alice.h.len()
    }

    pub fn m(&self) -> usize {
        self.h_i.nrows()
    }

    pub fn link(&self, link: Link) -> &LinkData {
        match link {
            Link::Alice => &self.alice,
            Link::Eve => &self.eve,
        }
    }

    /// Whether the amplification budget applies.
    pub fn amplifies(&self) -> bool {
        self.config.mode == Mode::Active && self.m() > 0
    }
}

/// Power `‖diag(v) H_I w‖² + σ_I² ‖v‖²` drawn by the active IRS.
pub fn amplification_power(w: &CVector, v: &CVector, h_i: &CMatrix, sigma_i2: f64) -> f64 {
    let hw = h_i * w;
    hw.iter()
        .zip(v.iter())
        .map(|(a, b)| a.norm_sqr() * b.norm_sqr())
        .sum::<f64>()
        + sigma_i2 * v.norm_squared()
}
