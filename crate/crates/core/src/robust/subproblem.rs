//! The two convex subproblems of one alternating step.
//!
//! **w-step** (v fixed): minimize `t` subject to `‖w‖ ≤ t ≤ √P_peak`, both
//! robust LMIs and the amplification budget in Schur form.
//!
//! **v-step** (w fixed): maximize `α_U + α_E` subject to both robust LMIs
//! with the rate slacks, the amplification budget as a second-order cone,
//! the element amplitude caps and the rotated cone `t_A ≥ σ_I²‖diag(h_IU) v‖²`
//! that carries Alice's amplified noise.
//!
//! Variable layouts:
//!
//! ```text
//! w-step: [Re w (N), Im w (N), t, ϖ₁, ϖ₂, ψ₁, ψ₂]
//! v-step: [Re v (M), Im v (M), ϖ₁, ϖ₂, ψ₁, ψ₂, α_U, α_E, t_A]
//! ```

use super::lmi::{
    build_alice_lmi, build_amp_constraint, build_eve_lmi, build_magnitude_constraints, AffineSoc,
    AmpConstraint, Basis, ConeModel, ScalarAffine, SlackVars,
};
use super::minorant::{FreeBlock, Link, MinorantTerms};
use super::{LinkData, RobustConfig, RobustError, RobustProblem};
use crate::geometry::ChannelSet;
use crate::jitter::UncertaintySet;
use crate::{CVector, C64};
use conic::{ConicProblem, ConicSolution, Residuals, Settings, Status};
use serde::{Deserialize, Serialize};

/// Outcome of a w-step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WStep {
    pub w: CVector,
    /// `‖w‖²` in watts.
    pub power: f64,
    /// S-procedure multipliers `[ϖ₁, ϖ₂, ψ₁, ψ₂]`.
    pub multipliers: [f64; 4],
    pub status: Status,
    pub residuals: Residuals,
    pub solver_iterations: usize,
}

/// Outcome of a v-step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VStep {
    pub v: CVector,
    pub alpha_u: f64,
    pub alpha_e: f64,
    pub multipliers: [f64; 4],
    pub status: Status,
    pub residuals: Residuals,
    pub solver_iterations: usize,
}

fn complex_block(x: &[f64], k: usize) -> CVector {
    CVector::from_fn(k, |i, _| C64::new(x[i], x[k + i]))
}

fn settings(config: &RobustConfig) -> Settings {
    Settings {
        tol: config.solver_tol,
        max_iter: config.solver_max_iter,
        ..Settings::default()
    }
}

/// Fixes nonnegative variables that appear in no other constraint at zero.
fn pin(model: &mut ConeModel, vars: &[usize]) {
    for &var in vars {
        model.nonneg(ScalarAffine::var(var, -1.0));
    }
}

/// Multipliers of zero-radius balls drop out of the LMIs.
fn pin_unused(model: &mut ConeModel, link: &LinkData, mult_h: usize, mult_g: usize) {
    for (var, radius) in [(mult_h, link.xi_h), (mult_g, link.xi_g)] {
        if radius == 0.0 {
            pin(model, &[var]);
        }
    }
}

fn check(sol: &ConicSolution) -> Result<(), RobustError> {
    match sol.status {
        Status::Optimal => Ok(()),
        Status::PrimalInfeasible => Err(RobustError::Infeasible),
        other => Err(RobustError::Solver(other)),
    }
}

/// Cone program of the w-step expanded at `(w_k, v_k)`. With `compress`
/// off, the robust LMIs keep their full `N + MN` error dimension.
pub fn w_step_problem(
    p: &RobustProblem,
    w_k: &CVector,
    v_k: &CVector,
    compress: bool,
) -> ConicProblem {
    let n = p.n();
    let t = 2 * n;
    let (vp1, vp2, ps1, ps2) = (t + 1, t + 2, t + 3, t + 4);
    let mut model = ConeModel::new(t + 5);
    model.set_objective(t, 1.0);
    let mut norm = AffineSoc {
        entries: vec![ScalarAffine::var(t, 1.0)],
    };
    norm.entries
        .extend((0..2 * n).map(|i| ScalarAffine::var(i, 1.0)));
    model.soc(&norm);
    model.nonneg(ScalarAffine::constant(p.config.p_peak.sqrt()).plus(t, -1.0));
    for var in [vp1, vp2, ps1, ps2] {
        model.nonneg(ScalarAffine::var(var, 1.0));
    }
    let basis = if compress {
        Basis::for_w(n, v_k)
    } else {
        Basis::full(n, p.m())
    };
    let alice = MinorantTerms::new(
        Link::Alice,
        w_k,
        v_k,
        p.alice.h.clone(),
        p.alice.g.clone(),
        FreeBlock::W,
    );
    let eve = MinorantTerms::new(
        Link::Eve,
        w_k,
        v_k,
        p.eve.h.clone(),
        p.eve.g.clone(),
        FreeBlock::W,
    );
    let alice_vars = SlackVars {
        mult_h: vp1,
        mult_g: vp2,
        alpha: None,
        noise_epigraph: None,
    };
    let eve_vars = SlackVars {
        mult_h: ps1,
        mult_g: ps2,
        alpha: None,
        noise_epigraph: None,
    };
    pin_unused(&mut model, &p.alice, vp1, vp2);
    model.psd(&build_alice_lmi(&alice, &basis, &p.alice, &alice_vars));
    if p.config.eavesdropper {
        pin_unused(&mut model, &p.eve, ps1, ps2);
        model.psd(&build_eve_lmi(&eve, &basis, &p.eve, &eve_vars));
    } else {
        pin(&mut model, &[ps1, ps2]);
    }
    if p.amplifies() {
        let sigma = p.config.effective_sigma_i2();
        if let AmpConstraint::Psd(lmi) =
            build_amp_constraint(w_k, v_k, &p.h_i, sigma, p.config.p_f, FreeBlock::W)
        {
            model.psd(&lmi);
        }
    }
    model.build()
}

/// Cone program of the v-step at `w` expanded around `v_k`.
pub fn v_step_problem(
    p: &RobustProblem,
    w: &CVector,
    v_k: &CVector,
    compress: bool,
) -> ConicProblem {
    let m = p.m();
    let base = 2 * m;
    let (vp1, vp2, ps1, ps2, a_u, a_e, t_a) = (
        base,
        base + 1,
        base + 2,
        base + 3,
        base + 4,
        base + 5,
        base + 6,
    );
    let mut model = ConeModel::new(base + 7);
    model.set_objective(a_u, -1.0);
    model.set_objective(a_e, -1.0);
    for var in [vp1, vp2, ps1, ps2, a_u, a_e] {
        model.nonneg(ScalarAffine::var(var, 1.0));
    }
    // t_A ≥ ‖c ⊙ v‖² as ‖(2c ⊙ v, t_A − 1)‖ ≤ t_A + 1.
    let gain: Vec<f64> = p
        .alice
        .h_irs
        .iter()
        .map(|h| 2.0 * (p.alice.irs_noise).sqrt() * h.norm())
        .collect();
    let mut rsoc = AffineSoc {
        entries: vec![
            ScalarAffine {
                constant: 1.0,
                terms: vec![(t_a, 1.0)],
            },
            ScalarAffine {
                constant: -1.0,
                terms: vec![(t_a, 1.0)],
            },
        ],
    };
    for part in 0..2 {
        rsoc.entries.extend(
            gain.iter()
                .enumerate()
                .map(|(i, c)| ScalarAffine::var(part * m + i, *c)),
        );
    }
    model.soc(&rsoc);

    let basis = if compress {
        Basis::for_v(w, m)
    } else {
        Basis::full(p.n(), m)
    };
    let alice = MinorantTerms::new(
        Link::Alice,
        w,
        v_k,
        p.alice.h.clone(),
        p.alice.g.clone(),
        FreeBlock::V,
    );
    let eve = MinorantTerms::new(
        Link::Eve,
        w,
        v_k,
        p.eve.h.clone(),
        p.eve.g.clone(),
        FreeBlock::V,
    );
    let alice_vars = SlackVars {
        mult_h: vp1,
        mult_g: vp2,
        alpha: Some(a_u),
        noise_epigraph: Some(t_a),
    };
    let eve_vars = SlackVars {
        mult_h: ps1,
        mult_g: ps2,
        alpha: Some(a_e),
        noise_epigraph: None,
    };
    pin_unused(&mut model, &p.alice, vp1, vp2);
    model.psd(&build_alice_lmi(&alice, &basis, &p.alice, &alice_vars));
    if p.config.eavesdropper {
        pin_unused(&mut model, &p.eve, ps1, ps2);
        model.psd(&build_eve_lmi(&eve, &basis, &p.eve, &eve_vars));
    } else {
        pin(&mut model, &[ps1, ps2, a_e]);
    }
    if p.amplifies() {
        let sigma = p.config.effective_sigma_i2();
        if let AmpConstraint::Soc(soc) =
            build_amp_constraint(w, v_k, &p.h_i, sigma, p.config.p_f, FreeBlock::V)
        {
            model.soc(&soc);
        }
    }
    for soc in build_magnitude_constraints(m, p.config.effective_tau_max()) {
        model.soc(&soc);
    }
    model.build()
}

pub(crate) fn w_step(
    p: &RobustProblem,
    w_k: &CVector,
    v_k: &CVector,
) -> Result<WStep, RobustError> {
    let problem = w_step_problem(p, w_k, v_k, true);
    let sol = conic::solve_with(&problem, &settings(&p.config));
    log::debug!(
        "w-step: {:?} after {} iterations",
        sol.status,
        sol.iterations
    );
    check(&sol)?;
    let n = p.n();
    let w = complex_block(sol.x.as_slice(), n);
    let t = 2 * n;
    Ok(WStep {
        power: w.norm_squared(),
        w,
        multipliers: [sol.x[t + 1], sol.x[t + 2], sol.x[t + 3], sol.x[t + 4]],
        status: sol.status,
        residuals: sol.residuals,
        solver_iterations: sol.iterations,
    })
}

pub(crate) fn v_step(p: &RobustProblem, w: &CVector, v_k: &CVector) -> Result<VStep, RobustError> {
    let problem = v_step_problem(p, w, v_k, true);
    let sol = conic::solve_with(&problem, &settings(&p.config));
    log::debug!(
        "v-step: {:?} after {} iterations",
        sol.status,
        sol.iterations
    );
    check(&sol)?;
    let m = p.m();
    let base = 2 * m;
    Ok(VStep {
        v: complex_block(sol.x.as_slice(), m),
        alpha_u: sol.x[base + 4],
        alpha_e: sol.x[base + 5],
        multipliers: [
            sol.x[base],
            sol.x[base + 1],
            sol.x[base + 2],
            sol.x[base + 3],
        ],
        status: sol.status,
        residuals: sol.residuals,
        solver_iterations: sol.iterations,
    })
}

/// Minimum-power beamformer for fixed `v_k`, with Alice's power linearized
/// around `(w_k, v_k)`.
pub fn solve_w_subproblem(
    v_k: &CVector,
    w_k: &CVector,
    ch: &ChannelSet,
    unc: &UncertaintySet,
    config: &RobustConfig,
) -> Result<WStep, RobustError> {
    let p = RobustProblem::new(ch, unc, config)?;
    check_dims(&p, w_k, v_k)?;
    w_step(&p, w_k, v_k)
}

/// Slack-maximizing reflection vector for fixed `w`, linearized around
/// `(w, v_k)`. `Err(RobustError::Infeasible)` carries the solver's
/// infeasibility certificate and ends the alternation.
pub fn solve_v_subproblem(
    w: &CVector,
    v_k: &CVector,
    ch: &ChannelSet,
    unc: &UncertaintySet,
    config: &RobustConfig,
) -> Result<VStep, RobustError> {
    let p = RobustProblem::new(ch, unc, config)?;
    check_dims(&p, w, v_k)?;
    v_step(&p, w, v_k)
}

pub(crate) fn check_dims(p: &RobustProblem, w: &CVector, v: &CVector) -> Result<(), RobustError> {
    if w.len() != p.n() || v.len() != p.m() {
        return Err(RobustError::Dimension(format!(
            "expected w of length {} and v of length {}, got {} and {}",
            p.n(),
            p.m(),
            w.len(),
            v.len()
        )));
    }
    if w.iter()
        .chain(v.iter())
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(RobustError::Dimension("non-finite iterate".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{synthesize_channels, ChannelModel, NetworkGeometry};
    use crate::jitter::{uncertainty_radii, JitterBounds};
    use crate::robust::{initial_state, Init, Mode};

    // Compression must be exact: the full and compressed programs share an
    // optimum, only their sizes differ.
    #[test]
    fn compressed_programs_match_full_ones() {
        for (seed, mode) in [(1, Mode::Active), (2, Mode::Passive)] {
            let ch =
                synthesize_channels(&NetworkGeometry::default(), &ChannelModel::default(), seed)
                    .unwrap();
            let bounds = JitterBounds::from_ratios(&ch.angles, 0.02, 0.04, 0.02);
            let unc = uncertainty_radii(&ch, &bounds);
            let cfg = RobustConfig::default().with_mode(mode);
            let p = RobustProblem::new(&ch, &unc, &cfg).unwrap();
            let (s, _, _) = initial_state(&p, &Init::Heuristic).unwrap();
            for (full, small) in [
                (
                    w_step_problem(&p, &s.w, &s.v, false),
                    w_step_problem(&p, &s.w, &s.v, true),
                ),
                (
                    v_step_problem(&p, &s.w, &s.v, false),
                    v_step_problem(&p, &s.w, &s.v, true),
                ),
            ] {
                assert!(small.a.nrows() < full.a.nrows());
                let (a, b) = (
                    conic::solve_with(&full, &settings(&cfg)),
                    conic::solve_with(&small, &settings(&cfg)),
                );
                assert_eq!((a.status, b.status), (Status::Optimal, Status::Optimal));
                let (fa, fb) = (full.c.dot(&a.x), small.c.dot(&b.x));
                assert!(
                    (fa - fb).abs() <= 1e-6 * fa.abs().max(1.0),
                    "seed {seed}: {fa} vs {fb}"
                );
            }
        }
    }
}
