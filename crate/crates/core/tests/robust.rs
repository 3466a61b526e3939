mod common;

use beamforming::geometry::{cascaded_channel, complex_normal};
use beamforming::jitter::{uncertainty_radii, JitterBounds};
use beamforming::robust::minorant::nominal_signal;
use beamforming::robust::{
    alternate_optimize, amplification_power, build_amp_constraint, initial_state,
    solve_v_subproblem, solve_w_subproblem, AmpConstraint, BeamState, FreeBlock, Init, Link,
    MinorantTerms, Mode, RobustConfig, RobustError, RobustProblem, StopReason,
};
use beamforming::{CMatrix, CVector};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CVector {
    CVector::from_fn(n, |_, _| complex_normal(rng) * scale)
}

fn real_parts(z: &CVector) -> Vec<f64> {
    z.iter()
        .map(|c| c.re)
        .chain(z.iter().map(|c| c.im))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn minorant_bounds_the_exact_power(seed in any::<u64>(), channel in 0u64..20, scale in 0.01..2.0f64) {
        let ch = baseline(channel);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (n, m) = (ch.n(), ch.m());
        let w_k = random_vec(&mut rng, n, 1.0);
        let v_k = random_vec(&mut rng, m, 1.0);
        let g = ch.g_u();
        for free in [FreeBlock::W, FreeBlock::V] {
            let t = MinorantTerms::new(Link::Alice, &w_k, &v_k, ch.h_u.clone(), g.clone(), free);
            let z = match free {
                FreeBlock::W => &w_k + random_vec(&mut rng, n, scale),
                FreeBlock::V => &v_k + random_vec(&mut rng, m, scale),
            };
            let dh = random_vec(&mut rng, n, scale * ch.h_u.norm());
            let dg = cascaded_channel(&ch.h_iu, &CMatrix::from_fn(m, n, |_, _| complex_normal(&mut rng) * scale)).unwrap();
            let (w, v) = t.point(&z);
            let exact = nominal_signal(&(&ch.h_u + &dh), &(&g + &dg), &w, &v).norm_sqr();
            let x = beamforming::robust::error_vector(&dh, &dg);
            prop_assert!(t.quadratic_form(&z, &x) - exact <= 1e-9 * exact.max(1.0));
        }
    }

    #[test]
    fn schur_form_agrees_with_the_budget(seed in any::<u64>(), sw in 0.0..2.0f64, sv in 0.0..3.0f64) {
        let ch = baseline(seed % 10);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = random_vec(&mut rng, ch.n(), sw);
        let v = random_vec(&mut rng, ch.m(), sv);
        let (sigma, p_f) = (1e-4, 1e-2);
        let slack = 1.0 - amplification_power(&w, &v, &ch.h_i, sigma) / p_f;
        let AmpConstraint::Psd(lmi) = build_amp_constraint(&w, &v, &ch.h_i, sigma, p_f, FreeBlock::W) else {
            panic!("w-block budget must be an LMI");
        };
        let lmin = lmi.min_eigenvalue(&real_parts(&w));
        if slack.abs() > 1e-9 {
            prop_assert_eq!(slack > 0.0, lmin > 0.0, "slack {}, λmin {}", slack, lmin);
        }
    }
}

#[test]
fn mrt_power_matches_the_closed_form_without_irs_or_eve() {
    for seed in 0..5 {
        let ch = without_irs(&baseline(seed));
        let unc = uncertainty_radii(&ch, &JitterBounds::default());
        let cfg = RobustConfig::default().without_eavesdropper();
        let trace = alternate_optimize(&ch, &unc, &cfg, &Init::Heuristic).unwrap();
        let target = (2f64.powf(cfg.eta_u) - 1.0) * cfg.sigma_u2 / ch.h_u.norm_squared();
        let got = trace.final_power();
        assert!(
            (got - target).abs() <= 1e-6 * target,
            "seed {seed}: {got} vs {target}"
        );
        assert_eq!(trace.stop_reason, StopReason::Converged);
    }
}

#[test]
fn subproblem_iterates_are_robustly_feasible() {
    for seed in 0..2 {
        let ch = baseline(seed);
        let unc = default_uncertainty(&ch);
        for mode in [Mode::Active, Mode::Passive] {
            let cfg = config(mode);
            let p = RobustProblem::new(&ch, &unc, &cfg).unwrap();
            let (state, _, _) = initial_state(&p, &Init::Heuristic).unwrap();
            let (mut w, mut v) = (state.w, state.v);
            for round in 0..2 {
                let vs = solve_v_subproblem(&w, &v, &ch, &unc, &cfg).unwrap();
                let bad = robust_violation(
                    &p,
                    &ch,
                    &unc,
                    FreeBlock::V,
                    (&w, &v),
                    (&w, &vs.v),
                    200,
                    round,
                );
                assert!(
                    bad <= 1e-7,
                    "v-step {round}, {mode:?}, seed {seed}: violation {bad}"
                );
                let ws = solve_w_subproblem(&vs.v, &w, &ch, &unc, &cfg).unwrap();
                let bad = robust_violation(
                    &p,
                    &ch,
                    &unc,
                    FreeBlock::W,
                    (&w, &vs.v),
                    (&ws.w, &vs.v),
                    200,
                    round,
                );
                assert!(
                    bad <= 1e-7,
                    "w-step {round}, {mode:?}, seed {seed}: violation {bad}"
                );
                (w, v) = (ws.w, vs.v);
            }
        }
    }
}

#[test]
fn alternation_never_raises_the_power() {
    for seed in 0..4 {
        let ch = baseline(seed);
        let unc = default_uncertainty(&ch);
        for mode in [Mode::Active, Mode::Passive] {
            let trace = alternate_optimize(&ch, &unc, &config(mode), &Init::Heuristic).unwrap();
            assert!(
                trace.max_increase() <= 1e-6,
                "seed {seed} {mode:?}: {:?}",
                trace.powers
            );
            assert!(matches!(
                trace.stop_reason,
                StopReason::Converged | StopReason::VSubproblemInfeasible
            ));
        }
    }
}

#[test]
fn final_states_respect_the_budgets() {
    let ch = baseline(3);
    let unc = default_uncertainty(&ch);
    for mode in [Mode::Active, Mode::Passive] {
        let cfg = config(mode);
        let s = alternate_optimize(&ch, &unc, &cfg, &Init::Heuristic)
            .unwrap()
            .state;
        assert!(s.power() <= cfg.p_peak * (1.0 + 1e-7));
        let cap = cfg.effective_tau_max();
        assert!(s.v.iter().all(|z| z.norm() <= cap * (1.0 + 1e-7)));
        if mode == Mode::Active {
            assert!(
                amplification_power(&s.w, &s.v, &ch.h_i, cfg.sigma_i2) <= cfg.p_f * (1.0 + 1e-6)
            );
        }
    }
}

#[test]
fn jitter_free_runs_converge_quickly() {
    for seed in 0..3 {
        let ch = baseline(seed);
        let unc = uncertainty_radii(&ch, &JitterBounds::default());
        let cfg = RobustConfig {
            eta_e: 3.0,
            ..config(Mode::Active)
        };
        let trace = alternate_optimize(&ch, &unc, &cfg, &Init::Heuristic).unwrap();
        assert_eq!(trace.stop_reason, StopReason::Converged);
        assert!(
            trace.iterations.len() - 1 <= 30,
            "{} iterations",
            trace.iterations.len() - 1
        );
    }
}

#[test]
fn runs_are_deterministic() {
    let ch = baseline(5);
    let unc = default_uncertainty(&ch);
    let a = alternate_optimize(&ch, &unc, &config(Mode::Active), &Init::Heuristic).unwrap();
    let b = alternate_optimize(&ch, &unc, &config(Mode::Active), &Init::Heuristic).unwrap();
    assert_eq!(a.powers, b.powers);
    assert_eq!(a.state, b.state);
}

#[test]
fn given_start_is_checked() {
    let ch = baseline(0);
    let unc = default_uncertainty(&ch);
    let bad = BeamState {
        w: CVector::zeros(3),
        v: CVector::zeros(ch.m()),
    };
    let err = alternate_optimize(&ch, &unc, &config(Mode::Active), &Init::Given(bad)).unwrap_err();
    assert!(matches!(err, RobustError::Dimension(_)));
}

#[test]
fn warm_start_from_a_solution_stays_put() {
    let ch = baseline(1);
    let unc = default_uncertainty(&ch);
    let cfg = config(Mode::Passive);
    let first = alternate_optimize(&ch, &unc, &cfg, &Init::Heuristic).unwrap();
    let again = alternate_optimize(&ch, &unc, &cfg, &Init::Given(first.state.clone())).unwrap();
    assert!(again.final_power() <= first.final_power() * (1.0 + 1e-6));
}

#[test]
fn trace_serializes() {
    let ch = baseline(2);
    let unc = default_uncertainty(&ch);
    let trace = alternate_optimize(&ch, &unc, &config(Mode::Active), &Init::Heuristic).unwrap();
    let json: serde_json::Value = serde_json::from_str(&trace.to_json()).unwrap();
    assert_eq!(
        json["iterations"].as_array().unwrap().len(),
        trace.iterations.len()
    );
    assert!(json["iterations"][0]["power_dbm"].is_number());
}
