use conic::{
    hermitian_to_real, kkt_residuals, smat, solve, solve_with, svec, Cone, ConicProblem, Settings,
    Status,
};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn problem(c: &[f64], a_rows: &[&[f64]], b: &[f64], cones: Vec<Cone>) -> ConicProblem {
    let n = c.len();
    let flat: Vec<f64> = a_rows.iter().flat_map(|r| r.iter().cloned()).collect();
    ConicProblem::new(
        DVector::from_row_slice(c),
        DMatrix::from_row_slice(a_rows.len(), n, &flat),
        DVector::from_row_slice(b),
        cones,
    )
    .unwrap()
}

#[test]
fn two_by_two_lmi_has_unit_optimum() {
    // [[x, 1], [1, x]] ⪰ 0 in svec order (x, √2·1, x).
    let r2 = std::f64::consts::SQRT_2;
    let p = problem(
        &[1.0],
        &[&[-1.0], &[0.0], &[-1.0]],
        &[0.0, r2, 0.0],
        vec![Cone::Psd(2)],
    );
    let sol = solve(&p, 1e-8, 200);
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.x[0] - 1.0).abs() < 1e-6, "x = {}", sol.x[0]);
    let r = sol.residuals;
    assert!(r.primal <= 1e-8 && r.dual <= 1e-8 && r.gap <= 1e-8, "{r:?}");
}

#[test]
fn second_order_cone_gives_euclidean_norm() {
    let p = problem(
        &[1.0],
        &[&[-1.0], &[0.0], &[0.0]],
        &[0.0, 3.0, 4.0],
        vec![Cone::Soc(3)],
    );
    let sol = solve(&p, 1e-8, 200);
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.x[0] - 5.0).abs() < 1e-6);
}

#[test]
fn contradictory_bounds_are_certified_infeasible() {
    // x ≥ 1 and −x ≥ 0.
    let p = problem(
        &[0.0],
        &[&[-1.0], &[1.0]],
        &[-1.0, 0.0],
        vec![Cone::NonNeg(2)],
    );
    let sol = solve(&p, 1e-8, 200);
    assert_eq!(sol.status, Status::PrimalInfeasible);
    // bᵀy = −1, Aᵀy ≈ 0, y ≥ 0.
    assert!((p.b.dot(&sol.y) + 1.0).abs() < 1e-9);
    assert!(p.a.tr_mul(&sol.y).norm() <= 1e-8);
    assert!(sol.y.iter().all(|&v| v >= 0.0));
    assert!(sol.certificate_residual.unwrap() <= 1e-8);
}

#[test]
fn unbounded_objective_is_certified() {
    // minimize −x subject to x ≥ 0.
    let p = problem(&[-1.0], &[&[-1.0]], &[0.0], vec![Cone::NonNeg(1)]);
    let sol = solve(&p, 1e-8, 200);
    assert_eq!(sol.status, Status::DualInfeasible);
    assert!((p.c.dot(&sol.x) + 1.0).abs() < 1e-9);
    assert!(sol.x[0] > 0.0);
}

#[test]
fn equality_rows_are_honoured() {
    // minimize x + 2y subject to x + y = 1, x, y ≥ 0 → (1, 0).
    let p = problem(
        &[1.0, 2.0],
        &[&[1.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]],
        &[1.0, 0.0, 0.0],
        vec![Cone::Zero(1), Cone::NonNeg(2)],
    );
    let sol = solve(&p, 1e-8, 200);
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.x[0] - 1.0).abs() < 1e-6 && sol.x[1].abs() < 1e-6);
    assert!((sol.primal_objective - 1.0).abs() < 1e-6);
}

#[test]
fn empty_blocks_are_ignored() {
    let p = problem(
        &[1.0],
        &[&[-1.0], &[0.0], &[0.0]],
        &[0.0, 3.0, 4.0],
        vec![Cone::NonNeg(0), Cone::Soc(3), Cone::Psd(0), Cone::Zero(0)],
    );
    let sol = solve(&p, 1e-8, 200);
    assert_eq!(sol.status, Status::Optimal);
    assert!((sol.x[0] - 5.0).abs() < 1e-6);
}

#[test]
fn malformed_problem_reports_failure_instead_of_panicking() {
    let p = ConicProblem {
        c: DVector::from_vec(vec![1.0]),
        a: DMatrix::zeros(2, 1),
        b: DVector::zeros(3),
        cones: vec![Cone::NonNeg(3)],
    };
    assert_eq!(solve(&p, 1e-8, 50).status, Status::NumericalFailure);
}

#[test]
fn returned_residuals_match_recomputation() {
    let p = problem(
        &[1.0],
        &[&[-1.0], &[0.0], &[0.0]],
        &[0.0, 3.0, 4.0],
        vec![Cone::Soc(3)],
    );
    let sol = solve(&p, 1e-8, 200);
    assert_eq!(kkt_residuals(&p, &sol), sol.residuals);
}

#[test]
fn json_dump_roundtrips() {
    let r2 = std::f64::consts::SQRT_2;
    let p = problem(
        &[1.0, 0.5],
        &[&[-1.0, 0.0], &[0.0, 1.0], &[-1.0, 0.0], &[0.0, -1.0]],
        &[0.0, r2, 0.0, 2.0],
        vec![Cone::Psd(2), Cone::NonNeg(1)],
    );
    let text = p.to_json();
    assert!(text.contains("\"type\": \"psd\""));
    assert_eq!(ConicProblem::from_json(&text).unwrap(), p);
}

#[test]
fn identical_problems_follow_identical_iterates() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = random_sdp(&mut rng, 3, 3);
    let set = Settings {
        record_history: true,
        ..Settings::default()
    };
    let a = solve_with(&p, &set);
    let b = solve_with(&p, &set);
    assert!(!a.history.is_empty());
    assert_eq!(a.history, b.history);
    assert_eq!(a.x, b.x);
}

/// `I + Σ xᵢ Fᵢ ⪰ 0` with `|xᵢ| ≤ 1` and a random objective. The origin is
/// strictly feasible and the box keeps the problem bounded.
fn random_sdp(rng: &mut ChaCha8Rng, s: usize, n: usize) -> ConicProblem {
    let fs: Vec<DMatrix<f64>> = (0..n)
        .map(|_| {
            let m = DMatrix::from_fn(s, s, |_, _| rng.random_range(-1.0..1.0));
            (&m + m.transpose()) * 0.75
        })
        .collect();
    let c = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let tri = s * (s + 1) / 2;
    let mut a = DMatrix::zeros(tri + 2 * n, n);
    let mut b = DVector::zeros(tri + 2 * n);
    b.rows_mut(0, tri)
        .copy_from(&svec(&DMatrix::identity(s, s)));
    for (i, f) in fs.iter().enumerate() {
        a.view_mut((0, i), (tri, 1)).copy_from(&(-svec(f)));
        a[(tri + 2 * i, i)] = 1.0;
        a[(tri + 2 * i + 1, i)] = -1.0;
        b[tri + 2 * i] = 1.0;
        b[tri + 2 * i + 1] = 1.0;
    }
    ConicProblem::new(c, a, b, vec![Cone::Psd(s), Cone::NonNeg(2 * n)]).unwrap()
}

/// Independent oracle for [`random_sdp`]: the ellipsoid method with a
/// separation oracle built from the most negative eigenvector of
/// `I + Σ xᵢ Fᵢ` and from the box faces. Returns the best feasible objective.
fn ellipsoid_min(p: &ConicProblem, s: usize) -> f64 {
    let n = p.num_vars();
    let tri = s * (s + 1) / 2;
    let fs: Vec<DMatrix<f64>> = (0..n)
        .map(|i| {
            let col: Vec<f64> = (0..tri).map(|r| -p.a[(r, i)]).collect();
            smat(&col, s)
        })
        .collect();
    let mut center = DVector::<f64>::zeros(n);
    let mut shape = DMatrix::<f64>::identity(n, n) * (n as f64);
    let mut best = f64::INFINITY;
    let nf = n as f64;
    for _ in 0..20_000 {
        let mut fx = DMatrix::<f64>::identity(s, s);
        for (fi, &xi) in fs.iter().zip(center.iter()) {
            fx += fi * xi;
        }
        let eig = fx.clone().symmetric_eigen();
        let (k, lmin) =
            eig.eigenvalues
                .iter()
                .cloned()
                .enumerate()
                .fold(
                    (0, f64::INFINITY),
                    |acc, (i, l)| if l < acc.1 { (i, l) } else { acc },
                );
        let worst_box = (0..n)
            .max_by(|&i, &j| center[i].abs().partial_cmp(&center[j].abs()).unwrap())
            .unwrap();
        let g = if center[worst_box].abs() > 1.0 {
            let mut g = DVector::zeros(n);
            g[worst_box] = center[worst_box].signum();
            g
        } else if lmin < 0.0 {
            let v = eig.eigenvectors.column(k);
            DVector::from_fn(n, |i, _| -(v.transpose() * &fs[i] * v)[(0, 0)])
        } else {
            best = best.min(p.c.dot(&center));
            p.c.clone()
        };
        let pg = &shape * &g;
        let width = g.dot(&pg).sqrt();
        if width < 1e-11 {
            break;
        }
        let gt = &pg / width;
        if n == 1 {
            center -= &gt * 0.5;
            shape *= 0.25;
        } else {
            center -= &gt * (1.0 / (nf + 1.0));
            shape =
                (&shape - &gt * gt.transpose() * (2.0 / (nf + 1.0))) * (nf * nf / (nf * nf - 1.0));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn tiny_sdps_match_ellipsoid_oracle(seed in 0u64..10_000, s in 1usize..=3, n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_sdp(&mut rng, s, n);
        let sol = solve(&p, 1e-8, 200);
        prop_assert_eq!(sol.status, Status::Optimal);
        let oracle = ellipsoid_min(&p, s);
        prop_assert!((sol.primal_objective - oracle).abs() < 1e-4,
            "solver {} vs ellipsoid {}", sol.primal_objective, oracle);
    }

    #[test]
    fn optimal_exits_satisfy_tolerance_and_weak_duality(seed in 0u64..10_000, s in 1usize..=4, n in 1usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_sdp(&mut rng, s, n);
        let tol = 1e-8;
        let sol = solve(&p, tol, 200);
        prop_assert_eq!(sol.status, Status::Optimal);
        let r = sol.residuals;
        prop_assert!(r.primal <= tol && r.dual <= tol && r.gap <= tol);
        prop_assert!(sol.primal_objective - sol.dual_objective >= -10.0 * tol);
    }

    #[test]
    fn embedding_preserves_definiteness(seed in 0u64..10_000, dim in 1usize..=5, psd in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = random_hermitian(&mut rng, dim, psd);
        let e = hermitian_to_real(&h).unwrap();
        let complex_ok = complex_cholesky_succeeds(&h);
        let real_ok = e.cholesky().is_some();
        prop_assert_eq!(complex_ok, psd);
        prop_assert_eq!(real_ok, complex_ok);
    }

    #[test]
    fn embedding_doubles_the_spectrum(seed in 0u64..10_000, dim in 1usize..=6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = DMatrix::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        let mut want: Vec<f64> = h.clone().symmetric_eigenvalues().iter().flat_map(|&l| [l, l]).collect();
        let mut got: Vec<f64> = hermitian_to_real(&h).unwrap().symmetric_eigenvalues().iter().cloned().collect();
        want.sort_by(|a, b| a.partial_cmp(b).unwrap());
        got.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (a, b) in want.iter().zip(&got) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }
}

/// Plain complex Cholesky that fails on a non-positive pivot. nalgebra's
/// generic version takes complex square roots and so accepts indefinite input.
fn complex_cholesky_succeeds(h: &DMatrix<Complex64>) -> bool {
    let n = h.nrows();
    let mut l = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..n {
        let mut d = h[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) {
            return false;
        }
        let dj = d.sqrt();
        l[(j, j)] = Complex64::new(dj, 0.0);
        for i in j + 1..n {
            let mut v = h[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / dj;
        }
    }
    true
}

/// Random Hermitian matrix with eigenvalues in `[0.1, 2]`, or with one of
/// them moved to `[−2, −0.1]` when `psd` is false.
fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize, psd: bool) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let q = m.qr().q();
    let mut ev: Vec<f64> = (0..dim).map(|_| rng.random_range(0.1..2.0)).collect();
    if !psd {
        ev[rng.random_range(0..dim)] *= -1.0;
    }
    let d = DMatrix::from_diagonal(&DVector::from_iterator(
        dim,
        ev.iter().map(|&l| Complex64::new(l, 0.0)),
    ));
    let h = &q * d * q.adjoint();
    (&h + h.adjoint()) * Complex64::new(0.5, 0.0)
}
