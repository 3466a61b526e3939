//! Affine cone constraints of the two subproblems.
//!
//! Every subproblem has real decision variables laid out with the free
//! complex block first: real parts at `0..K`, imaginary parts at `K..2K`.
//! Slack and multiplier variables follow. Constraint data is kept as affine
//! expressions in those variables and lowered to a [`ConicProblem`] by
//! [`ConeModel`].
//!
//! The robust constraints come from the S-procedure over the error balls
//! `‖Δh‖ ≤ ξ_h`, `‖ΔG‖_F ≤ ξ_G`:
//!
//! * Alice, from the linear minorant of its signal power:
//!   `[[Ã + diag(ϖ₁I, ϖ₂I), ã], [ãᴴ, ã₀ − β_A(2^η_U − 1) − ϖ₁ξ_h² − ϖ₂ξ_G² − α_U]] ⪰ 0`.
//! * Eve, from the exact power `|s̄* + uᴴx|²` and a Schur complement:
//!   `[[c, 0, s̄], [0, diag(ψ₁I, ψ₂I), u], [s̄*, uᴴ, 1]] ⪰ 0` with
//!   `c = β_E(2^η_E − 1) − α_E − ψ₁ξ_h² − ψ₂ξ_G²`.
//!
//! Both blocks are compressed onto a subspace holding every vector that can
//! appear in them (see [`Basis`]). The multiplier blocks leave that subspace
//! invariant and are PSD on its complement, so the compressed LMI is
//! equivalent to the full one.

use super::minorant::{FreeBlock, Link, MinorantTerms};
use super::LinkData;
use crate::{CMatrix, CVector, C64};
use conic::{embed_unchecked, svec, Cone, ConicProblem};
use nalgebra::{DMatrix, DVector};

/// `constant + Σ coef·x[var]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScalarAffine {
    pub constant: f64,
    pub terms: Vec<(usize, f64)>,
}

impl ScalarAffine {
    pub fn constant(c: f64) -> Self {
        ScalarAffine {
            constant: c,
            terms: vec![],
        }
    }

    pub fn var(i: usize, coef: f64) -> Self {
        ScalarAffine {
            constant: 0.0,
            terms: vec![(i, coef)],
        }
    }

    pub fn plus(mut self, i: usize, coef: f64) -> Self {
        self.terms.push((i, coef));
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }
}

/// Second-order cone constraint `‖entries[1..]‖ ≤ entries[0]`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AffineSoc {
    pub entries: Vec<ScalarAffine>,
}

impl AffineSoc {
    /// `‖entries[1..]‖ − entries[0]` at `x`; nonpositive when satisfied.
    pub fn violation(&self, x: &[f64]) -> f64 {
        let vals: Vec<f64> = self.entries.iter().map(|e| e.eval(x)).collect();
        vals[1..].iter().map(|v| v * v).sum::<f64>().sqrt() - vals[0]
    }
}

/// Hermitian matrix `F₀ + Σ x_j F_j` affine in real variables.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineHermitian {
    pub constant: CMatrix,
    pub terms: Vec<(usize, CMatrix)>,
}

impl AffineHermitian {
    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn eval(&self, x: &[f64]) -> CMatrix {
        let mut out = self.constant.clone();
        for (i, f) in &self.terms {
            out += f.map(|z| z * x[*i]);
        }
        out
    }

    /// Samples a real-affine map of the free block at zero and along each
    /// real and imaginary unit direction.
    pub fn from_free_map(k: usize, f: impl Fn(&CVector) -> CMatrix) -> Self {
        let zero = CVector::zeros(k);
        let constant = f(&zero);
        let mut terms = Vec::new();
        for (offset, unit) in [(0, C64::new(1.0, 0.0)), (k, C64::new(0.0, 1.0))] {
            for j in 0..k {
                let mut e = zero.clone();
                e[j] = unit;
                let d = f(&e) - &constant;
                if d.iter().any(|z| z.norm_sqr() > 0.0) {
                    terms.push((offset + j, d));
                }
            }
        }
        AffineHermitian { constant, terms }
    }

    /// Adds `coef·x[var]` to the block.
    pub fn add_term(&mut self, var: usize, coef: CMatrix) {
        self.terms.push((var, coef));
    }

    /// Smallest eigenvalue at `x`.
    pub fn min_eigenvalue(&self, x: &[f64]) -> f64 {
        let m = self.eval(x);
        let h = (&m + m.adjoint()).map(|z| z * 0.5);
        h.symmetric_eigenvalues().min()
    }
}

/// Orthonormal basis of the error space `C^{N+MN}` onto which the robust
/// LMIs are compressed. Each column lies in the `Δh` part or the `vec(ΔG*)`
/// part, never both.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub q: CMatrix,
    /// Whether column `j` lies in the `Δh` part.
    pub direct: Vec<bool>,
}

impl Basis {
    /// The identity: no compression.
    pub fn full(n: usize, m: usize) -> Self {
        let d = n + n * m;
        Basis {
            q: CMatrix::identity(d, d),
            direct: (0..d).map(|i| i < n).collect(),
        }
    }

    /// With `v` fixed, `u = [w; w ⊗ v*]` ranges over `Cᴺ ⊕ (Cᴺ ⊗ v̂*)`.
    pub fn for_w(n: usize, v: &CVector) -> Self {
        let m = v.len();
        let norm = v.norm();
        let second = m > 0 && norm > 0.0;
        let cols = if second { 2 * n } else { n };
        let mut q = CMatrix::zeros(n + n * m, cols);
        for j in 0..n {
            q[(j, j)] = C64::new(1.0, 0.0);
            if second {
                for i in 0..m {
                    q[(n + j * m + i, n + j)] = v[i].conj() / norm;
                }
            }
        }
        Basis {
            q,
            direct: (0..cols).map(|j| j < n).collect(),
        }
    }

    /// With `w` fixed, `u = [w; w ⊗ v*]` ranges over `span{ŵ} ⊕ (ŵ ⊗ Cᴹ)`.
    pub fn for_v(w: &CVector, m: usize) -> Self {
        let n = w.len();
        let norm = w.norm();
        if norm == 0.0 {
            return Basis {
                q: CMatrix::zeros(n + n * m, 0),
                direct: vec![],
            };
        }
        let what = w.unscale(norm);
        let mut q = CMatrix::zeros(n + n * m, 1 + m);
        q.view_mut((0, 0), (n, 1)).copy_from(&what);
        for j in 0..n {
            for i in 0..m {
                q[(n + j * m + i, 1 + i)] = what[j];
            }
        }
        Basis {
            q,
            direct: (0..1 + m).map(|j| j == 0).collect(),
        }
    }

    pub fn rank(&self) -> usize {
        self.q.ncols()
    }

    /// Drops the directions of an error ball with zero radius. Without this
    /// the matching multiplier is unbounded at the optimum.
    pub fn for_radii(&self, xi_h: f64, xi_g: f64) -> Basis {
        let keep: Vec<usize> = (0..self.rank())
            .filter(|&j| {
                if self.direct[j] {
                    xi_h > 0.0
                } else {
                    xi_g > 0.0
                }
            })
            .collect();
        if keep.len() == self.rank() {
            return self.clone();
        }
        Basis {
            q: self.q.select_columns(&keep),
            direct: keep.iter().map(|&j| self.direct[j]).collect(),
        }
    }

    fn selector(&self, direct: bool) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            self.rank(),
            self.direct
                .iter()
                .map(|&d| C64::new(if d == direct { 1.0 } else { 0.0 }, 0.0)),
        ))
    }
}

/// Variable indices of the multipliers and slacks entering one robust LMI.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SlackVars {
    /// S-procedure multiplier of the `Δh` ball (`ϖ₁` or `ψ₁`).
    pub mult_h: usize,
    /// S-procedure multiplier of the `ΔG` ball (`ϖ₂` or `ψ₂`).
    pub mult_g: usize,
    /// Rate slack `α`, maximized in the v-step.
    pub alpha: Option<usize>,
    /// Epigraph variable bounding the amplified IRS noise at Alice.
    pub noise_epigraph: Option<usize>,
}

fn embed_block(k: usize, top: &CMatrix, col: &CVector, corner: f64) -> CMatrix {
    let mut m = CMatrix::zeros(k + 1, k + 1);
    m.view_mut((0, 0), (k, k)).copy_from(top);
    m.view_mut((0, k), (k, 1)).copy_from(col);
    m.view_mut((k, 0), (1, k)).copy_from(&col.adjoint());
    m[(k, k)] = C64::new(corner, 0.0);
    m
}

fn corner_only(dim: usize, at: usize, value: f64) -> CMatrix {
    let mut m = CMatrix::zeros(dim, dim);
    m[(at, at)] = C64::new(value, 0.0);
    m
}

/// Alice's robust rate LMI, dimension `rank + 1`.
///
/// In the w-step `β_A` is evaluated at `v_k`. In the v-step its amplified
/// IRS noise part is replaced by the epigraph variable, which the caller
/// bounds with a rotated cone.
pub fn build_alice_lmi(
    terms: &MinorantTerms,
    basis: &Basis,
    link: &LinkData,
    vars: &SlackVars,
) -> AffineHermitian {
    debug_assert_eq!(terms.link, Link::Alice);
    let basis = &basis.for_radii(link.xi_h, link.xi_g);
    let k = basis.rank();
    let target = link.sinr_target();
    let free_len = match terms.free {
        FreeBlock::W => terms.w_k.len(),
        FreeBlock::V => terms.v_k.len(),
    };
    let fixed_noise = match (terms.free, vars.noise_epigraph) {
        (FreeBlock::V, Some(_)) => link.noise,
        _ => link.noise_power(&terms.v_k),
    };
    let mut lmi = AffineHermitian::from_free_map(free_len, |z| {
        let (a, vec, a0) = terms.compressed(z, &basis.q);
        embed_block(k, &a, &vec, a0 - fixed_noise * target)
    });
    let mut mult = |var: usize, direct: bool, radius: f64| {
        if radius == 0.0 {
            return;
        }
        let mut f = CMatrix::zeros(k + 1, k + 1);
        f.view_mut((0, 0), (k, k))
            .copy_from(&basis.selector(direct));
        f[(k, k)] = C64::new(-radius * radius, 0.0);
        lmi.add_term(var, f);
    };
    mult(vars.mult_h, true, link.xi_h);
    mult(vars.mult_g, false, link.xi_g);
    if let Some(a) = vars.alpha {
        lmi.add_term(a, corner_only(k + 1, k, -1.0));
    }
    if let (FreeBlock::V, Some(t)) = (terms.free, vars.noise_epigraph) {
        lmi.add_term(t, corner_only(k + 1, k, -target));
    }
    lmi
}

/// Eve's robust leakage LMI, dimension `rank + 2`.
///
/// In the w-step `β_E` is evaluated at `v_k`. In the v-step the amplified
/// IRS noise is replaced by its tangent at `v_k`, which never exceeds the
/// true value, so the constraint only gets tighter.
pub fn build_eve_lmi(
    terms: &MinorantTerms,
    basis: &Basis,
    link: &LinkData,
    vars: &SlackVars,
) -> AffineHermitian {
    debug_assert_eq!(terms.link, Link::Eve);
    let basis = &basis.for_radii(link.xi_h, link.xi_g);
    let k = basis.rank();
    let target = link.sinr_target();
    let free_len = match terms.free {
        FreeBlock::W => terms.w_k.len(),
        FreeBlock::V => terms.v_k.len(),
    };
    let mut lmi = AffineHermitian::from_free_map(free_len, |z| {
        let (_, v) = terms.point(z);
        let noise = match terms.free {
            FreeBlock::W => link.noise_power(&terms.v_k),
            FreeBlock::V => {
                link.noise + link.irs_noise * irs_gain_tangent(&link.h_irs, &terms.v_k, &v)
            }
        };
        let mut m = CMatrix::zeros(k + 2, k + 2);
        let s = terms.signal(z);
        let p = basis.q.ad_mul(&terms.u(z));
        m[(0, 0)] = C64::new(noise * target, 0.0);
        m[(0, k + 1)] = s;
        m[(k + 1, 0)] = s.conj();
        m.view_mut((1, k + 1), (k, 1)).copy_from(&p);
        m.view_mut((k + 1, 1), (1, k)).copy_from(&p.adjoint());
        m[(k + 1, k + 1)] = C64::new(1.0, 0.0);
        m
    });
    let mut mult = |var: usize, direct: bool, radius: f64| {
        if radius == 0.0 {
            return;
        }
        let mut f = CMatrix::zeros(k + 2, k + 2);
        f.view_mut((1, 1), (k, k))
            .copy_from(&basis.selector(direct));
        f[(0, 0)] = C64::new(-radius * radius, 0.0);
        lmi.add_term(var, f);
    };
    mult(vars.mult_h, true, link.xi_h);
    mult(vars.mult_g, false, link.xi_g);
    if let Some(a) = vars.alpha {
        lmi.add_term(a, corner_only(k + 2, 0, -1.0));
    }
    lmi
}

/// Tangent of `Σ |h_m|² |v_m|²` at `v_k`, evaluated at `v`.
pub fn irs_gain_tangent(h_irs: &CVector, v_k: &CVector, v: &CVector) -> f64 {
    h_irs
        .iter()
        .zip(v_k.iter().zip(v.iter()))
        .map(|(h, (vk, v))| h.norm_sqr() * (2.0 * (vk.conj() * v).re - vk.norm_sqr()))
        .sum()
}

/// Amplification budget in either form.
#[derive(Clone, Debug, PartialEq)]
pub enum AmpConstraint {
    /// `[[1 − σ_I²‖v‖²/P_F, rᴴ], [r, I]] ⪰ 0` with `r_m = v_m (H_I w)_m* / √P_F`,
    /// affine in `w`.
    Psd(AffineHermitian),
    /// `‖F^{1/2} v‖ ≤ √P_F` scaled by `1/√P_F`, affine in `v`.
    Soc(AffineSoc),
}

/// Amplification budget `‖diag(v) H_I w‖² + σ_I²‖v‖² ≤ P_F` as a cone
/// constraint in the free block. Variables follow the module layout.
pub fn build_amp_constraint(
    w: &CVector,
    v: &CVector,
    h_i: &CMatrix,
    sigma_i2: f64,
    p_f: f64,
    free: FreeBlock,
) -> AmpConstraint {
    let m = h_i.nrows();
    let root = p_f.sqrt();
    match free {
        FreeBlock::W => {
            let corner = 1.0 - sigma_i2 * v.norm_squared() / p_f;
            AmpConstraint::Psd(AffineHermitian::from_free_map(w.len(), |z| {
                let hw = h_i * z;
                let mut out = CMatrix::identity(m + 1, m + 1);
                out[(0, 0)] = C64::new(corner, 0.0);
                for i in 0..m {
                    let r = v[i] * hw[i].conj() / root;
                    out[(i + 1, 0)] = r;
                    out[(0, i + 1)] = r.conj();
                }
                out
            }))
        }
        FreeBlock::V => {
            let hw = h_i * w;
            let mut entries = vec![ScalarAffine::constant(1.0)];
            let f: Vec<f64> = hw
                .iter()
                .map(|z| (z.norm_sqr() + sigma_i2).sqrt() / root)
                .collect();
            for part in 0..2 {
                for (i, fi) in f.iter().enumerate() {
                    entries.push(ScalarAffine::var(part * m + i, *fi));
                }
            }
            AmpConstraint::Soc(AffineSoc { entries })
        }
    }
}

/// `|v_m| ≤ τ_max` for every element, with `v` the free block of length `m`.
pub fn build_magnitude_constraints(m: usize, tau_max: f64) -> Vec<AffineSoc> {
    (0..m)
        .map(|i| AffineSoc {
            entries: vec![
                ScalarAffine::constant(tau_max),
                ScalarAffine::var(i, 1.0),
                ScalarAffine::var(m + i, 1.0),
            ],
        })
        .collect()
}

/// Accumulates cone constraints over `n` real variables.
#[derive(Clone, Debug)]
pub struct ConeModel {
    n: usize,
    c: Vec<f64>,
    rows: Vec<(f64, Vec<(usize, f64)>)>,
    cones: Vec<Cone>,
}

impl ConeModel {
    pub fn new(n: usize) -> Self {
        ConeModel {
            n,
            c: vec![0.0; n],
            rows: vec![],
            cones: vec![],
        }
    }

    pub fn set_objective(&mut self, var: usize, coef: f64) {
        self.c[var] = coef;
    }

    fn push_row(&mut self, e: &ScalarAffine) {
        self.rows
            .push((e.constant, e.terms.iter().map(|&(i, c)| (i, -c)).collect()));
    }

    /// `e ≥ 0`.
    pub fn nonneg(&mut self, e: ScalarAffine) {
        self.push_row(&e);
        self.cones.push(Cone::NonNeg(1));
    }

    pub fn soc(&mut self, s: &AffineSoc) {
        for e in &s.entries {
            self.push_row(e);
        }
        self.cones.push(Cone::Soc(s.entries.len()));
    }

    /// `F(x) ⪰ 0` through the real embedding.
    pub fn psd(&mut self, f: &AffineHermitian) {
        let side = 2 * f.dim();
        let b = svec(&embed_unchecked(&f.constant));
        let cols: Vec<(usize, DVector<f64>)> = f
            .terms
            .iter()
            .map(|(i, m)| (*i, svec(&embed_unchecked(m))))
            .collect();
        for r in 0..b.len() {
            let terms = cols
                .iter()
                .filter(|(_, c)| c[r] != 0.0)
                .map(|(i, c)| (*i, -c[r]))
                .collect();
            self.rows.push((b[r], terms));
        }
        self.cones.push(Cone::Psd(side));
    }

    pub fn build(&self) -> ConicProblem {
        let m = self.rows.len();
        let mut a = DMatrix::zeros(m, self.n);
        let mut b = DVector::zeros(m);
        for (r, (constant, terms)) in self.rows.iter().enumerate() {
            b[r] = *constant;
            for &(i, c) in terms {
                a[(r, i)] += c;
            }
        }
        ConicProblem::new(DVector::from_vec(self.c.clone()), a, b, self.cones.clone())
            .expect("model rows match cone sizes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::complex_normal;
    use crate::robust::amplification_power;
    use rand::{Rng, SeedableRng};
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

    #[test]
    fn free_map_sampling_is_exact_for_affine_maps() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_vec(&mut rng, 3, 1.0);
        let f = |z: &CVector| {
            let s = a.dotc(z);
            let mut m = CMatrix::identity(2, 2);
            m[(0, 1)] = s;
            m[(1, 0)] = s.conj();
            m
        };
        let lmi = AffineHermitian::from_free_map(3, f);
        let z = random_vec(&mut rng, 3, 1.0);
        assert!((lmi.eval(&real_parts(&z)) - f(&z)).norm() < 1e-13);
    }

    #[test]
    fn full_basis_block_has_expected_size() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (n, m) = (2, 10);
        let h = random_vec(&mut rng, n, 1.0);
        let g = CMatrix::from_fn(m, n, |_, _| complex_normal(&mut rng));
        let w = random_vec(&mut rng, n, 1.0);
        let v = random_vec(&mut rng, m, 1.0);
        let terms = MinorantTerms::new(Link::Alice, &w, &v, h.clone(), g.clone(), FreeBlock::W);
        let link = LinkData {
            h,
            g,
            h_irs: random_vec(&mut rng, m, 1.0),
            xi_h: 0.1,
            xi_g: 0.1,
            noise: 1.0,
            irs_noise: 1.0,
            eta: 1.0,
        };
        let vars = SlackVars {
            mult_h: 2 * n,
            mult_g: 2 * n + 1,
            alpha: None,
            noise_epigraph: None,
        };
        let lmi = build_alice_lmi(&terms, &Basis::full(n, m), &link, &vars);
        assert_eq!(lmi.dim(), 23);
        assert_eq!(embed_unchecked(&lmi.constant).nrows(), 46);
    }

    #[test]
    fn compressed_bases_are_orthonormal_and_span_u() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (n, m) = (3, 4);
        let v = random_vec(&mut rng, m, 1.0);
        let w = random_vec(&mut rng, n, 1.0);
        for (basis, u) in [
            (
                Basis::for_w(n, &v),
                super::super::minorant::stack_u(&random_vec(&mut rng, n, 1.0), &v),
            ),
            (
                Basis::for_v(&w, m),
                super::super::minorant::stack_u(&w, &random_vec(&mut rng, m, 1.0)),
            ),
        ] {
            let gram = basis.q.ad_mul(&basis.q);
            assert!((gram - CMatrix::identity(basis.rank(), basis.rank())).norm() < 1e-12);
            let proj = &basis.q * basis.q.ad_mul(&u);
            assert!((proj - &u).norm() < 1e-12 * u.norm());
        }
    }

    #[test]
    fn schur_block_matches_direct_budget() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let (n, m) = (2, 5);
        let h_i = CMatrix::from_fn(m, n, |_, _| complex_normal(&mut rng));
        for _ in 0..500 {
            let (sw, sv) = (rng.random_range(0.0..0.5), rng.random_range(0.0..0.5));
            let w = random_vec(&mut rng, n, sw);
            let v = random_vec(&mut rng, m, sv);
            let (sigma, p_f) = (0.1, 1.0);
            let direct = amplification_power(&w, &v, &h_i, sigma) <= p_f;
            let AmpConstraint::Psd(lmi) =
                build_amp_constraint(&w, &v, &h_i, sigma, p_f, FreeBlock::W)
            else {
                unreachable!()
            };
            let psd = lmi.min_eigenvalue(&real_parts(&w)) >= -1e-12;
            let AmpConstraint::Soc(soc) =
                build_amp_constraint(&w, &v, &h_i, sigma, p_f, FreeBlock::V)
            else {
                unreachable!()
            };
            let socok = soc.violation(&real_parts(&v)) <= 1e-12;
            assert_eq!(direct, psd);
            assert_eq!(direct, socok);
        }
    }

    #[test]
    fn budget_with_zero_iterate_is_slack() {
        let h_i = CMatrix::from_element(3, 2, C64::new(1.0, 0.0));
        let (w, v) = (CVector::zeros(2), CVector::zeros(3));
        let AmpConstraint::Psd(lmi) = build_amp_constraint(&w, &v, &h_i, 0.5, 0.0001, FreeBlock::W)
        else {
            unreachable!()
        };
        assert!(lmi.min_eigenvalue(&[0.0; 4]) >= 0.0);
    }

    #[test]
    fn single_element_budget_is_a_disc() {
        let h_i = CMatrix::from_column_slice(2, 1, &[C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
        let w = CVector::from_element(1, C64::new(1.0, 0.0));
        let p_f = 0.25;
        let AmpConstraint::Soc(soc) =
            build_amp_constraint(&w, &CVector::zeros(2), &h_i, 0.0, p_f, FreeBlock::V)
        else {
            unreachable!()
        };
        // v₁ = 0.5 sits on the boundary |v₁| = √P_F.
        assert!(soc.violation(&[0.5, 0.0, 0.0, 0.0]).abs() < 1e-12);
        assert!(soc.violation(&[0.6, 0.0, 0.0, 0.0]) > 0.0);
    }

    #[test]
    fn magnitude_cones() {
        let c = build_magnitude_constraints(2, 1.0);
        assert_eq!(c.len(), 2);
        assert!(c[0].violation(&[1.0, 0.0, 0.0, 0.0]).abs() < 1e-15);
        let zero = build_magnitude_constraints(1, 0.0);
        assert!(zero[0].violation(&[1e-3, 0.0]) > 0.0);
        assert!(zero[0].violation(&[0.0, 0.0]) <= 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let v = random_vec(&mut rng, 2, 1.0);
            let x = real_parts(&v);
            for (i, soc) in c.iter().enumerate() {
                assert_eq!(soc.violation(&x) <= 0.0, v[i].norm() <= 1.0);
            }
        }
    }

    #[test]
    fn model_lowers_to_slack_form() {
        let mut model = ConeModel::new(1);
        model.set_objective(0, 1.0);
        model.nonneg(ScalarAffine {
            constant: -1.0,
            terms: vec![(0, 1.0)],
        });
        let p = model.build();
        assert_eq!(p.b[0], -1.0);
        assert_eq!(p.a[(0, 0)], -1.0);
        let sol = conic::solve(&p, 1e-9, 100);
        assert!((sol.x[0] - 1.0).abs() < 1e-7);
    }
}
