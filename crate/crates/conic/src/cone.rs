//! Cone definitions, symmetric-matrix vectorization, and the per-cone pieces
//! of the interior-point method: Nesterov–Todd scaling, the Jordan product,
//! and maximum step lengths.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;

/// A block of constraint rows and the cone its slack must belong to.
///
/// `Psd(s)` covers `s(s+1)/2` rows holding the lower triangle of an `s×s`
/// symmetric matrix, see [`svec`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", content = "dim", rename_all = "lowercase")]
pub enum Cone {
    Zero(usize),
    NonNeg(usize),
    Soc(usize),
    Psd(usize),
}

impl Cone {
    /// Number of rows of the constraint map owned by this block.
    pub fn rows(&self) -> usize {
        match *self {
            Cone::Zero(k) | Cone::NonNeg(k) | Cone::Soc(k) => k,
            Cone::Psd(s) => s * (s + 1) / 2,
        }
    }

    /// Barrier degree of the block (0 for the zero cone).
    pub fn degree(&self) -> usize {
        match *self {
            Cone::Zero(_) => 0,
            Cone::NonNeg(k) => k,
            Cone::Soc(k) => usize::from(k > 0),
            Cone::Psd(s) => s,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0
    }
}

/// Index of entry `(i, j)`, `i >= j`, in the svec layout of an `s×s` matrix.
///
/// The layout walks the lower triangle column by column.
#[inline]
pub fn svec_index(s: usize, i: usize, j: usize) -> usize {
    debug_assert!(i >= j && i < s);
    j * s - j * (j + 1) / 2 + i
}

/// Vectorizes the lower triangle of a symmetric matrix with `√2` scaling of
/// the off-diagonal entries, so that `svec(X)·svec(Y) = tr(XY)`.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let s = m.nrows();
    let mut out = DVector::zeros(s * (s + 1) / 2);
    svec_into(m, out.as_mut_slice());
    out
}

pub fn svec_into(m: &DMatrix<f64>, out: &mut [f64]) {
    let s = m.nrows();
    let mut k = 0;
    for j in 0..s {
        out[k] = m[(j, j)];
        k += 1;
        for i in j + 1..s {
            out[k] = SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]);
            k += 1;
        }
    }
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], s: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(s, s);
    let mut k = 0;
    for j in 0..s {
        m[(j, j)] = v[k];
        k += 1;
        for i in j + 1..s {
            let x = v[k] / SQRT_2;
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    m
}

/// Dimension `s` of a PSD block from its svec length, if it is triangular.
pub fn psd_dim_from_len(len: usize) -> Option<usize> {
    let s = (((8 * len + 1) as f64).sqrt() as usize).saturating_sub(1) / 2;
    (s * (s + 1) / 2 == len).then_some(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Kind {
    NonNeg,
    Soc,
    Psd(usize),
}

/// A non-zero cone block located inside the inequality row space.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Block {
    pub kind: Kind,
    pub offset: usize,
    pub len: usize,
}

impl Block {
    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len
    }

    pub fn degree(&self) -> usize {
        match self.kind {
            Kind::NonNeg => self.len,
            Kind::Soc => 1,
            Kind::Psd(s) => s,
        }
    }
}

/// Writes the cone identity element into `out`.
pub(crate) fn identity(blocks: &[Block], out: &mut [f64]) {
    for b in blocks {
        let o = &mut out[b.range()];
        o.iter_mut().for_each(|x| *x = 0.0);
        match b.kind {
            Kind::NonNeg => o.iter_mut().for_each(|x| *x = 1.0),
            Kind::Soc => o[0] = 1.0,
            Kind::Psd(s) => (0..s).for_each(|j| o[svec_index(s, j, j)] = 1.0),
        }
    }
}

/// Inner product that matches the cone's self-duality (plain dot in svec form).
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest `t` such that `x - t e` is on the cone boundary, i.e. the negated
/// minimum "eigenvalue" of `x`. Negative when `x` is strictly interior.
pub(crate) fn max_violation(blocks: &[Block], x: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for b in blocks {
        let v = &x[b.range()];
        let t = match b.kind {
            Kind::NonNeg => v.iter().fold(f64::NEG_INFINITY, |m, &x| m.max(-x)),
            Kind::Soc => norm(&v[1..]) - v[0],
            Kind::Psd(s) => {
                let eig = smat(v, s).symmetric_eigenvalues();
                -eig.iter().cloned().fold(f64::INFINITY, f64::min)
            }
        };
        worst = worst.max(t);
    }
    worst
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Nesterov–Todd scaling of one block.
///
/// The scaling `W` satisfies `W z = W⁻ᵀ s = λ`.
#[derive(Clone, Debug)]
pub(crate) enum BlockScaling {
    /// `W = diag(d)`, `d = √(s/z)`.
    NonNeg { d: Vec<f64> },
    /// `W = η Q(w)` with `Q(w)` the hyperbolic rotation taking `e` to `w`.
    Soc { eta: f64, w: Vec<f64> },
    /// `W(Z) = Rᵀ Z R`; `lambda` holds the (diagonal) scaled point.
    Psd {
        s: usize,
        r: DMatrix<f64>,
        rinv: DMatrix<f64>,
        lambda: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Op {
    /// `W`
    W,
    /// `W⁻¹`
    WInv,
    /// `Wᵀ`
    WT,
    /// `W⁻ᵀ`
    WInvT,
}

/// Errors from building a scaling; they signal that an iterate left the cone.
#[derive(Debug)]
pub(crate) struct NotInterior;

impl BlockScaling {
    pub fn new(kind: Kind, s: &[f64], z: &[f64]) -> Result<Self, NotInterior> {
        match kind {
            Kind::NonNeg => {
                let mut d = Vec::with_capacity(s.len());
                for (&si, &zi) in s.iter().zip(z) {
                    if !(si > 0.0 && zi > 0.0) {
                        return Err(NotInterior);
                    }
                    d.push((si / zi).sqrt());
                }
                Ok(BlockScaling::NonNeg { d })
            }
            Kind::Soc => {
                let sn = soc_jnorm(s).ok_or(NotInterior)?;
                let zn = soc_jnorm(z).ok_or(NotInterior)?;
                let sb: Vec<f64> = s.iter().map(|x| x / sn).collect();
                let zb: Vec<f64> = z.iter().map(|x| x / zn).collect();
                let gamma = ((1.0 + dot(&sb, &zb)) / 2.0).sqrt();
                let mut w = Vec::with_capacity(s.len());
                w.push((sb[0] + zb[0]) / (2.0 * gamma));
                for i in 1..s.len() {
                    w.push((sb[i] - zb[i]) / (2.0 * gamma));
                }
                Ok(BlockScaling::Soc {
                    eta: (sn / zn).sqrt(),
                    w,
                })
            }
            Kind::Psd(n) => {
                let sm = smat(s, n);
                let zm = smat(z, n);
                let ls = sm.cholesky().ok_or(NotInterior)?.l();
                let lz = zm.cholesky().ok_or(NotInterior)?.l();
                let prod = lz.transpose() * &ls;
                let svd = prod.svd(false, true);
                let v_t = svd.v_t.ok_or(NotInterior)?;
                let sig = svd.singular_values;
                if sig.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
                    return Err(NotInterior);
                }
                // R = Ls V Σ^{-1/2}
                let mut r = &ls * v_t.transpose();
                for (j, &sj) in sig.iter().enumerate() {
                    let f = 1.0 / sj.sqrt();
                    r.column_mut(j).iter_mut().for_each(|x| *x *= f);
                }
                // R^{-1} = Σ^{1/2} Vᵀ Ls^{-1}
                let ls_inv = ls
                    .solve_lower_triangular(&DMatrix::identity(n, n))
                    .ok_or(NotInterior)?;
                let mut rinv = &v_t * ls_inv;
                for (i, &si) in sig.iter().enumerate() {
                    let f = si.sqrt();
                    rinv.row_mut(i).iter_mut().for_each(|x| *x *= f);
                }
                Ok(BlockScaling::Psd {
                    s: n,
                    r,
                    rinv,
                    lambda: sig.iter().cloned().collect(),
                })
            }
        }
    }

    /// Applies one of the four scaling maps to `x`, writing into `out`.
    pub fn apply(&self, op: Op, x: &[f64], out: &mut [f64]) {
        match self {
            BlockScaling::NonNeg { d } => match op {
                Op::W | Op::WT => d
                    .iter()
                    .zip(x)
                    .zip(out.iter_mut())
                    .for_each(|((di, xi), o)| *o = di * xi),
                Op::WInv | Op::WInvT => d
                    .iter()
                    .zip(x)
                    .zip(out.iter_mut())
                    .for_each(|((di, xi), o)| *o = xi / di),
            },
            BlockScaling::Soc { eta, w } => {
                let inverse = matches!(op, Op::WInv | Op::WInvT);
                soc_rotate(w, x, out, inverse);
                let f = if inverse { 1.0 / eta } else { *eta };
                out.iter_mut().for_each(|o| *o *= f);
            }
            BlockScaling::Psd { s, r, rinv, .. } => {
                // Every map has the form X ↦ P X Pᵀ.
                let p = match op {
                    Op::W => r.transpose(),
                    Op::WT => r.clone(),
                    Op::WInv => rinv.transpose(),
                    Op::WInvT => rinv.clone(),
                };
                let xm = smat(x, *s);
                // Constraint columns of structured LMIs touch only a few rows
                // and columns; then P X Pᵀ = P[:,S] X[S,S] P[:,S]ᵀ is cheap.
                let support: Vec<usize> = (0..*s)
                    .filter(|&i| xm.row(i).iter().any(|&v| v != 0.0))
                    .collect();
                let ym = if 3 * support.len() < *s {
                    let ps = p.select_columns(&support);
                    let xs = xm.select_rows(&support).select_columns(&support);
                    &ps * xs * ps.transpose()
                } else {
                    &p * xm * p.transpose()
                };
                svec_into(&ym, out);
            }
        }
    }

    /// The scaled point `λ = W z`, in svec/vector form.
    pub fn lambda(&self, z: &[f64], out: &mut [f64]) {
        match self {
            BlockScaling::Psd { s, lambda, .. } => {
                out.iter_mut().for_each(|o| *o = 0.0);
                for (j, &l) in lambda.iter().enumerate() {
                    out[svec_index(*s, j, j)] = l;
                }
            }
            _ => self.apply(Op::W, z, out),
        }
    }
}

/// `√(x₀² − ‖x₁‖²)` for a strictly interior second-order cone point.
fn soc_jnorm(x: &[f64]) -> Option<f64> {
    let t = norm(&x[1..]);
    if !(x[0] > t) {
        return None;
    }
    let v = (x[0] - t) * (x[0] + t);
    (v > 0.0).then(|| v.sqrt())
}

/// `Q(w) x` or `Q(w)⁻¹ x = J Q(w) J x` for `wᵀJw = 1`.
fn soc_rotate(w: &[f64], x: &[f64], out: &mut [f64], inverse: bool) {
    let w0 = w[0];
    let w1 = &w[1..];
    let x0 = x[0];
    let x1 = &x[1..];
    let wx = dot(w1, x1);
    let sgn = if inverse { -1.0 } else { 1.0 };
    out[0] = w0 * x0 + sgn * wx;
    let coef = sgn * x0 + wx / (1.0 + w0);
    for i in 0..x1.len() {
        out[i + 1] = x1[i] + coef * w1[i];
    }
}

/// Jordan product `x ∘ y` of one block.
pub(crate) fn jordan_product(kind: Kind, x: &[f64], y: &[f64], out: &mut [f64]) {
    match kind {
        Kind::NonNeg => out
            .iter_mut()
            .zip(x.iter().zip(y))
            .for_each(|(o, (a, b))| *o = a * b),
        Kind::Soc => {
            out[0] = dot(x, y);
            for i in 1..x.len() {
                out[i] = x[0] * y[i] + y[0] * x[i];
            }
        }
        Kind::Psd(s) => {
            let xm = smat(x, s);
            let ym = smat(y, s);
            let p = &xm * &ym;
            let sym = (&p + p.transpose()) * 0.5;
            svec_into(&sym, out);
        }
    }
}

/// Solves `λ ∘ u = r` for `u`, where `λ` is the scaled point of the block.
pub(crate) fn jordan_divide(scaling: &BlockScaling, lambda: &[f64], r: &[f64], out: &mut [f64]) {
    match scaling {
        BlockScaling::NonNeg { .. } => out
            .iter_mut()
            .zip(r.iter().zip(lambda))
            .for_each(|(o, (ri, li))| *o = ri / li),
        BlockScaling::Soc { .. } => {
            let l0 = lambda[0];
            let l1 = &lambda[1..];
            let det = l0 * l0 - dot(l1, l1);
            let u0 = (l0 * r[0] - dot(l1, &r[1..])) / det;
            out[0] = u0;
            for i in 1..r.len() {
                out[i] = (r[i] - u0 * lambda[i]) / l0;
            }
        }
        BlockScaling::Psd {
            s, lambda: diag, ..
        } => {
            let mut k = 0;
            for j in 0..*s {
                for i in j..*s {
                    out[k] = 2.0 * r[k] / (diag[i] + diag[j]);
                    k += 1;
                }
            }
        }
    }
}

/// Largest `α ≥ 0` keeping `x + α d` in the closed cone (may be `∞`).
pub(crate) fn max_step(kind: Kind, x: &[f64], d: &[f64]) -> f64 {
    match kind {
        Kind::NonNeg => x
            .iter()
            .zip(d)
            .filter(|(_, &di)| di < 0.0)
            .map(|(&xi, &di)| -xi / di)
            .fold(f64::INFINITY, f64::min),
        Kind::Soc => soc_max_step(x, d),
        Kind::Psd(s) => {
            let xm = smat(x, s);
            let dm = smat(d, s);
            let Some(ch) = xm.cholesky() else {
                return 0.0;
            };
            let l = ch.l();
            let Some(t) = l.solve_lower_triangular(&dm) else {
                return 0.0;
            };
            let Some(m) = l.solve_lower_triangular(&t.transpose()) else {
                return 0.0;
            };
            let m = (&m + m.transpose()) * 0.5;
            let lmin = m
                .symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            if lmin >= 0.0 {
                f64::INFINITY
            } else {
                -1.0 / lmin
            }
        }
    }
}

fn soc_max_step(x: &[f64], d: &[f64]) -> f64 {
    // f(α) = (x0 + α d0)² − ‖x1 + α d1‖² ≥ 0 with x0 + α d0 ≥ 0.
    let a = d[0] * d[0] - dot(&d[1..], &d[1..]);
    let b = 2.0 * (x[0] * d[0] - dot(&x[1..], &d[1..]));
    let c = x[0] * x[0] - dot(&x[1..], &x[1..]);
    let mut alpha = if d[0] < 0.0 {
        -x[0] / d[0]
    } else {
        f64::INFINITY
    };
    if c <= 0.0 {
        return 0.0;
    }
    // Smallest positive root of a α² + b α + c.
    let root = if a.abs() < 1e-300 {
        if b < 0.0 {
            -c / b
        } else {
            f64::INFINITY
        }
    } else {
        let disc = b * b - 4.0 * a * c;
        if disc < 0.0 {
            // f keeps the sign of c > 0 (only possible for a > 0).
            f64::INFINITY
        } else {
            let sq = disc.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            let r1 = q / a;
            let r2 = if q != 0.0 { c / q } else { f64::INFINITY };
            [r1, r2]
                .into_iter()
                .filter(|r| *r > 0.0)
                .fold(f64::INFINITY, f64::min)
        }
    };
    alpha = alpha.min(root);
    alpha
}
