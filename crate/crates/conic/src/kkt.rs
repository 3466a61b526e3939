//! Reduced Newton system of the interior-point method.
//!
//! Each iteration solves systems of the form
//!
//! ```text
//! [ 0  Aᵀ  Gᵀ   ] [dx]   [r1]
//! [ A  0   0    ] [dy] = [r2]
//! [ G  0  −WᵀW  ] [dz]   [r3]
//! ```
//!
//! Eliminating `dz` leaves `H dx + Aᵀ dy = r1 + Ĝᵀ W⁻ᵀ r3`, `A dx = r2` with
//! `Ĝ = W⁻ᵀ G` and `H = ĜᵀĜ`. Without equality rows `H` is factored by
//! Cholesky; otherwise the small saddle-point matrix goes through LU.

use crate::cone::{Block, BlockScaling, Op};
use nalgebra::{DMatrix, DVector};

/// The NT scaling of every non-zero block, applied blockwise.
pub(crate) struct Scaling {
    pub blocks: Vec<Block>,
    pub parts: Vec<BlockScaling>,
}

impl Scaling {
    pub fn apply(&self, op: Op, x: &[f64], out: &mut [f64]) {
        for (b, sc) in self.blocks.iter().zip(&self.parts) {
            sc.apply(op, &x[b.range()], &mut out[b.range()]);
        }
    }

    pub fn apply_vec(&self, op: Op, x: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(x.len());
        self.apply(op, x.as_slice(), out.as_mut_slice());
        out
    }
}

enum Factor {
    Chol(nalgebra::Cholesky<f64, nalgebra::Dyn>),
    Lu(nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

pub(crate) struct Kkt<'a> {
    a: &'a DMatrix<f64>,
    g: &'a DMatrix<f64>,
    w: &'a Scaling,
    ghat: DMatrix<f64>,
    factor: Factor,
    /// Jacobi scaling applied to `x` before factoring.
    d: DVector<f64>,
    n: usize,
}

/// A solution of the system together with `W dz`, which the caller needs.
pub(crate) struct KktSol {
    pub dx: DVector<f64>,
    pub dy: DVector<f64>,
    pub dz: DVector<f64>,
    pub wdz: DVector<f64>,
}

impl<'a> Kkt<'a> {
    pub fn factor(a: &'a DMatrix<f64>, g: &'a DMatrix<f64>, w: &'a Scaling) -> Option<Self> {
        let n = g.ncols();
        let p = a.nrows();
        let mut ghat = DMatrix::zeros(g.nrows(), n);
        let mut col = vec![0.0; g.nrows()];
        for j in 0..n {
            w.apply(Op::WInvT, g.column(j).as_slice(), &mut col);
            ghat.column_mut(j).copy_from_slice(&col);
        }
        let mut h = ghat.tr_mul(&ghat);
        // Jacobi scaling: late iterations spread the diagonal of H over many
        // orders of magnitude, and a shift relative to the largest entry
        // would swamp the small ones.
        let dmax = h.diagonal().iter().fold(0.0f64, |m, &d| m.max(d));
        let d = DVector::from_iterator(
            n,
            h.diagonal().iter().map(|&hii| {
                if hii > 1e-30 * dmax {
                    1.0 / hii.sqrt()
                } else {
                    1.0
                }
            }),
        );
        for j in 0..n {
            for i in 0..n {
                h[(i, j)] *= d[i] * d[j];
            }
        }
        let scale = h.diagonal().iter().fold(1.0f64, |m, &v| m.max(v.abs()));
        let delta = 1e-13 * scale;
        for i in 0..n {
            h[(i, i)] += delta;
        }
        let factor = if p == 0 {
            let mut reg = delta;
            loop {
                if let Some(ch) = h.clone().cholesky() {
                    break Factor::Chol(ch);
                }
                // H can be singular when some variable only enters the
                // objective; grow the shift until the factorization succeeds.
                reg *= 100.0;
                if !reg.is_finite() || reg > 1e-4 * scale {
                    return None;
                }
                for i in 0..n {
                    h[(i, i)] += reg;
                }
            }
        } else {
            let ad = a * DMatrix::from_diagonal(&d);
            let mut k = DMatrix::zeros(n + p, n + p);
            k.view_mut((0, 0), (n, n)).copy_from(&h);
            k.view_mut((0, n), (n, p)).copy_from(&ad.transpose());
            k.view_mut((n, 0), (p, n)).copy_from(&ad);
            for i in 0..p {
                k[(n + i, n + i)] = -delta;
            }
            Factor::Lu(k.lu())
        };
        Some(Kkt {
            a,
            g,
            w,
            ghat,
            factor,
            d,
            n,
        })
    }

    fn solve_once(
        &self,
        r1: &DVector<f64>,
        r2: &DVector<f64>,
        r3: &DVector<f64>,
    ) -> Option<KktSol> {
        let t = self.w.apply_vec(Op::WInvT, r3);
        let rhs_x = r1 + self.ghat.tr_mul(&t);
        let (dx, dy) = match &self.factor {
            Factor::Chol(ch) => (
                ch.solve(&rhs_x.component_mul(&self.d))
                    .component_mul(&self.d),
                DVector::zeros(0),
            ),
            Factor::Lu(lu) => {
                let mut rhs = DVector::zeros(self.n + r2.len());
                rhs.rows_mut(0, self.n)
                    .copy_from(&rhs_x.component_mul(&self.d));
                rhs.rows_mut(self.n, r2.len()).copy_from(r2);
                let sol = lu.solve(&rhs)?;
                (
                    sol.rows(0, self.n).component_mul(&self.d),
                    sol.rows(self.n, r2.len()).into_owned(),
                )
            }
        };
        let wdz = &self.ghat * &dx - t;
        let dz = self.w.apply_vec(Op::WInv, &wdz);
        Some(KktSol { dx, dy, dz, wdz })
    }

    /// Solves the system, then refines against the unregularized operator
    /// for as long as the residual keeps shrinking (at most eight rounds).
    pub fn solve(&self, r1: &DVector<f64>, r2: &DVector<f64>, r3: &DVector<f64>) -> Option<KktSol> {
        let mut sol = self.solve_once(r1, r2, r3)?;
        let rhs = r1.norm() + r2.norm() + r3.norm();
        let mut last = f64::INFINITY;
        for _ in 0..8 {
            let e1 = r1 - self.a.tr_mul(&sol.dy) - self.g.tr_mul(&sol.dz);
            let e2 = r2 - self.a * &sol.dx;
            let wtwdz = self.w.apply_vec(Op::WT, &sol.wdz);
            let e3 = r3 - (self.g * &sol.dx - wtwdz);
            let err = e1.norm() + e2.norm() + e3.norm();
            if !(err < 0.5 * last) || err <= 1e-15 * rhs {
                break;
            }
            last = err;
            let corr = self.solve_once(&e1, &e2, &e3)?;
            sol.dx += corr.dx;
            sol.dy += corr.dy;
            sol.dz += corr.dz;
            sol.wdz += corr.wdz;
        }
        let finite = sol
            .dx
            .iter()
            .chain(sol.dy.iter())
            .chain(sol.dz.iter())
            .all(|v| v.is_finite());
        finite.then_some(sol)
    }
}
