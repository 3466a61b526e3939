use crate::cone::{self, Block, BlockScaling, Cone, Kind, Op};
use crate::kkt::{Kkt, KktSol, Scaling};
use crate::problem::{ConicProblem, ConicSolution, Residuals, Status};
use crate::residuals::kkt_residuals_at;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    /// Bound on each normalized KKT residual at an `Optimal` exit, and on the
    /// residual of an infeasibility certificate.
    pub tol: f64,
    pub max_iter: usize,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
    /// Keep per-iteration diagnostics in [`ConicSolution::history`].
    pub record_history: bool,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            tol: 1e-8,
            max_iter: 200,
            step_fraction: 0.99,
            record_history: false,
        }
    }
}

/// Diagnostics of one iterate, measured on `(x, y, s) / τ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterateInfo {
    pub iteration: usize,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub residuals: Residuals,
    pub mu: f64,
    pub tau: f64,
    pub kappa: f64,
    pub step: f64,
}

/// Solves `p` with default settings apart from `tol` and `max_iter`.
pub fn solve(p: &ConicProblem, tol: f64, max_iter: usize) -> ConicSolution {
    solve_with(
        p,
        &Settings {
            tol,
            max_iter,
            ..Settings::default()
        },
    )
}

pub fn solve_with(p: &ConicProblem, settings: &Settings) -> ConicSolution {
    if let Err(e) = p.validate() {
        log::warn!("rejecting malformed cone program: {e}");
        return failure(p, Status::NumericalFailure, 0);
    }
    let mut ipm = Ipm::new(p, settings);
    let status = ipm.run();
    ipm.finish(status)
}

/// Result for input that could not be processed at all; shapes may be
/// inconsistent, so no residuals are computed.
fn failure(p: &ConicProblem, status: Status, iterations: usize) -> ConicSolution {
    let x = DVector::zeros(p.num_vars());
    let y = DVector::zeros(p.num_rows());
    let s = p.b.clone();
    let residuals = Residuals {
        primal: f64::INFINITY,
        dual: f64::INFINITY,
        gap: f64::INFINITY,
    };
    ConicSolution {
        status,
        x,
        y,
        s,
        primal_objective: f64::NAN,
        dual_objective: f64::NAN,
        residuals,
        certificate_residual: None,
        history: Vec::new(),
        iterations,
    }
}

/// The problem split into equality rows `A x = b` and conic rows
/// `G x + s = h`, plus the current homogeneous iterate.
struct Ipm<'a> {
    p: &'a ConicProblem,
    set: Settings,
    eq_rows: Vec<usize>,
    cone_rows: Vec<usize>,
    a: DMatrix<f64>,
    b: DVector<f64>,
    g: DMatrix<f64>,
    h: DVector<f64>,
    blocks: Vec<Block>,
    degree: usize,
    x: DVector<f64>,
    y: DVector<f64>,
    z: DVector<f64>,
    s: DVector<f64>,
    tau: f64,
    kappa: f64,
    iterations: usize,
    history: Vec<IterateInfo>,
    certificate_residual: Option<f64>,
}

struct Direction {
    dx: DVector<f64>,
    dy: DVector<f64>,
    dz: DVector<f64>,
    ds: DVector<f64>,
    dtau: f64,
    dkappa: f64,
    /// `W⁻ᵀ ds` and `W dz`, for the Mehrotra correction.
    ds_scaled: DVector<f64>,
    dz_scaled: DVector<f64>,
}

impl<'a> Ipm<'a> {
    fn new(p: &'a ConicProblem, set: &Settings) -> Self {
        let mut eq_rows = Vec::new();
        let mut cone_rows = Vec::new();
        let mut blocks = Vec::new();
        let mut row = 0;
        for c in &p.cones {
            let k = c.rows();
            let kind = match *c {
                Cone::Zero(_) => None,
                Cone::NonNeg(_) => Some(Kind::NonNeg),
                Cone::Soc(_) => Some(Kind::Soc),
                Cone::Psd(s) => Some(Kind::Psd(s)),
            };
            match kind {
                None => eq_rows.extend(row..row + k),
                Some(_) if k == 0 => {}
                Some(kind) => {
                    blocks.push(Block {
                        kind,
                        offset: cone_rows.len(),
                        len: k,
                    });
                    cone_rows.extend(row..row + k);
                }
            }
            row += k;
        }
        let a = p.a.select_rows(&eq_rows);
        let b = p.b.select_rows(&eq_rows);
        let g = p.a.select_rows(&cone_rows);
        let h = p.b.select_rows(&cone_rows);
        let degree = blocks.iter().map(Block::degree).sum();
        let n = p.num_vars();
        Ipm {
            p,
            set: *set,
            x: DVector::zeros(n),
            y: DVector::zeros(eq_rows.len()),
            z: DVector::zeros(cone_rows.len()),
            s: DVector::zeros(cone_rows.len()),
            eq_rows,
            cone_rows,
            a,
            b,
            g,
            h,
            blocks,
            degree,
            tau: 1.0,
            kappa: 1.0,
            iterations: 0,
            history: Vec::new(),
            certificate_residual: None,
        }
    }

    fn identity_scaling(&self) -> Scaling {
        let parts = self
            .blocks
            .iter()
            .map(|b| {
                let mut e = vec![0.0; b.len];
                cone::identity(std::slice::from_ref(&Block { offset: 0, ..*b }), &mut e);
                BlockScaling::new(b.kind, &e, &e).expect("identity is interior")
            })
            .collect();
        Scaling {
            blocks: self.blocks.clone(),
            parts,
        }
    }

    /// Least-squares primal and dual points, shifted into the cone interior.
    fn initialize(&mut self) -> bool {
        let w = self.identity_scaling();
        let Some(kkt) = Kkt::factor(&self.a, &self.g, &w) else {
            return false;
        };
        let n = self.p.num_vars();
        let Some(prim) = kkt.solve(&DVector::zeros(n), &self.b, &self.h) else {
            return false;
        };
        let Some(dual) = kkt.solve(
            &(-&self.p.c),
            &DVector::zeros(self.b.len()),
            &DVector::zeros(self.h.len()),
        ) else {
            return false;
        };
        self.x = prim.dx;
        self.s = -prim.dz;
        self.y = dual.dy;
        self.z = dual.dz;
        for v in [&mut self.s, &mut self.z] {
            let viol = cone::max_violation(&self.blocks, v.as_slice());
            let nrm = v.norm().max(1.0);
            if viol >= -1e-8 * nrm {
                let mut e = DVector::zeros(v.len());
                cone::identity(&self.blocks, e.as_mut_slice());
                *v += e * (1.0 + viol);
            }
        }
        // With no conic rows the iterate is interior trivially.
        true
    }

    /// Assembles a full-length vector from equality and conic parts.
    fn merge(&self, eq: &DVector<f64>, cone_part: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.p.num_rows());
        for (i, &r) in self.eq_rows.iter().enumerate() {
            out[r] = eq[i];
        }
        for (i, &r) in self.cone_rows.iter().enumerate() {
            out[r] = cone_part[i];
        }
        out
    }

    fn normalized_point(&self) -> (DVector<f64>, DVector<f64>, DVector<f64>) {
        let t = self.tau;
        let x = &self.x / t;
        let y = self.merge(&self.y, &self.z) / t;
        let s = self.merge(&DVector::zeros(self.y.len()), &self.s) / t;
        (x, y, s)
    }

    fn run(&mut self) -> Status {
        if !self.initialize() {
            return Status::NumericalFailure;
        }
        let c = self.p.c.clone();
        let nu = self.degree as f64;
        let tol = self.set.tol;
        let cnorm = c.norm().max(1.0);
        let bhnorm = self.b.norm().hypot(self.h.norm()).max(1.0);
        let mut last_step = 0.0;
        let mut stalls = 0;

        for iter in 0..=self.set.max_iter {
            self.iterations = iter;
            // Residuals of the homogeneous system.
            let rx = self.a.tr_mul(&self.y) + self.g.tr_mul(&self.z) + &c * self.tau;
            let ry = &self.b * self.tau - &self.a * &self.x;
            let rz = &self.s + &self.g * &self.x - &self.h * self.tau;
            let cx = c.dot(&self.x);
            let by_hz = self.b.dot(&self.y) + self.h.dot(&self.z);
            let rtau = self.kappa + cx + by_hz;
            let mu = (self.s.dot(&self.z) + self.tau * self.kappa) / (nu + 1.0);

            let (xn, yn, sn) = self.normalized_point();
            let res = kkt_residuals_at(self.p, &xn, &yn, &sn);
            if !res.primal.is_finite() || !res.dual.is_finite() || !mu.is_finite() {
                return Status::NumericalFailure;
            }
            if self.set.record_history {
                self.history.push(IterateInfo {
                    iteration: iter,
                    primal_objective: cx / self.tau,
                    dual_objective: -by_hz / self.tau,
                    residuals: res,
                    mu,
                    tau: self.tau,
                    kappa: self.kappa,
                    step: last_step,
                });
            }
            log::trace!(
                "ipm {iter:3} pobj {:+.6e} dobj {:+.6e} rp {:.1e} rd {:.1e} gap {:.1e} tau {:.1e} kappa {:.1e}",
                cx / self.tau,
                -by_hz / self.tau,
                res.primal,
                res.dual,
                res.gap,
                self.tau,
                self.kappa
            );

            if res.primal <= tol && res.dual <= tol && res.gap <= tol {
                return Status::Optimal;
            }
            if by_hz < 0.0 {
                let r = (&rx - &c * self.tau).norm() / cnorm / -by_hz;
                if r <= tol {
                    self.certificate_residual = Some(r);
                    return Status::PrimalInfeasible;
                }
            }
            if cx < 0.0 {
                let r = (&self.a * &self.x)
                    .norm()
                    .hypot((&self.g * &self.x + &self.s).norm())
                    / bhnorm
                    / -cx;
                if r <= tol {
                    self.certificate_residual = Some(r);
                    return Status::DualInfeasible;
                }
            }
            if iter == self.set.max_iter {
                return Status::MaxIter;
            }

            // Scaling and factorization for this iterate.
            let mut parts = Vec::with_capacity(self.blocks.len());
            for b in &self.blocks {
                match BlockScaling::new(
                    b.kind,
                    &self.s.as_slice()[b.range()],
                    &self.z.as_slice()[b.range()],
                ) {
                    Ok(sc) => parts.push(sc),
                    Err(_) => return Status::NumericalFailure,
                }
            }
            let w = Scaling {
                blocks: self.blocks.clone(),
                parts,
            };
            let mut lambda = DVector::zeros(self.z.len());
            for (b, sc) in self.blocks.iter().zip(&w.parts) {
                sc.lambda(
                    &self.z.as_slice()[b.range()],
                    &mut lambda.as_mut_slice()[b.range()],
                );
            }
            let Some(kkt) = Kkt::factor(&self.a, &self.g, &w) else {
                return Status::NumericalFailure;
            };
            let Some(d2) = kkt.solve(&(-&c), &self.b, &self.h) else {
                return Status::NumericalFailure;
            };
            let lam_sq = self.jordan(&lambda, &lambda);
            let res_h = HomResiduals {
                rx: &rx,
                ry: &ry,
                rz: &rz,
                rtau,
            };

            // Predictor.
            let rc = -&lam_sq;
            let Some(aff) = self.direction(
                &kkt,
                &w,
                &lambda,
                &d2,
                &res_h,
                1.0,
                &rc,
                -self.tau * self.kappa,
            ) else {
                return Status::NumericalFailure;
            };
            let alpha_aff = self.max_step(&aff).min(1.0);
            let sigma = (1.0 - alpha_aff).powi(3);

            // Corrector.
            let mut e = DVector::zeros(self.z.len());
            cone::identity(&self.blocks, e.as_mut_slice());
            let corr = self.jordan(&aff.ds_scaled, &aff.dz_scaled);
            let rc = e * (sigma * mu) - &lam_sq - corr;
            let rtc = sigma * mu - self.tau * self.kappa - aff.dtau * aff.dkappa;
            let Some(dir) = self.direction(&kkt, &w, &lambda, &d2, &res_h, 1.0 - sigma, &rc, rtc)
            else {
                return Status::NumericalFailure;
            };
            let alpha = (self.set.step_fraction * self.max_step(&dir)).min(1.0);
            if !(alpha > 1e-12) {
                stalls += 1;
                if stalls >= 3 {
                    return Status::NumericalFailure;
                }
            } else {
                stalls = 0;
            }
            last_step = alpha;

            self.x += &dir.dx * alpha;
            self.y += &dir.dy * alpha;
            self.z += &dir.dz * alpha;
            self.s += &dir.ds * alpha;
            self.tau += alpha * dir.dtau;
            self.kappa += alpha * dir.dkappa;
        }
        Status::MaxIter
    }

    fn jordan(&self, u: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(u.len());
        for b in &self.blocks {
            let r = b.range();
            cone::jordan_product(
                b.kind,
                &u.as_slice()[r.clone()],
                &v.as_slice()[r.clone()],
                &mut out.as_mut_slice()[r],
            );
        }
        out
    }

    /// Newton direction for linear residual weight `eta`, complementarity
    /// target `λ ∘ (W⁻ᵀds + W dz) = rc` and `κ dτ + τ dκ = rtc`.
    #[allow(clippy::too_many_arguments)]
    fn direction(
        &self,
        kkt: &Kkt,
        w: &Scaling,
        lambda: &DVector<f64>,
        d2: &KktSol,
        r: &HomResiduals,
        eta: f64,
        rc: &DVector<f64>,
        rtc: f64,
    ) -> Option<Direction> {
        let mut q = DVector::zeros(rc.len());
        for (b, sc) in self.blocks.iter().zip(&w.parts) {
            let rg = b.range();
            cone::jordan_divide(
                sc,
                &lambda.as_slice()[rg.clone()],
                &rc.as_slice()[rg.clone()],
                &mut q.as_mut_slice()[rg],
            );
        }
        let wtq = w.apply_vec(Op::WT, &q);
        let d1 = kkt.solve(&(r.rx * -eta), &(r.ry * eta), &(r.rz * -eta - wtq))?;
        let c = &self.p.c;
        let num =
            eta * r.rtau + rtc / self.tau + c.dot(&d1.dx) + self.b.dot(&d1.dy) + self.h.dot(&d1.dz);
        let den = self.kappa / self.tau + d2.wdz.norm_squared();
        let dtau = num / den;
        let dx = &d1.dx + &d2.dx * dtau;
        let dy = &d1.dy + &d2.dy * dtau;
        let dz = &d1.dz + &d2.dz * dtau;
        let dz_scaled = &d1.wdz + &d2.wdz * dtau;
        let ds_scaled = &q - &dz_scaled;
        let ds = w.apply_vec(Op::WT, &ds_scaled);
        let dkappa = (rtc - self.kappa * dtau) / self.tau;
        let all_finite = dtau.is_finite()
            && dkappa.is_finite()
            && dx.iter().chain(ds.iter()).all(|v| v.is_finite());
        all_finite.then_some(Direction {
            dx,
            dy,
            dz,
            ds,
            dtau,
            dkappa,
            ds_scaled,
            dz_scaled,
        })
    }

    fn max_step(&self, d: &Direction) -> f64 {
        let mut a = f64::INFINITY;
        for b in &self.blocks {
            let r = b.range();
            a = a.min(cone::max_step(
                b.kind,
                &self.s.as_slice()[r.clone()],
                &d.ds.as_slice()[r.clone()],
            ));
            a = a.min(cone::max_step(
                b.kind,
                &self.z.as_slice()[r.clone()],
                &d.dz.as_slice()[r],
            ));
        }
        if d.dtau < 0.0 {
            a = a.min(-self.tau / d.dtau);
        }
        if d.dkappa < 0.0 {
            a = a.min(-self.kappa / d.dkappa);
        }
        a
    }

    fn finish(self, status: Status) -> ConicSolution {
        let p = self.p;
        let (x, y, s) = match status {
            Status::PrimalInfeasible => {
                let by_hz = self.b.dot(&self.y) + self.h.dot(&self.z);
                let y = self.merge(&self.y, &self.z) / -by_hz;
                (
                    DVector::zeros(p.num_vars()),
                    y,
                    DVector::zeros(p.num_rows()),
                )
            }
            Status::DualInfeasible => {
                let cx = p.c.dot(&self.x);
                let x = &self.x / -cx;
                let s = self.merge(&DVector::zeros(self.y.len()), &self.s) / -cx;
                (x, DVector::zeros(p.num_rows()), s)
            }
            _ if self.tau > 0.0 && self.tau.is_finite() => self.normalized_point(),
            _ => (
                DVector::zeros(p.num_vars()),
                DVector::zeros(p.num_rows()),
                p.b.clone(),
            ),
        };
        let sanitize = |v: DVector<f64>| {
            if v.iter().all(|t| t.is_finite()) {
                v
            } else {
                DVector::zeros(v.len())
            }
        };
        let (x, y, s) = (sanitize(x), sanitize(y), sanitize(s));
        let residuals = kkt_residuals_at(p, &x, &y, &s);
        ConicSolution {
            status,
            primal_objective: p.c.dot(&x),
            dual_objective: -p.b.dot(&y),
            x,
            y,
            s,
            residuals,
            certificate_residual: self.certificate_residual,
            history: self.history,
            iterations: self.iterations,
        }
    }
}

struct HomResiduals<'r> {
    rx: &'r DVector<f64>,
    ry: &'r DVector<f64>,
    rz: &'r DVector<f64>,
    rtau: f64,
}
