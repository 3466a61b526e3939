use crate::cone::{smat, Cone};
use crate::problem::{ConicProblem, ConicSolution, Residuals};
use nalgebra::DVector;

/// Scale-normalized KKT residuals of the point held in `sol`.
pub fn kkt_residuals(p: &ConicProblem, sol: &ConicSolution) -> Residuals {
    kkt_residuals_at(p, &sol.x, &sol.y, &sol.s)
}

/// Scale-normalized KKT residuals of a primal-dual point.
///
/// * primal: `max(‖A x + s − b‖, dist(s, K)) / (1 + ‖b‖)`
/// * dual: `max(‖Aᵀy + c‖, dist(y, K*)) / (1 + ‖c‖)`
/// * gap: `|cᵀx + bᵀy| / (1 + min(|cᵀx|, |bᵀy|))`
///
/// Cone distances use the most negative eigenvalue of each block, so they
/// vanish for points inside the cone. All three are nonnegative.
pub fn kkt_residuals_at(
    p: &ConicProblem,
    x: &DVector<f64>,
    y: &DVector<f64>,
    s: &DVector<f64>,
) -> Residuals {
    let rp = (&p.a * x + s - &p.b)
        .norm()
        .max(violation(&p.cones, s.as_slice(), false));
    let rd = (p.a.tr_mul(y) + &p.c)
        .norm()
        .max(violation(&p.cones, y.as_slice(), true));
    let pobj = p.c.dot(x);
    let dobj = -p.b.dot(y);
    Residuals {
        primal: rp / (1.0 + p.b.norm()),
        dual: rd / (1.0 + p.c.norm()),
        gap: (pobj - dobj).abs() / (1.0 + pobj.abs().min(dobj.abs())),
    }
}

/// Largest amount by which `v` leaves the cone (or its dual when `dual`).
/// The zero cone's dual is the whole space.
fn violation(cones: &[Cone], v: &[f64], dual: bool) -> f64 {
    let mut off = 0;
    let mut worst: f64 = 0.0;
    for c in cones {
        let k = c.rows();
        let b = &v[off..off + k];
        off += k;
        let t = match *c {
            Cone::Zero(_) if dual => 0.0,
            Cone::Zero(_) => b.iter().map(|x| x * x).sum::<f64>().sqrt(),
            Cone::NonNeg(_) => b.iter().fold(0.0, |m: f64, &x| m.max(-x)),
            Cone::Soc(0) => 0.0,
            Cone::Soc(_) => (b[1..].iter().map(|x| x * x).sum::<f64>().sqrt() - b[0]).max(0.0),
            Cone::Psd(0) => 0.0,
            Cone::Psd(n) => {
                let lmin = smat(b, n)
                    .symmetric_eigenvalues()
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                (-lmin).max(0.0)
            }
        };
        worst = worst.max(t);
    }
    worst
}
