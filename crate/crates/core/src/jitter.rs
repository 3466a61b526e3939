//! First-order model of jitter-induced channel errors.
//!
//! Jitter moves the UBS departure angles by `(Δω, Δφ)`. Only the LOS
//! steering vectors depend on those angles, and to first order
//!
//! ```text
//! h_L(ω̄ + Δω, φ̄ + Δφ) ≈ h̄_L + h̄_L ⊙ a Δω + h̄_L ⊙ b Δφ
//! ```
//!
//! with `a` and `b` the per-element phase derivatives returned by
//! [`taylor_direction_vectors`]. Bounding `|Δω| ≤ β₁` and `|Δφ| ≤ β₂` gives
//! norm bounds `ξ` on the errors of the direct channels and of the cascaded
//! IRS channels. Those radii feed the S-procedure in [`crate::robust`].

use crate::geometry::{AngleDeviation, AngleOffset, ChannelSet, LinkAngles};
use crate::{CMatrix, CVector, C64};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Half-widths of the jitter box, in radians. Index 1 bounds the azimuth
/// error `Δω` and index 2 the elevation error `Δφ` of each link.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct JitterBounds {
    pub u1: f64,
    pub u2: f64,
    pub e1: f64,
    pub e2: f64,
    pub i1: f64,
    pub i2: f64,
}

impl JitterBounds {
    /// Bounds expressed as fractions of a reference angle per link, with
    /// the total `β = ratio·ω̄` split evenly between the two angles.
    ///
    /// The reference is the angle off the vertical `ω̄`, which the geometry
    /// fixes uniquely through `cos ω̄ = Δz/d`. The in-plane angle `φ̄` is
    /// only pinned down up to `φ̄ ↔ π − φ̄` and sits at 0 or π for a user
    /// straight ahead along x, which would make the ratio either vanish or
    /// blow the jitter up to a large fraction of a radian.
    pub fn from_ratios(angles: &LinkAngles, alice: f64, eve: f64, irs: f64) -> Self {
        let half = |ratio: f64, reference: f64| ratio * reference.abs() / 2.0;
        let (u, e, i) = (
            half(alice, angles.alice.azimuth),
            half(eve, angles.eve.azimuth),
            half(irs, angles.irs.azimuth),
        );
        JitterBounds {
            u1: u,
            u2: u,
            e1: e,
            e2: e,
            i1: i,
            i2: i,
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        JitterBounds {
            u1: self.u1 * f,
            u2: self.u2 * f,
            e1: self.e1 * f,
            e2: self.e2 * f,
            i1: self.i1 * f,
            i2: self.i2 * f,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.u1, self.u2, self.e1, self.e2, self.i1, self.i2]
            .iter()
            .all(|b| *b >= 0.0 && b.is_finite())
    }

    /// The `2⁶` vertices of the box.
    pub fn corners(&self) -> Vec<AngleDeviation> {
        (0..64u32)
            .map(|mask| {
                let pick = |bit: u32, b: f64| if mask & (1 << bit) != 0 { b } else { -b };
                AngleDeviation {
                    alice: AngleOffset {
                        d_azimuth: pick(0, self.u1),
                        d_elevation: pick(1, self.u2),
                    },
                    eve: AngleOffset {
                        d_azimuth: pick(2, self.e1),
                        d_elevation: pick(3, self.e2),
                    },
                    irs: AngleOffset {
                        d_azimuth: pick(4, self.i1),
                        d_elevation: pick(5, self.i2),
                    },
                }
            })
            .collect()
    }
}

/// Phase-derivative multipliers of a UBS steering vector, aligned with
/// [`crate::geometry::steering_ubs`]:
///
/// ```text
/// a(p,q) =  2πj (b/λ)(p sin ω̄ − q sin φ̄ cos ω̄)
/// b(p,q) = −2πj (b/λ) q cos φ̄ sin ω̄
/// ```
///
/// so that `∂h/∂ω = h ⊙ a` and `∂h/∂φ = h ⊙ b`.
pub fn taylor_direction_vectors(
    phi: f64,
    omega: f64,
    n_x: usize,
    n_y: usize,
    spacing: f64,
    wavelength: f64,
) -> (CVector, CVector) {
    let k = 2.0 * PI * spacing / wavelength;
    let (sw, cw) = omega.sin_cos();
    let (sp, cp) = phi.sin_cos();
    let index = || (0..n_x).flat_map(move |p| (0..n_y).map(move |q| (p as f64, q as f64)));
    let a = CVector::from_iterator(
        n_x * n_y,
        index().map(|(p, q)| C64::new(0.0, k * (p * sw - q * sp * cw))),
    );
    let b = CVector::from_iterator(
        n_x * n_y,
        index().map(|(_, q)| C64::new(0.0, -k * q * cp * sw)),
    );
    (a, b)
}

/// `h̄_L + h̄_L ⊙ a Δω + h̄_L ⊙ b Δφ`.
pub fn perturbed_los(h_l: &CVector, a: &CVector, b: &CVector, d_omega: f64, d_phi: f64) -> CVector {
    h_l.zip_zip_map(a, b, |h, a, b| h + h * (a * d_omega + b * d_phi))
}

/// Direction vectors of the three UBS links and the error radii they imply.
///
/// `a_*`/`b_*` vectors are the raw multipliers of [`taylor_direction_vectors`].
/// The scalar norms `a_u1 … a_i2` include the LOS amplitude weight of their
/// link. The `g_*` scalars bound the cascaded-channel errors per unit angle.
#[derive(Clone, Debug, PartialEq)]
pub struct UncertaintySet {
    pub bounds: JitterBounds,
    pub a_u: CVector,
    pub b_u: CVector,
    pub a_e: CVector,
    pub b_e: CVector,
    pub a_i: CVector,
    pub b_i: CVector,
    pub a_u1: f64,
    pub a_u2: f64,
    pub a_e1: f64,
    pub a_e2: f64,
    pub a_i1: f64,
    pub a_i2: f64,
    pub g_u1: f64,
    pub g_u2: f64,
    pub g_e1: f64,
    pub g_e2: f64,
    /// Bound on `‖Δh_U‖₂`.
    pub xi_uh: f64,
    /// Bound on `‖Δh_E‖₂`.
    pub xi_eh: f64,
    /// Bound on `‖ΔG_U‖_F`.
    pub xi_ug: f64,
    /// Bound on `‖ΔG_E‖_F`.
    pub xi_eg: f64,
}

/// Linearized channel errors for one jitter realization.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelErrors {
    pub dh_u: CVector,
    pub dh_e: CVector,
    pub dh_i: CMatrix,
}

impl ChannelErrors {
    pub fn zero(n: usize, m: usize) -> Self {
        ChannelErrors {
            dh_u: CVector::zeros(n),
            dh_e: CVector::zeros(n),
            dh_i: CMatrix::zeros(m, n),
        }
    }
}

pub fn uncertainty_radii(ch: &ChannelSet, bounds: &JitterBounds) -> UncertaintySet {
    let g = &ch.geometry;
    let dirs = |aod: crate::geometry::Aod| {
        taylor_direction_vectors(
            aod.elevation,
            aod.azimuth,
            g.n_x,
            g.n_y,
            g.b_b,
            g.wavelength,
        )
    };
    let (a_u, b_u) = dirs(ch.angles.alice);
    let (a_e, b_e) = dirs(ch.angles.eve);
    let (a_i, b_i) = dirs(ch.angles.irs);

    let a_u1 = ch.alice.los_weight * a_u.norm();
    let a_u2 = ch.alice.los_weight * b_u.norm();
    let a_e1 = ch.eve.los_weight * a_e.norm();
    let a_e2 = ch.eve.los_weight * b_e.norm();
    let a_i1 = ch.irs.los_weight * a_i.norm();
    let a_i2 = ch.irs.los_weight * b_i.norm();

    // ‖ΔG‖_F ≤ ‖diag(h^H)‖_F ‖h_{I,L}^{(A)}‖_F ‖Δh_{I,L}^{(D)}‖.
    let arrival = ch.irs.arrival.norm();
    let (iu, ie) = (ch.h_iu.norm() * arrival, ch.h_ie.norm() * arrival);
    let (g_u1, g_u2, g_e1, g_e2) = (iu * a_i1, iu * a_i2, ie * a_i1, ie * a_i2);

    UncertaintySet {
        bounds: *bounds,
        xi_uh: bounds.u1 * a_u1 + bounds.u2 * a_u2,
        xi_eh: bounds.e1 * a_e1 + bounds.e2 * a_e2,
        xi_ug: bounds.i1 * g_u1 + bounds.i2 * g_u2,
        xi_eg: bounds.i1 * g_e1 + bounds.i2 * g_e2,
        a_u,
        b_u,
        a_e,
        b_e,
        a_i,
        b_i,
        a_u1,
        a_u2,
        a_e1,
        a_e2,
        a_i1,
        a_i2,
        g_u1,
        g_u2,
        g_e1,
        g_e2,
    }
}

impl UncertaintySet {
    /// Errors of the linearized model: the LOS parts move along the
    /// direction vectors, the scattered parts stay put.
    pub fn linearized_errors(&self, ch: &ChannelSet, dev: &AngleDeviation) -> ChannelErrors {
        let delta = |h: &CVector, a: &CVector, b: &CVector, off: AngleOffset, weight: f64| {
            (perturbed_los(h, a, b, off.d_azimuth, off.d_elevation) - h).scale(weight)
        };
        let dh_u = delta(
            &ch.alice.los,
            &self.a_u,
            &self.b_u,
            dev.alice,
            ch.alice.los_weight,
        );
        let dh_e = delta(
            &ch.eve.los,
            &self.a_e,
            &self.b_e,
            dev.eve,
            ch.eve.los_weight,
        );
        let dh_d = delta(
            &ch.irs.departure,
            &self.a_i,
            &self.b_i,
            dev.irs,
            ch.irs.los_weight,
        );
        ChannelErrors {
            dh_u,
            dh_e,
            dh_i: &ch.irs.arrival * dh_d.adjoint(),
        }
    }
}

/// Uniform draw from the jitter box.
pub fn sample_perturbation<R: Rng>(bounds: &JitterBounds, rng: &mut R) -> AngleDeviation {
    let mut draw = |b: f64| {
        if b > 0.0 {
            rng.random_range(-b..=b)
        } else {
            0.0
        }
    };
    AngleDeviation {
        alice: AngleOffset {
            d_azimuth: draw(bounds.u1),
            d_elevation: draw(bounds.u2),
        },
        eve: AngleOffset {
            d_azimuth: draw(bounds.e1),
            d_elevation: draw(bounds.e2),
        },
        irs: AngleOffset {
            d_azimuth: draw(bounds.i1),
            d_elevation: draw(bounds.i2),
        },
    }
}
