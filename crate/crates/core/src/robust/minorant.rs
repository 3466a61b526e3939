//! Linear minorant of the received signal power.
//!
//! With the stacked channel error `x = [Δh; vec(ΔG*)]` (column-major vec)
//! and `u(w, v) = [w; w ⊗ v*]`, the conjugate received amplitude is exactly
//!
//! ```text
//! s* = s̄* + uᴴ x,   s̄ = (h̄ᴴ + vᴴ Ḡ) w
//! ```
//!
//! `|s|²` is convex in `s`, so its tangent at an iterate `(w_k, v_k)` is a
//! global lower bound: `|s|² ≥ 2 Re{s_k* s} − |s_k|²`. Expanding in `x`
//! gives the quadratic form
//!
//! ```text
//! xᴴ Ã x + 2 Re{ãᴴ x} + ã₀
//! Ã  = C + Cᴴ − Z,          C = u_k uᴴ,  Z = u_k u_kᴴ
//! ã  = s̄_k* u + s̄* u_k − s̄_k* u_k
//! ã₀ = 2 Re{s̄_k s̄*} − |s̄_k|²
//! ```
//!
//! which is affine in whichever block is free once the other is fixed at
//! its iterate, and exact at the expansion point.

use crate::geometry::ChannelSet;
use crate::{CMatrix, CVector, C64};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Link {
    Alice,
    Eve,
}

/// The block optimized in the current alternating step.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum FreeBlock {
    W,
    V,
}

/// `[w; w ⊗ v*]`, with entry `N + n·M + m` equal to `w_n v_m*`.
pub fn stack_u(w: &CVector, v: &CVector) -> CVector {
    let (n, m) = (w.len(), v.len());
    let mut u = CVector::zeros(n + n * m);
    u.rows_mut(0, n).copy_from(w);
    for j in 0..n {
        for i in 0..m {
            u[n + j * m + i] = w[j] * v[i].conj();
        }
    }
    u
}

/// `[Δh; vec(ΔG*)]` with the matrix stacked column by column.
pub fn error_vector(dh: &CVector, dg: &CMatrix) -> CVector {
    CVector::from_iterator(
        dh.len() + dg.len(),
        dh.iter().cloned().chain(dg.iter().map(|z| z.conj())),
    )
}

/// Minorant data of one receiver around one iterate.
#[derive(Clone, Debug, PartialEq)]
pub struct MinorantTerms {
    pub link: Link,
    pub free: FreeBlock,
    pub w_k: CVector,
    pub v_k: CVector,
    pub h: CVector,
    pub g: CMatrix,
    /// `u(w_k, v_k)`.
    pub u_k: CVector,
    /// `s̄(w_k, v_k)`.
    pub s_k: C64,
}

/// Builds the terms for `link` from physical channels.
pub fn minorant_terms(
    link: Link,
    w_k: &CVector,
    v_k: &CVector,
    ch: &ChannelSet,
    free: FreeBlock,
) -> MinorantTerms {
    let (h, g) = match link {
        Link::Alice => (ch.h_u.clone(), ch.g_u()),
        Link::Eve => (ch.h_e.clone(), ch.g_e()),
    };
    MinorantTerms::new(link, w_k, v_k, h, g, free)
}

impl MinorantTerms {
    pub fn new(
        link: Link,
        w_k: &CVector,
        v_k: &CVector,
        h: CVector,
        g: CMatrix,
        free: FreeBlock,
    ) -> Self {
        let s_k = nominal_signal(&h, &g, w_k, v_k);
        MinorantTerms {
            link,
            free,
            w_k: w_k.clone(),
            v_k: v_k.clone(),
            u_k: stack_u(w_k, v_k),
            s_k,
            h,
            g,
        }
    }

    /// Full `(w, v)` with the free block set to `z`.
    pub fn point(&self, z: &CVector) -> (CVector, CVector) {
        match self.free {
            FreeBlock::W => (z.clone(), self.v_k.clone()),
            FreeBlock::V => (self.w_k.clone(), z.clone()),
        }
    }

    pub fn u(&self, z: &CVector) -> CVector {
        let (w, v) = self.point(z);
        stack_u(&w, &v)
    }

    pub fn signal(&self, z: &CVector) -> C64 {
        let (w, v) = self.point(z);
        nominal_signal(&self.h, &self.g, &w, &v)
    }

    /// `C = u_k uᴴ`.
    pub fn c_matrix(&self, z: &CVector) -> CMatrix {
        &self.u_k * self.u(z).adjoint()
    }

    /// `Z = u_k u_kᴴ`.
    pub fn z_matrix(&self) -> CMatrix {
        &self.u_k * self.u_k.adjoint()
    }

    /// `|s̄_k|²`.
    pub fn z_scalar(&self) -> f64 {
        self.s_k.norm_sqr()
    }

    pub fn a_tilde(&self, z: &CVector) -> CMatrix {
        let c = self.c_matrix(z);
        &c + c.adjoint() - self.z_matrix()
    }

    pub fn a_vec(&self, z: &CVector) -> CVector {
        let u = self.u(z);
        let s = self.signal(z);
        let sk = self.s_k.conj();
        u.map(|x| x * sk) + self.u_k.map(|x| x * (s.conj() - sk))
    }

    pub fn a0(&self, z: &CVector) -> f64 {
        2.0 * (self.s_k * self.signal(z).conj()).re - self.z_scalar()
    }

    /// `xᴴ Ã x + 2 Re{ãᴴ x} + ã₀`, a lower bound on the received power
    /// under channel error `x`.
    pub fn quadratic_form(&self, z: &CVector, x: &CVector) -> f64 {
        let quad = x.dotc(&(self.a_tilde(z) * x)).re;
        quad + 2.0 * self.a_vec(z).dotc(x).re + self.a0(z)
    }

    /// `Qᴴ Ã Q`, `Qᴴ ã` and `ã₀` for an orthonormal basis `Q`, computed from
    /// the rank structure without forming `Ã`.
    pub fn compressed(&self, z: &CVector, q: &CMatrix) -> (CMatrix, CVector, f64) {
        let u = self.u(z);
        let s = self.signal(z);
        let pk = q.ad_mul(&self.u_k);
        let p = q.ad_mul(&u);
        let c = &pk * p.adjoint();
        let a = &c + c.adjoint() - &pk * pk.adjoint();
        let sk = self.s_k.conj();
        let vec = p.map(|x| x * sk) + pk.map(|x| x * (s.conj() - sk));
        (a, vec, 2.0 * (self.s_k * s.conj()).re - self.z_scalar())
    }
}

/// `(hᴴ + vᴴ G) w`.
pub fn nominal_signal(h: &CVector, g: &CMatrix, w: &CVector, v: &CVector) -> C64 {
    let direct = h.dotc(w);
    if v.is_empty() {
        direct
    } else {
        direct + v.dotc(&(g * w))
    }
}
