#![allow(dead_code)]

use beamforming::geometry::{synthesize_channels, ChannelModel, ChannelSet, NetworkGeometry};
use beamforming::jitter::{uncertainty_radii, JitterBounds, UncertaintySet};
use beamforming::robust::{Mode, RobustConfig};
use beamforming::{CMatrix, CVector};

/// Channels of the baseline layout for one seed.
pub fn baseline(seed: u64) -> ChannelSet {
    synthesize_channels(&NetworkGeometry::default(), &ChannelModel::default(), seed).unwrap()
}

/// Default jitter ratios: 2% for Alice and the IRS link, 4% for Eve.
pub fn default_uncertainty(ch: &ChannelSet) -> UncertaintySet {
    uncertainty_radii(ch, &JitterBounds::from_ratios(&ch.angles, 0.02, 0.04, 0.02))
}

pub fn config(mode: Mode) -> RobustConfig {
    RobustConfig::default().with_mode(mode)
}

/// The same realization with the IRS removed.
pub fn without_irs(ch: &ChannelSet) -> ChannelSet {
    let n = ch.h_u.len();
    ChannelSet {
        h_i: CMatrix::zeros(0, n),
        h_iu: CVector::zeros(0),
        h_ie: CVector::zeros(0),
        ..ch.clone()
    }
}

use beamforming::geometry::{cascaded_channel, AngleDeviation, AngleOffset};
use beamforming::jitter::perturbed_los;
use beamforming::jitter::sample_perturbation;
use beamforming::robust::minorant::nominal_signal;
use beamforming::robust::{FreeBlock, Link, MinorantTerms, RobustProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Worst normalized violation of the two robust rate constraints over
/// `samples` draws from the jitter box plus its corners. Alice's power is
/// taken from the minorant expanded at `(w_k, v_k)`, exactly as the
/// subproblem sees it; Eve's is exact.
///
/// A positive return value means some sampled error broke a constraint by
/// that fraction of its right-hand side.
pub fn robust_violation(
    p: &RobustProblem,
    ch: &ChannelSet,
    unc: &UncertaintySet,
    free: FreeBlock,
    expansion: (&CVector, &CVector),
    point: (&CVector, &CVector),
    samples: usize,
    seed: u64,
) -> f64 {
    let (w_k, v_k) = expansion;
    let (w, v) = point;
    let s = p.scale;
    let alice = MinorantTerms::new(
        Link::Alice,
        w_k,
        v_k,
        p.alice.h.clone(),
        p.alice.g.clone(),
        free,
    );
    let z = match free {
        FreeBlock::W => w.clone(),
        FreeBlock::V => v.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let devs: Vec<AngleDeviation> = (0..samples)
        .map(|_| sample_perturbation(&unc.bounds, &mut rng))
        .chain(unc.bounds.corners())
        .collect();
    let mut worst = f64::NEG_INFINITY;
    for dev in devs {
        let e = unc.linearized_errors(ch, &dev);
        let dh_u = e.dh_u.unscale(s);
        let dg_u = cascaded_channel(&p.alice.h_irs, &e.dh_i).unwrap();
        let x = beamforming::robust::error_vector(&dh_u, &dg_u);
        let need = p.alice.noise_power(v) * p.alice.sinr_target();
        worst = worst.max((need - alice.quadratic_form(&z, &x)) / need);
        if p.config.eavesdropper {
            let dg_e = cascaded_channel(&p.eve.h_irs, &e.dh_i).unwrap();
            let leak = nominal_signal(&(&p.eve.h + e.dh_e.unscale(s)), &(&p.eve.g + dg_e), w, v)
                .norm_sqr();
            let cap = p.eve.noise_power(v) * p.eve.sinr_target();
            worst = worst.max((leak - cap) / cap);
        }
    }
    worst
}

/// Largest first-order error over a fixed set of box directions scaled to
/// ratio `r`, for each of the three UBS links.
pub fn taylor_errors(seed: u64, r: f64) -> [f64; 3] {
    let ch = baseline(seed);
    let bounds = JitterBounds::from_ratios(&ch.angles, r, r, r);
    let unc = uncertainty_radii(&ch, &bounds);
    let dirs = [
        (1.0, 1.0),
        (1.0, -1.0),
        (-1.0, 0.5),
        (0.3, -1.0),
        (1.0, 0.0),
        (0.0, 1.0),
    ];
    let links = [
        (
            ch.angles.alice,
            &ch.alice.los,
            &unc.a_u,
            &unc.b_u,
            bounds.u1,
            bounds.u2,
        ),
        (
            ch.angles.eve,
            &ch.eve.los,
            &unc.a_e,
            &unc.b_e,
            bounds.e1,
            bounds.e2,
        ),
        (
            ch.angles.irs,
            &ch.irs.departure,
            &unc.a_i,
            &unc.b_i,
            bounds.i1,
            bounds.i2,
        ),
    ];
    links.map(|(aod, los, a, b, b1, b2)| {
        dirs.iter()
            .map(|&(s1, s2)| {
                let off = AngleOffset {
                    d_azimuth: s1 * b1,
                    d_elevation: s2 * b2,
                };
                let exact = ch.ubs_steering(aod.offset(off));
                (exact - perturbed_los(los, a, b, off.d_azimuth, off.d_elevation)).camax()
            })
            .fold(0.0, f64::max)
    })
}
