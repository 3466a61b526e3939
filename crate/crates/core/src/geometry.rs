//! Node placement, array steering vectors and Rician channel synthesis.
//!
//! Angles use the model's naming rather than textbook convention. For a
//! displacement `Δ = from − to` of length `d`, the "azimuth" `ω` and
//! "elevation" `φ` satisfy
//!
//! ```text
//! cos φ sin ω = Δx/d,   sin φ sin ω = Δy/d,   cos ω = Δz/d
//! ```
//!
//! so `ω` is measured from the vertical and `φ` in the horizontal plane.
//!
//! Array elements are indexed row-major in `(p, q)` with `p` along x:
//! entry `p·n_y + q` belongs to element `(p, q)`. Element `(0, 0)` is the
//! phase reference and always equals 1.

use crate::{CMatrix, CVector, C64};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Cartesian position in meters.
pub type Point = [f64; 3];

#[derive(Clone, Debug, PartialEq, Error)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid geometry: {0}")]
    Invalid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Positions of the UAV base station (UBS), the IRS and the two ground
/// users, plus the array layouts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkGeometry {
    pub ubs_pos: Point,
    pub irs_pos: Point,
    pub alice_pos: Point,
    pub eve_pos: Point,
    pub n_x: usize,
    pub n_y: usize,
    pub m_x: usize,
    pub m_y: usize,
    /// UBS element spacing in meters.
    pub b_b: f64,
    /// IRS element spacing in meters.
    pub b_irs: f64,
    pub wavelength: f64,
}

impl Default for NetworkGeometry {
    /// The simulation layout: UBS at (10, 20, 10), IRS at (10, 0, 10),
    /// Alice at (20, 20, 0), Eve at (10, 40, 0), two UBS antennas, ten IRS
    /// elements and half-wavelength spacing at λ = 0.1 m.
    fn default() -> Self {
        let wavelength = 0.1;
        let (m_x, m_y) = grid_factors(10);
        NetworkGeometry {
            ubs_pos: [10.0, 20.0, 10.0],
            irs_pos: [10.0, 0.0, 10.0],
            alice_pos: [20.0, 20.0, 0.0],
            eve_pos: [10.0, 40.0, 0.0],
            n_x: 2,
            n_y: 1,
            m_x,
            m_y,
            b_b: wavelength / 2.0,
            b_irs: wavelength / 2.0,
            wavelength,
        }
    }
}

impl NetworkGeometry {
    pub fn n(&self) -> usize {
        self.n_x * self.n_y
    }

    pub fn m(&self) -> usize {
        self.m_x * self.m_y
    }

    /// Re-lays both arrays as near-square grids holding `n` and `m` elements.
    pub fn with_counts(mut self, n: usize, m: usize) -> Self {
        (self.n_x, self.n_y) = grid_factors(n);
        (self.m_x, self.m_y) = grid_factors(m);
        self
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let points = [self.ubs_pos, self.irs_pos, self.alice_pos, self.eve_pos];
        if points.iter().flatten().any(|c| !c.is_finite()) {
            return Err(GeometryError::Invalid("non-finite coordinate".into()));
        }
        if self.alice_pos[2] != 0.0 || self.eve_pos[2] != 0.0 {
            return Err(GeometryError::Invalid(
                "ground nodes must sit at z = 0".into(),
            ));
        }
        if self.ubs_pos[2] <= 0.0 {
            return Err(GeometryError::Invalid(
                "UAV altitude must be positive".into(),
            ));
        }
        if self.n() == 0 || self.m() == 0 {
            return Err(GeometryError::Invalid(
                "array dimensions must be at least 1".into(),
            ));
        }
        for (name, v) in [
            ("b_b", self.b_b),
            ("b_irs", self.b_irs),
            ("wavelength", self.wavelength),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GeometryError::Invalid(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

/// Splits `count` into `(x, y)` with `x·y = count`, taking `y` as the largest
/// divisor not above `√count`.
pub fn grid_factors(count: usize) -> (usize, usize) {
    let mut y = 1;
    let mut d = 1;
    while d * d <= count {
        if count.is_multiple_of(d) {
            y = d;
        }
        d += 1;
    }
    (count / y, y)
}

fn displacement(from: Point, to: Point, what: &str) -> Result<(Point, f64), GeometryError> {
    let delta = [from[0] - to[0], from[1] - to[1], from[2] - to[2]];
    let d = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
    if d > 0.0 && d.is_finite() {
        Ok((delta, d))
    } else {
        Err(GeometryError::Degenerate(format!(
            "{what} endpoints coincide"
        )))
    }
}

/// UBS-to-node distances in meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distances {
    pub d_u: f64,
    pub d_e: f64,
    pub d_i: f64,
}

pub fn distances(geometry: &NetworkGeometry) -> Result<Distances, GeometryError> {
    Ok(Distances {
        d_u: displacement(geometry.ubs_pos, geometry.alice_pos, "UBS-Alice")?.1,
        d_e: displacement(geometry.ubs_pos, geometry.eve_pos, "UBS-Eve")?.1,
        d_i: displacement(geometry.ubs_pos, geometry.irs_pos, "UBS-IRS")?.1,
    })
}

/// Departure angles of one link, see the module docs for the convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Aod {
    /// ω, measured from the vertical.
    pub azimuth: f64,
    /// φ, measured in the horizontal plane.
    pub elevation: f64,
}

impl Aod {
    /// Angles of the displacement `from − to`. A vertical link gets φ = 0.
    pub fn between(from: Point, to: Point) -> Result<Aod, GeometryError> {
        let (delta, d) = displacement(from, to, "link")?;
        let azimuth = (delta[2] / d).clamp(-1.0, 1.0).acos();
        let elevation = if delta[0] == 0.0 && delta[1] == 0.0 {
            0.0
        } else {
            delta[1].atan2(delta[0])
        };
        Ok(Aod { azimuth, elevation })
    }

    pub fn offset(self, off: AngleOffset) -> Aod {
        Aod {
            azimuth: self.azimuth + off.d_azimuth,
            elevation: self.elevation + off.d_elevation,
        }
    }

    /// Unit direction `(Δx, Δy, Δz)/d` implied by the angles.
    pub fn direction(&self) -> Point {
        let (sw, cw) = self.azimuth.sin_cos();
        let (sp, cp) = self.elevation.sin_cos();
        [cp * sw, sp * sw, cw]
    }
}

/// Angular error on one link.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AngleOffset {
    pub d_azimuth: f64,
    pub d_elevation: f64,
}

/// Jitter realization on the three UBS departure links.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AngleDeviation {
    pub alice: AngleOffset,
    pub eve: AngleOffset,
    pub irs: AngleOffset,
}

/// Nominal angles of every UBS link and the arrival angles at the IRS.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkAngles {
    pub alice: Aod,
    pub eve: Aod,
    pub irs: Aod,
    /// φ_I
    pub irs_arrival_azimuth: f64,
    /// ϑ_I
    pub irs_arrival_elevation: f64,
}

pub fn nominal_angles(geometry: &NetworkGeometry) -> Result<LinkAngles, GeometryError> {
    let irs = Aod::between(geometry.ubs_pos, geometry.irs_pos)?;
    Ok(LinkAngles {
        alice: Aod::between(geometry.ubs_pos, geometry.alice_pos)?,
        eve: Aod::between(geometry.ubs_pos, geometry.eve_pos)?,
        irs,
        // The arrival pair uses the same displacement; the IRS steering
        // formula reads φ_I as the in-plane angle and ϑ_I as the polar one.
        irs_arrival_azimuth: irs.elevation,
        irs_arrival_elevation: irs.azimuth,
    })
}

fn phase_vector(n_x: usize, n_y: usize, kx: f64, ky: f64) -> CVector {
    CVector::from_iterator(
        n_x * n_y,
        (0..n_x).flat_map(|p| {
            (0..n_y).map(move |q| C64::from_polar(1.0, -(p as f64 * kx + q as f64 * ky)))
        }),
    )
}

/// UBS array response, entry `(p, q)` equal to
/// `exp(−2πj (b/λ)(p cos ω + q sin φ sin ω))`.
pub fn steering_ubs(
    omega: f64,
    phi: f64,
    n_x: usize,
    n_y: usize,
    spacing: f64,
    wavelength: f64,
) -> CVector {
    let k = 2.0 * PI * spacing / wavelength;
    phase_vector(n_x, n_y, k * omega.cos(), k * phi.sin() * omega.sin())
}

/// IRS array response, entry `(p, q)` equal to
/// `exp(−2πj (b/λ)(p cos φ sin ϑ + q sin φ sin ϑ))`.
pub fn steering_irs(
    phi: f64,
    theta: f64,
    m_x: usize,
    m_y: usize,
    spacing: f64,
    wavelength: f64,
) -> CVector {
    let k = 2.0 * PI * spacing / wavelength;
    phase_vector(
        m_x,
        m_y,
        k * phi.cos() * theta.sin(),
        k * phi.sin() * theta.sin(),
    )
}

/// Elevation-dependent Rician factor `K = a·exp(b(π/2 − θ))`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RicianModel {
    pub a: f64,
    pub b: f64,
}

impl Default for RicianModel {
    fn default() -> Self {
        RicianModel {
            a: 5.0,
            b: 2.0 / PI * 3f64.ln(),
        }
    }
}

impl RicianModel {
    pub fn k_factor(&self, elevation: f64) -> f64 {
        self.a * (self.b * (FRAC_PI_2 - elevation)).exp()
    }
}

/// K-factor under the default environment (`a = 5`, `b = (2/π) ln 3`), for
/// an elevation in `[0, π/2]`.
pub fn rician_k_factor(elevation: f64) -> f64 {
    RicianModel::default().k_factor(elevation)
}

/// Geometric elevation of the displacement `from − to` above the horizon, in
/// `[0, π/2]`. This is the angle fed to the K-factor model.
pub fn ground_elevation(from: Point, to: Point) -> Result<f64, GeometryError> {
    let (delta, d) = displacement(from, to, "link")?;
    Ok((delta[2].abs() / d).clamp(0.0, 1.0).asin())
}

/// Distance-dependent path loss, all gains linear.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathLoss {
    pub a_l: f64,
    pub a_n: f64,
    pub alpha_l: f64,
    pub alpha_n: f64,
}

impl Default for PathLoss {
    // -3.14 is a measured NLoS excess loss in dB, not an approximation of π.
    #[allow(clippy::approx_constant)]
    fn default() -> Self {
        PathLoss::from_db(-2.14, -3.14, 2.09, 3.75)
    }
}

impl PathLoss {
    pub fn from_db(a_l_db: f64, a_n_db: f64, alpha_l: f64, alpha_n: f64) -> Self {
        PathLoss {
            a_l: crate::units::db_to_linear(a_l_db),
            a_n: crate::units::db_to_linear(a_n_db),
            alpha_l,
            alpha_n,
        }
    }

    /// Amplitude weight `√(A_L d^{−α_L} K/(1+K))` of the LOS component.
    pub fn los_weight(&self, d: f64, k: f64) -> f64 {
        (self.a_l * d.powf(-self.alpha_l) * k / (1.0 + k)).sqrt()
    }

    /// Amplitude weight `√(A_N d^{−α_N}/(1+K))` of the scattered component.
    pub fn nlos_weight(&self, d: f64, k: f64) -> f64 {
        (self.a_n * d.powf(-self.alpha_n) / (1.0 + k)).sqrt()
    }
}

/// Large-scale propagation parameters shared by every link.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ChannelModel {
    pub path_loss: PathLoss,
    pub rician: RicianModel,
}

/// One Rician vector channel `los_weight·los + nlos_weight·nlos`.
#[derive(Clone, Debug, PartialEq)]
pub struct RicianVector {
    pub distance: f64,
    pub k: f64,
    pub los_weight: f64,
    pub nlos_weight: f64,
    /// Unit-modulus steering vector.
    pub los: CVector,
    /// CN(0, 1) entries.
    pub nlos: CVector,
}

impl RicianVector {
    pub fn compose(&self) -> CVector {
        self.los.scale(self.los_weight) + self.nlos.scale(self.nlos_weight)
    }

    /// The same channel with a different LOS steering vector.
    pub fn compose_with_los(&self, los: &CVector) -> CVector {
        los.scale(self.los_weight) + self.nlos.scale(self.nlos_weight)
    }
}

/// The UBS-to-IRS matrix channel. Its LOS part is the outer product
/// `arrival · departureᴴ` (M×N).
#[derive(Clone, Debug, PartialEq)]
pub struct IrsLink {
    pub distance: f64,
    pub k: f64,
    pub los_weight: f64,
    pub nlos_weight: f64,
    /// `h_{I,L}^{(A)}`, length M.
    pub arrival: CVector,
    /// `h_{I,L}^{(D)}`, length N.
    pub departure: CVector,
    /// M×N CN(0, 1) entries.
    pub nlos: CMatrix,
}

impl IrsLink {
    pub fn los(&self) -> CMatrix {
        &self.arrival * self.departure.adjoint()
    }

    pub fn compose(&self) -> CMatrix {
        self.compose_with_departure(&self.departure)
    }

    pub fn compose_with_departure(&self, departure: &CVector) -> CMatrix {
        (&self.arrival * departure.adjoint()).scale(self.los_weight)
            + self.nlos.scale(self.nlos_weight)
    }
}

/// All channels of one realization. `h_u`, `h_e`, `h_i`, `h_iu`, `h_ie` are
/// the nominal (jitter-free) channels; the remaining fields keep their
/// decomposition so that jittered versions can be re-synthesized.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    pub geometry: NetworkGeometry,
    pub model: ChannelModel,
    pub angles: LinkAngles,
    pub alice: RicianVector,
    pub eve: RicianVector,
    pub irs: IrsLink,
    pub irs_alice: RicianVector,
    pub irs_eve: RicianVector,
    pub h_u: CVector,
    pub h_e: CVector,
    pub h_i: CMatrix,
    pub h_iu: CVector,
    pub h_ie: CVector,
}

/// Draws a CN(0, 1) sample: real and imaginary parts are N(0, ½).
pub fn complex_normal<R: rand::Rng>(rng: &mut R) -> C64 {
    let half = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).expect("valid deviation");
    C64::new(half.sample(rng), half.sample(rng))
}

fn complex_normal_vector<R: rand::Rng>(rng: &mut R, n: usize) -> CVector {
    CVector::from_fn(n, |_, _| complex_normal(rng))
}

fn rician_vector(
    los: CVector,
    distance: f64,
    k: f64,
    pl: &PathLoss,
    rng: &mut ChaCha8Rng,
) -> RicianVector {
    let nlos = complex_normal_vector(rng, los.len());
    RicianVector {
        distance,
        k,
        los_weight: pl.los_weight(distance, k),
        nlos_weight: pl.nlos_weight(distance, k),
        los,
        nlos,
    }
}

/// Draws one channel realization. The scattered parts are i.i.d. CN(0, 1)
/// from a ChaCha8 stream seeded with `seed`, drawn in the order UBS–Alice,
/// UBS–Eve, UBS–IRS (column-major), IRS–Alice, IRS–Eve.
pub fn synthesize_channels(
    geometry: &NetworkGeometry,
    model: &ChannelModel,
    seed: u64,
) -> Result<ChannelSet, GeometryError> {
    geometry.validate()?;
    let g = geometry;
    let pl = &model.path_loss;
    let angles = nominal_angles(g)?;
    let dist = distances(g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let ubs_link = |aod: Aod,
                    to: Point,
                    d: f64,
                    rng: &mut ChaCha8Rng|
     -> Result<RicianVector, GeometryError> {
        let k = model.rician.k_factor(ground_elevation(g.ubs_pos, to)?);
        let los = steering_ubs(
            aod.azimuth,
            aod.elevation,
            g.n_x,
            g.n_y,
            g.b_b,
            g.wavelength,
        );
        Ok(rician_vector(los, d, k, pl, rng))
    };
    let alice = ubs_link(angles.alice, g.alice_pos, dist.d_u, &mut rng)?;
    let eve = ubs_link(angles.eve, g.eve_pos, dist.d_e, &mut rng)?;

    let k_i = model
        .rician
        .k_factor(ground_elevation(g.ubs_pos, g.irs_pos)?);
    let irs = IrsLink {
        distance: dist.d_i,
        k: k_i,
        los_weight: pl.los_weight(dist.d_i, k_i),
        nlos_weight: pl.nlos_weight(dist.d_i, k_i),
        arrival: steering_irs(
            angles.irs_arrival_azimuth,
            angles.irs_arrival_elevation,
            g.m_x,
            g.m_y,
            g.b_irs,
            g.wavelength,
        ),
        departure: steering_ubs(
            angles.irs.azimuth,
            angles.irs.elevation,
            g.n_x,
            g.n_y,
            g.b_b,
            g.wavelength,
        ),
        nlos: CMatrix::from_fn(g.m(), g.n(), |_, _| complex_normal(&mut rng)),
    };

    let irs_link = |to: Point, rng: &mut ChaCha8Rng| -> Result<RicianVector, GeometryError> {
        let (_, d) = displacement(g.irs_pos, to, "IRS-ground")?;
        let aod = Aod::between(g.irs_pos, to)?;
        let k = model.rician.k_factor(ground_elevation(g.irs_pos, to)?);
        let los = steering_irs(
            aod.elevation,
            aod.azimuth,
            g.m_x,
            g.m_y,
            g.b_irs,
            g.wavelength,
        );
        Ok(rician_vector(los, d, k, pl, rng))
    };
    let irs_alice = irs_link(g.alice_pos, &mut rng)?;
    let irs_eve = irs_link(g.eve_pos, &mut rng)?;

    Ok(ChannelSet {
        geometry: g.clone(),
        model: *model,
        angles,
        h_u: alice.compose(),
        h_e: eve.compose(),
        h_i: irs.compose(),
        h_iu: irs_alice.compose(),
        h_ie: irs_eve.compose(),
        alice,
        eve,
        irs,
        irs_alice,
        irs_eve,
    })
}

/// `G = diag(h^H) H_I`, so that `vᴴ G = hᴴ diag(v) H_I`.
pub fn cascaded_channel(h_ix: &CVector, h_i: &CMatrix) -> Result<CMatrix, GeometryError> {
    if h_ix.len() != h_i.nrows() {
        return Err(GeometryError::Dimension(format!(
            "IRS channel has {} entries but H_I has {} rows",
            h_ix.len(),
            h_i.nrows()
        )));
    }
    let mut g = h_i.clone();
    for (m, mut row) in g.row_iter_mut().enumerate() {
        row *= h_ix[m].conj();
    }
    Ok(g)
}

impl ChannelSet {
    pub fn n(&self) -> usize {
        self.h_u.len()
    }

    pub fn m(&self) -> usize {
        self.h_iu.len()
    }

    /// Nominal cascaded channel towards Alice.
    pub fn g_u(&self) -> CMatrix {
        cascaded_channel(&self.h_iu, &self.h_i).expect("consistent channel set")
    }

    /// Nominal cascaded channel towards Eve.
    pub fn g_e(&self) -> CMatrix {
        cascaded_channel(&self.h_ie, &self.h_i).expect("consistent channel set")
    }

    /// UBS LOS steering vector for a link direction.
    pub fn ubs_steering(&self, aod: Aod) -> CVector {
        let g = &self.geometry;
        steering_ubs(
            aod.azimuth,
            aod.elevation,
            g.n_x,
            g.n_y,
            g.b_b,
            g.wavelength,
        )
    }

    /// Exact channels under a jitter realization: every UBS departure
    /// steering vector is recomputed at the offset angles while the scattered
    /// parts and the IRS-side channels stay as drawn.
    pub fn perturbed(&self, dev: &AngleDeviation) -> ChannelSet {
        let mut out = self.clone();
        out.alice.los = self.ubs_steering(self.angles.alice.offset(dev.alice));
        out.eve.los = self.ubs_steering(self.angles.eve.offset(dev.eve));
        out.irs.departure = self.ubs_steering(self.angles.irs.offset(dev.irs));
        out.h_u = out.alice.compose();
        out.h_e = out.eve.compose();
        out.h_i = out.irs.compose();
        out
    }
}
