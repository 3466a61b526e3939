//! Robust secure beamforming for a UAV downlink assisted by an active
//! intelligent reflecting surface (IRS), with the UAV's attitude jitter
//! modeled as bounded angle-of-departure errors.
//!
//! The pipeline runs in four stages:
//!
//! 1. [`geometry`] places the nodes, builds array steering vectors and
//!    draws Rician channels.
//! 2. [`jitter`] linearizes the line-of-sight components around the nominal
//!    angles and bounds the resulting channel errors.
//! 3. [`robust`] turns the worst-case rate constraints into LMIs and runs
//!    alternating optimization over the beamformer `w` and the reflection
//!    vector `v`. Each subproblem goes to the in-repo [`conic`] solver.
//! 4. [`evaluation`] re-synthesizes the exact channels over the jitter box
//!    and reports rates and constraint margins. [`experiment`] wraps all of
//!    it in seeded Monte-Carlo sweeps.
//!
//! Powers are linear watts throughout the library. Conversions from dB and
//! dBm happen at the configuration boundary through [`units`].

pub mod evaluation;
pub mod experiment;
pub mod geometry;
pub mod jitter;
pub mod robust;
pub mod units;

pub use num_complex::Complex64 as C64;

/// Complex column vector.
pub type CVector = nalgebra::DVector<C64>;
/// Complex dense matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;
