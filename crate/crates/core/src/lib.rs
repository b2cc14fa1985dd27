//! Simulation and analysis toolkit for narrowband single-photon emitters
//! coupled to one localized vibrational mode.
//!
//! The crate covers four areas:
//!
//! - [`vibronic`]: forward model of the emission spectrum — Franck–Condon
//!   weighted Lorentzian ladder, temperature laws, Huang–Rhys accounting,
//!   radiative-rate estimates.
//! - [`photon`]: kinetic Monte Carlo of a two/three-level emitter and the
//!   estimators that reduce photon streams to physics: g²(τ), saturation,
//!   lifetime with IRF, polarization, blinking, quantum yield.
//! - [`lattice`]: toy mass-spring lattices with point defects, dynamical
//!   matrix eigenmodes, inverse participation ratios, and localized-mode
//!   classification.
//! - [`analysis`]: the inverse pipeline — peak detection, multi-Lorentzian
//!   fits, ladder extraction, temperature/line-shift fits, Raman strain,
//!   ensemble statistics with confidence bands.
//!
//! The numeric core is generic over the scalar type through [`float::Float`]
//! (`f32` or `f64`); this module re-exports `f64` aliases of the domain
//! types, which is what most callers want.

pub mod analysis;
pub mod error;
pub mod float;
pub mod lattice;
pub mod lm;
pub mod photon;
pub mod presets;
pub mod rng;
pub mod spectrum;
pub mod units;
pub mod vibronic;

pub use error::{Error, Result};
pub use float::Float;

/// Sampled spectrum over `f64`.
pub type Spectrum = spectrum::Spectrum<f64>;
/// Vibronic ladder parameters over `f64`.
pub type VibronicParams = vibronic::VibronicParams<f64>;
/// Temperature laws over `f64`.
pub type TemperatureModel = vibronic::TemperatureModel<f64>;
/// Synthesis grid over `f64`.
pub type SpectralGrid = vibronic::SpectralGrid<f64>;
/// Mode displacement over `f64`.
pub type ModeDisplacement = vibronic::ModeDisplacement<f64>;
/// Lattice model over `f64`.
// pub type LatticeModel = lattice::LatticeModel<f64>;
/// Phonon mode set over `f64`.
// pub type PhononModes = lattice::PhononModes<f64>;
/// Multi-Lorentzian peak fit over `f64`.
// pub type PeakFit = analysis::PeakFit<f64>;
/// Extracted emitter parameters over `f64`.
// pub type EmitterRecord = analysis::EmitterRecord<f64>;
/// Linear regression with confidence band over `f64`.
// pub type RegressionResult = analysis::RegressionResult<f64>;

pub use spectrum::AxisKind;
