//! Unit conversions and physical constants.
//!
//! Spectral axes convert through the fixed constant `E[eV] = 1239.8419 / λ[nm]`,
//! and narrow linewidths through the first-order Jacobian
//! `ΔE ≈ 1239.8419 · Δλ / λ²`.

use crate::float::Float;

/// hc in eV·nm; the conversion constant between photon energy and vacuum
/// wavelength used throughout the crate.
pub const EV_NM: f64 = 1239.8419;

/// Reduced Planck constant, J·s.
pub const HBAR_JS: f64 = 1.054_571_817e-34;
/// One electron-volt in joules.
pub const EV_J: f64 = 1.602_176_634e-19;
/// One milli-electron-volt in joules.
pub const MEV_J: f64 = EV_J * 1e-3;
/// Atomic mass unit in kilograms.
pub const AMU_KG: f64 = 1.660_539_066_60e-27;
/// Ångström in meters.
pub const ANGSTROM_M: f64 = 1e-10;
/// Vacuum speed of light, m/s.
pub const C_MS: f64 = 2.997_924_58e8;
/// Vacuum permittivity, F/m.
pub const EPS0_F_M: f64 = 8.854_187_812_8e-12;
/// One Debye in C·m.
pub const DEBYE_CM: f64 = 3.335_640_95e-30;

/// ħ² expressed in meV·amu·Å²; the natural constant for Huang–Rhys factors
/// computed from mass-weighted displacements in amu^½·Å and mode energies
/// in meV: `S = ω[meV] · q²[amu·Å²] / (2 ħ²)`.
pub const HBAR_SQ_MEV_AMU_A2: f64 = HBAR_JS * HBAR_JS / (AMU_KG * ANGSTROM_M * ANGSTROM_M) / MEV_J;

/// Photon energy in eV from vacuum wavelength in nm.
#[inline]
pub fn ev_from_nm<T: Float>(lambda_nm: T) -> T {
    T::of(EV_NM) / lambda_nm
}

/// Vacuum wavelength in nm from photon energy in eV.
#[inline]
pub fn nm_from_ev<T: Float>(energy_ev: T) -> T {
    T::of(EV_NM) / energy_ev
}

/// Linewidth conversion nm → meV at the given wavelength (narrow-line limit).
#[inline]
pub fn fwhm_mev_from_nm<T: Float>(fwhm_nm: T, lambda_nm: T) -> T {
    T::of(EV_NM * 1e3) * fwhm_nm / (lambda_nm * lambda_nm)
}

/// Linewidth conversion meV → nm at the given photon energy (narrow-line limit).
#[inline]
pub fn fwhm_nm_from_mev<T: Float>(fwhm_mev: T, energy_ev: T) -> T {
    T::of(EV_NM * 1e-3) * fwhm_mev / (energy_ev * energy_ev)
}

/// Mode energy ħω in meV for a squared angular frequency `lambda` expressed
/// in eV/(Å²·amu), the eigenvalue unit of the mass-weighted dynamical matrix.
#[inline]
pub fn mode_energy_mev(lambda_ev_per_a2_amu: f64) -> f64 {
    if lambda_ev_per_a2_amu <= 0.0 {
        return 0.0;
    }
    HBAR_JS * (lambda_ev_per_a2_amu * EV_J / (AMU_KG * ANGSTROM_M * ANGSTROM_M)).sqrt() / MEV_J
}

/// Inverse of [`mode_energy_mev`]: dynamical-matrix eigenvalue for a mode
/// energy in meV.
#[inline]
pub fn eigenvalue_from_mev(energy_mev: f64) -> f64 {
    let omega = energy_mev * MEV_J / HBAR_JS;
    omega * omega * AMU_KG * ANGSTROM_M * ANGSTROM_M / EV_J
}
