//! Forward model of a narrowband emitter coupled to one localized
//! vibrational mode (LVM).
//!
//! The emission spectrum is a ladder of Lorentzian lines: level `n` sits at
//! `E_n = E_zpl − n·ħω + χ·n(n−1)/2` (a softening ladder whose spacings
//! shrink by the anharmonicity `χ` per level), carries the Franck–Condon
//! weight `w_n = e^{−S} Sⁿ/n!` of the Huang–Rhys framework, and broadens as
//! `α T³ + n·γ_vib` where `γ_vib` is the vibrational decay rate.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::Float;
use crate::rng::stream_rng;
use crate::spectrum::{AxisKind, Spectrum};
use crate::units;

/// Physical parameters of the vibronic ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VibronicParams<T> {
    /// Zero-phonon line energy (eV).
    pub e_zpl_ev: T,
    /// Quantum of the localized vibrational mode (meV).
    pub lvm_quantum_mev: T,
    /// Per-level shrinkage of the ladder spacing (meV/level).
    pub anharmonicity_mev: T,
    /// Total Huang–Rhys factor (dimensionless).
    pub s_total: T,
    /// ZPL FWHM at the reference temperature (meV).
    pub gamma_zpl_mev: T,
    /// Decay rate of the localized vibration (meV).
    pub gamma_vib_mev: T,
    /// Number of ladder lines in the model.
    pub n_peaks: u32,
}

impl<T: Float> VibronicParams<T> {
    pub fn new(
        e_zpl_ev: T,
        lvm_quantum_mev: T,
        anharmonicity_mev: T,
        s_total: T,
        gamma_zpl_mev: T,
        gamma_vib_mev: T,
        n_peaks: u32,
    ) -> Result<Self> {
        let params = VibronicParams {
            e_zpl_ev,
            lvm_quantum_mev,
            anharmonicity_mev,
            s_total,
            gamma_zpl_mev,
            gamma_vib_mev,
            n_peaks,
        };
        params.validate()?;
        Ok(params)
    }

    /// Check the construction invariants.
    pub fn validate(&self) -> Result<()> {
        if !(self.e_zpl_ev > T::zero()) {
            return Err(Error::domain("e_zpl must be positive"));
        }
        if !(self.lvm_quantum_mev > T::zero()) {
            return Err(Error::domain("lvm_quantum must be positive"));
        }
        if self.s_total < T::zero() {
            return Err(Error::domain("huang-rhys factor must be non-negative"));
        }
        if !(self.gamma_zpl_mev > T::zero()) {
            return Err(Error::domain("gamma_zpl must be positive"));
        }
        if self.gamma_vib_mev < T::zero() {
            return Err(Error::domain("gamma_vib must be non-negative"));
        }
        if self.n_peaks < 1 {
            return Err(Error::domain("n_peaks must be at least 1"));
        }
        // Ladder stays ordered: spacing never collapses within the modeled levels.
        if self.anharmonicity_mev >= self.lvm_quantum_mev / T::of(f64::from(self.n_peaks)) {
            return Err(Error::domain(
                "anharmonicity too large: ladder spacings would collapse",
            ));
        }
        for n in 0..self.n_peaks {
            let e = peak_energy(self, n)?;
            if !(e > T::zero()) {
                return Err(Error::domain(format!("peak {n} energy is not positive")));
            }
            if n > 0 && e >= peak_energy(self, n - 1)? {
                return Err(Error::domain("peak energies are not strictly decreasing"));
            }
        }
        Ok(())
    }
}

/// Temperature laws for line broadening and line shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemperatureModel<T> {
    /// FWHM coefficient of the `α T³` two-phonon elastic-scattering law (meV/K³).
    pub alpha_mev_per_k3: T,
    /// Line-shift coefficient of the `a T⁴` term (nm/K⁴).
    pub shift_a_nm_per_k4: T,
    /// Line-shift coefficient of the `b T²` term (nm/K²).
    pub shift_b_nm_per_k2: T,
    /// Zero-temperature ZPL wavelength (nm).
    pub lambda0_nm: T,
    /// Optional constant instrument-resolution floor added to every FWHM (meV).
    #[serde(default)]
    pub instrument_fwhm_mev: T,
}

impl<T: Float> TemperatureModel<T> {
    pub fn new(alpha_mev_per_k3: T, shift_a_nm_per_k4: T, shift_b_nm_per_k2: T, lambda0_nm: T) -> Result<Self> {
        if alpha_mev_per_k3 < T::zero() {
            return Err(Error::domain("alpha must be non-negative"));
        }
        Ok(TemperatureModel {
            alpha_mev_per_k3,
            shift_a_nm_per_k4,
            shift_b_nm_per_k2,
            lambda0_nm,
            instrument_fwhm_mev: T::zero(),
        })
    }

    /// Calibrate `α` so that the ZPL FWHM equals `fwhm_mev` at `t_ref` kelvin.
    pub fn calibrated(fwhm_mev: T, t_ref_k: T, shift_a: T, shift_b: T, lambda0_nm: T) -> Result<Self> {
        if !(t_ref_k > T::zero()) || !(fwhm_mev > T::zero()) {
            return Err(Error::domain("calibration needs positive reference point"));
        }
        Self::new(fwhm_mev / t_ref_k.powi(3), shift_a, shift_b, lambda0_nm)
    }

    pub fn with_instrument_fwhm(mut self, fwhm_mev: T) -> Self {
        self.instrument_fwhm_mev = fwhm_mev;
        self
    }
}

/// Franck–Condon weight `w_n = e^{−S} Sⁿ / n!` of ladder level `n`.
///
/// The weights form a Poisson distribution over `n` and sum to one.
pub fn fc_weight<T: Float>(s_total: T, n: u32) -> Result<T> {
    if s_total < T::zero() {
        return Err(Error::domain("huang-rhys factor must be non-negative"));
    }
    let mut w = (-s_total).exp();
    for k in 1..=n {
        w = w * s_total / T::of(f64::from(k));
    }
    Ok(w)
}

/// Debye–Waller factor `e^{−S}`: the fraction of emission in the ZPL.
pub fn debye_waller<T: Float>(s_total: T) -> Result<T> {
    if s_total < T::zero() {
        return Err(Error::domain("huang-rhys factor must be non-negative"));
    }
    Ok((-s_total).exp())
}

/// Inverse of [`debye_waller`]: `S = −ln(DW)` for `DW ∈ (0, 1]`.
pub fn huang_rhys_from_dw<T: Float>(dw: T) -> Result<T> {
    if !(dw > T::zero()) || dw > T::one() {
        return Err(Error::domain("debye-waller factor must lie in (0, 1]"));
    }
    Ok(-dw.ln())
}

/// Energy of ladder line `n`: `E_n = E_zpl − n·ħω + χ·n(n−1)/2` (eV).
pub fn peak_energy<T: Float>(params: &VibronicParams<T>, n: u32) -> Result<T> {
    if n >= params.n_peaks {
        return Err(Error::domain(format!(
            "level {n} out of range (n_peaks = {})",
            params.n_peaks
        )));
    }
    let nf = T::of(f64::from(n));
    let mev = T::of(1e-3);
    Ok(params.e_zpl_ev - nf * params.lvm_quantum_mev * mev
        + params.anharmonicity_mev * mev * nf * (nf - T::one()) / T::of(2.0))
}

/// FWHM of ladder line `n` at temperature `t_k`:
/// `α T³ + n·γ_vib` plus the optional instrument floor (meV).
pub fn peak_fwhm<T: Float>(
    params: &VibronicParams<T>,
    temp_model: &TemperatureModel<T>,
    t_k: T,
    n: u32,
) -> Result<T> {
    if t_k < T::zero() {
        return Err(Error::domain("temperature must be non-negative"));
    }
    Ok(temp_model.alpha_mev_per_k3 * t_k.powi(3)
        + T::of(f64::from(n)) * params.gamma_vib_mev
        + temp_model.instrument_fwhm_mev)
}

/// Thermal line shift `Δλ = a T⁴ + b T²` (nm).
pub fn zpl_shift<T: Float>(temp_model: &TemperatureModel<T>, t_k: T) -> Result<T> {
    if t_k < T::zero() {
        return Err(Error::domain("temperature must be non-negative"));
    }
    Ok(temp_model.shift_a_nm_per_k4 * t_k.powi(4) + temp_model.shift_b_nm_per_k2 * t_k.powi(2))
}

/// Derivative of the thermal line shift, `dλ/dT = 4aT³ + 2bT` (nm/K).
pub fn shift_slope<T: Float>(temp_model: &TemperatureModel<T>, t_k: T) -> Result<T> {
    if t_k < T::zero() {
        return Err(Error::domain("temperature must be non-negative"));
    }
    Ok(T::of(4.0) * temp_model.shift_a_nm_per_k4 * t_k.powi(3)
        + T::of(2.0) * temp_model.shift_b_nm_per_k2 * t_k)
}

/// ZPL shift under strain, linear model `ΔE = susceptibility · strain` (eV).
pub fn strain_zpl_shift<T: Float>(susceptibility_ev_per_strain: T, strain: T) -> T {
    susceptibility_ev_per_strain * strain
}

/// Projection of the excited-to-ground equilibrium shift onto one phonon mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeDisplacement<T> {
    /// Mode energy ħω (meV).
    pub energy_mev: T,
    /// Mass-weighted displacement q (amu^½·Å).
    pub displacement: T,
}

/// Per-mode and total Huang–Rhys factors.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialHuangRhys<T> {
    /// `S_k = ω_k q_k² / 2ħ` per mode, in input order.
    pub per_mode: Vec<T>,
    /// `S = Σ S_k`.
    pub total: T,
}

/// Partial Huang–Rhys factors `S_k = ω_k q_k² / 2ħ` from mass-weighted
/// mode displacements. Units: meV and amu^½·Å, combined through
/// ħ² = 4.1802 meV·amu·Å².
pub fn partial_huang_rhys<T: Float>(modes: &[ModeDisplacement<T>]) -> Result<PartialHuangRhys<T>> {
    let two_hbar_sq = T::of(2.0 * units::HBAR_SQ_MEV_AMU_A2);
    let mut per_mode = Vec::with_capacity(modes.len());
    for m in modes {
        if !(m.energy_mev > T::zero()) {
            return Err(Error::domain("mode energy must be positive"));
        }
        per_mode.push(m.energy_mev * m.displacement * m.displacement / two_hbar_sq);
    }
    let total = per_mode.iter().copied().sum();
    Ok(PartialHuangRhys { per_mode, total })
}

/// Mass-weighted displacement that produces Huang–Rhys factor `s` on a mode
/// of energy `energy_mev`; inverse of [`partial_huang_rhys`] for one mode.
pub fn displacement_for_huang_rhys<T: Float>(s: T, energy_mev: T) -> Result<T> {
    if !(energy_mev > T::zero()) {
        return Err(Error::domain("mode energy must be positive"));
    }
    if s < T::zero() {
        return Err(Error::domain("huang-rhys factor must be non-negative"));
    }
    Ok((T::of(2.0 * units::HBAR_SQ_MEV_AMU_A2) * s / energy_mev).sqrt())
}

/// Spontaneous-emission rate `Γ = f · ω³μ²/(3πε₀ħc³)` in 1/ns, with the
/// dipole moment in Debye, the transition energy in eV, and `f` a
/// dimensionless medium factor (host refractive index / local-field
/// correction of a nanoparticle host).
pub fn radiative_rate_per_ns<T: Float>(
    dipole_debye: T,
    transition_energy_ev: T,
    medium_factor: T,
) -> Result<T> {
    if !(dipole_debye > T::zero()) {
        return Err(Error::domain("dipole moment must be positive"));
    }
    if !(transition_energy_ev > T::zero()) || !(medium_factor > T::zero()) {
        return Err(Error::domain("energy and medium factor must be positive"));
    }
    let mu = dipole_debye.as_f64() * units::DEBYE_CM;
    let e_j = transition_energy_ev.as_f64() * units::EV_J;
    let omega_cubed = (e_j / units::HBAR_JS).powi(3);
    let rate_per_s = medium_factor.as_f64() * omega_cubed * mu * mu
        / (3.0 * PI * units::EPS0_F_M * units::HBAR_JS * units::C_MS.powi(3));
    Ok(T::of(rate_per_s * 1e-9))
}

/// Radiative lifetime in ns; reciprocal of [`radiative_rate_per_ns`].
pub fn radiative_lifetime_ns<T: Float>(
    dipole_debye: T,
    transition_energy_ev: T,
    medium_factor: T,
) -> Result<T> {
    Ok(T::one() / radiative_rate_per_ns(dipole_debye, transition_energy_ev, medium_factor)?)
}

/// Monotone sampling grid for synthesis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid<T> {
    pub kind: AxisKind,
    pub values: Vec<T>,
}

impl<T: Float> SpectralGrid<T> {
    pub fn new(kind: AxisKind, values: Vec<T>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::domain("grid needs at least two samples"));
        }
        if values.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("grid must be strictly increasing"));
        }
        Ok(SpectralGrid { kind, values })
    }

    /// Uniform wavelength grid (nm).
    pub fn linspace_nm(min_nm: T, max_nm: T, n: usize) -> Result<Self> {
        Self::new(AxisKind::WavelengthNm, linspace(min_nm, max_nm, n)?)
    }

    /// Uniform energy grid (eV).
    pub fn linspace_ev(min_ev: T, max_ev: T, n: usize) -> Result<Self> {
        Self::new(AxisKind::EnergyEv, linspace(min_ev, max_ev, n)?)
    }
}

fn linspace<T: Float>(min: T, max: T, n: usize) -> Result<Vec<T>> {
    if n < 2 || !(max > min) {
        return Err(Error::domain("linspace needs n >= 2 and max > min"));
    }
    let step = (max - min) / T::of((n - 1) as f64);
    Ok((0..n).map(|i| min + step * T::of(i as f64)).collect())
}

/// Settings for [`synthesize_spectrum`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisConfig<T> {
    /// Sample temperature (K).
    pub temperature_k: T,
    /// Total counts distributed over the ladder lines.
    pub photon_budget: T,
    /// Per-sample Poisson noise when set; noise-free otherwise.
    pub noise_seed: Option<u64>,
}

/// Synthesize the vibronic emission spectrum on the given grid.
///
/// Each ladder line contributes a Lorentzian whose integrated area is
/// proportional to its Franck–Condon weight; areas are normalized over the
/// `n_peaks` modeled lines so the noise-free spectrum integrates exactly to
/// `photon_budget`. Intensities are per-bin counts: each sample receives the
/// analytic integral of the line profile over its bin. Tails are truncated
/// at ±200 FWHM around each line (and at the grid boundary) and the removed
/// fraction is folded back through per-line renormalization. With
/// `noise_seed` set, each sample is replaced by a Poisson draw with its
/// noise-free mean; the draw order is ascending axis order, so fixed seeds
/// reproduce bit-identical spectra.
pub fn synthesize_spectrum<T: Float>(
    params: &VibronicParams<T>,
    temp_model: &TemperatureModel<T>,
    grid: &SpectralGrid<T>,
    config: &SynthesisConfig<T>,
) -> Result<Spectrum<T>> {
    params.validate()?;
    if !(config.photon_budget > T::zero()) {
        return Err(Error::domain("photon budget must be positive"));
    }

    // Ladder lines in grid coordinates.
    struct Line<T> {
        center: T,
        fwhm: T,
        area: T,
    }
    let mut weights = Vec::with_capacity(params.n_peaks as usize);
    let mut lines: Vec<Line<T>> = Vec::with_capacity(params.n_peaks as usize);
    let mut missing = Vec::new();
    let lo = grid.values[0];
    let hi = *grid.values.last().expect("non-empty grid");
    for n in 0..params.n_peaks {
        let e_ev = peak_energy(params, n)?;
        let fwhm_mev = peak_fwhm(params, temp_model, config.temperature_k, n)?;
        let (center, fwhm) = match grid.kind {
            AxisKind::WavelengthNm => (
                units::nm_from_ev(e_ev),
                units::fwhm_nm_from_mev(fwhm_mev, e_ev),
            ),
            AxisKind::EnergyEv => (e_ev, fwhm_mev * T::of(1e-3)),
        };
        if center < lo || center > hi {
            missing.push(e_ev.as_f64());
        }
        weights.push(fc_weight(params.s_total, n)?);
        lines.push(Line {
            center,
            fwhm,
            area: T::zero(),
        });
    }
    if !missing.is_empty() {
        return Err(Error::GridCoverage { missing_ev: missing });
    }
    let weight_sum: T = weights.iter().copied().sum();
    for (line, &w) in lines.iter_mut().zip(&weights) {
        line.area = config.photon_budget * w / weight_sum;
    }

    // Bin edges at sample midpoints.
    let n_samples = grid.values.len();
    let half = T::of(0.5);
    let mut edges = Vec::with_capacity(n_samples + 1);
    edges.push(grid.values[0] - (grid.values[1] - grid.values[0]) * half);
    for i in 0..n_samples - 1 {
        edges.push((grid.values[i] + grid.values[i + 1]) * half);
    }
    edges.push(grid.values[n_samples - 1] + (grid.values[n_samples - 1] - grid.values[n_samples - 2]) * half);

    let mut counts = vec![T::zero(); n_samples];
    let inv_pi = T::of(1.0 / PI);
    for line in &lines {
        if !(line.area > T::zero()) {
            continue;
        }
        let hwhm = line.fwhm * half;
        let cdf = |x: T| ((x - line.center) / hwhm).atan() * inv_pi;
        let win_lo = (line.center - T::of(200.0) * line.fwhm).max(edges[0]);
        let win_hi = (line.center + T::of(200.0) * line.fwhm).min(edges[n_samples]);
        let norm = cdf(win_hi) - cdf(win_lo);
        if !(norm > T::zero()) {
            continue;
        }
        for i in 0..n_samples {
            let a = edges[i].max(win_lo);
            let b = edges[i + 1].min(win_hi);
            if b > a {
                counts[i] += line.area * (cdf(b) - cdf(a)) / norm;
            }
        }
    }

    if let Some(seed) = config.noise_seed {
        let mut rng = stream_rng(seed, 0);
        for c in counts.iter_mut() {
            let lambda = c.as_f64();
            *c = if lambda > 0.0 {
                let poisson = Poisson::new(lambda).expect("positive mean");
                T::of(poisson.sample(&mut rng))
            } else {
                // consume one draw regardless, to keep sample alignment stable
                let _ = rng.random::<u64>();
                T::zero()
            };
        }
    }

    let mut spectrum = Spectrum::new(grid.kind, grid.values.clone(), counts)?
        .with_temperature(config.temperature_k)
        .with_metadata("photon_budget", &config.photon_budget.as_f64().to_string());
    if let Some(seed) = config.noise_seed {
        spectrum = spectrum.with_metadata("noise_seed", &seed.to_string());
    }
    Ok(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn il1_params() -> VibronicParams<f64> {
        VibronicParams::new(2.27, 187.0, 1.2, 0.9676, 1.28, 0.26, 4).unwrap()
    }

    fn il1_temp_model() -> TemperatureModel<f64> {
        TemperatureModel::calibrated(1.28, 300.0, 0.0, 0.0, 547.5).unwrap()
    }

    #[test]
    fn fc_weight_pinned_values() {
        // S = 2.4 gives a 9% Debye-Waller factor.
        assert!((fc_weight(2.4f64, 0).unwrap() - 0.0907).abs() < 1e-4);
        // Zero coupling: pure ZPL.
        assert_eq!(fc_weight(0.0, 0).unwrap(), 1.0);
        assert_eq!(fc_weight(0.0, 1).unwrap(), 0.0);
        assert_eq!(fc_weight(0.0, 5).unwrap(), 0.0);
        // S = -ln(0.38) puts 38% of the emission in the ZPL.
        assert!((fc_weight(0.9676f64, 0).unwrap() - 0.38).abs() < 1e-4);
        assert!(fc_weight(-0.1, 0).is_err());
    }

    #[test]
    fn fc_weights_sum_to_one() {
        for &s in &[0.1, 1.0, 2.4, 5.0] {
            let total: f64 = (0..60).map(|n| fc_weight(s, n).unwrap()).sum();
            assert!((total - 1.0).abs() < 1e-12, "s={s} total={total}");
        }
    }

    #[test]
    fn fc_weight_matches_independent_pmf() {
        for &s in &[0.3, 0.9676, 2.4] {
            for n in 0..8 {
                let ours = fc_weight(s, n).unwrap();
                let reference = vibronix_testkit::poisson_pmf(s, n);
                assert_relative_eq!(ours, reference, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn debye_waller_and_inverse() {
        assert!((debye_waller(2.4f64).unwrap() - 0.0907).abs() < 1e-4);
        assert_eq!(debye_waller(0.0).unwrap(), 1.0);
        assert!((huang_rhys_from_dw(0.38f64).unwrap() - 0.9676).abs() < 1e-4);
        // Round trip identity.
        let s = 1.7;
        assert_relative_eq!(
            huang_rhys_from_dw(debye_waller(s).unwrap()).unwrap(),
            s,
            max_relative = 1e-14
        );
        assert!(huang_rhys_from_dw(0.0).is_err());
        assert!(huang_rhys_from_dw(1.2).is_err());
        // fc_weight(S, 0) is exactly the Debye-Waller factor.
        for &s in &[0.0, 0.5, 2.4] {
            assert_eq!(fc_weight(s, 0).unwrap(), debye_waller(s).unwrap());
        }
    }

    #[test]
    fn peak_energy_ladder() {
        let p = il1_params();
        assert_eq!(peak_energy(&p, 0).unwrap(), 2.27);
        assert_relative_eq!(peak_energy(&p, 1).unwrap(), 2.083, max_relative = 1e-12);
        assert_relative_eq!(peak_energy(&p, 2).unwrap(), 1.8972, max_relative = 1e-12);
        assert!(peak_energy(&p, 4).is_err());
    }

    #[test]
    fn peak_spacings_arithmetic() {
        let p = il1_params();
        let e: Vec<f64> = (0..4).map(|n| peak_energy(&p, n).unwrap()).collect();
        let spacings: Vec<f64> = e.windows(2).map(|w| w[0] - w[1]).collect();
        let decrements: Vec<f64> = spacings.windows(2).map(|w| w[0] - w[1]).collect();
        for d in decrements {
            assert_relative_eq!(d, 1.2e-3, max_relative = 1e-9);
        }
    }

    #[test]
    fn peak_fwhm_law() {
        let p = il1_params();
        let m = il1_temp_model();
        // Width grows by gamma_vib per ladder level, at any temperature.
        for &t in &[0.0, 77.0, 300.0] {
            let w0 = peak_fwhm(&p, &m, t, 0).unwrap();
            let w1 = peak_fwhm(&p, &m, t, 1).unwrap();
            let w3 = peak_fwhm(&p, &m, t, 3).unwrap();
            assert_relative_eq!(w1 - w0, 0.26, max_relative = 1e-12);
            assert_relative_eq!(w3 - w0, 3.0 * 0.26, max_relative = 1e-12);
        }
        assert_eq!(peak_fwhm(&p, &m, 0.0, 0).unwrap(), 0.0);
        // alpha calibrated so the ZPL is 1.28 meV wide at 300 K.
        assert_relative_eq!(peak_fwhm(&p, &m, 300.0, 0).unwrap(), 1.28, max_relative = 1e-12);
        assert!((m.alpha_mev_per_k3 - 4.74e-8).abs() < 1e-10);
        assert!(peak_fwhm(&p, &m, -1.0, 0).is_err());
    }

    #[test]
    fn instrument_floor_is_additive() {
        let p = il1_params();
        let m = il1_temp_model().with_instrument_fwhm(0.2);
        assert_relative_eq!(peak_fwhm(&p, &m, 0.0, 0).unwrap(), 0.2, max_relative = 1e-12);
    }

    #[test]
    fn zpl_shift_law() {
        let m = TemperatureModel::new(5.125e-11, 0.0, 0.0, 547.0).unwrap();
        assert_eq!(zpl_shift(&m, 0.0).unwrap(), 0.0);
        assert_eq!(shift_slope(&m, 0.0).unwrap(), 0.0);
        // a = 0: pure quadratic.
        let quad = TemperatureModel::new(0.0, 0.0, 3.4e-6, 547.0).unwrap();
        assert_relative_eq!(zpl_shift(&quad, 200.0).unwrap(), 3.4e-6 * 4e4, max_relative = 1e-12);
        assert_relative_eq!(
            shift_slope(&quad, 200.0).unwrap(),
            2.0 * 3.4e-6 * 200.0,
            max_relative = 1e-12
        );
    }

    #[test]
    fn strain_shift_linear() {
        assert_eq!(strain_zpl_shift(6.0, 0.0), 0.0);
        // 6 eV/strain at 0.18% strain: 10.8 meV.
        assert_relative_eq!(strain_zpl_shift(6.0, 0.0018), 0.0108, max_relative = 1e-12);
        assert_eq!(strain_zpl_shift(6.0, 1e-3), -strain_zpl_shift(6.0, -1e-3));
    }

    #[test]
    fn partial_huang_rhys_cases() {
        // All displacements zero.
        let modes: Vec<ModeDisplacement<f64>> = (1..5)
            .map(|i| ModeDisplacement {
                energy_mev: 40.0 * i as f64,
                displacement: 0.0,
            })
            .collect();
        assert_eq!(partial_huang_rhys(&modes).unwrap().total, 0.0);

        // Single strongly coupled mode: invert then recover S = 2.4 at 186 meV.
        let q = displacement_for_huang_rhys(2.4, 186.0).unwrap();
        let one = partial_huang_rhys(&[ModeDisplacement {
            energy_mev: 186.0,
            displacement: q,
        }])
        .unwrap();
        assert_relative_eq!(one.total, 2.4, max_relative = 1e-12);

        // Linear in omega at fixed q.
        let two = partial_huang_rhys(&[
            ModeDisplacement { energy_mev: 100.0, displacement: 0.2 },
            ModeDisplacement { energy_mev: 50.0, displacement: 0.2 },
        ])
        .unwrap();
        assert_relative_eq!(two.per_mode[0] / two.per_mode[1], 2.0, max_relative = 1e-12);

        assert!(partial_huang_rhys(&[ModeDisplacement {
            energy_mev: -1.0,
            displacement: 0.1
        }])
        .is_err());
    }

    #[test]
    fn partial_huang_rhys_parseval() {
        // Orthonormal decomposition at a common frequency: the total factor
        // computed mode-by-mode equals the one from the combined displacement.
        let omega = 120.0;
        let q = [0.11, 0.23, 0.05, 0.17];
        let modes: Vec<ModeDisplacement<f64>> = q
            .iter()
            .map(|&d| ModeDisplacement { energy_mev: omega, displacement: d })
            .collect();
        let decomposed = partial_huang_rhys(&modes).unwrap().total;
        let q_total = q.iter().map(|d| d * d).sum::<f64>().sqrt();
        let combined = partial_huang_rhys(&[ModeDisplacement {
            energy_mev: omega,
            displacement: q_total,
        }])
        .unwrap()
        .total;
        assert_relative_eq!(decomposed, combined, max_relative = 1e-12);
    }

    #[test]
    fn radiative_lifetime_pinned() {
        // 7.28 D at 2.083 eV in a diamond-like host (factor 2.4): 5.3 ns.
        let tau: f64 = radiative_lifetime_ns(7.28, 2.083, 2.4).unwrap();
        assert!((tau - 5.3).abs() / 5.3 < 0.02, "tau = {tau}");
        // Medium factor x0.1 -> lifetime x10.
        let tau10 = radiative_lifetime_ns(7.28, 2.083, 0.24).unwrap();
        assert_relative_eq!(tau10 / tau, 10.0, max_relative = 1e-12);
        // Doubling the dipole quarters the lifetime.
        let tau_quarter = radiative_lifetime_ns(14.56, 2.083, 2.4).unwrap();
        assert_relative_eq!(tau / tau_quarter, 4.0, max_relative = 1e-12);
        // Zero dipole: domain error, not overflow.
        assert!(radiative_lifetime_ns(0.0, 2.083, 2.4).is_err());
        // Rate <-> lifetime round trip at machine precision.
        let rate = radiative_rate_per_ns(7.28, 2.083, 2.4).unwrap();
        assert_eq!(1.0 / (1.0 / rate), rate);
        assert_relative_eq!(tau * rate, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn dipole_solved_from_target_lifetime() {
        // Solve mu so that tau = 5.3 ns at 2.083 eV with medium factor 2.4,
        // then round-trip: documents where 7.28 D comes from.
        let target_ns = 5.3;
        let rate_unit: f64 = radiative_rate_per_ns(1.0, 2.083, 2.4).unwrap();
        let mu = (1.0 / (target_ns * rate_unit)).sqrt();
        assert!((mu - 7.28).abs() < 0.02, "mu = {mu}");
        assert_relative_eq!(
            radiative_lifetime_ns(mu, 2.083, 2.4).unwrap(),
            target_ns,
            max_relative = 1e-12
        );
    }

    #[test]
    fn params_validation() {
        assert!(VibronicParams::new(2.27, 187.0, 1.2, 0.97, 1.28, 0.26, 4).is_ok());
        // Anharmonicity large enough to collapse the ladder is rejected.
        assert!(VibronicParams::new(2.27, 187.0, 50.0, 0.97, 1.28, 0.26, 4).is_err());
        assert!(VibronicParams::new(-1.0, 187.0, 1.2, 0.97, 1.28, 0.26, 4).is_err());
        assert!(VibronicParams::new(2.27, 187.0, 1.2, -0.1, 1.28, 0.26, 4).is_err());
        assert!(VibronicParams::new(2.27, 187.0, 1.2, 0.97, 1.28, 0.26, 0).is_err());
        // Deep ladder running past E = 0 is rejected.
        assert!(VibronicParams::new(0.5, 187.0, 0.0, 0.97, 1.28, 0.26, 4).is_err());
    }

    #[test]
    fn synthesize_total_counts_match_budget() {
        let p = il1_params();
        let m = il1_temp_model();
        let grid = SpectralGrid::linspace_nm(520.0, 780.0, 2600).unwrap();
        let cfg = SynthesisConfig {
            temperature_k: 300.0,
            photon_budget: 1e6,
            noise_seed: None,
        };
        let s = synthesize_spectrum(&p, &m, &grid, &cfg).unwrap();
        assert_relative_eq!(s.total_counts(), 1e6, max_relative = 1e-3);
    }

    #[test]
    fn synthesize_area_fractions_follow_fc_weights() {
        let p = il1_params();
        let m = il1_temp_model();
        let grid = SpectralGrid::linspace_ev(1.55, 2.45, 3200).unwrap();
        let cfg = SynthesisConfig {
            temperature_k: 300.0,
            photon_budget: 1e6,
            noise_seed: None,
        };
        let s = synthesize_spectrum(&p, &m, &grid, &cfg).unwrap();
        // Integrate counts in windows around each line and compare to the
        // normalized Franck-Condon weights from the independent pmf.
        let weights: Vec<f64> = (0..4).map(|n| vibronix_testkit::poisson_pmf(0.9676, n)).collect();
        let wsum: f64 = weights.iter().sum();
        let total = s.total_counts();
        for n in 0..4u32 {
            let center = peak_energy(&p, n).unwrap();
            let lo = center - 0.09;
            let hi = center + 0.09;
            let counts: f64 = s
                .axis()
                .iter()
                .zip(s.intensity())
                .filter(|(x, _)| **x >= lo && **x <= hi)
                .map(|(_, y)| *y)
                .sum();
            let frac = counts / total;
            let expect = weights[n as usize] / wsum;
            assert!(
                (frac - expect).abs() / expect < 5e-3,
                "peak {n}: {frac} vs {expect}"
            );
        }
    }

    #[test]
    fn synthesize_zero_coupling_single_line() {
        let p = VibronicParams::new(2.27, 187.0, 0.0, 0.0, 1.28, 0.26, 4).unwrap();
        let m = il1_temp_model();
        let grid = SpectralGrid::linspace_ev(1.55, 2.45, 1800).unwrap();
        let cfg = SynthesisConfig {
            temperature_k: 300.0,
            photon_budget: 1e6,
            noise_seed: None,
        };
        let s = synthesize_spectrum(&p, &m, &grid, &cfg).unwrap();
        // All counts concentrate at the ZPL; nothing near the would-be 1PL.
        let near_1pl: f64 = s
            .axis()
            .iter()
            .zip(s.intensity())
            .filter(|(x, _)| (**x - 2.083).abs() < 0.05)
            .map(|(_, y)| *y)
            .sum();
        assert!(near_1pl / s.total_counts() < 1e-3);
    }

    #[test]
    fn synthesize_deterministic_given_seed() {
        let p = il1_params();
        let m = il1_temp_model();
        let grid = SpectralGrid::linspace_nm(530.0, 760.0, 1200).unwrap();
        let cfg = SynthesisConfig {
            temperature_k: 300.0,
            photon_budget: 2.5e5,
            noise_seed: Some(7),
        };
        let a = synthesize_spectrum(&p, &m, &grid, &cfg).unwrap();
        let b = synthesize_spectrum(&p, &m, &grid, &cfg).unwrap();
        assert_eq!(a.intensity(), b.intensity());
        // And a different seed changes the realization.
        let cfg2 = SynthesisConfig { noise_seed: Some(8), ..cfg };
        let c = synthesize_spectrum(&p, &m, &grid, &cfg2).unwrap();
        assert_ne!(a.intensity(), c.intensity());
    }

    #[test]
    fn synthesize_reports_uncovered_peaks() {
        let p = il1_params();
        let m = il1_temp_model();
        // Grid only covers the ZPL and 1PL.
        let grid = SpectralGrid::linspace_ev(2.0, 2.4, 500).unwrap();
        let cfg = SynthesisConfig {
            temperature_k: 300.0,
            photon_budget: 1e6,
            noise_seed: None,
        };
        match synthesize_spectrum(&p, &m, &grid, &cfg) {
            Err(Error::GridCoverage { missing_ev }) => {
                assert_eq!(missing_ev.len(), 2);
                assert!(missing_ev.iter().all(|e| *e < 2.0));
            }
            other => panic!("expected grid-coverage error, got {other:?}"),
        }
    }
}
