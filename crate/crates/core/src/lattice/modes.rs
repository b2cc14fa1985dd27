//! Dynamical matrix, eigenmodes, and localization measures.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::Float;
use crate::lattice::{Dof, LatticeModel};
use crate::units;

/// Eigenvalues below this fraction of the largest one are clamped to zero
/// (rigid-body translations and rotations).
pub const ZERO_MODE_TOLERANCE: f64 = 1e-6;

/// Eigenmodes of a lattice model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhononModes<T> {
    /// Mode energies ħω (meV), ascending; rigid-body modes clamped to 0.
    pub frequencies_mev: Vec<T>,
    /// Mass-weighted orthonormal eigenvectors, one per mode, each of length
    /// `n_atoms · dof`.
    pub eigenvectors: Vec<Vec<T>>,
    /// Inverse participation ratio per mode: 1 for fully delocalized,
    /// 1/n_atoms for a single-atom mode.
    pub ipr: Vec<T>,
    /// Bulk band edge used for LVM classification, when known (meV).
    pub band_max_mev: Option<T>,
    pub n_atoms: usize,
    pub dof: Dof,
}

impl<T: Float> PhononModes<T> {
    pub fn with_band_max(mut self, band_max_mev: T) -> Self {
        self.band_max_mev = Some(band_max_mev);
        self
    }

    /// Number of exactly-zero (clamped) modes.
    pub fn zero_mode_count(&self) -> usize {
        self.frequencies_mev.iter().filter(|f| **f == T::zero()).count()
    }

    /// Highest mode energy (meV).
    pub fn max_frequency_mev(&self) -> T {
        self.frequencies_mev.last().copied().unwrap_or_else(T::zero)
    }

    /// Mode table in CSV form: `index,frequency_mev,ipr,is_lvm`.
    pub fn to_csv(&self, lvm_indices: &[usize]) -> String {
        use std::fmt::Write as _;
        let mut out = String::from("index,frequency_mev,ipr,is_lvm\n");
        for (i, (f, p)) in self.frequencies_mev.iter().zip(&self.ipr).enumerate() {
            let flag = lvm_indices.contains(&i);
            let _ = writeln!(out, "{},{},{},{}", i, f.as_f64(), p.as_f64(), flag);
        }
        out
    }
}

/// Build and diagonalize the mass-weighted dynamical matrix
/// `D_(iα,jβ) = Σ springs k·ê_α ê_β / √(m_i m_j)`.
///
/// Eigenvalues within `ZERO_MODE_TOLERANCE` of zero (relative to the
/// largest) are clamped to exactly zero; anything more negative is a
/// non-equilibrium-geometry error. Eigenvectors come back mass-weighted
/// orthonormal, sorted by ascending frequency.
pub fn solve_modes<T: Float>(model: &LatticeModel<T>) -> Result<PhononModes<T>> {
    model.validate()?;
    let n_atoms = model.atoms.len();
    let per = model.dof.per_atom();
    let n = n_atoms * per;
    let mut d = DMatrix::<T>::zeros(n, n);

    for s in &model.springs {
        let (i, j, k) = (s.i, s.j, s.stiffness);
        let mi = model.atoms[i].mass;
        let mj = model.atoms[j].mass;
        match model.dof {
            Dof::Scalar => {
                let coupling = k / (mi * mj).sqrt();
                d[(i, j)] -= coupling;
                d[(j, i)] -= coupling;
                d[(i, i)] += k / mi;
                d[(j, j)] += k / mj;
            }
            Dof::Vector3 => {
                let disp = model.displacement(i, j);
                let norm = (disp[0] * disp[0] + disp[1] * disp[1] + disp[2] * disp[2]).sqrt();
                if !(norm > T::zero()) {
                    return Err(Error::InvalidLattice(format!(
                        "coincident atoms {i} and {j}"
                    )));
                }
                let e = [disp[0] / norm, disp[1] / norm, disp[2] / norm];
                let inv_sqrt = T::one() / (mi * mj).sqrt();
                for a in 0..3 {
                    for b in 0..3 {
                        let block = k * e[a] * e[b];
                        d[(3 * i + a, 3 * j + b)] -= block * inv_sqrt;
                        d[(3 * j + a, 3 * i + b)] -= block * inv_sqrt;
                        d[(3 * i + a, 3 * i + b)] += block / mi;
                        d[(3 * j + a, 3 * j + b)] += block / mj;
                    }
                }
            }
        }
    }

    let trace: T = (0..n).map(|i| d[(i, i)]).sum();
    let eigen = d.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[a].partial_cmp(&eigen.eigenvalues[b]).unwrap());

    let lambda_max = order
        .last()
        .map(|&i| eigen.eigenvalues[i])
        .unwrap_or_else(T::zero)
        .max(T::zero());
    let tol = lambda_max * T::of(ZERO_MODE_TOLERANCE);

    // Diagonalization sanity: eigenvalue sum must reproduce the trace.
    let eigen_sum: T = eigen.eigenvalues.iter().copied().sum();
    let scale = trace.abs().max(T::one());
    if (eigen_sum - trace).abs() > T::of(1e-8) * scale {
        return Err(Error::InvalidLattice(format!(
            "eigenvalue sum {} does not match trace {}",
            eigen_sum, trace
        )));
    }

    let mut frequencies = Vec::with_capacity(n);
    let mut eigenvectors = Vec::with_capacity(n);
    let mut ipr_values = Vec::with_capacity(n);
    for &idx in &order {
        let lambda = eigen.eigenvalues[idx];
        if lambda < -tol {
            return Err(Error::InvalidLattice(format!(
                "negative eigenvalue {}: geometry is not at mechanical equilibrium",
                lambda
            )));
        }
        let clamped = if lambda < tol { T::zero() } else { lambda };
        frequencies.push(T::of(units::mode_energy_mev(clamped.as_f64())));
        let vector: Vec<T> = eigen.eigenvectors.column(idx).iter().copied().collect();
        ipr_values.push(ipr(&vector, n_atoms, model.dof)?);
        eigenvectors.push(vector);
    }

    Ok(PhononModes {
        frequencies_mev: frequencies,
        eigenvectors,
        ipr: ipr_values,
        band_max_mev: None,
        n_atoms,
        dof: model.dof,
    })
}

/// Normalized inverse participation ratio of a mass-weighted eigenvector:
/// per-atom weights `p_i = Σ_α e_(iα)²`, participation number `1/Σp_i²`,
/// returned as participation/n_atoms. 1 means fully delocalized, 1/n a
/// single-atom mode; low values mark localization.
pub fn ipr<T: Float>(eigenvector: &[T], n_atoms: usize, dof: Dof) -> Result<T> {
    let per = dof.per_atom();
    if eigenvector.len() != n_atoms * per {
        return Err(Error::domain("eigenvector length does not match lattice"));
    }
    let norm: T = eigenvector.iter().map(|&e| e * e).sum();
    if (norm - T::one()).abs() > T::of(1e-8) {
        return Err(Error::domain(format!(
            "eigenvector is not normalized (|e|² = {})",
            norm
        )));
    }
    let sum_p2: T = (0..n_atoms)
        .map(|i| {
            let p: T = (0..per).map(|a| {
                let e = eigenvector[i * per + a];
                e * e
            }).sum();
            p * p
        })
        .sum();
    Ok(T::one() / sum_p2 / T::of(n_atoms as f64))
}

/// A localized mode above the bulk band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LvmCandidate<T> {
    pub mode_index: usize,
    pub frequency_mev: T,
    pub ipr: T,
}

/// Modes above the band edge with IPR below the threshold (default 0.1),
/// sorted by frequency.
pub fn classify_lvm<T: Float>(
    modes: &PhononModes<T>,
    band_max_mev: T,
    ipr_threshold: T,
) -> Result<Vec<LvmCandidate<T>>> {
    if !(band_max_mev > T::zero()) {
        return Err(Error::domain("band edge must be positive"));
    }
    let mut out: Vec<LvmCandidate<T>> = modes
        .frequencies_mev
        .iter()
        .zip(&modes.ipr)
        .enumerate()
        .filter(|(_, (f, p))| **f > band_max_mev && **p < ipr_threshold)
        .map(|(i, (f, p))| LvmCandidate {
            mode_index: i,
            frequency_mev: *f,
            ipr: *p,
        })
        .collect();
    out.sort_by(|a, b| a.frequency_mev.partial_cmp(&b.frequency_mev).unwrap());
    Ok(out)
}

/// Exact local-mode frequency of a light impurity (mass `m = M(1−ε)`) in a
/// monatomic chain, as a ratio to the band edge: `ω_loc/ω_max = 1/√(1−ε²)`.
pub fn chain_local_mode_frequency<T: Float>(epsilon: T) -> Result<T> {
    if !(epsilon > T::zero()) || !(epsilon < T::one()) {
        return Err(Error::domain("mass defect must satisfy 0 < ε < 1"));
    }
    Ok(T::one() / (T::one() - epsilon * epsilon).sqrt())
}

/// Minimum acoustic frequency supported by a nanoparticle of the given size:
/// `f_min = v_s / d` in GHz for `v_s` in m/s and `d` in nm. Whether `d` is a
/// radius or a diameter is the caller's convention; the formula is the same
/// order-of-magnitude estimate either way.
pub fn nanoparticle_phonon_cutoff<T: Float>(sound_velocity_ms: T, size_nm: T) -> Result<T> {
    if !(sound_velocity_ms > T::zero()) || !(size_nm > T::zero()) {
        return Err(Error::domain("velocity and size must be positive"));
    }
    Ok(sound_velocity_ms / size_nm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build::{build_chain, build_diamond, set_impurity_mass, DefectKind};
    use crate::lattice::{Atom, Boundary, LatticeModel, Spring};
    use approx::assert_relative_eq;

    fn diatomic() -> LatticeModel<f64> {
        LatticeModel {
            atoms: vec![
                Atom { position: [0.0, 0.0, 0.0], mass: 12.0, tag: "bulk".into() },
                Atom { position: [1.5, 0.0, 0.0], mass: 12.0, tag: "bulk".into() },
            ],
            springs: vec![Spring { i: 0, j: 1, stiffness: 8.0 }],
            boundary: Boundary::Free,
            dof: Dof::Vector3,
        }
    }

    #[test]
    fn diatomic_stretch_frequency() {
        let modes = solve_modes(&diatomic()).unwrap();
        // 3 translations + 2 rotations are zero; one stretch at sqrt(2K/M).
        assert_eq!(modes.zero_mode_count(), 5);
        let expected = units::mode_energy_mev(2.0 * 8.0 / 12.0);
        assert_relative_eq!(modes.max_frequency_mev(), expected, max_relative = 1e-10);
    }

    #[test]
    fn periodic_chain_matches_analytic_dispersion() {
        let (n, k, m) = (64usize, 19.5f64, 12.011f64);
        let model = build_chain(n, true, m, k, 1.54).unwrap();
        let modes = solve_modes(&model).unwrap();
        // ω(q) = 2·sqrt(K/M)·|sin(π m/N)|; compare sorted sets.
        let mut analytic: Vec<f64> = (0..n)
            .map(|q| {
                let lambda = 4.0 * k / m * (std::f64::consts::PI * q as f64 / n as f64).sin().powi(2);
                units::mode_energy_mev(lambda)
            })
            .collect();
        analytic.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let scale = modes.max_frequency_mev();
        for (got, want) in modes.frequencies_mev.iter().zip(&analytic) {
            assert!(
                (got - want).abs() <= 1e-8 * scale,
                "mode {got} vs analytic {want}"
            );
        }
    }

    #[test]
    fn rigid_body_zero_modes() {
        let free_chain = build_chain::<f64>(40, false, 12.011, 19.5, 1.54).unwrap();
        assert_eq!(solve_modes(&free_chain).unwrap().zero_mode_count(), 1);

        let periodic_chain = build_chain::<f64>(40, true, 12.011, 19.5, 1.54).unwrap();
        assert_eq!(solve_modes(&periodic_chain).unwrap().zero_mode_count(), 1);

        // Periodic 3D crystal: exactly the three translations.
        let periodic = build_diamond::<f64>(2, true, DefectKind::None, 10.0, 1.0).unwrap();
        assert_eq!(solve_modes(&periodic).unwrap().zero_mode_count(), 3);

        // Free 3D cluster: at least translations + rotations.
        let free = build_diamond::<f64>(2, false, DefectKind::None, 10.0, 1.0).unwrap();
        let zeros = solve_modes(&free).unwrap().zero_mode_count();
        assert!(zeros >= 3, "zero modes: {zeros}");
    }

    #[test]
    fn mode_count_and_ipr_bounds() {
        let model = build_diamond::<f64>(2, true, DefectKind::Vacancy, 10.0, 1.0).unwrap();
        let modes = solve_modes(&model).unwrap();
        assert_eq!(modes.frequencies_mev.len(), 3 * model.atoms.len());
        let n_inv = 1.0 / model.atoms.len() as f64;
        for p in &modes.ipr {
            assert!(
                (n_inv - 1e-10..=1.0 + 1e-10).contains(p),
                "ipr {p} outside [{n_inv}, 1]"
            );
        }
    }

    #[test]
    fn ipr_limit_cases() {
        // Uniform over 4 atoms, scalar dof.
        let uniform = vec![0.5; 4];
        assert_relative_eq!(ipr(&uniform, 4, Dof::Scalar).unwrap(), 1.0, max_relative = 1e-12);
        // Single-atom mode.
        let single = vec![1.0, 0.0, 0.0, 0.0];
        assert_relative_eq!(ipr(&single, 4, Dof::Scalar).unwrap(), 0.25, max_relative = 1e-12);
        // Unnormalized input is rejected.
        assert!(ipr(&vec![1.0, 1.0], 2, Dof::Scalar).is_err());
    }

    #[test]
    fn light_impurity_chain_local_mode() {
        let (n, k, m) = (100usize, 19.5f64, 12.011f64);
        let mut model = build_chain(n, true, m, k, 1.54).unwrap();
        set_impurity_mass(&mut model, n / 2, m / 2.0).unwrap();
        let modes = solve_modes(&model).unwrap();

        let band_edge = units::mode_energy_mev(4.0 * k / m);
        let above: Vec<usize> = modes
            .frequencies_mev
            .iter()
            .enumerate()
            .filter(|(_, f)| **f > band_edge * (1.0 + 1e-9))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(above.len(), 1, "one local mode expected");
        let local = above[0];
        assert!(modes.ipr[local] < 0.1, "ipr = {}", modes.ipr[local]);

        // Classification agrees.
        let lvms = classify_lvm(&modes, band_edge, 0.1).unwrap();
        assert_eq!(lvms.len(), 1);
        assert_eq!(lvms[0].mode_index, local);
    }

    #[test]
    fn impurity_frequency_matches_closed_form() {
        let (n, k, m) = (400usize, 19.5f64, 12.011f64);
        let mut model = build_chain(n, true, m, k, 1.54).unwrap();
        set_impurity_mass(&mut model, n / 2, m / 2.0).unwrap();
        let modes = solve_modes(&model).unwrap();
        let band_edge = units::mode_energy_mev(4.0 * k / m);
        let ratio = modes.max_frequency_mev() / band_edge;
        let expected: f64 = chain_local_mode_frequency(0.5).unwrap();
        assert!((expected - 1.1547).abs() < 1e-4);
        assert!(
            (ratio - expected).abs() / expected < 5e-3,
            "ratio {ratio} vs {expected}"
        );
    }

    #[test]
    fn local_mode_frequency_domain() {
        assert_relative_eq!(
            chain_local_mode_frequency(0.8).unwrap(),
            1.0 / 0.6,
            max_relative = 1e-12
        );
        // ε → 0 limit approaches the band edge.
        assert!((chain_local_mode_frequency(1e-8).unwrap() - 1.0).abs() < 1e-15);
        assert!(chain_local_mode_frequency(0.0).is_err());
        assert!(chain_local_mode_frequency(1.0).is_err());
    }

    #[test]
    fn classification_thresholds() {
        let modes = PhononModes {
            frequencies_mev: vec![150.0, 187.0],
            eigenvectors: vec![vec![1.0], vec![1.0]],
            ipr: vec![0.9, 0.05],
            band_max_mev: None,
            n_atoms: 1,
            dof: Dof::Scalar,
        };
        let lvms = classify_lvm(&modes, 165.0, 0.1).unwrap();
        assert_eq!(lvms.len(), 1);
        assert_eq!(lvms[0].frequency_mev, 187.0);
        // Delocalized mode below the edge never qualifies.
        assert!(classify_lvm(&modes, 140.0, 0.1).unwrap().len() == 1);
    }

    #[test]
    fn stiffening_raises_top_mode_monotonically() {
        let mut previous = 0.0;
        for scale in [1.0, 1.5, 2.0, 3.0] {
            let model =
                build_diamond::<f64>(2, true, DefectKind::SplitInterstitial, 10.0, scale).unwrap();
            let top = solve_modes(&model).unwrap().max_frequency_mev();
            assert!(top > previous, "scale {scale}: {top} <= {previous}");
            previous = top;
        }
    }

    #[test]
    fn phonon_cutoff_values() {
        let f: f64 = nanoparticle_phonon_cutoff(12000.0, 25.0).unwrap();
        assert_relative_eq!(f, 480.0, max_relative = 1e-12);
        let f50: f64 = nanoparticle_phonon_cutoff(12000.0, 50.0).unwrap();
        assert_relative_eq!(f50, 240.0, max_relative = 1e-12);
        // Bulk limit.
        let bulk: f64 = nanoparticle_phonon_cutoff(12000.0, 1e12).unwrap();
        assert!(bulk < 1e-8);
        assert!(nanoparticle_phonon_cutoff(0.0, 25.0).is_err());
    }

    #[test]
    fn csv_export_shape() {
        let model = build_chain::<f64>(8, true, 12.011, 19.5, 1.54).unwrap();
        let modes = solve_modes(&model).unwrap();
        let csv = modes.to_csv(&[7]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,frequency_mev,ipr,is_lvm");
        assert_eq!(lines.len(), 9);
        assert!(lines[8].ends_with("true"));
    }
}
