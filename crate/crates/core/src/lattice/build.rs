//! Lattice builders: chains and diamond-cubic supercells with point defects.

use crate::error::{Error, Result};
use crate::float::Float;
use crate::lattice::{Atom, Boundary, Dof, LatticeModel, Spring};

/// Diamond conventional lattice constant (Å).
pub const DIAMOND_A: f64 = 3.567;
/// Carbon mass (amu).
pub const CARBON_AMU: f64 = 12.011;
/// Bulk optical phonon band edge the toy lattices are calibrated to (meV).
pub const BAND_EDGE_MEV: f64 = 165.0;
/// Second-neighbor springs carry this fraction of the first-neighbor
/// stiffness; they rigidify the otherwise floppy central-force diamond net.
pub const SECOND_SHELL_FRACTION: f64 = 0.25;

/// Supported lattice kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    Chain,
    DiamondCubic,
}

/// Point defects of the diamond-cubic builder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefectKind {
    None,
    Vacancy,
    /// Replace the central atom by a pair split along [001].
    SplitInterstitial,
    /// Replace the central atom by a compact four-atom aggregate along the
    /// tetrahedral directions (net +3 atoms).
    TripleInterstitial,
}

/// Uniform 1D chain with `n` atoms; one longitudinal degree of freedom per
/// atom. `periodic` selects the boundary.
pub fn build_chain<T: Float>(
    n: usize,
    periodic: bool,
    mass_amu: T,
    stiffness: T,
    spacing_a: T,
) -> Result<LatticeModel<T>> {
    if n < 2 {
        return Err(Error::domain("chain needs at least 2 atoms"));
    }
    let atoms = (0..n)
        .map(|i| Atom {
            position: [spacing_a * T::of(i as f64), T::zero(), T::zero()],
            mass: mass_amu,
            tag: "bulk".into(),
        })
        .collect();
    let mut springs: Vec<Spring<T>> = (0..n - 1)
        .map(|i| Spring { i, j: i + 1, stiffness })
        .collect();
    let boundary = if periodic {
        springs.push(Spring { i: n - 1, j: 0, stiffness });
        let length = spacing_a * T::of(n as f64);
        Boundary::Periodic {
            cell: [
                [length, T::zero(), T::zero()],
                [T::zero(), T::one(), T::zero()],
                [T::zero(), T::zero(), T::one()],
            ],
        }
    } else {
        Boundary::Free
    };
    let model = LatticeModel {
        atoms,
        springs,
        boundary,
        dof: Dof::Scalar,
    };
    model.validate()?;
    Ok(model)
}

/// Replace the mass of one atom; used to plant a light impurity in a chain.
pub fn set_impurity_mass<T: Float>(model: &mut LatticeModel<T>, index: usize, mass_amu: T) -> Result<()> {
    if index >= model.atoms.len() {
        return Err(Error::domain(format!("atom index {index} out of range")));
    }
    if !(mass_amu > T::zero()) {
        return Err(Error::domain("impurity mass must be positive"));
    }
    model.atoms[index].mass = mass_amu;
    model.atoms[index].tag = "impurity".into();
    Ok(())
}

/// Diamond-cubic supercell of `cells³` conventional cells (8 atoms each)
/// with an optional point defect. Springs connect first neighbors at the
/// given stiffness and second neighbors at a quarter of it; springs touching
/// a defect atom are rescaled by `defect_stiffness_scale` (compressive
/// defect environments stiffen their bonds).
pub fn build_diamond<T: Float>(
    cells: usize,
    periodic: bool,
    defect: DefectKind,
    stiffness: T,
    defect_stiffness_scale: T,
) -> Result<LatticeModel<T>> {
    if cells < 2 {
        return Err(Error::domain("need at least 2 cells per dimension"));
    }
    if !(defect_stiffness_scale > T::zero()) {
        return Err(Error::domain("defect stiffness scale must be positive"));
    }
    let a = DIAMOND_A;
    let fcc = [[0.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]];
    let mut positions: Vec<[f64; 3]> = Vec::with_capacity(8 * cells.pow(3));
    for cx in 0..cells {
        for cy in 0..cells {
            for cz in 0..cells {
                for base in &fcc {
                    for sub in 0..2 {
                        let off = 0.25 * sub as f64;
                        positions.push([
                            (cx as f64 + base[0] + off) * a,
                            (cy as f64 + base[1] + off) * a,
                            (cz as f64 + base[2] + off) * a,
                        ]);
                    }
                }
            }
        }
    }

    // Defect surgery around the atom closest to the box center.
    let center = 0.5 * a * cells as f64;
    let central = positions
        .iter()
        .enumerate()
        .min_by(|(_, p), (_, q)| {
            let dp: f64 = p.iter().map(|x| (x - center).powi(2)).sum();
            let dq: f64 = q.iter().map(|x| (x - center).powi(2)).sum();
            dp.partial_cmp(&dq).unwrap()
        })
        .map(|(i, _)| i)
        .expect("non-empty lattice");
    let mut defect_positions: Vec<[f64; 3]> = Vec::new();
    match defect {
        DefectKind::None => {}
        DefectKind::Vacancy => {
            positions.remove(central);
        }
        DefectKind::SplitInterstitial => {
            let p = positions.remove(central);
            for sign in [-1.0, 1.0] {
                defect_positions.push([p[0], p[1], p[2] + sign * 0.55]);
            }
        }
        DefectKind::TripleInterstitial => {
            let p = positions.remove(central);
            let dirs = [
                [1.0, 1.0, 1.0],
                [1.0, -1.0, -1.0],
                [-1.0, 1.0, -1.0],
                [-1.0, -1.0, 1.0],
            ];
            let r = 0.8 / 3.0f64.sqrt();
            for d in dirs {
                defect_positions.push([p[0] + r * d[0], p[1] + r * d[1], p[2] + r * d[2]]);
            }
        }
    }
    let n_bulk = positions.len();
    positions.extend(defect_positions.iter().copied());

    let atoms: Vec<Atom<T>> = positions
        .iter()
        .enumerate()
        .map(|(i, p)| Atom {
            position: [T::of(p[0]), T::of(p[1]), T::of(p[2])],
            mass: T::of(CARBON_AMU),
            tag: if i >= n_bulk { "defect".into() } else { "bulk".into() },
        })
        .collect();

    let boundary = if periodic {
        let length = T::of(a * cells as f64);
        Boundary::Periodic {
            cell: [
                [length, T::zero(), T::zero()],
                [T::zero(), length, T::zero()],
                [T::zero(), T::zero(), length],
            ],
        }
    } else {
        Boundary::Free
    };

    let mut model = LatticeModel {
        atoms,
        springs: Vec::new(),
        boundary,
        dof: Dof::Vector3,
    };

    // Distance shells: first neighbors at a·√3/4, second at a/√2.
    let d1 = a * 3.0f64.sqrt() / 4.0;
    let d2 = a / 2.0f64.sqrt();
    let shell1 = 1.15 * d1;
    let shell2 = 1.10 * d2;
    let k2 = stiffness * T::of(SECOND_SHELL_FRACTION);
    let n = model.atoms.len();
    let mut springs = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let d = model.displacement(i, j);
            let dist = d
                .iter()
                .map(|x| x.as_f64().powi(2))
                .sum::<f64>()
                .sqrt();
            if dist < 0.5 {
                return Err(Error::InvalidLattice(format!(
                    "atoms {i} and {j} are only {dist:.2} Å apart"
                )));
            }
            let base = if dist <= shell1 {
                stiffness
            } else if dist <= shell2 {
                k2
            } else {
                continue;
            };
            let touches_defect = model.atoms[i].tag == "defect" || model.atoms[j].tag == "defect";
            let k = if touches_defect {
                base * defect_stiffness_scale
            } else {
                base
            };
            springs.push(Spring { i, j, stiffness: k });
        }
    }
    model.springs = springs;
    model.validate()?;
    Ok(model)
}

/// Build a lattice of the given kind. Chains reject point defects (plant a
/// mass impurity with [`set_impurity_mass`] instead); the `size` argument is
/// the atom count for chains and cells per dimension for diamond.
pub fn build_lattice<T: Float>(
    kind: LatticeKind,
    size: usize,
    periodic: bool,
    defect: DefectKind,
    stiffness: T,
    defect_stiffness_scale: T,
) -> Result<LatticeModel<T>> {
    match kind {
        LatticeKind::Chain => {
            if defect != DefectKind::None {
                return Err(Error::InvalidLattice(
                    "point defects are not defined for chains; use a mass impurity".into(),
                ));
            }
            build_chain(size, periodic, T::of(CARBON_AMU), stiffness, T::of(1.54))
        }
        LatticeKind::DiamondCubic => {
            build_diamond(size, periodic, defect, stiffness, defect_stiffness_scale)
        }
    }
}

/// Stiffness that places the defect-free band edge of the given lattice at
/// 165 meV. Chains use the closed form `ω_max = 2√(K/M)`; diamond solves a
/// defect-free reference supercell numerically.
pub fn calibrate_stiffness<T: Float>(kind: LatticeKind, size: usize, periodic: bool) -> Result<T> {
    use crate::units;
    match kind {
        LatticeKind::Chain => {
            // ω_max[meV] = 2·√(K/M) in natural units.
            let lambda = units::eigenvalue_from_mev(BAND_EDGE_MEV);
            Ok(T::of(lambda * CARBON_AMU / 4.0))
        }
        LatticeKind::DiamondCubic => {
            let reference: LatticeModel<T> = build_diamond(
                size,
                periodic,
                DefectKind::None,
                T::one(),
                T::one(),
            )?;
            let modes = crate::lattice::modes::solve_modes(&reference)?;
            let band_max = modes
                .frequencies_mev
                .last()
                .copied()
                .ok_or_else(|| Error::InvalidLattice("no modes".into()))?;
            if !(band_max > T::zero()) {
                return Err(Error::InvalidLattice("reference lattice has no band".into()));
            }
            let ratio = T::of(BAND_EDGE_MEV) / band_max;
            Ok(ratio * ratio)
        }
    }
}
