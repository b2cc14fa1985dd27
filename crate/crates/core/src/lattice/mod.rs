//! Toy harmonic-lattice phonons: mass-spring models with point defects,
//! dynamical-matrix eigenmodes, inverse participation ratios, and
//! localized-mode classification.
//!
//! Central pair springs only; the diamond-cubic builder adds second-
//! neighbor springs because the diamond network is floppy under
//! nearest-neighbor central forces alone (transverse branches would
//! collapse to zero frequency and swamp the rigid-body mode count).
//! Chains are one degree of freedom per atom (longitudinal).

pub mod build;
pub mod modes;

pub use build::{build_chain, build_diamond, build_lattice, calibrate_stiffness, DefectKind, LatticeKind};
pub use modes::{
    chain_local_mode_frequency, classify_lvm, ipr, nanoparticle_phonon_cutoff, solve_modes,
    LvmCandidate, PhononModes,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::Float;

/// Degrees of freedom per atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dof {
    /// One longitudinal displacement per atom (chains).
    Scalar,
    /// Full 3D displacements.
    Vector3,
}

impl Dof {
    pub fn per_atom(self) -> usize {
        match self {
            Dof::Scalar => 1,
            Dof::Vector3 => 3,
        }
    }
}

/// Point mass in the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom<T> {
    /// Position (Å).
    pub position: [T; 3],
    /// Mass (amu).
    pub mass: T,
    /// Free-form label; defect atoms carry "defect", impurities "impurity".
    pub tag: String,
}

/// Harmonic central spring between two atoms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spring<T> {
    pub i: usize,
    pub j: usize,
    /// Stiffness (eV/Å²).
    pub stiffness: T,
}

/// Boundary condition of the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary<T> {
    Free,
    /// Periodic with an orthorhombic cell; `cell` holds the three cell
    /// vectors row-wise (off-diagonal entries must vanish).
    Periodic { cell: [[T; 3]; 3] },
}

/// Mass-spring model of a defect lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeModel<T> {
    pub atoms: Vec<Atom<T>>,
    pub springs: Vec<Spring<T>>,
    pub boundary: Boundary<T>,
    pub dof: Dof,
}

impl<T: Float> LatticeModel<T> {
    /// Validate masses, stiffnesses, spring indices, duplicates, and
    /// connectivity of the spring graph.
    pub fn validate(&self) -> Result<()> {
        let n = self.atoms.len();
        if n == 0 {
            return Err(Error::InvalidLattice("no atoms".into()));
        }
        for a in &self.atoms {
            if !(a.mass > T::zero()) {
                return Err(Error::InvalidLattice("masses must be positive".into()));
            }
        }
        if let Boundary::Periodic { cell } = &self.boundary {
            for (r, row) in cell.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    if r == c && !(*v > T::zero()) {
                        return Err(Error::InvalidLattice(
                            "periodic cell lengths must be positive".into(),
                        ));
                    }
                    if r != c && *v != T::zero() {
                        return Err(Error::InvalidLattice(
                            "only orthorhombic cells are supported".into(),
                        ));
                    }
                }
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        for s in &self.springs {
            if s.i >= n || s.j >= n || s.i == s.j {
                return Err(Error::InvalidLattice(format!(
                    "spring ({}, {}) has invalid endpoints",
                    s.i, s.j
                )));
            }
            if !(s.stiffness > T::zero()) {
                return Err(Error::InvalidLattice("stiffnesses must be positive".into()));
            }
            let key = (s.i.min(s.j), s.i.max(s.j));
            if !seen.insert(key) {
                return Err(Error::InvalidLattice(format!(
                    "duplicate spring between {} and {}",
                    key.0, key.1
                )));
            }
            adjacency[s.i].push(s.j);
            adjacency[s.j].push(s.i);
        }
        // Connectivity.
        let mut visited = vec![false; n];
        let mut stack = vec![0usize];
        visited[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &adjacency[v] {
                if !visited[w] {
                    visited[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        if count != n {
            return Err(Error::InvalidLattice(format!(
                "spring graph is disconnected ({count} of {n} atoms reachable)"
            )));
        }
        Ok(())
    }

    /// Displacement from atom `i` to atom `j`, minimum-image under periodic
    /// boundaries.
    pub fn displacement(&self, i: usize, j: usize) -> [T; 3] {
        let mut d = [T::zero(); 3];
        for k in 0..3 {
            d[k] = self.atoms[j].position[k] - self.atoms[i].position[k];
        }
        if let Boundary::Periodic { cell } = &self.boundary {
            for k in 0..3 {
                let length = cell[k][k];
                let half = length * T::of(0.5);
                while d[k] > half {
                    d[k] -= length;
                }
                while d[k] < -half {
                    d[k] += length;
                }
            }
        }
        d
    }

    /// Number of degrees of freedom in the dynamical matrix.
    pub fn n_dof(&self) -> usize {
        self.atoms.len() * self.dof.per_atom()
    }

    /// Serialize to the documented JSON layout.
    pub fn to_json(&self) -> Result<String>
    where
        T: serde::Serialize,
    {
        #[derive(Serialize)]
        struct Doc<'a, T> {
            schema: &'static str,
            #[serde(flatten)]
            model: &'a LatticeModel<T>,
        }
        Ok(serde_json::to_string_pretty(&Doc {
            schema: "vibronix/1",
            model: self,
        })?)
    }

    /// Parse the documented JSON layout and validate the model.
    pub fn from_json(text: &str) -> Result<Self>
    where
        T: serde::de::DeserializeOwned,
    {
        #[derive(Deserialize)]
        struct Doc<T> {
            #[allow(dead_code)]
            #[serde(default)]
            schema: Option<String>,
            #[serde(flatten)]
            model: LatticeModel<T>,
        }
        let doc: Doc<T> = serde_json::from_str(text)?;
        doc.model.validate()?;
        Ok(doc.model)
    }
}
