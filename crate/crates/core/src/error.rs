//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the simulation and analysis operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition.
    #[error("domain error: {0}")]
    Domain(String),

    /// Structured parse failure with the 1-based source line.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// Iterative fit exhausted its iteration budget. Carries the best
    /// parameter vector seen so far and its residual norm.
    #[error("fit did not converge after {iterations} iterations (residual norm {residual_norm:.6e})")]
    NonConvergence {
        iterations: usize,
        residual_norm: f64,
        best: Vec<f64>,
    },

    /// The fit converged onto a degenerate solution (collapsed width,
    /// non-positive area, or an unresolvable parameter combination).
    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    /// The data cannot constrain the requested parameters.
    #[error("ill-conditioned problem: {0}")]
    IllConditioned(String),

    /// Peak sequence does not form a vibronic ladder.
    #[error("not a vibronic ladder: {0}")]
    NotALadder(String),

    /// Synthesis grid does not cover all requested peak energies (eV).
    #[error("grid does not cover peak energies {missing_ev:?} eV")]
    GridCoverage { missing_ev: Vec<f64> },

    /// Mutually inconsistent inputs (e.g. quantum yield far above one).
    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    /// Lattice model failed validation.
    #[error("invalid lattice model: {0}")]
    InvalidLattice(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
