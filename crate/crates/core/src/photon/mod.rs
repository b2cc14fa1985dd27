//! Photon-stream simulation and estimation for a two/three-level emitter.
//!
//! [`simulate::simulate_cw`] runs an exact stochastic simulation of the rate
//! model (pump `r = γ_tot · P/P_sat`, radiative and non-radiative decay,
//! optional shelving) and records photon arrival times; the estimators in
//! [`correlate`], [`fit`] and [`blinking`] reduce streams and histograms to
//! the quantities of interest: g²(τ), saturation parameters, excited-state
//! lifetime through an instrument response, polarization visibility,
//! blinking flags, and quantum yield.
//!
//! Timestamps are integer picoseconds; estimators work in `f64`. Every
//! stochastic entry point takes an explicit seed and is bit-reproducible.

pub mod blinking;
pub mod correlate;
pub mod fit;
pub mod io;
pub mod simulate;

pub use blinking::{detect_blinking, BlinkingReport};
pub use correlate::{hbt_correlate, G2Histogram};
pub use fit::{
    fit_g2, fit_lifetime, fit_polarization, fit_saturation, quantum_yield, BackgroundModel,
    G2Fit, IrfModel, LifetimeFit, PolarizationFit, QuantumYield, SaturationFit,
};
pub use simulate::{poisson_stream, simulate_cw, simulate_pulsed, DecayHistogram, PulsedConfig};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optional shelving (dark-state) channel of the emitter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Shelving {
    /// Intersystem-crossing rate out of the excited state (1/ns).
    pub k_isc_per_ns: f64,
    /// Recovery rate from the shelf back to the ground state (1/ns).
    pub k_reset_per_ns: f64,
}

/// Rate model of the emitter.
///
/// `P_sat` is defined as the power at which the pump rate equals the total
/// decay rate, which makes the detected rate follow `I∞·P/(P_sat + P)`
/// exactly in the two-level model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmitterModel {
    /// Radiative decay rate (1/ns).
    pub gamma_rad_per_ns: f64,
    /// Non-radiative decay rate (1/ns).
    pub gamma_nr_per_ns: f64,
    /// Pump rate at `P = P_sat` (1/ns); defaults to the total decay rate.
    pub pump_rate_at_psat_per_ns: f64,
    /// Saturation power (mW).
    pub psat_mw: f64,
    /// Optional shelving channel; absent for a two-level emitter.
    pub shelving: Option<Shelving>,
}

impl EmitterModel {
    /// Two-level emitter with the canonical pump-rate mapping.
    pub fn two_level(gamma_rad_per_ns: f64, gamma_nr_per_ns: f64, psat_mw: f64) -> Result<Self> {
        let model = EmitterModel {
            gamma_rad_per_ns,
            gamma_nr_per_ns,
            pump_rate_at_psat_per_ns: gamma_rad_per_ns + gamma_nr_per_ns,
            psat_mw,
            shelving: None,
        };
        model.validate()?;
        Ok(model)
    }

    /// Add a shelving channel (three-level emitter).
    pub fn with_shelving(mut self, k_isc_per_ns: f64, k_reset_per_ns: f64) -> Result<Self> {
        if !(k_isc_per_ns > 0.0) || !(k_reset_per_ns > 0.0) {
            return Err(Error::domain("shelving rates must be positive"));
        }
        self.shelving = Some(Shelving {
            k_isc_per_ns,
            k_reset_per_ns,
        });
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.gamma_rad_per_ns < 0.0 || self.gamma_nr_per_ns < 0.0 {
            return Err(Error::domain("decay rates must be non-negative"));
        }
        if !(self.total_decay_per_ns() > 0.0) {
            return Err(Error::domain("total decay rate must be positive"));
        }
        if !(self.psat_mw > 0.0) {
            return Err(Error::domain("saturation power must be positive"));
        }
        if self.pump_rate_at_psat_per_ns < 0.0 {
            return Err(Error::domain("pump rate must be non-negative"));
        }
        if let Some(s) = &self.shelving {
            if !(s.k_isc_per_ns > 0.0) || !(s.k_reset_per_ns > 0.0) {
                return Err(Error::domain("shelving rates must be positive"));
            }
        }
        Ok(())
    }

    /// Total decay rate γ_rad + γ_nr (1/ns).
    pub fn total_decay_per_ns(&self) -> f64 {
        self.gamma_rad_per_ns + self.gamma_nr_per_ns
    }

    /// Excited-state lifetime 1/(γ_rad + γ_nr) in ns.
    pub fn total_lifetime_ns(&self) -> f64 {
        1.0 / self.total_decay_per_ns()
    }

    /// Internal quantum yield γ_rad/(γ_rad + γ_nr).
    pub fn internal_quantum_yield(&self) -> f64 {
        self.gamma_rad_per_ns / self.total_decay_per_ns()
    }

    /// Pump rate at the given power (1/ns).
    pub fn pump_rate_per_ns(&self, power_mw: f64) -> f64 {
        self.pump_rate_at_psat_per_ns * power_mw / self.psat_mw
    }
}

/// Timestamped detection events from one detector channel.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonStream {
    timestamps_ps: Vec<i64>,
    /// Detector id.
    pub channel: u32,
    /// Total acquisition time (s).
    pub duration_s: f64,
    /// RNG seed the stream was generated with (0 for imported data).
    pub seed: u64,
}

impl PhotonStream {
    /// Build a stream, enforcing strictly increasing non-negative timestamps
    /// within the acquisition window.
    pub fn new(timestamps_ps: Vec<i64>, channel: u32, duration_s: f64, seed: u64) -> Result<Self> {
        if !(duration_s > 0.0) {
            return Err(Error::domain("duration must be positive"));
        }
        let limit = (duration_s * 1e12).ceil() as i64;
        let mut prev = -1i64;
        for &t in &timestamps_ps {
            if t < 0 || t > limit {
                return Err(Error::domain(format!(
                    "timestamp {t} ps outside acquisition window"
                )));
            }
            if t <= prev {
                return Err(Error::domain("timestamps must be strictly increasing"));
            }
            prev = t;
        }
        Ok(PhotonStream {
            timestamps_ps,
            channel,
            duration_s,
            seed,
        })
    }

    pub fn timestamps_ps(&self) -> &[i64] {
        &self.timestamps_ps
    }

    pub fn len(&self) -> usize {
        self.timestamps_ps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps_ps.is_empty()
    }

    /// Mean detected rate in counts per second.
    pub fn mean_rate_cps(&self) -> f64 {
        self.timestamps_ps.len() as f64 / self.duration_s
    }
}
