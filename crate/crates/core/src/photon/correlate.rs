//! Hanbury Brown–Twiss correlation: beamsplitter plus coincidence histogram.

use rand::Rng;

use crate::error::{Error, Result};
use crate::photon::PhotonStream;
use crate::rng::stream_rng;

/// Second-order correlation histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct G2Histogram {
    /// Bin centers τ (ns), symmetric around zero.
    pub tau_ns: Vec<f64>,
    /// Raw cross-channel coincidences per bin.
    pub coincidences: Vec<u64>,
    /// g²(τ): coincidences normalized by rate₁·rate₂·binwidth·duration.
    pub normalized: Vec<f64>,
    pub binwidth_ns: f64,
    /// Photon counts routed to each detector.
    pub channel_counts: (usize, usize),
}

impl G2Histogram {
    /// Normalized value of the τ = 0 bin.
    pub fn g2_zero(&self) -> f64 {
        self.normalized[self.normalized.len() / 2]
    }

    /// Index offset K such that bins run τ = -K..=K times binwidth.
    pub fn half_bins(&self) -> usize {
        self.normalized.len() / 2
    }
}

/// Split a stream 50/50 on a simulated beamsplitter (per-photon Bernoulli
/// routing with its own seed) and histogram cross-channel delays
/// `τ = t₂ − t₁` within ±`window_ns`.
///
/// Normalization divides by `rate₁·rate₂·Δτ·T`, the coincidence rate of two
/// independent Poisson streams, so an uncorrelated source gives g² = 1.
pub fn hbt_correlate(
    stream: &PhotonStream,
    splitter_seed: u64,
    binwidth_ns: f64,
    window_ns: f64,
) -> Result<G2Histogram> {
    if stream.is_empty() {
        return Err(Error::domain("cannot correlate an empty stream"));
    }
    if !(binwidth_ns > 0.0) {
        return Err(Error::domain("bin width must be positive"));
    }
    if window_ns <= binwidth_ns {
        return Err(Error::domain("window must exceed the bin width"));
    }

    let mut rng = stream_rng(splitter_seed, 1);
    let mut ch1: Vec<i64> = Vec::new();
    let mut ch2: Vec<i64> = Vec::new();
    for &t in stream.timestamps_ps() {
        if rng.random::<bool>() {
            ch1.push(t);
        } else {
            ch2.push(t);
        }
    }
    if ch1.is_empty() || ch2.is_empty() {
        return Err(Error::domain("a beamsplitter output received no photons"));
    }

    let half_bins = (window_ns / binwidth_ns).floor() as i64;
    let n_bins = (2 * half_bins + 1) as usize;
    let mut coincidences = vec![0u64; n_bins];
    let binwidth_ps = binwidth_ns * 1e3;
    let window_ps = (half_bins as f64 + 0.5) * binwidth_ps;

    // Two-pointer sweep: for each start photon, visit stop photons inside
    // the correlation window.
    let mut lo = 0usize;
    for &t1 in &ch1 {
        while lo < ch2.len() && ((ch2[lo] - t1) as f64) < -window_ps {
            lo += 1;
        }
        let mut j = lo;
        while j < ch2.len() && (ch2[j] - t1) as f64 <= window_ps {
            let tau_ps = (ch2[j] - t1) as f64;
            let idx = (tau_ps / binwidth_ps).round() as i64 + half_bins;
            if (0..n_bins as i64).contains(&idx) {
                coincidences[idx as usize] += 1;
            }
            j += 1;
        }
    }

    let duration_s = stream.duration_s;
    let r1 = ch1.len() as f64 / duration_s;
    let r2 = ch2.len() as f64 / duration_s;
    let expected_per_bin = r1 * r2 * (binwidth_ns * 1e-9) * duration_s;
    let normalized = coincidences
        .iter()
        .map(|&c| c as f64 / expected_per_bin)
        .collect();
    let tau_ns = (-half_bins..=half_bins)
        .map(|k| k as f64 * binwidth_ns)
        .collect();

    Ok(G2Histogram {
        tau_ns,
        coincidences,
        normalized,
        binwidth_ns,
        channel_counts: (ch1.len(), ch2.len()),
    })
}
