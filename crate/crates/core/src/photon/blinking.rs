//! Intensity-stability analysis: Poisson deviation and bimodality tests on
//! binned count traces.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::photon::PhotonStream;
use crate::rng::stream_rng;

/// Any bin deviating from the Poisson expectation by more than this many
/// sigmas flags the trace.
pub const POISSON_SIGMA_THRESHOLD: f64 = 5.0;
/// Bimodality is flagged when the bootstrap p-value of the dip statistic
/// falls below this threshold.
pub const DIP_P_THRESHOLD: f64 = 0.01;
/// Bootstrap resamples used to calibrate the dip statistic against the
/// uniform null.
const DIP_BOOTSTRAP: usize = 200;
/// Count traces longer than this are thinned to this many order statistics
/// before the dip computation (applied to the null samples as well).
const DIP_MAX_SAMPLES: usize = 500;

/// Per-bin-size statistics of the intensity trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BinStats {
    pub bin_ms: f64,
    pub n_bins: usize,
    pub mean_counts: f64,
    /// Largest |z| of any bin against Poisson(mean).
    pub max_abs_z: f64,
    pub poisson_deviation: bool,
    /// Dip statistic of the count distribution.
    pub dip_statistic: f64,
    /// Bootstrap p-value of the dip against a unimodal (uniform) null.
    pub dip_p_value: f64,
    pub bimodal: bool,
}

/// Verdict of [`detect_blinking`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlinkingReport {
    /// True when any bin size shows a Poisson deviation or bimodality.
    pub flagged: bool,
    pub per_bin: Vec<BinStats>,
}

/// Test a photon stream for blinking at each requested bin size.
///
/// Two criteria per bin size: (a) any bin deviating from the global Poisson
/// expectation by more than 5σ, and (b) a bimodal count distribution,
/// detected by the dip statistic with a bootstrap p-value below 0.01. The
/// dip here is the unimodality gap of the empirical CDF against its best
/// convex/concave (GCM/LCM) envelope over an exhaustive mode search; the
/// p-value is calibrated by resampling the same statistic under a uniform
/// null, which makes the threshold self-consistent.
pub fn detect_blinking(stream: &PhotonStream, bin_sizes_ms: &[f64]) -> Result<BlinkingReport> {
    if bin_sizes_ms.is_empty() {
        return Err(Error::domain("at least one bin size is required"));
    }
    let duration_ms = stream.duration_s * 1e3;
    let largest = bin_sizes_ms.iter().cloned().fold(0.0f64, f64::max);
    if !(largest > 0.0) {
        return Err(Error::domain("bin sizes must be positive"));
    }
    if duration_ms < 10.0 * largest {
        return Err(Error::domain(
            "acquisition must cover at least 10 of the largest bins",
        ));
    }

    let mut per_bin = Vec::with_capacity(bin_sizes_ms.len());
    for (k, &bin_ms) in bin_sizes_ms.iter().enumerate() {
        let counts = bin_counts(stream, bin_ms);
        let n = counts.len();
        let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
        let max_abs_z = if mean > 0.0 {
            counts
                .iter()
                .map(|&c| (c as f64 - mean).abs() / mean.sqrt())
                .fold(0.0f64, f64::max)
        } else {
            0.0
        };
        let poisson_deviation = max_abs_z > POISSON_SIGMA_THRESHOLD;

        let sample: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
        let dip_statistic = dip(&thin(&sorted(sample)));
        // Bootstrap the same statistic under the uniform null.
        let mut rng = stream_rng(stream.seed ^ 0x6469_7074, k as u64);
        let m = DIP_MAX_SAMPLES.min(n);
        let mut at_least = 0usize;
        for _ in 0..DIP_BOOTSTRAP {
            let mut null: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
            null.sort_by(|a, b| a.partial_cmp(b).unwrap());
            if dip(&null) >= dip_statistic {
                at_least += 1;
            }
        }
        let dip_p_value = at_least as f64 / DIP_BOOTSTRAP as f64;
        let bimodal = dip_p_value < DIP_P_THRESHOLD;

        per_bin.push(BinStats {
            bin_ms,
            n_bins: n,
            mean_counts: mean,
            max_abs_z,
            poisson_deviation,
            dip_statistic,
            dip_p_value,
            bimodal,
        });
    }

    let flagged = per_bin.iter().any(|b| b.poisson_deviation || b.bimodal);
    Ok(BlinkingReport { flagged, per_bin })
}

fn bin_counts(stream: &PhotonStream, bin_ms: f64) -> Vec<u64> {
    let bin_ps = bin_ms * 1e9;
    let n = (stream.duration_s * 1e3 / bin_ms).floor() as usize;
    let mut counts = vec![0u64; n];
    for &t in stream.timestamps_ps() {
        let idx = (t as f64 / bin_ps) as usize;
        if idx < n {
            counts[idx] += 1;
        }
    }
    counts
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Thin a long sorted sample to at most `DIP_MAX_SAMPLES` order statistics.
fn thin(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    if n <= DIP_MAX_SAMPLES {
        return sorted.to_vec();
    }
    (0..DIP_MAX_SAMPLES)
        .map(|i| sorted[i * (n - 1) / (DIP_MAX_SAMPLES - 1)])
        .collect()
}

/// Dip-style unimodality statistic of a sorted sample.
///
/// For every candidate mode position `m`, the empirical CDF is compared to
/// its greatest convex minorant over the prefix ending at `m` and its least
/// concave majorant over the suffix starting at `m`; the statistic is half
/// the smallest achievable sup-deviation. Unimodal samples give O(1/√n)
/// values; a half/half two-cluster sample approaches 1/4.
pub fn dip(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n < 4 {
        return 0.0;
    }

    let dev_left = prefix_gcm_deviation(sorted);
    // The suffix/concave side maps onto the prefix/convex computation under
    // the point reflection (x, F) → (−x, 1 − F): dev_right over the suffix
    // starting at m equals the prefix deviation of the reflected sample
    // ending at n−1−m.
    let reflected: Vec<f64> = sorted.iter().rev().map(|x| -x).collect();
    let dev_right_rev = prefix_gcm_deviation(&reflected);

    let mut best = f64::INFINITY;
    for m in 0..n {
        best = best.min(dev_left[m].max(dev_right_rev[n - 1 - m]));
    }
    0.5 * best
}

/// For each prefix end `m`, the sup-deviation of the empirical CDF points
/// (x_i, (i+1)/n), i ≤ m, above their greatest convex minorant anchored at
/// (x_0, 0).
fn prefix_gcm_deviation(sorted: &[f64]) -> Vec<f64> {
    let n = sorted.len();
    let nf = n as f64;
    let mut dev = vec![0.0f64; n];
    let mut hull: Vec<(f64, f64)> = vec![(sorted[0], 0.0)];
    for m in 0..n {
        let pt = (sorted[m], (m as f64 + 1.0) / nf);
        while hull.len() >= 2 {
            let a = hull[hull.len() - 2];
            let b = hull[hull.len() - 1];
            // Lower (convex) hull: drop b when it lies above segment a→pt.
            if cross(a, b, pt) >= 0.0 {
                break;
            }
            hull.pop();
        }
        hull.push(pt);

        // Merge-walk points 0..=m against the hull segments.
        let mut seg = 0usize;
        let mut worst = 0.0f64;
        for (i, &x) in sorted[..=m].iter().enumerate() {
            let fi = (i as f64 + 1.0) / nf;
            while seg + 1 < hull.len() - 1 && hull[seg + 1].0 <= x {
                seg += 1;
            }
            let h = interp(hull[seg], hull[(seg + 1).min(hull.len() - 1)], x);
            worst = worst.max(fi - h);
        }
        dev[m] = worst;
    }
    dev
}

fn cross(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> f64 {
    (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0)
}

fn interp(a: (f64, f64), b: (f64, f64), x: f64) -> f64 {
    if b.0 - a.0 <= 0.0 {
        // Vertical step from duplicate x values: the minorant takes the
        // lower end.
        return a.1.min(b.1);
    }
    (a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0)).min(b.1.max(a.1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::photon::simulate::{poisson_stream, simulate_cw};
    use crate::photon::EmitterModel;

    #[test]
    fn dip_is_small_for_unimodal_and_large_for_bimodal() {
        // Uniform-ish sample.
        let uni: Vec<f64> = (0..200).map(|i| i as f64 / 200.0).collect();
        let d_uni = dip(&uni);
        assert!(d_uni < 0.02, "uniform dip = {d_uni}");

        // Two tight clusters, half the mass each.
        let mut bi: Vec<f64> = (0..100).map(|i| i as f64 * 1e-4).collect();
        bi.extend((0..100).map(|i| 1.0 + i as f64 * 1e-4));
        let d_bi = dip(&bi);
        assert!(d_bi > 0.2, "bimodal dip = {d_bi}");
    }

    #[test]
    fn stationary_poisson_not_flagged() {
        let s = poisson_stream(2e6, 0.5, 3).unwrap();
        let report = detect_blinking(&s, &[1.0, 10.0]).unwrap();
        assert!(!report.flagged, "{report:?}");
    }

    #[test]
    fn telegraph_stream_flagged_at_10ms_bins() {
        // On/off emitter: 50 ms dwell in each state, bright state 2 Mcps.
        let bright = poisson_stream(2e6, 1.0, 9).unwrap();
        let mut ts = Vec::new();
        for &t in bright.timestamps_ps() {
            let slot = (t as f64 / (50.0 * 1e9)) as u64; // 50 ms slots
            if slot % 2 == 0 {
                ts.push(t);
            }
        }
        let telegraph = PhotonStream::new(ts, 0, 1.0, 9).unwrap();
        let report = detect_blinking(&telegraph, &[10.0]).unwrap();
        assert!(report.flagged, "{report:?}");
        assert!(report.per_bin[0].bimodal || report.per_bin[0].poisson_deviation);
    }

    #[test]
    fn two_level_monte_carlo_not_flagged() {
        let m = EmitterModel::two_level(0.3289, 0.0877, 3.6).unwrap();
        let s = simulate_cw(&m, 3.6, 20e-3, 5).unwrap();
        let report = detect_blinking(&s, &[0.5, 2.0]).unwrap();
        assert!(!report.flagged, "{report:?}");
    }

    #[test]
    fn duration_precondition() {
        let s = poisson_stream(1e6, 0.05, 1).unwrap();
        assert!(detect_blinking(&s, &[10.0]).is_err());
    }
}
