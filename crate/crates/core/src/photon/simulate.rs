//! Exact stochastic simulation of the emitter rate model.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::photon::{EmitterModel, PhotonStream};
use crate::rng::stream_rng;

#[derive(Clone, Copy, PartialEq)]
enum State {
    Ground,
    Excited,
    Shelved,
}

fn exp_wait(rng: &mut ChaCha8Rng, rate_per_ns: f64) -> f64 {
    // Inverse CDF on (0, 1]; rng.random() is in [0, 1).
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate_per_ns
}

/// Continuous-wave excitation: direct-method stochastic simulation of the
/// two/three-level system, recording a timestamp at every radiative decay.
///
/// Pump rate is `pump_rate_at_psat · P/P_sat`; all draws come from a single
/// generator derived from `seed`, so equal seeds give identical streams.
pub fn simulate_cw(
    model: &EmitterModel,
    power_mw: f64,
    duration_s: f64,
    seed: u64,
) -> Result<PhotonStream> {
    model.validate()?;
    if power_mw < 0.0 {
        return Err(Error::domain("power must be non-negative"));
    }
    if !(duration_s > 0.0) {
        return Err(Error::domain("duration must be positive"));
    }

    let pump = model.pump_rate_per_ns(power_mw);
    let gamma_rad = model.gamma_rad_per_ns;
    let gamma_tot = model.total_decay_per_ns();
    let (k_isc, k_reset) = model
        .shelving
        .map(|s| (s.k_isc_per_ns, s.k_reset_per_ns))
        .unwrap_or((0.0, 0.0));

    let mut rng = stream_rng(seed, 0);
    let horizon_ns = duration_s * 1e9;
    let mut t_ns = 0.0f64;
    let mut state = State::Ground;
    let mut timestamps = Vec::new();
    let mut last_ps = -1i64;

    if pump > 0.0 {
        loop {
            let rate = match state {
                State::Ground => pump,
                State::Excited => gamma_tot + k_isc,
                State::Shelved => k_reset,
            };
            t_ns += exp_wait(&mut rng, rate);
            if t_ns > horizon_ns {
                break;
            }
            state = match state {
                State::Ground => State::Excited,
                State::Excited => {
                    let u: f64 = rng.random::<f64>() * (gamma_tot + k_isc);
                    if u < gamma_rad {
                        // Radiative decay: emit a photon.
                        let mut ts = (t_ns * 1e3).round() as i64;
                        if ts <= last_ps {
                            ts = last_ps + 1;
                        }
                        last_ps = ts;
                        timestamps.push(ts);
                        State::Ground
                    } else if u < gamma_tot {
                        State::Ground
                    } else {
                        State::Shelved
                    }
                }
                State::Shelved => State::Ground,
            };
        }
    }

    PhotonStream::new(timestamps, 0, duration_s, seed)
}

/// Homogeneous Poisson photon stream at a fixed rate; the coherent-light
/// reference for correlation and blinking estimators.
pub fn poisson_stream(rate_cps: f64, duration_s: f64, seed: u64) -> Result<PhotonStream> {
    if !(rate_cps > 0.0) || !(duration_s > 0.0) {
        return Err(Error::domain("rate and duration must be positive"));
    }
    let mut rng = stream_rng(seed, 0);
    let rate_per_ns = rate_cps * 1e-9;
    let horizon_ns = duration_s * 1e9;
    let mut t_ns = 0.0f64;
    let mut timestamps = Vec::new();
    let mut last_ps = -1i64;
    loop {
        t_ns += exp_wait(&mut rng, rate_per_ns);
        if t_ns > horizon_ns {
            break;
        }
        let mut ts = (t_ns * 1e3).round() as i64;
        if ts <= last_ps {
            ts = last_ps + 1;
        }
        last_ps = ts;
        timestamps.push(ts);
    }
    PhotonStream::new(timestamps, 0, duration_s, seed)
}

/// Settings for [`simulate_pulsed`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulsedConfig {
    /// Laser repetition rate (MHz).
    pub rep_rate_mhz: f64,
    /// Gaussian instrument-response sigma (ps); 0 for an ideal detector.
    pub irf_sigma_ps: f64,
    /// Total acquisition time (s).
    pub duration_s: f64,
    /// Histogram bin width (ps).
    pub binwidth_ps: f64,
    /// Probability that a pulse leaves the emitter excited.
    pub excitation_prob: f64,
}

impl Default for PulsedConfig {
    fn default() -> Self {
        PulsedConfig {
            rep_rate_mhz: 80.0,
            irf_sigma_ps: 30.0,
            duration_s: 1e-2,
            binwidth_ps: 16.0,
            excitation_prob: 1.0,
        }
    }
}

/// Histogram of photon delays after the excitation pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayHistogram {
    /// Bin centers (ns).
    pub t_ns: Vec<f64>,
    /// Photon counts per bin.
    pub counts: Vec<u64>,
    pub binwidth_ns: f64,
    pub n_pulses: u64,
    pub irf_sigma_ns: f64,
    /// Repetition period (ns); delays are folded into one period.
    pub period_ns: f64,
    /// Set when the repetition period is shorter than several lifetimes.
    pub warning: Option<String>,
}

/// Pulsed excitation: per-pulse exponential decay sampling with Gaussian
/// IRF jitter, folded into the repetition period.
pub fn simulate_pulsed(
    model: &EmitterModel,
    config: &PulsedConfig,
    seed: u64,
) -> Result<DecayHistogram> {
    model.validate()?;
    if !(config.rep_rate_mhz > 0.0) || !(config.duration_s > 0.0) || !(config.binwidth_ps > 0.0) {
        return Err(Error::domain(
            "repetition rate, duration and bin width must be positive",
        ));
    }
    if config.irf_sigma_ps < 0.0 {
        return Err(Error::domain("IRF sigma must be non-negative"));
    }
    if !(0.0..=1.0).contains(&config.excitation_prob) {
        return Err(Error::domain("excitation probability must lie in [0, 1]"));
    }

    let period_ns = 1e3 / config.rep_rate_mhz;
    let lifetime_ns = model.total_lifetime_ns();
    let warning = if period_ns < 3.0 * lifetime_ns {
        Some(format!(
            "repetition period {period_ns:.2} ns is below 3 lifetimes ({:.2} ns); decays pile up",
            lifetime_ns
        ))
    } else {
        None
    };

    // An integer number of bins tiles the period exactly, so folded delays
    // never land in a partial bin; the requested width is adjusted by at
    // most half a bin.
    let n_bins = (period_ns / (config.binwidth_ps * 1e-3)).round().max(2.0) as usize;
    let binwidth_ns = period_ns / n_bins as f64;
    let mut counts = vec![0u64; n_bins];
    let n_pulses = (config.duration_s * 1e9 / period_ns).floor() as u64;
    let gamma_tot = model.total_decay_per_ns();
    let qy = model.internal_quantum_yield();
    let sigma_ns = config.irf_sigma_ps * 1e-3;
    let normal = if sigma_ns > 0.0 {
        Some(Normal::new(0.0, sigma_ns).expect("positive sigma"))
    } else {
        None
    };

    let mut rng = stream_rng(seed, 0);
    for _ in 0..n_pulses {
        if config.excitation_prob < 1.0 && rng.random::<f64>() >= config.excitation_prob {
            continue;
        }
        let decay_ns = exp_wait(&mut rng, gamma_tot);
        // Radiative branch?
        if qy < 1.0 && rng.random::<f64>() >= qy {
            continue;
        }
        let mut delay = decay_ns;
        if let Some(n) = &normal {
            delay += n.sample(&mut rng);
        }
        // Fold into one repetition period.
        let folded = delay.rem_euclid(period_ns);
        let bin = ((folded / binwidth_ns) as usize).min(n_bins - 1);
        counts[bin] += 1;
    }

    let t_ns = (0..n_bins)
        .map(|i| (i as f64 + 0.5) * binwidth_ns)
        .collect();
    Ok(DecayHistogram {
        t_ns,
        counts,
        binwidth_ns,
        n_pulses,
        irf_sigma_ns: sigma_ns,
        period_ns,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn il1_like() -> EmitterModel {
        // 2.4 ns total lifetime, 79% internal quantum yield.
        EmitterModel::two_level(0.3289, 0.0877, 3.6).unwrap()
    }

    #[test]
    fn cw_rate_at_saturation_is_half_gamma_rad() {
        let m = il1_like();
        let s = simulate_cw(&m, m.psat_mw, 2e-3, 11).unwrap();
        let expected_cps = 0.5 * m.gamma_rad_per_ns * 1e9;
        let rel = (s.mean_rate_cps() - expected_cps).abs() / expected_cps;
        assert!(rel < 0.01, "relative deviation {rel}");
    }

    #[test]
    fn cw_rate_follows_saturation_law() {
        let m = il1_like();
        for (i, frac) in [0.25, 1.0, 4.0].into_iter().enumerate() {
            let p = frac * m.psat_mw;
            let s = simulate_cw(&m, p, 2e-3, 100 + i as u64).unwrap();
            let expected = m.gamma_rad_per_ns * 1e9 * p / (p + m.psat_mw);
            let rel = (s.mean_rate_cps() - expected).abs() / expected;
            assert!(rel < 0.02, "P/Psat={frac}: relative deviation {rel}");
        }
    }

    #[test]
    fn cw_zero_power_gives_empty_stream() {
        let m = il1_like();
        let s = simulate_cw(&m, 0.0, 1e-3, 5).unwrap();
        assert!(s.is_empty());
    }

    #[test]
    fn cw_deterministic_for_fixed_seed() {
        let m = il1_like();
        let a = simulate_cw(&m, 3.6, 1e-4, 42).unwrap();
        let b = simulate_cw(&m, 3.6, 1e-4, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_cw(&m, 3.6, 1e-4, 43).unwrap();
        assert_ne!(a.timestamps_ps(), c.timestamps_ps());
    }

    #[test]
    fn pulsed_tail_slope_recovers_lifetime() {
        let m = il1_like();
        let cfg = PulsedConfig {
            duration_s: 2e-2,
            ..PulsedConfig::default()
        };
        let h = simulate_pulsed(&m, &cfg, 3).unwrap();
        assert!(h.warning.is_none());
        // Log-linear regression on the decay tail, away from the IRF edge.
        let (xs, ys): (Vec<f64>, Vec<f64>) = h
            .t_ns
            .iter()
            .zip(&h.counts)
            .filter(|(t, c)| **t > 0.5 && **t < 11.0 && **c > 20)
            .map(|(t, c)| (*t, (*c as f64).ln()))
            .unzip();
        let (_, slope) = vibronix_testkit::ols(&xs, &ys);
        let tau = -1.0 / slope;
        let rel = (tau - 2.4).abs() / 2.4;
        assert!(rel < 0.02, "tau = {tau}");
    }

    #[test]
    fn pulsed_zero_irf_pure_exponential() {
        let m = il1_like();
        let cfg = PulsedConfig {
            irf_sigma_ps: 0.0,
            duration_s: 5e-3,
            ..PulsedConfig::default()
        };
        let h = simulate_pulsed(&m, &cfg, 9).unwrap();
        // Pure exponential: counts fall by e^(-Δt/τ) between the first two
        // 100-bin blocks (1.6 ns at τ = 2.4 ns), and the global maximum sits
        // near the origin.
        let first: u64 = h.counts[..100].iter().sum();
        let second: u64 = h.counts[100..200].iter().sum();
        let ratio = first as f64 / second as f64;
        let expect = (100.0 * h.binwidth_ns / 2.4f64).exp();
        assert!((ratio - expect).abs() / expect < 0.1, "ratio {ratio} vs {expect}");
        let max_bin = h.counts.iter().enumerate().max_by_key(|(_, c)| **c).unwrap().0;
        assert!(max_bin < 50, "max bin at {max_bin}");
    }

    #[test]
    fn pulsed_reproducible_and_warns_on_short_period() {
        let m = il1_like();
        let cfg = PulsedConfig {
            duration_s: 1e-3,
            ..PulsedConfig::default()
        };
        let a = simulate_pulsed(&m, &cfg, 21).unwrap();
        let b = simulate_pulsed(&m, &cfg, 21).unwrap();
        assert_eq!(a, b);

        let fast = PulsedConfig {
            rep_rate_mhz: 400.0,
            duration_s: 1e-4,
            ..PulsedConfig::default()
        };
        let h = simulate_pulsed(&m, &fast, 21).unwrap();
        assert!(h.warning.is_some());
    }

    #[test]
    fn poisson_stream_rate() {
        let s = poisson_stream(1e7, 1e-2, 17).unwrap();
        let rel = (s.mean_rate_cps() - 1e7).abs() / 1e7;
        assert!(rel < 0.02, "rate deviation {rel}");
    }
}
