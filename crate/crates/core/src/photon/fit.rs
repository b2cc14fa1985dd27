//! Estimators that reduce photon histograms and sweeps to model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{minimize, LmConfig, Problem};
use crate::photon::correlate::G2Histogram;
use crate::photon::simulate::DecayHistogram;

/// Fitted a > threshold marks a bunching (three-level) signature; below it
/// the two-level description is reported.
pub const BUNCHING_THRESHOLD: f64 = 0.05;

/// Result of the g²(τ) model fit
/// `g²(τ) = 1 − (1+a)·e^(−|τ|/τ₁) + a·e^(−|τ|/τ₂)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct G2Fit {
    /// Measured (not fitted) normalized value of the τ=0 bin.
    pub g2_zero: f64,
    /// Antibunching time τ₁ (ns); 1/(r + γ) for the two-level model.
    pub antibunching_time_ns: f64,
    /// Bunching amplitude a.
    pub bunching_amplitude: f64,
    /// Bunching time τ₂ (ns); meaningful only when a is resolved.
    pub bunching_time_ns: f64,
    /// True when the fitted bunching amplitude stays below the threshold.
    pub two_level: bool,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Least-squares fit of the two-timescale correlation model to a histogram.
pub fn fit_g2(hist: &G2Histogram) -> Result<G2Fit> {
    let n = hist.normalized.len();
    if n < 9 {
        return Err(Error::domain(
            "histogram too short to cover dip and plateau",
        ));
    }
    let taus = &hist.tau_ns;
    let ys = &hist.normalized;

    // Initial guesses from the histogram shape.
    let quarter = n / 4;
    let plateau = (ys[..quarter].iter().sum::<f64>() + ys[n - quarter..].iter().sum::<f64>())
        / (2 * quarter) as f64;
    let dip_min = ys.iter().cloned().fold(f64::INFINITY, f64::min);
    let below = ys
        .iter()
        .filter(|&&g| g < 0.5 * (plateau + dip_min))
        .count()
        .max(1);
    let tau1_0 = (below as f64 * hist.binwidth_ns / 2.0).max(hist.binwidth_ns);
    let max_g = ys.iter().cloned().fold(0.0f64, f64::max);
    let a0 = (max_g - plateau).clamp(0.02, 5.0);
    let tau2_0 = (10.0 * tau1_0).max(4.0 * hist.binwidth_ns);

    // Two safeguards on top of the raw model. The bunching timescale is
    // parameterized as τ₂ = τ₁·(3 + e^u) so it stays at least 3× slower
    // than the antibunching one; without the floor a second decay at
    // τ₂ ≈ τ₁ can shadow the dip and the amplitude loses its meaning on
    // bunching-free data. A free plateau scale c absorbs the finite-data
    // wobble of the rate normalization (fractions of a percent, but enough
    // to distort a when the model pins the asymptote to exactly 1).
    const TAU_RATIO_FLOOR: f64 = 3.0;
    let u0 = (tau2_0 / tau1_0 - TAU_RATIO_FLOOR).max(0.5).ln();
    // Histogram values are averages over their bins; the |τ| cusp at zero
    // makes the bin average differ from the center value there, so the
    // model is bin-averaged in closed form.
    let half = hist.binwidth_ns / 2.0;
    let model = |p: &[f64], tau: f64| -> f64 {
        let (c, a, t1) = (p[0], p[1], p[2].abs().max(1e-12));
        let t2 = t1 * (TAU_RATIO_FLOOR + p[3].exp());
        c * (1.0 - (1.0 + a) * avg_abs_exp(tau, half, t1) + a * avg_abs_exp(tau, half, t2))
    };
    let problem = Problem::new(n, |p: &[f64], out: &mut [f64]| {
        for (i, (tau, y)) in taus.iter().zip(ys).enumerate() {
            out[i] = model(p, *tau) - y;
        }
    });
    let report = minimize(&problem, &[plateau, a0, tau1_0, u0], &LmConfig::default())?;
    let a = report.params[1];
    let tau1 = report.params[2].abs();
    let tau2 = tau1 * (TAU_RATIO_FLOOR + report.params[3].exp());
    Ok(G2Fit {
        g2_zero: hist.g2_zero(),
        antibunching_time_ns: tau1,
        bunching_amplitude: a,
        bunching_time_ns: tau2,
        two_level: a < BUNCHING_THRESHOLD,
        iterations: report.iterations,
        residual_norm: report.residual_norm,
    })
}

/// Average of `e^(−|t|/T)` over the bin `[center − half, center + half]`.
fn avg_abs_exp(center: f64, half: f64, t_scale: f64) -> f64 {
    let (lo, hi) = (center - half, center + half);
    let width = hi - lo;
    let t = t_scale;
    if lo >= 0.0 {
        t * ((-lo / t).exp() - (-hi / t).exp()) / width
    } else if hi <= 0.0 {
        t * ((hi / t).exp() - (lo / t).exp()) / width
    } else {
        t * (2.0 - (lo / t).exp() - (-hi / t).exp()) / width
    }
}

/// Background treatment in the saturation fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundModel {
    None,
    Linear,
}

/// Result of the saturation-curve fit `I(P) = I∞·P/(P_sat + P) [+ bg·P]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaturationFit {
    pub i_inf_cps: f64,
    pub psat_mw: f64,
    /// Linear background slope (cps/mW) when fitted.
    pub bg_slope: Option<f64>,
    pub sigma_i_inf: f64,
    pub sigma_psat: f64,
    pub sigma_bg: Option<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

impl SaturationFit {
    /// Model evaluated at `power_mw`, including the background term.
    pub fn model(&self, power_mw: f64) -> f64 {
        self.i_inf_cps * power_mw / (self.psat_mw + power_mw)
            + self.bg_slope.unwrap_or(0.0) * power_mw
    }
}

/// Fit the saturation law to `(power mW, rate cps)` points.
pub fn fit_saturation(points: &[(f64, f64)], background: BackgroundModel) -> Result<SaturationFit> {
    let n_par = match background {
        BackgroundModel::None => 2,
        BackgroundModel::Linear => 3,
    };
    if points.len() < 4 || points.len() < n_par + 1 {
        return Err(Error::domain("need at least 4 saturation points"));
    }
    if points.iter().any(|(p, y)| *p < 0.0 || !y.is_finite()) {
        return Err(Error::domain("powers must be non-negative and rates finite"));
    }

    let max_p = points.iter().map(|(p, _)| *p).fold(0.0f64, f64::max);
    let max_y = points.iter().map(|(_, y)| *y).fold(0.0f64, f64::max);
    if !(max_p > 0.0) || !(max_y > 0.0) {
        return Err(Error::domain("saturation data are degenerate"));
    }
    let mut powers: Vec<f64> = points.iter().map(|(p, _)| *p).collect();
    powers.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let psat0 = powers[powers.len() / 2].max(1e-6 * max_p);
    let i0 = max_y * (psat0 + max_p) / max_p;

    let residual = |p: &[f64], out: &mut [f64]| {
        let i_inf = p[0];
        let psat = p[1].abs().max(1e-12);
        let bg = if p.len() > 2 { p[2] } else { 0.0 };
        for (i, (pw, y)) in points.iter().enumerate() {
            out[i] = i_inf * pw / (psat + pw) + bg * pw - y;
        }
    };
    let problem = Problem::new(points.len(), residual);
    let mut x0 = vec![i0, psat0];
    if n_par == 3 {
        x0.push(0.0);
    }
    let report = minimize(&problem, &x0, &LmConfig::default())?;

    let psat = report.params[1].abs();
    let corr = report.correlation(0, 1);
    let ill = psat > 3.0 * max_p
        || match corr {
            Some(c) => c.abs() > 0.999,
            None => true,
        };
    if ill {
        return Err(Error::IllConditioned(
            "saturation power is not constrained by the data; points lie in the linear regime"
                .into(),
        ));
    }

    let sig = report.uncertainties.as_ref();
    Ok(SaturationFit {
        i_inf_cps: report.params[0],
        psat_mw: psat,
        bg_slope: (n_par == 3).then(|| report.params[2]),
        sigma_i_inf: sig.map_or(f64::NAN, |s| s[0]),
        sigma_psat: sig.map_or(f64::NAN, |s| s[1]),
        sigma_bg: (n_par == 3).then(|| sig.map_or(f64::NAN, |s| s[2])),
        iterations: report.iterations,
        residual_norm: report.residual_norm,
    })
}

/// Instrument response used by [`fit_lifetime`].
#[derive(Debug, Clone, PartialEq)]
pub enum IrfModel {
    /// Ideal detector.
    Delta,
    /// Gaussian blur of the given sigma (ns).
    Gaussian { sigma_ns: f64 },
    /// Measured kernel sampled on the histogram bin grid, centered on the
    /// middle element (odd length required). Normalized internally.
    Measured { kernel: Vec<f64> },
}

/// Result of the double-exponential ⊛ IRF lifetime fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LifetimeFit {
    pub tau1_ns: f64,
    pub tau2_ns: f64,
    pub amplitude1: f64,
    pub amplitude2: f64,
    pub background: f64,
    pub t0_ns: f64,
    /// Component carrying the larger integrated intensity A·τ.
    pub tau_dominant_ns: f64,
    /// 1σ uncertainty of the dominant lifetime, when the covariance exists.
    pub tau_dominant_err_ns: Option<f64>,
    pub iterations: usize,
    pub residual_norm: f64,
}

/// Fit `bg + Σ_k A_k · (exp decay from t₀, folded over the period) ⊛ IRF`
/// to a pulsed decay histogram.
pub fn fit_lifetime(hist: &DecayHistogram, irf: &IrfModel) -> Result<LifetimeFit> {
    let n = hist.counts.len();
    if n < 8 {
        return Err(Error::domain("decay histogram too short"));
    }
    let counts: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    let dt = hist.binwidth_ns;
    let period = hist.period_ns;

    // IRF kernel on the bin grid, offsets in bins relative to the center.
    let kernel: Vec<(i64, f64)> = match irf {
        IrfModel::Delta => vec![(0, 1.0)],
        IrfModel::Gaussian { sigma_ns } => {
            if *sigma_ns < 0.0 {
                return Err(Error::domain("IRF sigma must be non-negative"));
            }
            if *sigma_ns == 0.0 {
                vec![(0, 1.0)]
            } else {
                let reach = ((6.0 * sigma_ns / dt).ceil() as i64).max(1);
                let raw: Vec<(i64, f64)> = (-reach..=reach)
                    .map(|j| {
                        let x = j as f64 * dt / sigma_ns;
                        (j, (-0.5 * x * x).exp())
                    })
                    .collect();
                let total: f64 = raw.iter().map(|(_, w)| w).sum();
                raw.into_iter().map(|(j, w)| (j, w / total)).collect()
            }
        }
        IrfModel::Measured { kernel } => {
            if kernel.is_empty() || kernel.len() % 2 == 0 {
                return Err(Error::domain("measured IRF kernel must have odd length"));
            }
            let total: f64 = kernel.iter().sum();
            if !(total > 0.0) {
                return Err(Error::domain("measured IRF kernel must have positive mass"));
            }
            let mid = (kernel.len() / 2) as i64;
            kernel
                .iter()
                .enumerate()
                .map(|(i, w)| (i as i64 - mid, w / total))
                .collect()
        }
    };

    // Initial guesses: rising-edge position, tail slope.
    let peak_idx = counts
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(i, _)| i)
        .unwrap_or(0);
    let t_peak = hist.t_ns[peak_idx];
    // t0 estimate: the steepest circular rise marks the excitation edge.
    let steepest = (0..n)
        .max_by(|&i, &j| {
            let di = counts[(i + 1) % n] - counts[i];
            let dj = counts[(j + 1) % n] - counts[j];
            di.partial_cmp(&dj).unwrap()
        })
        .unwrap_or(0);
    let t0_0 = ((steepest as f64 + 1.0) * dt).rem_euclid(period);
    let tail: Vec<(f64, f64)> = hist
        .t_ns
        .iter()
        .zip(&counts)
        .filter(|(t, c)| **t > t_peak + dt && **c > 3.0)
        .map(|(t, c)| (*t, c.ln()))
        .collect();
    let tau1_0 = if tail.len() >= 4 {
        let nn = tail.len() as f64;
        let sx: f64 = tail.iter().map(|(x, _)| x).sum();
        let sy: f64 = tail.iter().map(|(_, y)| y).sum();
        let sxx: f64 = tail.iter().map(|(x, _)| x * x).sum();
        let sxy: f64 = tail.iter().map(|(x, y)| x * y).sum();
        let slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
        if slope < -1e-9 {
            (-1.0 / slope).min(period)
        } else {
            period / 4.0
        }
    } else {
        period / 4.0
    };
    let a1_0 = counts[peak_idx].max(1.0);
    let bg_0 = counts.iter().cloned().fold(f64::INFINITY, f64::min).max(0.0);

    // Pulses repeat every `period`, so the decay seen in one period is the
    // fold of all earlier excitations: a circular sawtooth. The geometric
    // pile-up factor 1/(1 − e^(−P/τ)) is absorbed into the amplitudes.
    let decay = |u: f64, t0: f64, tau: f64| -> f64 {
        let tau = tau.abs().max(1e-9);
        (-(u - t0).rem_euclid(period) / tau).exp()
    };
    // With a single-tap IRF (ideal detector) the excitation time is exactly
    // redundant with the amplitudes, so it is pinned instead of fitted.
    let fit_t0 = kernel.len() > 1;
    let ts = &hist.t_ns;
    let model = |p: &[f64], out: &mut [f64]| {
        let (t0, rest) = if fit_t0 {
            (p[0], &p[1..])
        } else {
            (0.0, p)
        };
        let (a1, tau1, a2, tau2, bg) = (rest[0], rest[1], rest[2], rest[3], rest[4]);
        for (i, t) in ts.iter().enumerate() {
            let mut acc = bg;
            for &(j, w) in &kernel {
                let u = *t - j as f64 * dt;
                acc += w * (a1 * decay(u, t0, tau1) + a2 * decay(u, t0, tau2));
            }
            out[i] = acc - counts[i];
        }
    };

    // Two phases: the circular fold makes the cost landscape in t0 full of
    // flat shelves, so amplitudes and lifetimes are settled first with t0
    // pinned at the edge estimate, then everything is released.
    let x0 = vec![a1_0, tau1_0, a1_0 / 20.0, tau1_0 / 3.0, bg_0];
    let report = if fit_t0 {
        let pinned = Problem::new(n, |p: &[f64], out: &mut [f64]| {
            let mut full = Vec::with_capacity(6);
            full.push(t0_0);
            full.extend_from_slice(p);
            model(&full, out);
        });
        let coarse = minimize(&pinned, &x0, &LmConfig::default())?;
        let mut warm = coarse.params.clone();
        warm.insert(0, t0_0);
        let problem = Problem::new(n, model);
        minimize(&problem, &warm, &LmConfig::default())?
    } else {
        let problem = Problem::new(n, model);
        minimize(&problem, &x0, &LmConfig::default())?
    };

    let (t0_fitted, p) = if fit_t0 {
        (report.params[0], &report.params[1..])
    } else {
        (0.0, &report.params[..])
    };
    let (a1, tau1, a2, tau2) = (p[0], p[1].abs(), p[2], p[3].abs());
    let first_dominant = (a1 * tau1).abs() >= (a2 * tau2).abs();
    let offset = usize::from(fit_t0);
    let (tau_dom, dom_idx) = if first_dominant {
        (tau1, offset + 1)
    } else {
        (tau2, offset + 3)
    };
    let tau_err = report.uncertainties.as_ref().map(|s| s[dom_idx]);

    Ok(LifetimeFit {
        tau1_ns: tau1,
        tau2_ns: tau2,
        amplitude1: a1,
        amplitude2: a2,
        background: p[4],
        t0_ns: t0_fitted,
        tau_dominant_ns: tau_dom,
        tau_dominant_err_ns: tau_err,
        iterations: report.iterations,
        residual_norm: report.residual_norm,
    })
}

/// Result of the `I(θ) = I_off + A·sin²(θ − θ₀)` fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolarizationFit {
    /// Visibility (I_max − I_min)/(I_max + I_min).
    pub visibility: f64,
    /// Dipole angle θ₀ in degrees, folded to [0°, 180°).
    pub theta0_deg: f64,
    pub i_min: f64,
    pub i_max: f64,
    /// Set when the modulation amplitude is not resolved above the noise;
    /// θ₀ is meaningless in that case.
    pub theta_uncertain: bool,
    pub sigma_visibility: f64,
}

/// Fit a sin²-law polarization diagram. The model is linear in the basis
/// (1, cos 2θ, sin 2θ), so the solution is a closed-form least squares.
pub fn fit_polarization(points: &[(f64, f64)]) -> Result<PolarizationFit> {
    if points.len() < 8 {
        return Err(Error::domain("need at least 8 polarization angles"));
    }
    let min_th = points.iter().map(|(t, _)| *t).fold(f64::INFINITY, f64::min);
    let max_th = points.iter().map(|(t, _)| *t).fold(f64::NEG_INFINITY, f64::max);
    if max_th - min_th < 180.0 - 1e-9 {
        return Err(Error::domain("angles must cover at least 180 degrees"));
    }

    // Normal equations for [c0, p, q] over basis [1, cos2θ, sin2θ].
    let mut ata = [[0.0f64; 3]; 3];
    let mut atb = [0.0f64; 3];
    for (theta_deg, y) in points {
        let t2 = 2.0 * theta_deg.to_radians();
        let row = [1.0, t2.cos(), t2.sin()];
        for i in 0..3 {
            atb[i] += row[i] * y;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let sol = solve3(&mut ata, &mut atb)
        .ok_or_else(|| Error::IllConditioned("polarization design matrix is singular".into()))?;
    let (c0, p, q) = (sol[0], sol[1], sol[2]);

    let amplitude = 2.0 * (p * p + q * q).sqrt();
    let i_off = c0 - amplitude / 2.0;
    let i_max = i_off + amplitude;
    let i_min = i_off;
    let visibility = if c0 > 0.0 { amplitude / (2.0 * c0) } else { 0.0 };
    let theta0 = {
        let t = 0.5 * (-q).atan2(-p).to_degrees();
        t.rem_euclid(180.0)
    };

    // Residual scatter and the resulting amplitude uncertainty.
    let ssr: f64 = points
        .iter()
        .map(|(theta_deg, y)| {
            let t2 = 2.0 * theta_deg.to_radians();
            (c0 + p * t2.cos() + q * t2.sin() - y).powi(2)
        })
        .sum();
    let dof = (points.len() - 3).max(1) as f64;
    let s = (ssr / dof).sqrt();
    // Basis functions have RMS ~ 1/sqrt(2) over a uniform angle set.
    let sigma_pq = s * (2.0 / points.len() as f64).sqrt();
    let sigma_amplitude = 2.0 * sigma_pq;
    let sigma_visibility = if c0 > 0.0 { sigma_amplitude / (2.0 * c0) } else { f64::INFINITY };
    let theta_uncertain =
        amplitude <= 3.0 * sigma_amplitude + 1e-9 * c0.abs().max(f64::MIN_POSITIVE);

    Ok(PolarizationFit {
        visibility,
        theta0_deg: theta0,
        i_min,
        i_max,
        theta_uncertain,
        sigma_visibility,
    })
}

fn solve3(a: &mut [[f64; 3]; 3], b: &mut [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[pivot][col].abs() < 1e-30 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in (col + 1)..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let mut sum = b[row];
        for k in (row + 1)..3 {
            sum -= a[row][k] * x[k];
        }
        x[row] = sum / a[row][row];
    }
    Some(x)
}

/// Quantum-yield estimate and its caveats.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuantumYield {
    /// Estimate clamped to the physical range [0, 1].
    pub value: f64,
    /// Raw value of the formula before clamping.
    pub raw_value: f64,
    pub clamped: bool,
    /// Model caveat carried into reports.
    pub note: String,
}

/// Two-level CW quantum-yield estimate `QY = (I∞/η) · τ_total`.
///
/// At saturation the emitted rate approaches γ_rad, so the detected
/// asymptote divided by the setup efficiency estimates γ_rad, and
/// `QY = γ_rad·τ_total`. Population or collection corrections beyond the
/// two-level picture are deliberately not applied; values in (1, 1.05] are
/// clamped to 1 with a flag, and larger values are rejected as inconsistent.
pub fn quantum_yield(
    i_inf_detected_cps: f64,
    setup_efficiency: f64,
    total_lifetime_ns: f64,
) -> Result<QuantumYield> {
    if !(i_inf_detected_cps > 0.0) || !(total_lifetime_ns > 0.0) {
        return Err(Error::domain("rate and lifetime must be positive"));
    }
    if !(setup_efficiency > 0.0) || setup_efficiency > 1.0 {
        return Err(Error::domain("setup efficiency must lie in (0, 1]"));
    }
    let raw = i_inf_detected_cps / setup_efficiency * total_lifetime_ns * 1e-9;
    if raw > 1.05 {
        return Err(Error::Inconsistent(format!(
            "quantum yield {raw:.3} exceeds 1.05; inputs are mutually inconsistent"
        )));
    }
    let clamped = raw > 1.0;
    Ok(QuantumYield {
        value: raw.min(1.0),
        raw_value: raw,
        clamped,
        note: "two-level CW estimate QY = (I_inf/eta)*tau; population/collection \
               corrections beyond this model are not applied"
            .into(),
    })
}
