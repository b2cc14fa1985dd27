//! Damped least-squares (Levenberg–Marquardt) minimization.
//!
//! Damping schedule: λ starts at 1e-3, halves on every accepted step and
//! quadruples on rejection. Convergence is declared when the relative cost
//! decrease of an accepted step falls below 1e-10 or the step norm falls
//! below 1e-12·(1 + ‖x‖). Parameter covariance is `s²(JᵀJ)⁻¹` from the
//! Jacobian at the solution with `s² = SSR/(m − p)`.

use crate::error::{Error, Result};
use crate::float::Float;

/// Tuning knobs; defaults implement the documented schedule.
#[derive(Debug, Clone, Copy)]
pub struct LmConfig<T> {
    pub max_iterations: usize,
    pub initial_damping: T,
    pub damping_decrease: T,
    pub damping_increase: T,
    pub cost_tolerance: T,
    pub step_tolerance: T,
}

impl<T: Float> Default for LmConfig<T> {
    fn default() -> Self {
        LmConfig {
            max_iterations: 500,
            initial_damping: T::of(1e-3),
            damping_decrease: T::of(0.5),
            damping_increase: T::of(4.0),
            cost_tolerance: T::of(1e-10),
            step_tolerance: T::of(1e-12),
        }
    }
}

/// A least-squares problem: residual vector and optional analytic Jacobian.
pub struct Problem<'a, T> {
    n_residuals: usize,
    residuals: Box<dyn Fn(&[T], &mut [T]) + 'a>,
    jacobian: Option<Box<dyn Fn(&[T], &mut [T]) + 'a>>,
}

impl<'a, T: Float> Problem<'a, T> {
    /// `residuals` writes the `n_residuals`-vector r(x) into its output slice.
    pub fn new(n_residuals: usize, residuals: impl Fn(&[T], &mut [T]) + 'a) -> Self {
        Problem {
            n_residuals,
            residuals: Box::new(residuals),
            jacobian: None,
        }
    }

    /// Analytic Jacobian ∂r_i/∂x_j, row-major `n_residuals × n_params`.
    /// Without it a central-difference Jacobian is used.
    pub fn with_jacobian(mut self, jacobian: impl Fn(&[T], &mut [T]) + 'a) -> Self {
        self.jacobian = Some(Box::new(jacobian));
        self
    }
}

/// Outcome of a successful minimization.
#[derive(Debug, Clone)]
pub struct LmReport<T> {
    pub params: Vec<T>,
    /// Final sum of squared residuals.
    pub cost: T,
    pub residual_norm: T,
    pub iterations: usize,
    /// Cost after every accepted step (never increasing).
    pub cost_trace: Vec<T>,
    /// Row-major `p × p` covariance, absent when the Jacobian is singular
    /// at the solution.
    pub covariance: Option<Vec<T>>,
    /// 1σ uncertainties (square roots of the covariance diagonal).
    pub uncertainties: Option<Vec<T>>,
    /// Row-major `p × p` parameter correlation matrix from (JᵀJ)⁻¹;
    /// well-defined even when the residual (and hence the covariance)
    /// vanishes.
    pub correlations: Option<Vec<T>>,
}

impl<T: Float> LmReport<T> {
    /// Correlation coefficient between parameters `i` and `j`, if the
    /// Jacobian at the solution was invertible.
    pub fn correlation(&self, i: usize, j: usize) -> Option<T> {
        let corr = self.correlations.as_ref()?;
        let p = self.params.len();
        Some(corr[i * p + j])
    }
}

/// Minimize ‖r(x)‖² starting from `x0`.
pub fn minimize<T: Float>(problem: &Problem<T>, x0: &[T], cfg: &LmConfig<T>) -> Result<LmReport<T>> {
    let m = problem.n_residuals;
    let p = x0.len();
    if p == 0 || m < p {
        return Err(Error::domain(format!(
            "need at least as many residuals ({m}) as parameters ({p})"
        )));
    }

    let mut x = x0.to_vec();
    let mut r = vec![T::zero(); m];
    (problem.residuals)(&x, &mut r);
    let mut cost = sum_sq(&r);
    if !cost.is_finite() {
        return Err(Error::domain("initial residuals are not finite"));
    }

    let mut jac = vec![T::zero(); m * p];
    let mut lambda = cfg.initial_damping;
    let mut cost_trace = vec![cost];
    let mut iterations = 0usize;
    let mut converged = cost == T::zero();

    while !converged && iterations < cfg.max_iterations {
        fill_jacobian(problem, &x, &mut jac, m, p);

        // Normal equations: A = JᵀJ, g = Jᵀr.
        let mut a = vec![T::zero(); p * p];
        let mut g = vec![T::zero(); p];
        for i in 0..m {
            let row = &jac[i * p..(i + 1) * p];
            for j in 0..p {
                g[j] += row[j] * r[i];
                for k in j..p {
                    a[j * p + k] += row[j] * row[k];
                }
            }
        }
        for j in 0..p {
            for k in 0..j {
                a[j * p + k] = a[k * p + j];
            }
        }
        let max_diag = (0..p).map(|j| a[j * p + j]).fold(T::zero(), |acc, v| acc.max(v));
        if max_diag == T::zero() {
            // Zero gradient everywhere: nothing left to do.
            break;
        }
        let diag_floor = max_diag * T::of(1e-12);
        iterations += 1;

        // Inner loop: grow damping until a step is accepted or damping
        // saturates (no descent direction left).
        loop {
            let mut damped = a.clone();
            for j in 0..p {
                let d = a[j * p + j].max(diag_floor);
                damped[j * p + j] += lambda * d;
            }
            let mut step = g.clone();
            let solved = cholesky_solve(&mut damped, &mut step, p);

            if solved {
                let candidate: Vec<T> = x.iter().zip(&step).map(|(&xi, &si)| xi - si).collect();
                let mut r_new = vec![T::zero(); m];
                (problem.residuals)(&candidate, &mut r_new);
                let new_cost = sum_sq(&r_new);
                if new_cost.is_finite() && new_cost <= cost {
                    let step_norm = sum_sq(&step).sqrt();
                    let x_norm = sum_sq(&x).sqrt();
                    let rel_drop = if cost > T::zero() {
                        (cost - new_cost) / cost
                    } else {
                        T::zero()
                    };
                    x = candidate;
                    r = r_new;
                    cost = new_cost;
                    cost_trace.push(cost);
                    lambda = lambda * cfg.damping_decrease;
                    if rel_drop < cfg.cost_tolerance
                        || step_norm < cfg.step_tolerance * (T::one() + x_norm)
                        || cost == T::zero()
                    {
                        converged = true;
                    }
                    break;
                }
            }

            lambda = lambda * cfg.damping_increase;
            if lambda > T::of(1e14) {
                converged = true;
                break;
            }
        }
    }

    if !converged && iterations >= cfg.max_iterations {
        return Err(Error::NonConvergence {
            iterations,
            residual_norm: cost.sqrt().as_f64(),
            best: x.iter().map(|v| v.as_f64()).collect(),
        });
    }

    // Covariance from the Jacobian at the solution.
    fill_jacobian(problem, &x, &mut jac, m, p);
    let (covariance, correlations) = covariance_from_jacobian(&jac, m, p, cost)
        .map_or((None, None), |(c, r)| (Some(c), Some(r)));
    let uncertainties = covariance
        .as_ref()
        .map(|c| (0..p).map(|j| c[j * p + j].max(T::zero()).sqrt()).collect());

    Ok(LmReport {
        params: x,
        cost,
        residual_norm: cost.sqrt(),
        iterations,
        cost_trace,
        covariance,
        uncertainties,
        correlations,
    })
}

fn sum_sq<T: Float>(v: &[T]) -> T {
    v.iter().map(|&x| x * x).sum()
}

fn fill_jacobian<T: Float>(problem: &Problem<T>, x: &[T], jac: &mut [T], m: usize, p: usize) {
    if let Some(j) = &problem.jacobian {
        (j)(x, jac);
        return;
    }
    // Central differences with a cube-root-of-epsilon step.
    let base = T::EPS.powf(T::of(1.0 / 3.0));
    let mut xp = x.to_vec();
    let mut r_plus = vec![T::zero(); m];
    let mut r_minus = vec![T::zero(); m];
    for j in 0..p {
        let h = base * (T::one() + x[j].abs());
        let orig = xp[j];
        xp[j] = orig + h;
        (problem.residuals)(&xp, &mut r_plus);
        xp[j] = orig - h;
        (problem.residuals)(&xp, &mut r_minus);
        xp[j] = orig;
        let denom = T::of(2.0) * h;
        for i in 0..m {
            jac[i * p + j] = (r_plus[i] - r_minus[i]) / denom;
        }
    }
}

/// Covariance `s²(JᵀJ)⁻¹` with `s² = cost/(m−p)` plus the parameter
/// correlation matrix; None when JᵀJ is singular.
#[allow(clippy::type_complexity)]
fn covariance_from_jacobian<T: Float>(
    jac: &[T],
    m: usize,
    p: usize,
    cost: T,
) -> Option<(Vec<T>, Vec<T>)> {
    let mut a = vec![T::zero(); p * p];
    for i in 0..m {
        let row = &jac[i * p..(i + 1) * p];
        for j in 0..p {
            for k in j..p {
                a[j * p + k] += row[j] * row[k];
            }
        }
    }
    for j in 0..p {
        for k in 0..j {
            a[j * p + k] = a[k * p + j];
        }
    }
    // Scale to unit diagonal for a conditioning-robust inverse.
    let scale: Vec<T> = (0..p)
        .map(|j| {
            let d = a[j * p + j];
            if d > T::zero() {
                T::one() / d.sqrt()
            } else {
                T::zero()
            }
        })
        .collect();
    if scale.iter().any(|s| *s == T::zero()) {
        return None;
    }
    let mut scaled = vec![T::zero(); p * p];
    for j in 0..p {
        for k in 0..p {
            scaled[j * p + k] = a[j * p + k] * scale[j] * scale[k];
        }
    }
    let inv = cholesky_inverse(&scaled, p)?;
    let dof = m.saturating_sub(p).max(1);
    let s2 = cost / T::of(dof as f64);
    let mut cov = vec![T::zero(); p * p];
    let mut corr = vec![T::zero(); p * p];
    for j in 0..p {
        for k in 0..p {
            cov[j * p + k] = inv[j * p + k] * scale[j] * scale[k] * s2;
            let denom = (inv[j * p + j] * inv[k * p + k]).sqrt();
            corr[j * p + k] = if denom > T::zero() {
                inv[j * p + k] / denom
            } else {
                T::zero()
            };
        }
    }
    Some((cov, corr))
}

/// In-place Cholesky solve of `A x = b` for symmetric positive-definite `A`
/// (row-major). Returns false when the factorization breaks down.
fn cholesky_solve<T: Float>(a: &mut [T], b: &mut [T], n: usize) -> bool {
    if !cholesky_factor(a, n, T::zero()) {
        return false;
    }
    // Forward substitution L y = b.
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= a[i * n + k] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
    // Back substitution Lᵀ x = y.
    for i in (0..n).rev() {
        let mut sum = b[i];
        for k in (i + 1)..n {
            sum -= a[k * n + i] * b[k];
        }
        b[i] = sum / a[i * n + i];
    }
    true
}

/// Lower-triangular Cholesky factor in place; false when a pivot falls at or
/// below `min_pivot` (not positive definite, or singular to that tolerance).
fn cholesky_factor<T: Float>(a: &mut [T], n: usize, min_pivot: T) -> bool {
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= a[i * n + k] * a[j * n + k];
            }
            if i == j {
                if !(sum > min_pivot) {
                    return false;
                }
                a[i * n + i] = sum.sqrt();
            } else {
                a[i * n + j] = sum / a[j * n + j];
            }
        }
    }
    true
}

/// Inverse of a symmetric positive-definite matrix via Cholesky. The caller
/// passes a unit-diagonal (correlation-scaled) matrix; pivots at the level
/// of rounding noise mean the matrix is singular in exact arithmetic, so
/// they are rejected rather than inverted into garbage.
fn cholesky_inverse<T: Float>(a: &[T], n: usize) -> Option<Vec<T>> {
    let mut l = a.to_vec();
    if !cholesky_factor(&mut l, n, T::of(1e-12)) {
        return None;
    }
    // Solve A X = I column by column.
    let mut inv = vec![T::zero(); n * n];
    for col in 0..n {
        let mut b = vec![T::zero(); n];
        b[col] = T::one();
        for i in 0..n {
            let mut sum = b[i];
            for k in 0..i {
                sum -= l[i * n + k] * b[k];
            }
            b[i] = sum / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut sum = b[i];
            for k in (i + 1)..n {
                sum -= l[k * n + i] * b[k];
            }
            b[i] = sum / l[i * n + i];
        }
        for i in 0..n {
            inv[i * n + col] = b[i];
        }
    }
    Some(inv)
}
