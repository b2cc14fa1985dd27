//! Independent reference implementations used as oracles by the test suites.
//!
//! Everything in this crate is deliberately written in the most
//! straightforward way possible and shares no code with the production
//! crates, so that agreement between the two is meaningful evidence.

/// Poisson probability mass function `e^{-s} s^n / n!`, evaluated in log
/// space so it stays finite for large `n`.
pub fn poisson_pmf(s: f64, n: u32) -> f64 {
    if s == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let mut log_p = -s + f64::from(n) * s.ln();
    for k in 1..=n {
        log_p -= f64::from(k).ln();
    }
    log_p.exp()
}

/// Ordinary least squares `y = a + b x`; returns `(intercept, slope)`.
pub fn ols(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (intercept, slope)
}

/// Trapezoidal integral of samples `y` over the (possibly non-uniform) grid `x`.
pub fn trapezoid(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    x.windows(2)
        .zip(y.windows(2))
        .map(|(xs, ys)| 0.5 * (ys[0] + ys[1]) * (xs[1] - xs[0]))
        .sum()
}

/// Sample mean and standard deviation (n-1 denominator; 0 for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    assert!(n > 0);
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
    (mean, var.sqrt())
}

/// Dense symmetric eigendecomposition by the cyclic Jacobi method.
///
/// `matrix` is row-major `n x n` and must be symmetric. Returns eigenvalues
/// sorted ascending together with the matching eigenvectors (each of length
/// `n`). Quadratic convergence makes ~15 sweeps ample for `n` up to a few
/// hundred.
pub fn jacobi_eigh(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for _sweep in 0..50 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off.sqrt() < 1e-14 * (1.0 + frobenius(&a, n)) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].partial_cmp(&a[j * n + j]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i * n + j]).collect())
        .collect();
    (values, vectors)
}

fn frobenius(a: &[f64], n: usize) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt() / n as f64
}

/// Minimal XML well-formedness check sufficient for the SVG files the CLI
/// emits: every opened tag is closed in order, attributes are quoted, and
/// the document has a single root element. Returns `Err` with a description
/// on the first violation.
pub fn check_xml_well_formed(text: &str) -> Result<(), String> {
    let mut stack: Vec<String> = Vec::new();
    let mut roots = 0usize;
    let mut rest = text.trim_start();
    if let Some(stripped) = rest.strip_prefix("<?xml") {
        let end = stripped.find("?>").ok_or("unterminated xml declaration")?;
        rest = &stripped[end + 2..];
    }
    let mut chars = rest.char_indices().peekable();
    let bytes = rest;
    while let Some((i, c)) = chars.next() {
        if c != '<' {
            continue;
        }
        let close = bytes[i..].find('>').ok_or(format!("unclosed tag at byte {i}"))? + i;
        let inner = &bytes[i + 1..close];
        if inner.starts_with("!--") {
            continue;
        }
        if let Some(name) = inner.strip_prefix('/') {
            let expect = stack.pop().ok_or(format!("unmatched </{name}>"))?;
            if expect != name.trim() {
                return Err(format!("expected </{expect}>, found </{name}>"));
            }
            if stack.is_empty() {
                roots += 1;
            }
        } else if inner.ends_with('/') {
            if stack.is_empty() {
                roots += 1;
            }
        } else {
            let name: String = inner
                .split_whitespace()
                .next()
                .ok_or("empty tag")?
                .to_string();
            let quotes = inner.matches('"').count();
            if quotes % 2 != 0 {
                return Err(format!("unbalanced attribute quotes in <{name}>"));
            }
            stack.push(name);
        }
        while let Some(&(j, _)) = chars.peek() {
            if j <= close {
                chars.next();
            } else {
                break;
            }
        }
    }
    if !stack.is_empty() {
        return Err(format!("unclosed elements: {stack:?}"));
    }
    if roots != 1 {
        return Err(format!("expected exactly one root element, found {roots}"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_pmf_normalizes() {
        for &s in &[0.1, 1.0, 2.4, 5.0] {
            let total: f64 = (0..60).map(|n| poisson_pmf(s, n)).sum();
            assert!((total - 1.0).abs() < 1e-12, "sum at s={s}: {total}");
        }
    }

    #[test]
    fn poisson_pmf_known_values() {
        assert!((poisson_pmf(2.4, 0) - (-2.4f64).exp()).abs() < 1e-15);
        assert!((poisson_pmf(1.0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(poisson_pmf(0.0, 0), 1.0);
        assert_eq!(poisson_pmf(0.0, 3), 0.0);
    }

    #[test]
    fn ols_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let (a, b) = ols(&x, &y);
        assert!((a - 1.0).abs() < 1e-12);
        assert!((b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_small_known() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let (vals, vecs) = jacobi_eigh(&[2.0, 1.0, 1.0, 2.0], 2);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 3.0).abs() < 1e-12);
        // eigenvector of 3 is (1,1)/sqrt(2) up to sign
        let v = &vecs[1];
        assert!((v[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert!((v[0] - v[1]).abs() < 1e-12);
    }

    #[test]
    fn jacobi_orthonormal_vectors() {
        // random-ish symmetric 6x6
        let n = 6;
        let mut m = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = ((i * 7 + j * 13) % 11) as f64 / 11.0 - 0.3;
                m[i * n + j] = v;
                m[j * n + i] = v;
            }
        }
        let (vals, vecs) = jacobi_eigh(&m, n);
        for w in vals.windows(2) {
            assert!(w[0] <= w[1] + 1e-14);
        }
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|k| vecs[a][k] * vecs[b][k]).sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10, "dot({a},{b}) = {dot}");
            }
        }
    }

    #[test]
    fn xml_checker_accepts_and_rejects() {
        assert!(check_xml_well_formed("<svg><g id=\"a\"/><g></g></svg>").is_ok());
        assert!(check_xml_well_formed("<svg><g></svg>").is_err());
        assert!(check_xml_well_formed("<a></a><b></b>").is_err());
    }
}
