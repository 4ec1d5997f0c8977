//! Chain and estimator diagnostics: moments, autocorrelation, effective
//! sample size, and the squared-error summary used throughout the reports.

use alloc::vec::Vec;

use crate::math;

/// Per-sample mean squared error between two vectors of equal length.
pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "mse operands must match");
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc / a.len() as f64
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

/// Standard error of the mean of `xs`.
pub fn standard_error(xs: &[f64]) -> f64 {
    math::sqrt(variance(xs) / xs.len() as f64)
}

/// Lag-`k` autocorrelation of a series.
pub fn autocorrelation(xs: &[f64], lag: usize, m: f64, var: f64) -> f64 {
    let n = xs.len();
    if lag >= n || var <= 0.0 {
        return 0.0;
    }
    let mut cov = 0.0;
    for i in 0..n - lag {
        cov += (xs[i] - m) * (xs[i + lag] - m);
    }
    cov / ((n - lag) as f64 * var)
}

/// Effective sample size from the initial positive autocorrelation sums,
/// `n / (1 + 2 Σ ρ_k)`.
pub fn effective_sample_size(xs: &[f64]) -> f64 {
    let n = xs.len();
    if n < 4 {
        return n as f64;
    }
    let m = mean(xs);
    let var = xs.iter().map(|&x| (x - m) * (x - m)).sum::<f64>() / n as f64;
    if var <= 0.0 {
        return n as f64;
    }
    let mut sum_rho = 0.0;
    for lag in 1..=(n / 2) {
        let rho = autocorrelation(xs, lag, m, var);
        if rho < 0.05 {
            break;
        }
        sum_rho += rho;
    }
    (n as f64 / (1.0 + 2.0 * sum_rho)).min(n as f64)
}

/// Column-wise effective sample size of row-major draws (`rows × dim`).
pub fn effective_sample_size_columns(data: &[f64], rows: usize, dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    let mut col = Vec::with_capacity(rows);
    for j in 0..dim {
        col.clear();
        for r in 0..rows {
            col.push(data[r * dim + j]);
        }
        out.push(effective_sample_size(&col));
    }
    out
}
