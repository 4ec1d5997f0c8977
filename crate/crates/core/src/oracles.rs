//! Independent reference computations for the test suites: brute-force
//! posterior means, an exact dynamic-programming TV denoiser, numeric
//! CDFs, a dense solver, and classical goodness-of-fit statistics.
//!
//! Everything here re-derives its answer from first principles and never
//! calls into the estimators or samplers it is used to check.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::forward::ProblemInstance;
use crate::gibbs::materialize_a;
use crate::linalg::Mat;
use crate::math;

// ---------------------------------------------------------------------------
// densities and CDFs

pub fn gaussian_pdf(x: f64, var: f64) -> f64 {
    math::exp(-x * x / (2.0 * var)) / math::sqrt(2.0 * core::f64::consts::PI * var)
}

pub fn laplace_pdf(x: f64, scale: f64) -> f64 {
    scale / 2.0 * math::exp(-scale * math::abs(x))
}

/// Unit-scale Student density proportional to `(1 + x²)^{-(dof+1)/2}`.
pub fn student_pdf(x: f64, dof: f64) -> f64 {
    let log_norm = math::ln_gamma((dof + 1.0) / 2.0)
        - math::ln_gamma(dof / 2.0)
        - 0.5 * math::ln(core::f64::consts::PI);
    math::exp(log_norm - 0.5 * (dof + 1.0) * math::ln_1p(x * x))
}

/// Unnormalized log density of the generalized inverse Gaussian law.
pub fn gig_log_pdf_unnorm(x: f64, lambda1: f64, lambda2: f64, order: f64) -> f64 {
    (order - 1.0) * math::ln(x) - 0.5 * (lambda1 * x + lambda2 / x)
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * (1.0 + math::erf(x / math::sqrt(2.0)))
}

pub fn laplace_cdf(x: f64, scale: f64) -> f64 {
    if x < 0.0 {
        0.5 * math::exp(scale * x)
    } else {
        1.0 - 0.5 * math::exp(-scale * x)
    }
}

pub fn exponential_cdf(x: f64, scale: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        1.0 - math::exp(-x / scale)
    }
}

/// Midpoint-rule integral of `f` over `[lo, hi]` with `n` cells.
pub fn integrate_midpoint(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let h = (hi - lo) / n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        acc += f(lo + (i as f64 + 0.5) * h);
    }
    acc * h
}

/// CDF table built by quadrature of an unnormalized density on `[lo, hi]`.
pub struct NumericCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl NumericCdf {
    pub fn from_unnorm_pdf(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Self {
        let h = (hi - lo) / n as f64;
        let mut xs = Vec::with_capacity(n + 1);
        let mut cdf = Vec::with_capacity(n + 1);
        xs.push(lo);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            acc += f(lo + (i as f64 + 0.5) * h) * h;
            xs.push(lo + (i as f64 + 1.0) * h);
            cdf.push(acc);
        }
        let total = acc;
        for v in &mut cdf {
            *v /= total;
        }
        NumericCdf { xs, cdf }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= *self.xs.last().unwrap() {
            return 1.0;
        }
        let mut lo = 0;
        let mut hi = self.xs.len() - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.xs[mid] <= x {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = (x - self.xs[lo]) / (self.xs[hi] - self.xs[lo]);
        self.cdf[lo] + t * (self.cdf[hi] - self.cdf[lo])
    }

    /// Mean of the (normalized) density, by the same quadrature.
    pub fn mean_of(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let mass = integrate_midpoint(&f, lo, hi, n);
        integrate_midpoint(|x| x * f(x), lo, hi, n) / mass
    }
}

// ---------------------------------------------------------------------------
// goodness-of-fit statistics

/// One-sample Kolmogorov-Smirnov statistic; `samples` must be sorted.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let n = samples.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in samples.iter().enumerate() {
        let c = cdf(x);
        let hi = (i as f64 + 1.0) / n - c;
        let lo = c - i as f64 / n;
        d = d.max(hi).max(lo);
    }
    d
}

/// Critical KS value at level 0.01 (asymptotic): `1.6276 / sqrt(n)`.
pub fn ks_critical_001(n: usize) -> f64 {
    1.6276 / math::sqrt(n as f64)
}

/// Two-sample KS statistic; both inputs must be sorted.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (a.len(), b.len());
    let mut i = 0;
    let mut j = 0;
    let mut d: f64 = 0.0;
    while i < na && j < nb {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max(math::abs(i as f64 / na as f64 - j as f64 / nb as f64));
    }
    d
}

/// Anderson-Darling statistic for a fully specified law; the input is the
/// sorted vector of CDF-transformed samples.
pub fn anderson_darling_uniform(u: &[f64]) -> f64 {
    let n = u.len();
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 0..n {
        let ui = u[i].clamp(1e-15, 1.0 - 1e-15);
        let un = u[n - 1 - i].clamp(1e-15, 1.0 - 1e-15);
        acc += (2.0 * i as f64 + 1.0) * (math::ln(ui) + math::ln(1.0 - un));
    }
    -nf - acc / nf
}

/// 1% critical value of the Anderson-Darling statistic, fully specified
/// distribution case.
pub const AD_CRIT_001: f64 = 3.857;

/// Pearson chi-square statistic.
pub fn chi_square_stat(observed: &[f64], expected: &[f64]) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &e)| (o - e) * (o - e) / e)
        .sum()
}

/// 1% chi-square quantile via the Wilson-Hilferty approximation.
pub fn chi_square_critical_001(dof: usize) -> f64 {
    let k = dof as f64;
    let z = 2.3263478740408408; // standard normal 0.99 quantile
    let t = 1.0 - 2.0 / (9.0 * k) + z * math::sqrt(2.0 / (9.0 * k));
    k * t * t * t
}

/// Mann-Kendall trend z-score (continuity corrected). |z| above the
/// two-sided 1% critical value 2.576 signals a monotone trend.
pub fn mann_kendall_z(series: &[f64]) -> f64 {
    let n = series.len();
    let mut s: i64 = 0;
    for i in 0..n {
        for j in i + 1..n {
            let d = series[j] - series[i];
            if d > 0.0 {
                s += 1;
            } else if d < 0.0 {
                s -= 1;
            }
        }
    }
    let nf = n as f64;
    let var = nf * (nf - 1.0) * (2.0 * nf + 5.0) / 18.0;
    if s > 0 {
        (s as f64 - 1.0) / math::sqrt(var)
    } else if s < 0 {
        (s as f64 + 1.0) / math::sqrt(var)
    } else {
        0.0
    }
}

// ---------------------------------------------------------------------------
// dense solve

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn dense_solve(a: &Mat, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, b.len());
    let mut m = vec![0.0f64; n * (n + 1)];
    for i in 0..n {
        for j in 0..n {
            m[i * (n + 1) + j] = a[(i, j)];
        }
        m[i * (n + 1) + n] = b[i];
    }
    for col in 0..n {
        let mut piv = col;
        for r in col + 1..n {
            if math::abs(m[r * (n + 1) + col]) > math::abs(m[piv * (n + 1) + col]) {
                piv = r;
            }
        }
        if math::abs(m[piv * (n + 1) + col]) < 1e-300 {
            return None;
        }
        if piv != col {
            for j in 0..=n {
                m.swap(col * (n + 1) + j, piv * (n + 1) + j);
            }
        }
        let d = m[col * (n + 1) + col];
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = m[r * (n + 1) + col] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..=n {
                m[r * (n + 1) + j] -= f * m[col * (n + 1) + j];
            }
        }
    }
    Some((0..n).map(|i| m[i * (n + 1) + n] / m[i * (n + 1) + i]).collect())
}

// ---------------------------------------------------------------------------
// exact 1D total-variation denoising

/// Exact minimizer of `‖y - s‖² + tau (|s_1| + Σ_k |s_k - s_{k-1}|)`, the
/// denoising (H = I) case of the TV estimator, via dynamic programming
/// over piecewise-linear message derivatives. The leading `|s_1|` term is
/// realized by a virtual left node pinned at zero with a huge data weight.
pub fn tv1d_denoise_exact(y: &[f64], tau: f64) -> Vec<f64> {
    let mut data = Vec::with_capacity(y.len() + 1);
    data.push((0.0, 1e12));
    for &v in y {
        data.push((v, 1.0));
    }
    let x = weighted_fused_lasso(&data, tau);
    x[1..].to_vec()
}

/// Exact minimizer of `Σ w_i (x_i - y_i)² + lam Σ |x_{i+1} - x_i|` for
/// `(y_i, w_i)` pairs, by Johnson-style message passing: the derivative of
/// each forward message is piecewise linear and nondecreasing, and the
/// edge penalty clips it to `[-lam, lam]`.
pub fn weighted_fused_lasso(data: &[(f64, f64)], lam: f64) -> Vec<f64> {
    let n = data.len();
    assert!(n >= 1);
    // Pieces of the derivative, stored with lazily applied offsets:
    // effective slope/intercept are (slope + a_off, inter + b_off).
    // pieces[i] is valid on (knots[i-1], knots[i]).
    let mut pieces: VecDeque<(f64, f64)> = VecDeque::new();
    let mut knots: VecDeque<f64> = VecDeque::new();
    let mut a_off = 0.0f64;
    let mut b_off = 0.0f64;

    // First data term: derivative 2w(x - y).
    {
        let (y0, w0) = data[0];
        pieces.push_back((2.0 * w0, -2.0 * w0 * y0));
    }

    let mut clip_lo = Vec::with_capacity(n - 1);
    let mut clip_hi = Vec::with_capacity(n - 1);

    for &(yk, wk) in &data[1..] {
        // Clip the current derivative to [-lam, lam].
        // Left boundary.
        while pieces.len() > 1 {
            let (s, b) = pieces[0];
            let g = (s + a_off) * knots[0] + (b + b_off);
            if g < -lam {
                pieces.pop_front();
                knots.pop_front();
            } else {
                break;
            }
        }
        let tm = {
            let (s, b) = pieces[0];
            (-lam - (b + b_off)) / (s + a_off)
        };
        // Right boundary.
        while pieces.len() > 1 {
            let (s, b) = pieces[pieces.len() - 1];
            let g = (s + a_off) * knots[knots.len() - 1] + (b + b_off);
            if g > lam {
                pieces.pop_back();
                knots.pop_back();
            } else {
                break;
            }
        }
        let tp = {
            let (s, b) = pieces[pieces.len() - 1];
            (lam - (b + b_off)) / (s + a_off)
        };
        knots.push_front(tm);
        pieces.push_front((-a_off, -lam - b_off));
        knots.push_back(tp);
        pieces.push_back((-a_off, lam - b_off));
        clip_lo.push(tm);
        clip_hi.push(tp);

        // Add the next data term.
        a_off += 2.0 * wk;
        b_off += -2.0 * wk * yk;
    }

    // Root of the final derivative.
    let mut root = {
        let (s, b) = pieces[pieces.len() - 1];
        -(b + b_off) / (s + a_off)
    };
    for i in 0..pieces.len() {
        let (s, b) = pieces[i];
        let right = if i < knots.len() {
            knots[i]
        } else {
            f64::INFINITY
        };
        let g_right = (s + a_off) * right + (b + b_off);
        if g_right >= 0.0 {
            root = -(b + b_off) / (s + a_off);
            break;
        }
    }

    let mut x = vec![0.0; n];
    x[n - 1] = root;
    for k in (0..n - 1).rev() {
        x[k] = x[k + 1].clamp(clip_lo[k], clip_hi[k]);
    }
    x
}

// ---------------------------------------------------------------------------
// brute-force posterior means

/// Posterior mean of the signal for a K = 1 instance by quadrature over
/// the single increment.
pub fn posterior_mean_riemann_1d(
    inst: &ProblemInstance,
    y: &[f64],
    log_pdf: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> f64 {
    assert_eq!(inst.k(), 1);
    let a = materialize_a(inst);
    let a1: Vec<f64> = (0..inst.m()).map(|i| a[(i, 0)]).collect();
    let sigma2 = inst.noise_var();
    let h = (hi - lo) / n as f64;
    let expnt = |u: f64| -> f64 {
        let mut quad = 0.0;
        for i in 0..y.len() {
            let d = y[i] - u * a1[i];
            quad += d * d;
        }
        -quad / (2.0 * sigma2) + log_pdf(u)
    };
    let mut max_e = f64::NEG_INFINITY;
    for i in 0..n {
        max_e = max_e.max(expnt(lo + (i as f64 + 0.5) * h));
    }
    let mut mass = 0.0;
    let mut mom = 0.0;
    for i in 0..n {
        let u = lo + (i as f64 + 0.5) * h;
        let w = math::exp(expnt(u) - max_e);
        mass += w;
        mom += w * u;
    }
    mom / mass
}

/// Posterior mean of the signal for a K = 2 instance by a Riemann sum
/// over the increment plane; returns the two signal coordinates.
pub fn posterior_mean_riemann_2d(
    inst: &ProblemInstance,
    y: &[f64],
    log_pdf: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> [f64; 2] {
    assert_eq!(inst.k(), 2);
    let a = materialize_a(inst);
    let m = inst.m();
    let a1: Vec<f64> = (0..m).map(|i| a[(i, 0)]).collect();
    let a2: Vec<f64> = (0..m).map(|i| a[(i, 1)]).collect();
    let sigma2 = inst.noise_var();
    let (yty, a1y, a2y, a11, a22, a12) = {
        let mut yty = 0.0;
        let mut a1y = 0.0;
        let mut a2y = 0.0;
        let mut a11 = 0.0;
        let mut a22 = 0.0;
        let mut a12 = 0.0;
        for i in 0..m {
            yty += y[i] * y[i];
            a1y += a1[i] * y[i];
            a2y += a2[i] * y[i];
            a11 += a1[i] * a1[i];
            a22 += a2[i] * a2[i];
            a12 += a1[i] * a2[i];
        }
        (yty, a1y, a2y, a11, a22, a12)
    };
    let h = (hi - lo) / n as f64;
    let mut lp = Vec::with_capacity(n);
    for i in 0..n {
        lp.push(log_pdf(lo + (i as f64 + 0.5) * h));
    }
    let expnt = |u1: f64, lp1: f64, u2: f64, lp2: f64| -> f64 {
        let quad = yty - 2.0 * (u1 * a1y + u2 * a2y)
            + u1 * u1 * a11
            + u2 * u2 * a22
            + 2.0 * u1 * u2 * a12;
        -quad / (2.0 * sigma2) + lp1 + lp2
    };
    let mut max_e = f64::NEG_INFINITY;
    for i in 0..n {
        let u1 = lo + (i as f64 + 0.5) * h;
        for j in 0..n {
            let u2 = lo + (j as f64 + 0.5) * h;
            let e = expnt(u1, lp[i], u2, lp[j]);
            if e > max_e {
                max_e = e;
            }
        }
    }
    let mut mass = 0.0;
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for i in 0..n {
        let u1 = lo + (i as f64 + 0.5) * h;
        for j in 0..n {
            let u2 = lo + (j as f64 + 0.5) * h;
            let w = math::exp(expnt(u1, lp[i], u2, lp[j]) - max_e);
            mass += w;
            m1 += w * u1;
            m2 += w * u2;
        }
    }
    let u1_mean = m1 / mass;
    let u2_mean = m2 / mass;
    [u1_mean, u1_mean + u2_mean]
}

/// Brute-force Bernoulli-Laplace posterior by enumerating every support
/// configuration and integrating the active increments by quadrature.
pub struct BlEnumeration {
    /// Posterior mean in the signal domain.
    pub signal_mean: Vec<f64>,
    /// `P(v_k = 1 | y)` per coordinate.
    pub support_marginals: Vec<f64>,
}

/// Supports `K <= 3` (the configuration count and grid dimension grow
/// exponentially). `n` is the number of quadrature cells per active
/// dimension and `half` the box half-width beyond the least-squares point.
pub fn bl_posterior_enumeration(
    inst: &ProblemInstance,
    y: &[f64],
    mass_at_zero: f64,
    scale_b: f64,
    n: usize,
    half: f64,
) -> BlEnumeration {
    let k = inst.k();
    assert!(k <= 3, "enumeration oracle is exponential in K");
    let a = materialize_a(inst);
    let m = inst.m();
    let sigma2 = inst.noise_var();
    let yty: f64 = y.iter().map(|v| v * v).sum();

    let log_prior_bit = |on: bool| -> f64 {
        if on {
            math::ln(1.0 - mass_at_zero)
        } else {
            math::ln(mass_at_zero)
        }
    };

    struct ConfigResult {
        log_mass: f64,
        cond_mean: Vec<f64>, // over active coordinates
        active: Vec<usize>,
    }

    let mut configs: Vec<ConfigResult> = Vec::new();
    for mask in 0..(1usize << k) {
        let active: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        let d = active.len();
        let mut log_prior = 0.0;
        for i in 0..k {
            log_prior += log_prior_bit(mask & (1 << i) != 0);
        }
        if d == 0 {
            configs.push(ConfigResult {
                log_mass: log_prior - yty / (2.0 * sigma2),
                cond_mean: vec![],
                active,
            });
            continue;
        }
        // Columns, Gram pieces, and the least-squares center.
        let cols: Vec<Vec<f64>> = active
            .iter()
            .map(|&j| (0..m).map(|i| a[(i, j)]).collect())
            .collect();
        let mut ata = Mat::zeros(d, d);
        let mut aty = vec![0.0; d];
        for p in 0..d {
            for q in 0..d {
                let mut acc = 0.0;
                for i in 0..m {
                    acc += cols[p][i] * cols[q][i];
                }
                ata[(p, q)] = acc;
            }
            let mut acc = 0.0;
            for i in 0..m {
                acc += cols[p][i] * y[i];
            }
            aty[p] = acc;
        }
        let center = dense_solve(&ata, &aty).unwrap_or_else(|| vec![0.0; d]);
        let boxes: Vec<(f64, f64)> = center
            .iter()
            .map(|&c| (c.min(0.0) - half, c.max(0.0) + half))
            .collect();

        let expnt = |u: &[f64]| -> f64 {
            let mut quad = yty;
            for p in 0..d {
                quad -= 2.0 * u[p] * aty[p];
                for q in 0..d {
                    quad += u[p] * u[q] * ata[(p, q)];
                }
            }
            let mut lp = 0.0;
            for &up in u {
                lp += math::ln(scale_b / 2.0) - scale_b * math::abs(up);
            }
            -quad / (2.0 * sigma2) + lp
        };

        // Midpoint grids per dimension.
        let grids: Vec<Vec<f64>> = boxes
            .iter()
            .map(|&(lo, hi)| {
                let h = (hi - lo) / n as f64;
                (0..n).map(|i| lo + (i as f64 + 0.5) * h).collect()
            })
            .collect();
        let cell: f64 = boxes
            .iter()
            .map(|&(lo, hi)| (hi - lo) / n as f64)
            .product();

        let mut max_e = f64::NEG_INFINITY;
        let mut visit = |f: &mut dyn FnMut(&[f64])| match d {
            1 => {
                for &u0 in &grids[0] {
                    f(&[u0]);
                }
            }
            2 => {
                for &u0 in &grids[0] {
                    for &u1 in &grids[1] {
                        f(&[u0, u1]);
                    }
                }
            }
            3 => {
                for &u0 in &grids[0] {
                    for &u1 in &grids[1] {
                        for &u2 in &grids[2] {
                            f(&[u0, u1, u2]);
                        }
                    }
                }
            }
            _ => unreachable!(),
        };
        visit(&mut |u| {
            let e = expnt(u);
            if e > max_e {
                max_e = e;
            }
        });
        let mut mass = 0.0;
        let mut moments = vec![0.0; d];
        visit(&mut |u| {
            let w = math::exp(expnt(u) - max_e);
            mass += w;
            for p in 0..d {
                moments[p] += w * u[p];
            }
        });
        let cond_mean: Vec<f64> = moments.iter().map(|&v| v / mass).collect();
        configs.push(ConfigResult {
            log_mass: log_prior + max_e + math::ln(mass * cell),
            cond_mean,
            active,
        });
    }

    let max_lm = configs
        .iter()
        .map(|c| c.log_mass)
        .fold(f64::NEG_INFINITY, f64::max);
    let total: f64 = configs.iter().map(|c| math::exp(c.log_mass - max_lm)).sum();

    let mut u_mean = vec![0.0; k];
    let mut marginals = vec![0.0; k];
    for c in &configs {
        let p = math::exp(c.log_mass - max_lm) / total;
        for (slot, &j) in c.active.iter().enumerate() {
            u_mean[j] += p * c.cond_mean[slot];
            marginals[j] += p;
        }
    }
    let mut acc = 0.0;
    let signal_mean = u_mean
        .iter()
        .map(|&u| {
            acc += u;
            acc
        })
        .collect();
    BlEnumeration {
        signal_mean,
        support_marginals: marginals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_solve_roundtrip() {
        let a = Mat::from_fn(3, 3, |i, j| if i == j { 4.0 } else { 1.0 / (1 + i + j) as f64 });
        let x = [1.0, -2.0, 0.5];
        let b = a.matvec(&x);
        let got = dense_solve(&a, &b).unwrap();
        for i in 0..3 {
            assert!((got[i] - x[i]).abs() < 1e-10);
        }
        let singular = Mat::zeros(2, 2);
        assert!(dense_solve(&singular, &[1.0, 1.0]).is_none());
    }

    #[test]
    fn tv_denoise_scalar_is_soft_threshold() {
        // K = 1: argmin (s-y)² + tau·|s| = soft(y, tau/2).
        let got = tv1d_denoise_exact(&[3.0], 2.0);
        assert!((got[0] - 2.0).abs() < 1e-9);
        let got = tv1d_denoise_exact(&[-0.4], 2.0);
        assert!(got[0].abs() < 1e-9);
    }

    #[test]
    fn tv_denoise_satisfies_optimality_certificate() {
        // Dual feasibility of the exact solution: the reverse cumulative
        // sums of 2(y - s)/tau must lie in [-1, 1], with ±1 wherever the
        // corresponding increment of s is nonzero.
        let y = [0.0, 0.1, 1.9, 2.1, 2.0, -1.0, -1.1, 0.0];
        let tau = 0.8;
        let s = tv1d_denoise_exact(&y, tau);
        let mut g = vec![0.0; y.len()];
        let mut acc = 0.0;
        for i in (0..y.len()).rev() {
            acc += 2.0 * (y[i] - s[i]) / tau;
            g[i] = acc;
        }
        for i in 0..y.len() {
            assert!(g[i].abs() <= 1.0 + 1e-7, "dual out of range at {i}: {}", g[i]);
            let inc = if i == 0 { s[0] } else { s[i] - s[i - 1] };
            if inc.abs() > 1e-9 {
                assert!(
                    (g[i] - inc.signum()).abs() < 1e-6,
                    "active dual not tight at {i}"
                );
            }
        }
    }

    #[test]
    fn ks_statistic_of_exact_grid_is_small() {
        // Deterministic uniform grid against the uniform CDF.
        let n = 1000;
        let samples: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) / n as f64).collect();
        let d = ks_statistic(&samples, |x| x.clamp(0.0, 1.0));
        assert!(d < 1.0 / n as f64 + 1e-12);
    }

    #[test]
    fn chi_square_critical_sane() {
        // Known value for 10 dof at 1%: 23.21.
        let c = chi_square_critical_001(10);
        assert!((c - 23.21).abs() < 0.1, "{c}");
    }

    #[test]
    fn mann_kendall_detects_trend() {
        let rising: Vec<f64> = (0..100).map(|i| i as f64 * 0.01).collect();
        assert!(mann_kendall_z(&rising) > 2.576);
        let flat: Vec<f64> = (0..100)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        assert!(mann_kendall_z(&flat).abs() < 2.576);
    }
}
