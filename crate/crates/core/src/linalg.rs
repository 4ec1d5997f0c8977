//! Dense linear algebra sized for this crate: row-major matrices, a
//! Cholesky factorization with rank-one updates and downdates, and the
//! triangular solves the samplers and estimators are built on.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::error::{CoreError, Result};
use crate::math;

/// Row-major dense matrix of `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Mat {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(nrows: usize, ncols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(nrows, ncols);
        for i in 0..nrows {
            for j in 0..ncols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols, "matvec dimension");
        let mut out = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let row = self.row(i);
            let mut acc = 0.0;
            for j in 0..self.ncols {
                acc += row[j] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// `Aᵀ x`.
    pub fn matvec_t(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows, "matvec_t dimension");
        let mut out = vec![0.0; self.ncols];
        for i in 0..self.nrows {
            let row = self.row(i);
            let xi = x[i];
            for j in 0..self.ncols {
                out[j] += row[j] * xi;
            }
        }
        out
    }

    /// `Aᵀ A`, symmetric `ncols × ncols`.
    pub fn gram(&self) -> Mat {
        let n = self.ncols;
        let mut g = Mat::zeros(n, n);
        for r in 0..self.nrows {
            let row = self.row(r);
            for i in 0..n {
                let ri = row[i];
                if ri == 0.0 {
                    continue;
                }
                for j in i..n {
                    g[(i, j)] += ri * row[j];
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                g[(i, j)] = g[(j, i)];
            }
        }
        g
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.ncols, self.nrows, |i, j| self[(j, i)])
    }

    /// Adds `c · x xᵀ` to a symmetric matrix.
    pub fn add_sym_rank_one(&mut self, x: &[f64], c: f64) {
        let n = self.nrows;
        assert_eq!(x.len(), n);
        for i in 0..n {
            let ci = c * x[i];
            if ci == 0.0 {
                continue;
            }
            let row = self.row_mut(i);
            for j in 0..n {
                row[j] += ci * x[j];
            }
        }
    }
}

impl Index<(usize, usize)> for Mat {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl IndexMut<(usize, usize)> for Mat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * b[i];
    }
    acc
}

pub fn norm2(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`, stored row-major
/// in a full square buffer (the strict upper triangle is unused).
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix; only the lower
    /// triangle of `a` is read.
    pub fn factor(a: &Mat) -> Result<Self> {
        let n = a.nrows();
        assert_eq!(n, a.ncols(), "cholesky needs a square matrix");
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(CoreError::NotPositiveDefinite { pivot: i });
                    }
                    l[i * n + i] = math::sqrt(s);
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Ok(Cholesky { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * self.n + j]
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        assert_eq!(x.len(), n);
        // L z = b
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= self.at(i, k) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
        // Lᵀ x = z
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.at(k, i) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
    }

    /// Solves `Lᵀ x = b`. Used to turn i.i.d. standard normals into a draw
    /// with covariance `A⁻¹`.
    pub fn solve_lt(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n {
                s -= self.at(k, i) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
        x
    }

    /// `log |A|`.
    pub fn log_det(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            acc += math::ln(self.at(i, i));
        }
        2.0 * acc
    }

    /// Updates the factorization of `A` to that of `A + sigma · x xᵀ`.
    ///
    /// A downdate (`sigma < 0`) fails with `NotPositiveDefinite` when the
    /// result would lose definiteness; the factor is left unusable in that
    /// case and must be rebuilt.
    pub fn rank_one_update(&mut self, x: &[f64], sigma: f64) -> Result<()> {
        let n = self.n;
        assert_eq!(x.len(), n);
        if sigma == 0.0 {
            return Ok(());
        }
        let s = math::sqrt(math::abs(sigma));
        let sign = if sigma > 0.0 { 1.0 } else { -1.0 };
        let mut work: Vec<f64> = x.iter().map(|v| v * s).collect();
        for k in 0..n {
            let lkk = self.at(k, k);
            let r2 = lkk * lkk + sign * work[k] * work[k];
            if !(r2 > 0.0) || !r2.is_finite() {
                return Err(CoreError::NotPositiveDefinite { pivot: k });
            }
            let r = math::sqrt(r2);
            let c = r / lkk;
            let sk = work[k] / lkk;
            self.l[k * n + k] = r;
            for i in k + 1..n {
                let lik = (self.l[i * n + k] + sign * sk * work[i]) / c;
                self.l[i * n + k] = lik;
                work[i] = c * work[i] - sk * lik;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize, seed: u64) -> Mat {
        // Random-ish SPD matrix from a deterministic congruential fill.
        let mut state = seed;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let b = Mat::from_fn(n, n, |_, _| next());
        let mut g = b.gram();
        for i in 0..n {
            g[(i, i)] += n as f64;
        }
        g
    }

    #[test]
    fn factor_reconstructs() {
        let a = spd(8, 7);
        let ch = Cholesky::factor(&a).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                let mut s = 0.0;
                for k in 0..=i.min(j) {
                    s += ch.at(i, k) * ch.at(j, k);
                }
                assert!((s - a[(i, j)]).abs() < 1e-10, "({i},{j})");
            }
        }
    }

    #[test]
    fn solve_matches_matvec() {
        let a = spd(6, 3);
        let ch = Cholesky::factor(&a).unwrap();
        let x: Vec<f64> = (0..6).map(|i| (i as f64) - 2.5).collect();
        let b = a.matvec(&x);
        let got = ch.solve(&b);
        for i in 0..6 {
            assert!((got[i] - x[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_rejected() {
        let mut a = Mat::identity(3);
        a[(2, 2)] = -1.0;
        assert!(matches!(
            Cholesky::factor(&a),
            Err(CoreError::NotPositiveDefinite { pivot: 2 })
        ));
    }

    #[test]
    fn rank_one_update_matches_refactorization() {
        let a = spd(7, 11);
        let x: Vec<f64> = (0..7).map(|i| 0.3 * (i as f64) - 1.0).collect();
        for &sigma in &[0.8, -0.05] {
            let mut updated = Cholesky::factor(&a).unwrap();
            updated.rank_one_update(&x, sigma).unwrap();
            let mut a2 = a.clone();
            a2.add_sym_rank_one(&x, sigma);
            let fresh = Cholesky::factor(&a2).unwrap();
            for i in 0..7 {
                for j in 0..=i {
                    assert!(
                        (updated.at(i, j) - fresh.at(i, j)).abs() < 1e-9,
                        "sigma {sigma} entry ({i},{j})"
                    );
                }
            }
            assert!((updated.log_det() - fresh.log_det()).abs() < 1e-9);
        }
    }

    #[test]
    fn downdate_past_definiteness_fails() {
        let a = Mat::identity(3);
        let mut ch = Cholesky::factor(&a).unwrap();
        let x = [2.0, 0.0, 0.0];
        assert!(ch.rank_one_update(&x, -1.0).is_err());
    }

    #[test]
    fn empty_matrix_is_fine() {
        let a = Mat::zeros(0, 0);
        let ch = Cholesky::factor(&a).unwrap();
        assert_eq!(ch.solve(&[]).len(), 0);
        assert_eq!(ch.log_det(), 0.0);
    }
}
