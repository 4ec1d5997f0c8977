//! Lévy-process signal synthesis and the discrete prior model.
//!
//! A sampled Lévy process on the integer grid is the cumulative sum of
//! i.i.d. increments `u`, and conversely `u = D s` for the first-order
//! finite-difference matrix `D` (whose first row is the identity, matching
//! `s(0) = 0`). Everything here works in terms of that exact pair.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{invalid, Result};
use crate::math;
use crate::rng::RngStream;

/// Increment law of the process: one of the four infinitely divisible
/// families the benchmark supports.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum IdDistribution {
    /// `N(0, var)`.
    Gaussian { var: f64 },
    /// `(b/2) e^{-b|u|}` with scale `b`.
    Laplace { scale: f64 },
    /// `mass_at_zero · δ(u) + (1 - mass_at_zero) · (b/2) e^{-b|u|}`.
    BernoulliLaplace { mass_at_zero: f64, scale: f64 },
    /// Unit-scale Student's t: density proportional to
    /// `(1 + u²)^{-(dof+1)/2}` (no scaling of `u²` by `dof`).
    StudentT { dof: f64 },
}

impl IdDistribution {
    pub fn gaussian(var: f64) -> Result<Self> {
        if !(var > 0.0) || !var.is_finite() {
            return Err(invalid("var", var, "must be positive and finite"));
        }
        Ok(IdDistribution::Gaussian { var })
    }

    pub fn laplace(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(invalid("scale", scale, "must be positive and finite"));
        }
        Ok(IdDistribution::Laplace { scale })
    }

    pub fn bernoulli_laplace(mass_at_zero: f64, scale: f64) -> Result<Self> {
        if !(mass_at_zero > 0.0 && mass_at_zero < 1.0) {
            return Err(invalid(
                "mass_at_zero",
                mass_at_zero,
                "must lie strictly inside (0, 1)",
            ));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(invalid("scale", scale, "must be positive and finite"));
        }
        Ok(IdDistribution::BernoulliLaplace {
            mass_at_zero,
            scale,
        })
    }

    pub fn student_t(dof: f64) -> Result<Self> {
        if !(dof > 0.0) || !dof.is_finite() {
            return Err(invalid("dof", dof, "must be positive and finite"));
        }
        Ok(IdDistribution::StudentT { dof })
    }

    pub fn label(&self) -> &'static str {
        match self {
            IdDistribution::Gaussian { .. } => "gaussian",
            IdDistribution::Laplace { .. } => "laplace",
            IdDistribution::BernoulliLaplace { .. } => "bernoulli-laplace",
            IdDistribution::StudentT { .. } => "student-t",
        }
    }
}

/// Equidistant samples of the signal, `s(k)` for `k = 1..=K`.
#[derive(Clone, Debug, PartialEq)]
pub struct Signal {
    values: Vec<f64>,
}

/// Increment vector `u = D s`.
#[derive(Clone, Debug, PartialEq)]
pub struct Increments {
    values: Vec<f64>,
}

macro_rules! vector_newtype {
    ($name:ident) => {
        impl $name {
            pub fn new(values: Vec<f64>) -> Result<Self> {
                if values.is_empty() {
                    return Err(invalid("len", 0.0, "length must be at least 1"));
                }
                if let Some(&bad) = values.iter().find(|v| !v.is_finite()) {
                    return Err(invalid("entry", bad, "entries must be finite"));
                }
                Ok($name { values })
            }

            pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
                $name { values }
            }

            pub fn len(&self) -> usize {
                self.values.len()
            }

            pub fn is_empty(&self) -> bool {
                self.values.is_empty()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.values
            }

            pub fn into_values(self) -> Vec<f64> {
                self.values
            }
        }

        impl core::ops::Index<usize> for $name {
            type Output = f64;

            fn index(&self, i: usize) -> &f64 {
                &self.values[i]
            }
        }
    };
}

vector_newtype!(Signal);
vector_newtype!(Increments);

/// One draw from the increment law.
pub fn sample_increment(rng: &mut RngStream, dist: &IdDistribution) -> f64 {
    match *dist {
        IdDistribution::Gaussian { var } => {
            let z: f64 = rng.sample(StandardNormal);
            math::sqrt(var) * z
        }
        IdDistribution::Laplace { scale } => sample_laplace(rng, scale),
        IdDistribution::BernoulliLaplace {
            mass_at_zero,
            scale,
        } => {
            if rng.uniform() < mass_at_zero {
                0.0
            } else {
                sample_laplace(rng, scale)
            }
        }
        IdDistribution::StudentT { dof } => {
            // Scale mixture: u | w ~ N(0, 1/w) with w ~ gamma(dof/2, 2).
            let w = Gamma::new(dof / 2.0, 2.0)
                .expect("validated parameters")
                .sample(rng);
            let z: f64 = rng.sample(StandardNormal);
            z / math::sqrt(w)
        }
    }
}

fn sample_laplace(rng: &mut RngStream, scale: f64) -> f64 {
    let e: f64 = rng.sample(Exp1);
    let mag = e / scale;
    if rng.uniform() < 0.5 {
        mag
    } else {
        -mag
    }
}

/// Generates a length-`k` signal as the cumulative sum of i.i.d.
/// increments, returning both the signal and the increments that built it.
pub fn generate_signal(
    rng: &mut RngStream,
    dist: &IdDistribution,
    k: usize,
) -> Result<(Signal, Increments)> {
    if k == 0 {
        return Err(invalid("k", 0.0, "signal length must be at least 1"));
    }
    let mut u = Vec::with_capacity(k);
    for _ in 0..k {
        u.push(sample_increment(rng, dist));
    }
    let incs = Increments::from_vec_unchecked(u);
    let signal = signal_from_increments(&incs);
    Ok((signal, incs))
}

/// Cumulative sum: the inverse of [`finite_difference`].
pub fn signal_from_increments(incs: &Increments) -> Signal {
    let mut acc = 0.0;
    let values = incs
        .as_slice()
        .iter()
        .map(|&u| {
            acc += u;
            acc
        })
        .collect();
    Signal::from_vec_unchecked(values)
}

/// `u = D s`: `u_1 = s_1`, `u_k = s_k - s_{k-1}` for `k >= 2`.
pub fn finite_difference(signal: &Signal) -> Increments {
    let s = signal.as_slice();
    let mut u = vec![0.0; s.len()];
    u[0] = s[0];
    for k in 1..s.len() {
        u[k] = s[k] - s[k - 1];
    }
    Increments::from_vec_unchecked(u)
}

/// Log density of a single increment.
///
/// For the Bernoulli-Laplace law the density is taken with respect to the
/// mixed measure (an atom at the origin plus Lebesgue elsewhere), so an
/// exact zero evaluates to `ln(mass_at_zero)` and everything else to the
/// continuous part.
pub fn increment_log_pdf(dist: &IdDistribution, u: f64) -> f64 {
    match *dist {
        IdDistribution::Gaussian { var } => {
            -0.5 * (math::ln(2.0 * core::f64::consts::PI * var) + u * u / var)
        }
        IdDistribution::Laplace { scale } => math::ln(scale / 2.0) - scale * math::abs(u),
        IdDistribution::BernoulliLaplace {
            mass_at_zero,
            scale,
        } => {
            if u == 0.0 {
                math::ln(mass_at_zero)
            } else {
                math::ln(1.0 - mass_at_zero) + math::ln(scale / 2.0) - scale * math::abs(u)
            }
        }
        IdDistribution::StudentT { dof } => {
            student_log_norm(dof) - 0.5 * (dof + 1.0) * math::ln_1p(u * u)
        }
    }
}

/// `ln( Γ((dof+1)/2) / (Γ(dof/2) √π) )`.
pub(crate) fn student_log_norm(dof: f64) -> f64 {
    math::ln_gamma((dof + 1.0) / 2.0)
        - math::ln_gamma(dof / 2.0)
        - 0.5 * math::ln(core::f64::consts::PI)
}

/// Log prior of a signal: the sum of increment log densities over `D s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PriorLogDensity {
    /// Total log density; for Bernoulli-Laplace it is taken with respect
    /// to the mixed measure, with each exact-zero increment contributing
    /// `ln(mass_at_zero)`.
    pub log_density: f64,
    /// Number of exact-zero increments that hit the atom (always 0 for the
    /// purely continuous laws).
    pub atoms: usize,
}

pub fn log_prior(signal: &Signal, dist: &IdDistribution) -> PriorLogDensity {
    let incs = finite_difference(signal);
    let mut total = 0.0;
    let mut atoms = 0;
    let is_bl = matches!(dist, IdDistribution::BernoulliLaplace { .. });
    for &u in incs.as_slice() {
        total += increment_log_pdf(dist, u);
        if is_bl && u == 0.0 {
            atoms += 1;
        }
    }
    PriorLogDensity {
        log_density: total,
        atoms,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cumulative_sum_example() {
        let u = Increments::new(alloc::vec![1.0, -2.0, 3.0]).unwrap();
        let s = signal_from_increments(&u);
        assert_eq!(s.as_slice(), &[1.0, -1.0, 2.0]);
    }

    #[test]
    fn finite_difference_examples() {
        let s = Signal::new(alloc::vec![1.0, 1.0, 1.0]).unwrap();
        assert_eq!(finite_difference(&s).as_slice(), &[1.0, 0.0, 0.0]);
        let z = Signal::new(alloc::vec![0.0, 0.0, 0.0]).unwrap();
        assert!(finite_difference(&z).as_slice().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn gaussian_log_prior_at_zero() {
        let dist = IdDistribution::gaussian(1.0).unwrap();
        let s = Signal::new(alloc::vec![0.0, 0.0]).unwrap();
        let lp = log_prior(&s, &dist);
        let expected = 2.0 * (-0.5 * math::ln(2.0 * core::f64::consts::PI));
        assert!((lp.log_density - expected).abs() < 1e-12);
        assert_eq!(lp.atoms, 0);
    }

    #[test]
    fn laplace_log_prior_example() {
        // s = (1, -1) has increments (1, -2): 2 ln(1/2) - 3 at b = 1.
        let dist = IdDistribution::laplace(1.0).unwrap();
        let s = Signal::new(alloc::vec![1.0, -1.0]).unwrap();
        let lp = log_prior(&s, &dist);
        assert!((lp.log_density - (2.0 * math::ln(0.5) - 3.0)).abs() < 1e-12);
    }

    #[test]
    fn bernoulli_laplace_counts_atoms() {
        let dist = IdDistribution::bernoulli_laplace(0.8, 1.0).unwrap();
        let s = Signal::new(alloc::vec![0.0, 0.0, 2.0, 2.0]).unwrap();
        let lp = log_prior(&s, &dist);
        assert_eq!(lp.atoms, 3);
        let expected = 3.0 * math::ln(0.8) + math::ln(0.2) + math::ln(0.5) - 2.0;
        assert!((lp.log_density - expected).abs() < 1e-12);
    }

    #[test]
    fn parameter_validation() {
        assert!(IdDistribution::gaussian(0.0).is_err());
        assert!(IdDistribution::laplace(-1.0).is_err());
        assert!(IdDistribution::bernoulli_laplace(1.0, 1.0).is_err());
        assert!(IdDistribution::bernoulli_laplace(0.5, f64::INFINITY).is_err());
        assert!(IdDistribution::student_t(0.0).is_err());
        assert!(generate_signal(&mut RngStream::new(0), &IdDistribution::laplace(1.0).unwrap(), 0).is_err());
    }

    #[test]
    fn bl_increments_are_exact_zeros() {
        let dist = IdDistribution::bernoulli_laplace(0.9, 1.0).unwrap();
        let mut rng = RngStream::new(11);
        let (_, u) = generate_signal(&mut rng, &dist, 500).unwrap();
        assert!(u.as_slice().iter().filter(|&&v| v == 0.0).count() > 400);
    }
}
