//! Seeded random streams and the scalar distribution samplers every
//! stochastic component of the harness draws from.
//!
//! Streams are counter-based: a `(seed, stream)` pair fully determines the
//! sequence, and distinct pairs are non-overlapping by construction, so
//! per-signal and per-chain generators can be handed out freely without
//! coordinating a global state.

use alloc::vec::Vec;

use rand::distr::Open01;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};

use crate::error::{invalid, CoreError, Result};
use crate::linalg::{Cholesky, Mat};
use crate::math;

/// Deterministic random stream identified by a `(seed, stream)` pair.
#[derive(Clone, Debug)]
pub struct RngStream {
    chacha: ChaCha12Rng,
    seed: u64,
    stream: u64,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut chacha = ChaCha12Rng::from_seed(expand_seed(seed));
        chacha.set_stream(stream);
        RngStream {
            chacha,
            seed,
            stream,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.chacha.random()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.chacha.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.chacha.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.chacha.fill_bytes(dest)
    }
}

fn expand_seed(seed: u64) -> [u8; 32] {
    let mut state = seed;
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed, e.g. one seed per grid point of an experiment.
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut state = seed ^ tag.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    let _ = splitmix64(&mut state);
    splitmix64(&mut state)
}

/// Composes a stream identifier from a role tag, a split tag, and an
/// example index (index must fit in 48 bits).
pub const fn compose_stream(role: u8, split: u8, index: u64) -> u64 {
    ((role as u64) << 56) | ((split as u64) << 48) | (index & 0xFFFF_FFFF_FFFF)
}

/// Draw from `N(mean, var)`.
pub fn sample_gaussian(rng: &mut RngStream, mean: f64, var: f64) -> Result<f64> {
    if !(var > 0.0) || !var.is_finite() {
        return Err(invalid("var", var, "must be positive and finite"));
    }
    let z: f64 = rng.sample(StandardNormal);
    Ok(mean + math::sqrt(var) * z)
}

/// Draw with pdf `(1/scale) e^{-x/scale}` on `x > 0`.
pub fn sample_exponential(rng: &mut RngStream, scale: f64) -> Result<f64> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(invalid("scale", scale, "must be positive and finite"));
    }
    let e: f64 = rng.sample(Exp1);
    Ok(scale * e)
}

/// Gamma draw in the shape/scale parameterization. Correct for
/// `shape < 1` as well (the backing sampler boosts `shape + 1` and applies
/// the power correction).
pub fn sample_gamma(rng: &mut RngStream, shape: f64, scale: f64) -> Result<f64> {
    if !(shape > 0.0) || !shape.is_finite() {
        return Err(invalid("shape", shape, "must be positive and finite"));
    }
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(invalid("scale", scale, "must be positive and finite"));
    }
    let g = Gamma::new(shape, scale).map_err(|_| invalid("shape", shape, "gamma parameters"))?;
    Ok(g.sample(rng))
}

/// Returns `true` with probability `prob_one`.
pub fn sample_bernoulli(rng: &mut RngStream, prob_one: f64) -> Result<bool> {
    if !(0.0..=1.0).contains(&prob_one) || !prob_one.is_finite() {
        return Err(invalid("prob_one", prob_one, "must lie in [0, 1]"));
    }
    Ok(rng.uniform() < prob_one)
}

/// Parameters of the generalized inverse Gaussian law with density
/// proportional to `x^{a-1} exp(-(lambda1·x + lambda2/x)/2)` on `x > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GigParams {
    lambda1: f64,
    lambda2: f64,
    order: f64,
}

impl GigParams {
    pub fn new(lambda1: f64, lambda2: f64, order: f64) -> Result<Self> {
        if !(lambda1 > 0.0) || !lambda1.is_finite() {
            return Err(invalid("lambda1", lambda1, "must be positive and finite"));
        }
        if !(lambda2 >= 0.0) || !lambda2.is_finite() {
            return Err(invalid("lambda2", lambda2, "must be nonnegative and finite"));
        }
        if !order.is_finite() {
            return Err(invalid("order", order, "must be finite"));
        }
        if lambda2 == 0.0 && order <= 0.0 {
            return Err(invalid(
                "order",
                order,
                "must be positive when lambda2 = 0 (law is non-normalizable otherwise)",
            ));
        }
        Ok(GigParams {
            lambda1,
            lambda2,
            order,
        })
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda1
    }

    pub fn lambda2(&self) -> f64 {
        self.lambda2
    }

    pub fn order(&self) -> f64 {
        self.order
    }
}

/// When `sqrt(lambda1·lambda2)` falls below this, the law is sampled
/// through its gamma limit instead of the rejection scheme.
const GIG_GAMMA_FALLBACK: f64 = 1e-8;

/// Draw from the generalized inverse Gaussian law.
///
/// Uses the rejection construction of Devroye on the log-transformed
/// density, which is log-concave: a flat center piece with two exponential
/// tails bounds `exp(psi)` from above, where `psi` is the recentered
/// log-density. Orders `a < 0` go through the reciprocal identity.
pub fn sample_gig(rng: &mut RngStream, params: &GigParams) -> f64 {
    sample_gig_raw(rng, params.lambda1, params.lambda2, params.order)
}

fn sample_gig_raw(rng: &mut RngStream, lambda1: f64, lambda2: f64, order: f64) -> f64 {
    if order < 0.0 {
        return 1.0 / sample_gig_raw(rng, lambda2, lambda1, -order);
    }
    let omega = math::sqrt(lambda1 * lambda2);
    if omega < GIG_GAMMA_FALLBACK && order > 0.0 {
        // Gamma limit; exact at lambda2 = 0.
        let g = Gamma::new(order, 2.0 / lambda1).expect("validated parameters");
        return g.sample(rng);
    }
    let z = devroye_two_sided(rng, omega, order);
    math::sqrt(lambda2 / lambda1) * z
}

/// Samples `z` with density proportional to
/// `z^{lam-1} exp(-omega (z + 1/z) / 2)`, `lam >= 0`, `omega > 0`.
fn devroye_two_sided(rng: &mut RngStream, omega: f64, lam: f64) -> f64 {
    let alpha = math::sqrt(omega * omega + lam * lam) - lam;
    // Recentred log-density of x = ln z - ln z_mode; concave with psi(0) = 0.
    let psi = |x: f64| -> f64 {
        let mut v = -alpha * (math::cosh(x) - 1.0);
        if lam != 0.0 {
            v -= lam * (math::exp(x) - x - 1.0);
        }
        v
    };
    let dpsi = |x: f64| -> f64 {
        let mut v = -alpha * math::sinh(x);
        if lam != 0.0 {
            v -= lam * (math::exp(x) - 1.0);
        }
        v
    };

    // Pick t, s > 0 with psi roughly -1 at t and -s. Any positive choice
    // keeps the hat valid; the search only tunes the acceptance rate.
    let pick = |dir: f64| -> f64 {
        let mut x = math::sqrt(2.0 / (alpha + lam));
        if !x.is_finite() || x <= 0.0 {
            x = 1.0;
        }
        for _ in 0..200 {
            let v = psi(dir * x);
            if v < -5.0 {
                x *= 0.7;
            } else if v > -0.2 {
                x *= 1.4;
            } else {
                break;
            }
        }
        x
    };
    let t = pick(1.0);
    let s = pick(-1.0);

    let psi_t = psi(t);
    let psi_s = psi(-s);
    let eta = -dpsi(t); // right tail decay rate, > 0
    let theta = dpsi(-s); // left tail decay rate, > 0
    let area_center = t + s;
    let area_right = math::exp(psi_t) / eta;
    let area_left = math::exp(psi_s) / theta;
    let total = area_center + area_right + area_left;

    let x_mode = math::asinh(lam / omega);
    loop {
        let pick_area = rng.uniform() * total;
        let (x, hat) = if pick_area < area_center {
            (-s + rng.uniform() * area_center, 0.0)
        } else if pick_area < area_center + area_right {
            let e: f64 = rng.sample(Exp1);
            let x = t + e / eta;
            (x, psi_t - eta * (x - t))
        } else {
            let e: f64 = rng.sample(Exp1);
            let x = -s - e / theta;
            (x, psi_s + theta * (x + s))
        };
        let u: f64 = rng.sample(Open01);
        if math::ln(u) <= psi(x) - hat {
            return math::exp(x_mode + x);
        }
    }
}

/// Exact draw from the multivariate Gaussian `N(P⁻¹ m, P⁻¹)` given the
/// precision matrix `P` and the linear term `m`: factor once, solve twice.
pub fn sample_mvn_from_precision(
    rng: &mut RngStream,
    precision: &Mat,
    linear_term: &[f64],
) -> Result<Vec<f64>> {
    if precision.nrows() != precision.ncols() {
        return Err(CoreError::DimensionMismatch {
            context: "precision matrix",
            expected: precision.nrows(),
            got: precision.ncols(),
        });
    }
    if linear_term.len() != precision.nrows() {
        return Err(CoreError::DimensionMismatch {
            context: "linear term",
            expected: precision.nrows(),
            got: linear_term.len(),
        });
    }
    let chol = Cholesky::factor(precision)?;
    Ok(sample_mvn_from_factor(rng, &chol, linear_term))
}

/// As [`sample_mvn_from_precision`] but reusing a prepared factorization.
pub fn sample_mvn_from_factor(rng: &mut RngStream, chol: &Cholesky, linear_term: &[f64]) -> Vec<f64> {
    let mut out = chol.solve(linear_term);
    let n = chol.dim();
    let mut z = Vec::with_capacity(n);
    for _ in 0..n {
        let v: f64 = rng.sample(StandardNormal);
        z.push(v);
    }
    let noise = chol.solve_lt(&z);
    for i in 0..n {
        out[i] += noise[i];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_streams_repeat_bit_for_bit() {
        let mut a = RngStream::with_stream(13, 7);
        let mut b = RngStream::with_stream(13, 7);
        for _ in 0..64 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn distinct_streams_differ() {
        let mut a = RngStream::with_stream(13, 7);
        let mut b = RngStream::with_stream(13, 8);
        let same = (0..16).filter(|_| a.next_u64() == b.next_u64()).count();
        assert!(same < 2);
    }

    #[test]
    fn gaussian_rejects_bad_variance() {
        let mut rng = RngStream::new(1);
        assert!(sample_gaussian(&mut rng, 5.0, 0.0).is_err());
        assert!(sample_gaussian(&mut rng, 5.0, -1.0).is_err());
        assert!(sample_gaussian(&mut rng, 5.0, f64::NAN).is_err());
    }

    #[test]
    fn exponential_support_is_positive() {
        let mut rng = RngStream::new(2);
        for _ in 0..1000 {
            assert!(sample_exponential(&mut rng, 1.0).unwrap() > 0.0);
        }
        assert!(sample_exponential(&mut rng, 0.0).is_err());
    }

    #[test]
    fn bernoulli_degenerate_ends() {
        let mut rng = RngStream::new(3);
        for _ in 0..200 {
            assert!(!sample_bernoulli(&mut rng, 0.0).unwrap());
            assert!(sample_bernoulli(&mut rng, 1.0).unwrap());
        }
        assert!(sample_bernoulli(&mut rng, 1.2).is_err());
    }

    #[test]
    fn gig_params_reject_non_normalizable() {
        assert!(GigParams::new(1.0, 0.0, 0.0).is_err());
        assert!(GigParams::new(1.0, 0.0, -0.5).is_err());
        assert!(GigParams::new(1.0, 0.0, 0.5).is_ok());
        assert!(GigParams::new(0.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn gig_draws_are_positive_and_finite() {
        let mut rng = RngStream::new(4);
        for &(l1, l2, a) in &[
            (1.0, 4.0, 0.5),
            (4.0, 4.0, 0.5),
            (1.0, 1e-20, 0.5),
            (2.0, 3.0, -0.7),
            (0.5, 0.5, 3.0),
        ] {
            let p = GigParams::new(l1, l2, a).unwrap();
            for _ in 0..2000 {
                let x = sample_gig(&mut rng, &p);
                assert!(x > 0.0 && x.is_finite(), "({l1},{l2},{a}) gave {x}");
            }
        }
    }

    #[test]
    fn mvn_rejects_indefinite_precision() {
        let mut rng = RngStream::new(5);
        let mut p = Mat::identity(2);
        p[(1, 1)] = -1.0;
        assert!(matches!(
            sample_mvn_from_precision(&mut rng, &p, &[0.0, 0.0]),
            Err(CoreError::NotPositiveDefinite { .. })
        ));
    }
}
