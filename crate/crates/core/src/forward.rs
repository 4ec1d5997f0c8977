//! Forward models: system matrices, SNR calibration, measurement
//! simulation, and dataset generation for the benchmark.

use alloc::vec::Vec;

use crate::error::{invalid, CoreError, Result};
use crate::linalg::Mat;
use crate::math;
use crate::process::{generate_signal, IdDistribution, Signal};
use crate::rng::{compose_stream, sample_gaussian, RngStream};

/// How the system matrix was constructed.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorKind {
    /// Banded convolution with a unit-sum truncated Gaussian PSF.
    Deconvolution { psf: Vec<f64>, psf_var: f64 },
    /// Selected DFT rows, DC first, then the real parts and imaginary
    /// parts of the remaining frequencies. The selected frequency indices
    /// are kept so an instance can be reproduced exactly.
    FourierSampling { frequencies: Vec<usize> },
    /// Matrix supplied directly (test instances, pure-prior chains).
    Explicit,
}

/// A measurement setup `y = H s + n`, with `n ~ N(0, noise_var · I)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProblemInstance {
    h: Mat,
    kind: OperatorKind,
    noise_var: f64,
}

impl ProblemInstance {
    /// Wraps an explicit matrix. `noise_var = 0` means noiseless.
    pub fn from_matrix(h: Mat, noise_var: f64) -> Result<Self> {
        if !h.is_finite() {
            return Err(invalid("h", f64::NAN, "matrix entries must be finite"));
        }
        if !(noise_var >= 0.0) || !noise_var.is_finite() {
            return Err(invalid(
                "noise_var",
                noise_var,
                "must be nonnegative and finite",
            ));
        }
        Ok(ProblemInstance {
            h,
            kind: OperatorKind::Explicit,
            noise_var,
        })
    }

    pub fn h(&self) -> &Mat {
        &self.h
    }

    /// Number of measurements.
    pub fn m(&self) -> usize {
        self.h.nrows()
    }

    /// Signal length.
    pub fn k(&self) -> usize {
        self.h.ncols()
    }

    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn noise_var(&self) -> f64 {
        self.noise_var
    }

    pub fn set_noise_var(&mut self, noise_var: f64) -> Result<()> {
        if !(noise_var >= 0.0) || !noise_var.is_finite() {
            return Err(invalid(
                "noise_var",
                noise_var,
                "must be nonnegative and finite",
            ));
        }
        self.noise_var = noise_var;
        Ok(())
    }
}

/// Builds the banded convolution operator for a truncated Gaussian PSF.
///
/// Taps are `exp(-(j - c)² / (2 psf_var))` at integer offsets around the
/// central index `c`, normalized to unit sum; each row of the
/// `(k - psf_len + 1) × k` matrix holds the reversed taps. `psf_len = 1`
/// reduces to identity-with-cropping.
pub fn build_deconvolution(k: usize, psf_len: usize, psf_var: f64) -> Result<ProblemInstance> {
    if psf_len == 0 || psf_len % 2 == 0 {
        return Err(invalid("psf_len", psf_len as f64, "must be odd"));
    }
    if psf_len > k {
        return Err(invalid(
            "psf_len",
            psf_len as f64,
            "must not exceed the signal length",
        ));
    }
    if !(psf_var > 0.0) || !psf_var.is_finite() {
        return Err(invalid("psf_var", psf_var, "must be positive and finite"));
    }
    let c = (psf_len - 1) as f64 / 2.0;
    let mut psf: Vec<f64> = (0..psf_len)
        .map(|j| math::exp(-(j as f64 - c) * (j as f64 - c) / (2.0 * psf_var)))
        .collect();
    let sum: f64 = psf.iter().sum();
    for v in &mut psf {
        *v /= sum;
    }

    let m = k - psf_len + 1;
    let mut h = Mat::zeros(m, k);
    for row in 0..m {
        for j in 0..psf_len {
            h[(row, row + j)] = psf[psf_len - 1 - j];
        }
    }
    Ok(ProblemInstance {
        h,
        kind: OperatorKind::Deconvolution { psf, psf_var },
        noise_var: 0.0,
    })
}

/// Builds a real Fourier-sampling operator from `m_prime` DFT rows of
/// length `k`: DC is always kept, and the remaining `m_prime - 1`
/// frequencies are drawn without replacement from `1..=k/2`, stratified
/// over log-spaced bands with selection weight proportional to
/// `1 / (1 + f)` so low frequencies are sampled densest. Real parts of the
/// non-DC rows are stacked first, then imaginary parts, for
/// `m = 2·m_prime - 1` rows in total.
pub fn build_fourier_sampling(k: usize, m_prime: usize, rng: &mut RngStream) -> Result<ProblemInstance> {
    let max_freq = k / 2;
    if m_prime == 0 || m_prime > max_freq + 1 {
        return Err(invalid(
            "m_prime",
            m_prime as f64,
            "must lie in 1..=(k/2 + 1)",
        ));
    }
    let frequencies = select_frequencies(max_freq, m_prime - 1, rng);

    let m = 2 * m_prime - 1;
    let mut h = Mat::zeros(m, k);
    for j in 0..k {
        h[(0, j)] = 1.0; // DC row
    }
    let n_freq = frequencies.len();
    for (i, &f) in frequencies.iter().enumerate() {
        for j in 0..k {
            let phase = 2.0 * core::f64::consts::PI * (f as f64) * (j as f64) / (k as f64);
            h[(1 + i, j)] = math::cos(phase);
            h[(1 + n_freq + i, j)] = -math::sin(phase);
        }
    }
    Ok(ProblemInstance {
        h,
        kind: OperatorKind::FourierSampling { frequencies },
        noise_var: 0.0,
    })
}

/// Stratifies `1..=max_freq` into `count` log-spaced bands, draws one
/// frequency per band with weight `1/(1+f)`, and fills any deficit by a
/// global weighted draw without replacement.
fn select_frequencies(max_freq: usize, count: usize, rng: &mut RngStream) -> Vec<usize> {
    let mut chosen: Vec<usize> = Vec::with_capacity(count);
    if count == 0 {
        return chosen;
    }
    let mut taken = alloc::vec![false; max_freq + 1];
    let log_hi = math::ln(max_freq as f64 + 1.0);
    for band in 0..count {
        let lo = math::exp(log_hi * band as f64 / count as f64);
        let hi = math::exp(log_hi * (band + 1) as f64 / count as f64);
        let lo_idx = libm::ceil(lo) as usize;
        let hi_idx = (libm::ceil(hi) as usize).min(max_freq + 1);
        let candidates: Vec<usize> = (lo_idx.max(1)..hi_idx).filter(|&f| !taken[f]).collect();
        if let Some(f) = weighted_pick(&candidates, rng) {
            taken[f] = true;
            chosen.push(f);
        }
    }
    while chosen.len() < count {
        let candidates: Vec<usize> = (1..=max_freq).filter(|&f| !taken[f]).collect();
        match weighted_pick(&candidates, rng) {
            Some(f) => {
                taken[f] = true;
                chosen.push(f);
            }
            None => break,
        }
    }
    chosen.sort_unstable();
    chosen
}

fn weighted_pick(candidates: &[usize], rng: &mut RngStream) -> Option<usize> {
    if candidates.is_empty() {
        return None;
    }
    let total: f64 = candidates.iter().map(|&f| 1.0 / (1.0 + f as f64)).sum();
    let mut target = rng.uniform() * total;
    for &f in candidates {
        target -= 1.0 / (1.0 + f as f64);
        if target <= 0.0 {
            return Some(f);
        }
    }
    Some(*candidates.last().unwrap())
}

/// Noise variance that realizes `target_snr_db` on the given signals:
/// the mean of `‖H s‖² / M` over the set, divided by `10^(snr/10)`.
pub fn calibrate_noise(
    inst: &ProblemInstance,
    signals: &[Signal],
    target_snr_db: f64,
) -> Result<f64> {
    if signals.is_empty() {
        return Err(invalid("signals", 0.0, "calibration set must be nonempty"));
    }
    if !target_snr_db.is_finite() {
        return Err(invalid("target_snr_db", target_snr_db, "must be finite"));
    }
    if inst.m() == 0 {
        return Err(CoreError::DimensionMismatch {
            context: "calibration operator",
            expected: 1,
            got: 0,
        });
    }
    let m = inst.m() as f64;
    let mut mean_power = 0.0;
    for s in signals {
        let hs = inst.h().matvec(s.as_slice());
        mean_power += hs.iter().map(|v| v * v).sum::<f64>() / m;
    }
    mean_power /= signals.len() as f64;
    if !(mean_power > 0.0) || !mean_power.is_finite() {
        return Err(CoreError::DegenerateCalibration);
    }
    Ok(mean_power / math::powf(10.0, target_snr_db / 10.0))
}

/// Average measurement SNR (in dB) realized by an instance on a signal
/// set, defined as the ratio of mean per-measurement signal power to the
/// noise variance.
pub fn realized_snr_db(inst: &ProblemInstance, signals: &[Signal]) -> f64 {
    let m = inst.m() as f64;
    let mut mean_power = 0.0;
    for s in signals {
        let hs = inst.h().matvec(s.as_slice());
        mean_power += hs.iter().map(|v| v * v).sum::<f64>() / m;
    }
    mean_power /= signals.len() as f64;
    10.0 * math::log10(mean_power / inst.noise_var())
}

/// `y = H s + n`. With `noise_var = 0` the measurements are exact.
pub fn simulate_measurements(
    rng: &mut RngStream,
    inst: &ProblemInstance,
    signal: &Signal,
) -> Result<Vec<f64>> {
    if signal.len() != inst.k() {
        return Err(CoreError::DimensionMismatch {
            context: "simulate_measurements",
            expected: inst.k(),
            got: signal.len(),
        });
    }
    let mut y = inst.h().matvec(signal.as_slice());
    if inst.noise_var() > 0.0 {
        for v in &mut y {
            *v += sample_gaussian(rng, 0.0, inst.noise_var())?;
        }
    }
    Ok(y)
}

/// One ground-truth signal and its simulated measurements.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetPair {
    pub signal: Signal,
    pub measurements: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SplitSizes {
    pub repository: usize,
    pub validation: usize,
    pub test: usize,
}

/// Repository/validation/test collections generated from one seed.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetTriple {
    pub repository: Vec<DatasetPair>,
    pub validation: Vec<DatasetPair>,
    pub test: Vec<DatasetPair>,
    pub seed: u64,
}

/// Stream-role tags used when deriving per-example generators.
pub const ROLE_SIGNAL: u8 = 1;
pub const ROLE_NOISE: u8 = 2;
pub const ROLE_OPERATOR: u8 = 3;

/// Split tags for stream derivation.
pub const SPLIT_REPOSITORY: u8 = 1;
pub const SPLIT_VALIDATION: u8 = 2;
pub const SPLIT_TEST: u8 = 3;

/// Generates a full dataset triple. Every example owns two private
/// streams (signal and noise) derived from `(seed, split, index)`, so
/// splits never share randomness, regeneration is exact, and the first
/// `n` repository examples do not depend on the repository size.
pub fn generate_dataset(
    seed: u64,
    dist: &IdDistribution,
    inst: &ProblemInstance,
    sizes: &SplitSizes,
) -> Result<DatasetTriple> {
    let repository = generate_split(seed, SPLIT_REPOSITORY, sizes.repository, dist, inst)?;
    let validation = generate_split(seed, SPLIT_VALIDATION, sizes.validation, dist, inst)?;
    let test = generate_split(seed, SPLIT_TEST, sizes.test, dist, inst)?;
    Ok(DatasetTriple {
        repository,
        validation,
        test,
        seed,
    })
}

/// Generates `count` pairs of one split; used by [`generate_dataset`] and
/// by prefix-stable training exports.
pub fn generate_split(
    seed: u64,
    split: u8,
    count: usize,
    dist: &IdDistribution,
    inst: &ProblemInstance,
) -> Result<Vec<DatasetPair>> {
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut sig_rng = RngStream::with_stream(seed, compose_stream(ROLE_SIGNAL, split, i as u64));
        let (signal, _) = generate_signal(&mut sig_rng, dist, inst.k())?;
        let mut noise_rng =
            RngStream::with_stream(seed, compose_stream(ROLE_NOISE, split, i as u64));
        let measurements = simulate_measurements(&mut noise_rng, inst, &signal)?;
        out.push(DatasetPair {
            signal,
            measurements,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deconvolution_paper_scale_shape() {
        let inst = build_deconvolution(100, 13, 4.0).unwrap();
        assert_eq!(inst.m(), 88);
        assert_eq!(inst.k(), 100);
    }

    #[test]
    fn single_tap_is_identity_with_cropping() {
        let inst = build_deconvolution(5, 1, 4.0).unwrap();
        assert_eq!(inst.m(), 5);
        let s = Signal::new(alloc::vec![1.0, -2.0, 3.0, 0.5, 0.0]).unwrap();
        let y = inst.h().matvec(s.as_slice());
        assert_eq!(y, s.as_slice());
    }

    #[test]
    fn rows_sum_to_one() {
        let inst = build_deconvolution(40, 9, 4.0).unwrap();
        let ones = Signal::new(alloc::vec![1.0; 40]).unwrap();
        for v in inst.h().matvec(ones.as_slice()) {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn deconvolution_is_toeplitz() {
        let inst = build_deconvolution(30, 7, 4.0).unwrap();
        let h = inst.h();
        for i in 1..inst.m() {
            for j in 1..inst.k() {
                assert_eq!(h[(i, j)], h[(i - 1, j - 1)]);
            }
        }
    }

    #[test]
    fn deconvolution_rejects_bad_sizes() {
        assert!(build_deconvolution(10, 4, 4.0).is_err());
        assert!(build_deconvolution(10, 11, 4.0).is_err());
        assert!(build_deconvolution(10, 3, 0.0).is_err());
    }

    #[test]
    fn fourier_row_count_and_dc() {
        let mut rng = RngStream::new(9);
        let inst = build_fourier_sampling(100, 16, &mut rng).unwrap();
        assert_eq!(inst.m(), 31);
        let s = Signal::new((0..100).map(|i| i as f64 * 0.01).collect()).unwrap();
        let y = inst.h().matvec(s.as_slice());
        let total: f64 = s.as_slice().iter().sum();
        assert!((y[0] - total).abs() < 1e-9);
        match inst.kind() {
            OperatorKind::FourierSampling { frequencies } => {
                assert_eq!(frequencies.len(), 15);
                let mut sorted = frequencies.clone();
                sorted.dedup();
                assert_eq!(sorted.len(), 15, "frequencies must be distinct");
                assert!(frequencies.iter().all(|&f| (1..=50).contains(&f)));
            }
            _ => panic!("wrong kind"),
        }
    }

    #[test]
    fn fourier_row_pairs_have_period_power_k() {
        let mut rng = RngStream::new(10);
        let inst = build_fourier_sampling(64, 9, &mut rng).unwrap();
        let h = inst.h();
        let n_freq = 8;
        for i in 0..n_freq {
            let mut acc = 0.0;
            for j in 0..64 {
                let re = h[(1 + i, j)];
                let im = h[(1 + n_freq + i, j)];
                acc += re * re + im * im;
            }
            assert!((acc - 64.0).abs() < 1e-9);
        }
    }

    #[test]
    fn fourier_rejects_out_of_range() {
        let mut rng = RngStream::new(1);
        assert!(build_fourier_sampling(100, 0, &mut rng).is_err());
        assert!(build_fourier_sampling(100, 52, &mut rng).is_err());
        assert!(build_fourier_sampling(100, 51, &mut rng).is_ok());
    }

    #[test]
    fn calibration_definition() {
        // A signal with ‖Hs‖² = M · 1000 at 30 dB gives noise_var = 1.
        let inst = ProblemInstance::from_matrix(Mat::identity(4), 0.0).unwrap();
        let amp = math::sqrt(1000.0);
        let s = Signal::new(alloc::vec![amp; 4]).unwrap();
        let var = calibrate_noise(&inst, &[s], 30.0).unwrap();
        assert!((var - 1.0).abs() < 1e-9);
    }

    #[test]
    fn calibration_rejects_degenerate_input() {
        let inst = ProblemInstance::from_matrix(Mat::identity(4), 0.0).unwrap();
        let zero = Signal::new(alloc::vec![0.0; 4]).unwrap();
        assert!(matches!(
            calibrate_noise(&inst, &[zero], 30.0),
            Err(CoreError::DegenerateCalibration)
        ));
        let s = Signal::new(alloc::vec![1.0; 4]).unwrap();
        assert!(calibrate_noise(&inst, &[s.clone()], f64::NEG_INFINITY).is_err());
        assert!(calibrate_noise(&inst, &[], 30.0).is_err());
    }

    #[test]
    fn noiseless_simulation_is_exact() {
        let inst = build_deconvolution(20, 5, 4.0).unwrap();
        let mut rng = RngStream::new(3);
        let dist = IdDistribution::laplace(1.0).unwrap();
        let (s, _) = generate_signal(&mut rng, &dist, 20).unwrap();
        let y = simulate_measurements(&mut rng, &inst, &s).unwrap();
        assert_eq!(y, inst.h().matvec(s.as_slice()));
    }

    #[test]
    fn simulation_is_deterministic_per_stream() {
        let mut inst = build_deconvolution(20, 5, 4.0).unwrap();
        inst.set_noise_var(0.5).unwrap();
        let dist = IdDistribution::laplace(1.0).unwrap();
        let (s, _) = generate_signal(&mut RngStream::new(3), &dist, 20).unwrap();
        let a = simulate_measurements(&mut RngStream::with_stream(7, 1), &inst, &s).unwrap();
        let b = simulate_measurements(&mut RngStream::with_stream(7, 1), &inst, &s).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let inst = build_deconvolution(20, 5, 4.0).unwrap();
        let s = Signal::new(alloc::vec![1.0; 19]).unwrap();
        assert!(matches!(
            simulate_measurements(&mut RngStream::new(0), &inst, &s),
            Err(CoreError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn dataset_counts_and_determinism() {
        let mut inst = build_deconvolution(12, 3, 4.0).unwrap();
        inst.set_noise_var(0.1).unwrap();
        let dist = IdDistribution::laplace(1.0).unwrap();
        let sizes = SplitSizes {
            repository: 5,
            validation: 4,
            test: 3,
        };
        let a = generate_dataset(99, &dist, &inst, &sizes).unwrap();
        let b = generate_dataset(99, &dist, &inst, &sizes).unwrap();
        assert_eq!(a.repository.len(), 5);
        assert_eq!(a.validation.len(), 4);
        assert_eq!(a.test.len(), 3);
        assert_eq!(a, b);
    }

    #[test]
    fn splits_share_no_signals() {
        let mut inst = build_deconvolution(16, 3, 4.0).unwrap();
        inst.set_noise_var(0.1).unwrap();
        let dist = IdDistribution::laplace(1.0).unwrap();
        let sizes = SplitSizes {
            repository: 30,
            validation: 30,
            test: 30,
        };
        let ds = generate_dataset(5, &dist, &inst, &sizes).unwrap();
        for v in &ds.validation {
            for t in &ds.test {
                assert_ne!(v.signal, t.signal);
            }
            for r in &ds.repository {
                assert_ne!(v.signal, r.signal);
            }
        }
    }

    #[test]
    fn repository_prefix_is_stable() {
        let mut inst = build_deconvolution(12, 3, 4.0).unwrap();
        inst.set_noise_var(0.1).unwrap();
        let dist = IdDistribution::laplace(1.0).unwrap();
        let small = generate_split(7, SPLIT_REPOSITORY, 8, &dist, &inst).unwrap();
        let large = generate_split(7, SPLIT_REPOSITORY, 20, &dist, &inst).unwrap();
        assert_eq!(&large[..8], &small[..]);
    }
}
