//! Gibbs sampler for Laplace increments.
//!
//! The Laplace density is a scale mixture of normals: `u | w ~ N(0, w)`
//! with `w` exponential of scale `2/b²`. Conditioned on `w`, the
//! increments are Gaussian with precision `AᵀA/σ² + diag(1/w)`; conditioned
//! on `u`, each `w_k` is generalized inverse Gaussian with
//! `(λ₁, λ₂, a) = (b², u_k², 1/2)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::forward::ProblemInstance;
use crate::linalg::{Cholesky, Mat};
use crate::rng::{sample_exponential, sample_gig, sample_mvn_from_factor, GigParams, RngStream};

use super::{
    check_measurements, clamp_positive, materialize_a, run_chain, ChainConfig, ChainState,
    GibbsKernel, MmseResult,
};

pub(crate) struct LaplaceKernel {
    gram_scaled: Mat,   // AᵀA / σ²
    linear: Vec<f64>,   // Aᵀy / σ²
    scale_b: f64,
    state: ChainState,
    clamps: usize,
}

impl LaplaceKernel {
    pub(crate) fn new(
        rng: &mut RngStream,
        inst: &ProblemInstance,
        y: &[f64],
        scale_b: f64,
    ) -> Result<Self> {
        if !(scale_b > 0.0) || !scale_b.is_finite() {
            return Err(invalid("scale_b", scale_b, "must be positive and finite"));
        }
        check_measurements(inst, y)?;
        let k = inst.k();
        let a = materialize_a(inst);
        let inv_var = if inst.m() > 0 { 1.0 / inst.noise_var() } else { 0.0 };
        let mut gram_scaled = a.gram();
        for i in 0..k {
            for j in 0..k {
                gram_scaled[(i, j)] *= inv_var;
            }
        }
        let linear: Vec<f64> = a.matvec_t(y).iter().map(|v| v * inv_var).collect();

        // Initialization: u = 0, w from its prior.
        let prior_scale = 2.0 / (scale_b * scale_b);
        let mut mixing = Vec::with_capacity(k);
        for _ in 0..k {
            mixing.push(sample_exponential(rng, prior_scale)?);
        }
        Ok(LaplaceKernel {
            gram_scaled,
            linear,
            scale_b,
            state: ChainState {
                increments: vec![0.0; k],
                mixing,
                support: None,
            },
            clamps: 0,
        })
    }
}

impl GibbsKernel for LaplaceKernel {
    fn dim(&self) -> usize {
        self.state.increments.len()
    }

    fn step(&mut self, rng: &mut RngStream) -> Result<()> {
        let k = self.dim();
        // u | w, y: Gaussian with precision AᵀA/σ² + diag(1/w).
        let mut precision = self.gram_scaled.clone();
        for i in 0..k {
            precision[(i, i)] += 1.0 / self.state.mixing[i];
        }
        let chol = Cholesky::factor(&precision)?;
        self.state.increments = sample_mvn_from_factor(rng, &chol, &self.linear);

        // w | u: GIG(b², u², 1/2) coordinate-wise.
        let b2 = self.scale_b * self.scale_b;
        for i in 0..k {
            let u = self.state.increments[i];
            let params = GigParams::new(b2, u * u, 0.5)?;
            self.state.mixing[i] = clamp_positive(sample_gig(rng, &params), &mut self.clamps);
        }
        Ok(())
    }

    fn state(&self) -> &ChainState {
        &self.state
    }

    fn positivity_clamps(&self) -> usize {
        self.clamps
    }
}

/// Posterior-mean estimate for Laplace increments of scale `scale_b`.
pub fn gibbs_laplace(
    rng: &mut RngStream,
    inst: &ProblemInstance,
    y: &[f64],
    scale_b: f64,
    cfg: &ChainConfig,
) -> Result<MmseResult> {
    let mut kernel = LaplaceKernel::new(rng, inst, y, scale_b)?;
    run_chain(&mut kernel, rng, cfg)
}
