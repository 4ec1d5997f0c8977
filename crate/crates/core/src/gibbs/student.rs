//! Gibbs sampler for Student's t increments.
//!
//! The unit-scale Student density is a scale mixture of normals with a
//! gamma mixing law: `u | w ~ N(0, 1/w)` and `w ~ gamma(dof/2, 2)`.
//! Conditioned on `w`, the increments are Gaussian with precision
//! `AᵀA/σ² + diag(w)`; conditioned on `u`, each `w_k` is gamma with shape
//! `(dof+1)/2` and scale `2/(1 + u_k²)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::forward::ProblemInstance;
use crate::linalg::{Cholesky, Mat};
use crate::rng::{sample_gamma, sample_mvn_from_factor, RngStream};

use super::{
    check_measurements, clamp_positive, materialize_a, run_chain, ChainConfig, ChainState,
    GibbsKernel, MmseResult, StudentWRate,
};

pub(crate) struct StudentKernel {
    gram_scaled: Mat, // AᵀA / σ²
    linear: Vec<f64>, // Aᵀy / σ²
    dof: f64,
    w_rate: StudentWRate,
    state: ChainState,
    clamps: usize,
}

impl StudentKernel {
    pub(crate) fn new(
        rng: &mut RngStream,
        inst: &ProblemInstance,
        y: &[f64],
        dof: f64,
        w_rate: StudentWRate,
    ) -> Result<Self> {
        if !(dof > 0.0) || !dof.is_finite() {
            return Err(invalid("dof", dof, "must be positive and finite"));
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

        // Initialization: u = 0, w from its gamma(dof/2, 2) prior.
        let mut mixing = Vec::with_capacity(k);
        for _ in 0..k {
            mixing.push(sample_gamma(rng, dof / 2.0, 2.0)?);
        }
        Ok(StudentKernel {
            gram_scaled,
            linear,
            dof,
            w_rate,
            state: ChainState {
                increments: vec![0.0; k],
                mixing,
                support: None,
            },
            clamps: 0,
        })
    }
}

impl StudentKernel {
    /// `u | w, y`: Gaussian with precision `AᵀA/σ² + diag(w)`.
    fn draw_increments(&mut self, rng: &mut RngStream) -> Result<()> {
        let k = self.state.increments.len();
        let mut precision = self.gram_scaled.clone();
        for i in 0..k {
            precision[(i, i)] += self.state.mixing[i];
        }
        let chol = Cholesky::factor(&precision)?;
        self.state.increments = sample_mvn_from_factor(rng, &chol, &self.linear);
        Ok(())
    }

    /// `w | u`: gamma with shape `(dof+1)/2`.
    fn draw_mixing(&mut self, rng: &mut RngStream) -> Result<()> {
        let shape = (self.dof + 1.0) / 2.0;
        for i in 0..self.state.mixing.len() {
            let u = self.state.increments[i];
            let denom = match self.w_rate {
                StudentWRate::OnePlusUSquared => 1.0 + u * u,
                // Degenerate at u = -1; kept only for comparison runs.
                StudentWRate::SquaredOnePlusU => ((1.0 + u) * (1.0 + u)).max(1e-12),
            };
            let w = sample_gamma(rng, shape, 2.0 / denom)?;
            self.state.mixing[i] = clamp_positive(w, &mut self.clamps);
        }
        Ok(())
    }
}

impl GibbsKernel for StudentKernel {
    fn dim(&self) -> usize {
        self.state.increments.len()
    }

    fn step(&mut self, rng: &mut RngStream) -> Result<()> {
        self.draw_increments(rng)?;
        self.draw_mixing(rng)
    }

    fn state(&self) -> &ChainState {
        &self.state
    }

    fn positivity_clamps(&self) -> usize {
        self.clamps
    }
}

/// Posterior-mean estimate for Student's t increments with `dof` degrees
/// of freedom.
pub fn gibbs_student(
    rng: &mut RngStream,
    inst: &ProblemInstance,
    y: &[f64],
    dof: f64,
    cfg: &ChainConfig,
) -> Result<MmseResult> {
    let mut kernel = StudentKernel::new(rng, inst, y, dof, cfg.student_w_rate)?;
    run_chain(&mut kernel, rng, cfg)
}
