//! Model-based estimators: the closed-form quadratic smoother, ADMM for
//! the total-variation and log penalties, and hyperparameter tuning on a
//! validation split.
//!
//! All three estimators minimize `‖y - H s‖² + τ · penalty(D s)` with the
//! penalty `‖·‖²`, `‖·‖₁`, or `Σ log(1 + ·²)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::diagnostics::mse;
use crate::error::{invalid, Result};
use crate::forward::{DatasetPair, ProblemInstance};
use crate::linalg::{norm2, Cholesky, Mat};
use crate::math;
use crate::process::Signal;

/// ADMM settings. `rho = None` uses the penalty weight `τ` itself.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmmConfig {
    pub rho: Option<f64>,
    pub max_iters: usize,
    pub tol_abs: f64,
    pub tol_rel: f64,
    pub warm_start: Option<Signal>,
}

impl Default for AdmmConfig {
    fn default() -> Self {
        AdmmConfig {
            rho: None,
            max_iters: 2000,
            tol_abs: 1e-6,
            tol_rel: 1e-4,
            warm_start: None,
        }
    }
}

impl AdmmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters", 0.0, "must be at least 1"));
        }
        if !(self.tol_abs > 0.0) || !(self.tol_rel > 0.0) {
            return Err(invalid("tolerances", self.tol_abs, "must be positive"));
        }
        if let Some(rho) = self.rho {
            if !(rho > 0.0) || !rho.is_finite() {
                return Err(invalid("rho", rho, "must be positive and finite"));
            }
        }
        Ok(())
    }

    fn rho_for(&self, tau: f64) -> f64 {
        self.rho.unwrap_or(tau)
    }
}

/// Strictly increasing grid of penalty weights.
#[derive(Clone, Debug, PartialEq)]
pub struct TauGrid {
    values: Vec<f64>,
}

impl TauGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("grid", 0.0, "must be nonempty"));
        }
        for w in values.windows(2) {
            if !(w[1] > w[0]) {
                return Err(invalid("grid", w[1], "must be strictly increasing"));
            }
        }
        if !(values[0] > 0.0) {
            return Err(invalid("grid", values[0], "must be positive"));
        }
        Ok(TauGrid { values })
    }

    /// `points` values log-spaced over `[min, max]`, inclusive.
    pub fn log_spaced(min: f64, max: f64, points: usize) -> Result<Self> {
        if !(min > 0.0) || !(max > min) || points < 2 {
            return Err(invalid("grid", min, "need 0 < min < max and >= 2 points"));
        }
        let (a, b) = (math::ln(min), math::ln(max));
        let values = (0..points)
            .map(|i| math::exp(a + (b - a) * i as f64 / (points - 1) as f64))
            .collect();
        Ok(TauGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Default for TauGrid {
    /// 40 points log-spaced over `[1e-4, 1e2]`.
    fn default() -> Self {
        TauGrid::log_spaced(1e-4, 1e2, 40).unwrap()
    }
}

/// `D s` (the first entry is `s_1` itself).
fn apply_d(s: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; s.len()];
    out[0] = s[0];
    for k in 1..s.len() {
        out[k] = s[k] - s[k - 1];
    }
    out
}

/// `Dᵀ v`.
fn apply_dt(v: &[f64]) -> Vec<f64> {
    let k = v.len();
    let mut out = vec![0.0; k];
    for i in 0..k {
        out[i] = v[i] - if i + 1 < k { v[i + 1] } else { 0.0 };
    }
    out
}

/// Adds `c · DᵀD` (tridiagonal with stencil [-1, 2, -1] and a trailing 1)
/// to a square matrix.
fn add_scaled_dtd(mat: &mut Mat, c: f64) {
    let k = mat.nrows();
    for i in 0..k {
        let diag = if i + 1 < k { 2.0 } else { 1.0 };
        mat[(i, i)] += c * diag;
        if i + 1 < k {
            mat[(i, i + 1)] -= c;
            mat[(i + 1, i)] -= c;
        }
    }
}

/// Which penalty an estimator uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariationalKind {
    L2,
    L1,
    Log,
}

/// Value of the estimator objective at `s`.
pub fn objective(kind: VariationalKind, inst: &ProblemInstance, y: &[f64], s: &[f64], tau: f64) -> f64 {
    let hs = inst.h().matvec(s);
    let mut data = 0.0;
    for i in 0..y.len() {
        let d = y[i] - hs[i];
        data += d * d;
    }
    let ds = apply_d(s);
    let pen: f64 = match kind {
        VariationalKind::L2 => ds.iter().map(|v| v * v).sum(),
        VariationalKind::L1 => ds.iter().map(|v| math::abs(*v)).sum(),
        VariationalKind::Log => ds.iter().map(|v| math::ln_1p(v * v)).sum(),
    };
    data + tau * pen
}

/// Quadratic estimator `(HᵀH + τ DᵀD)⁻¹ Hᵀ y` with a cached factorization,
/// for sweeping many measurement vectors at a fixed `τ`.
pub struct L2Solver {
    chol: Cholesky,
}

impl L2Solver {
    pub fn new(inst: &ProblemInstance, tau: f64) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid("tau", tau, "must be positive and finite"));
        }
        let mut a = inst.h().gram();
        add_scaled_dtd(&mut a, tau);
        Ok(L2Solver {
            chol: Cholesky::factor(&a)?,
        })
    }

    pub fn solve(&self, inst: &ProblemInstance, y: &[f64]) -> Signal {
        let hty = inst.h().matvec_t(y);
        Signal::from_vec_unchecked(self.chol.solve(&hty))
    }
}

/// One-shot quadratic estimate.
pub fn estimate_l2(y: &[f64], inst: &ProblemInstance, tau: f64) -> Result<Signal> {
    Ok(L2Solver::new(inst, tau)?.solve(inst, y))
}

/// Result of an ADMM run. Non-convergence is reported, never hidden: the
/// caller sees the final residuals and the flag.
#[derive(Clone, Debug)]
pub struct AdmmSolution {
    pub estimate: Signal,
    pub iterations: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub converged: bool,
    /// Achieved objective value.
    pub objective: f64,
    /// Unscaled dual variable `ρ·u`; lies in `[-τ, τ]` at a TV optimum.
    pub dual: Vec<f64>,
}

/// Scalar soft threshold: prox of `t·|·|` at `x`.
pub fn soft_threshold(x: f64, t: f64) -> f64 {
    if x > t {
        x - t
    } else if x < -t {
        x + t
    } else {
        0.0
    }
}

/// Scalar prox of `gamma · log(1 + t²) + (t - x)²/2`, computed exactly by
/// solving the cubic stationarity equation
/// `t³ - x t² + (1 + 2 gamma) t - x = 0` and keeping the real root with
/// the smallest objective.
pub fn log_prox(x: f64, gamma: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let b = -x;
    let c = 1.0 + 2.0 * gamma;
    let d = -x;
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    let shift = -b / 3.0;
    let mut roots = [0.0f64; 3];
    let n_roots;
    let disc = q * q / 4.0 + p * p * p / 27.0;
    if disc > 0.0 {
        let sq = math::sqrt(disc);
        let t = math::cbrt(-q / 2.0 + sq) + math::cbrt(-q / 2.0 - sq);
        roots[0] = t + shift;
        n_roots = 1;
    } else {
        let r = math::sqrt(-p / 3.0);
        let theta = math::acos((3.0 * q / (2.0 * p)) * math::sqrt(-3.0 / p)).clamp(0.0, core::f64::consts::PI);
        for (i, slot) in roots.iter_mut().enumerate() {
            let angle = theta / 3.0 - 2.0 * core::f64::consts::PI * i as f64 / 3.0;
            *slot = 2.0 * r * math::cos(angle) + shift;
        }
        n_roots = 3;
    }
    let scalar_obj = |t: f64| gamma * math::ln_1p(t * t) + 0.5 * (t - x) * (t - x);
    let mut best = roots[0];
    let mut best_val = scalar_obj(polish_cubic_root(roots[0], b, c, d));
    best = polish_cubic_root(best, b, c, d);
    for &r0 in roots.iter().take(n_roots).skip(1) {
        let r1 = polish_cubic_root(r0, b, c, d);
        let v = scalar_obj(r1);
        if v < best_val {
            best_val = v;
            best = r1;
        }
    }
    best
}

/// One-or-two Newton steps on `t³ + b t² + c t + d`.
fn polish_cubic_root(t0: f64, b: f64, c: f64, d: f64) -> f64 {
    let mut t = t0;
    for _ in 0..2 {
        let f = ((t + b) * t + c) * t + d;
        let df = (3.0 * t + 2.0 * b) * t + c;
        if df.abs() < 1e-300 {
            break;
        }
        t -= f / df;
    }
    t
}

/// ADMM on the splitting `z = D s` with a cached factorization of
/// `2 HᵀH + ρ DᵀD`, shared by the TV and log estimators.
struct AdmmEngine {
    chol: Cholesky,
    rho: f64,
    k: usize,
}

impl AdmmEngine {
    fn new(inst: &ProblemInstance, rho: f64) -> Result<Self> {
        let mut a = inst.h().gram();
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                a[(i, j)] *= 2.0;
            }
        }
        add_scaled_dtd(&mut a, rho);
        Ok(AdmmEngine {
            chol: Cholesky::factor(&a)?,
            k: inst.k(),
            rho,
        })
    }

    fn run(
        &self,
        inst: &ProblemInstance,
        y: &[f64],
        cfg: &AdmmConfig,
        warm: Option<&Signal>,
        mut prox: impl FnMut(f64) -> f64,
        mut on_iterate: impl FnMut(&[f64]),
    ) -> AdmmSolution {
        let k = self.k;
        let rho = self.rho;
        let hty2: Vec<f64> = inst.h().matvec_t(y).iter().map(|v| 2.0 * v).collect();

        let mut s: Vec<f64>;
        let mut z: Vec<f64>;
        match warm {
            Some(w) => {
                s = w.as_slice().to_vec();
                z = apply_d(&s);
            }
            None => {
                s = vec![0.0; k];
                z = vec![0.0; k];
            }
        }
        let mut u = vec![0.0; k];

        let mut iterations = 0;
        let mut primal_residual = f64::INFINITY;
        let mut dual_residual = f64::INFINITY;
        let mut converged = false;
        let sqrt_k = math::sqrt(k as f64);

        let mut rhs = vec![0.0; k];
        while iterations < cfg.max_iters {
            iterations += 1;
            // s-update: (2HᵀH + ρDᵀD) s = 2Hᵀy + ρDᵀ(z - u)
            let zu: Vec<f64> = (0..k).map(|i| z[i] - u[i]).collect();
            let dtzu = apply_dt(&zu);
            for i in 0..k {
                rhs[i] = hty2[i] + rho * dtzu[i];
            }
            s.copy_from_slice(&rhs);
            self.chol.solve_in_place(&mut s);

            let ds = apply_d(&s);
            let z_prev = z.clone();
            for i in 0..k {
                z[i] = prox(ds[i] + u[i]);
            }
            for i in 0..k {
                u[i] += ds[i] - z[i];
            }
            on_iterate(&s);

            let r: Vec<f64> = (0..k).map(|i| ds[i] - z[i]).collect();
            let zdiff: Vec<f64> = (0..k).map(|i| z[i] - z_prev[i]).collect();
            primal_residual = norm2(&r);
            dual_residual = rho * norm2(&apply_dt(&zdiff));
            let eps_pri = sqrt_k * cfg.tol_abs + cfg.tol_rel * norm2(&ds).max(norm2(&z));
            let dual_scale: Vec<f64> = apply_dt(&u).iter().map(|v| rho * v).collect();
            let eps_dual = sqrt_k * cfg.tol_abs + cfg.tol_rel * norm2(&dual_scale);
            if primal_residual <= eps_pri && dual_residual <= eps_dual {
                converged = true;
                break;
            }
        }

        let dual: Vec<f64> = u.iter().map(|v| rho * v).collect();
        AdmmSolution {
            estimate: Signal::from_vec_unchecked(s),
            iterations,
            primal_residual,
            dual_residual,
            converged,
            objective: 0.0, // filled by the caller, which knows the penalty
            dual,
        }
    }
}

/// TV estimator with a cached factorization.
pub struct L1Solver {
    engine: AdmmEngine,
    tau: f64,
    cfg: AdmmConfig,
}

impl L1Solver {
    pub fn new(inst: &ProblemInstance, tau: f64, cfg: &AdmmConfig) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid("tau", tau, "must be positive and finite"));
        }
        cfg.validate()?;
        Ok(L1Solver {
            engine: AdmmEngine::new(inst, cfg.rho_for(tau))?,
            tau,
            cfg: cfg.clone(),
        })
    }

    pub fn solve(&self, inst: &ProblemInstance, y: &[f64]) -> AdmmSolution {
        let thr = self.tau / self.engine.rho;
        let warm = self.cfg.warm_start.clone();
        let mut sol = self.engine.run(
            inst,
            y,
            &self.cfg,
            warm.as_ref(),
            |x| soft_threshold(x, thr),
            |_| {},
        );
        sol.objective = objective(VariationalKind::L1, inst, y, sol.estimate.as_slice(), self.tau);
        sol
    }
}

/// TV estimate `argmin ‖y - Hs‖² + τ‖Ds‖₁`.
pub fn estimate_l1(
    y: &[f64],
    inst: &ProblemInstance,
    tau: f64,
    cfg: &AdmmConfig,
) -> Result<AdmmSolution> {
    Ok(L1Solver::new(inst, tau, cfg)?.solve(inst, y))
}

/// Log-penalty estimator. Nonconvex: ADMM is warm-started from the TV
/// solution at the same `τ` (or an explicit warm start) and the returned
/// iterate is the best objective seen, so the result never falls behind
/// its own starting point.
pub struct LogSolver {
    engine: AdmmEngine,
    l1: L1Solver,
    tau: f64,
    cfg: AdmmConfig,
}

impl LogSolver {
    pub fn new(inst: &ProblemInstance, tau: f64, cfg: &AdmmConfig) -> Result<Self> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(invalid("tau", tau, "must be positive and finite"));
        }
        cfg.validate()?;
        Ok(LogSolver {
            engine: AdmmEngine::new(inst, cfg.rho_for(tau))?,
            l1: L1Solver::new(inst, tau, &AdmmConfig { warm_start: None, ..cfg.clone() })?,
            tau,
            cfg: cfg.clone(),
        })
    }

    pub fn solve(&self, inst: &ProblemInstance, y: &[f64]) -> AdmmSolution {
        let warm = match &self.cfg.warm_start {
            Some(w) => w.clone(),
            None => self.l1.solve(inst, y).estimate,
        };
        let gamma = self.tau / self.engine.rho;
        let tau = self.tau;

        let mut best = warm.as_slice().to_vec();
        let mut best_obj = objective(VariationalKind::Log, inst, y, &best, tau);
        let mut sol = self.engine.run(
            inst,
            y,
            &self.cfg,
            Some(&warm),
            |x| log_prox(x, gamma),
            |s| {
                let obj = objective(VariationalKind::Log, inst, y, s, tau);
                if obj < best_obj {
                    best_obj = obj;
                    best.copy_from_slice(s);
                }
            },
        );
        sol.estimate = Signal::from_vec_unchecked(best);
        sol.objective = best_obj;
        sol
    }
}

/// Log-penalty estimate `argmin ‖y - Hs‖² + τ Σ log(1 + [Ds]²)`.
pub fn estimate_log(
    y: &[f64],
    inst: &ProblemInstance,
    tau: f64,
    cfg: &AdmmConfig,
) -> Result<AdmmSolution> {
    Ok(LogSolver::new(inst, tau, cfg)?.solve(inst, y))
}

/// Outcome of a grid sweep: the selected weight, the MSE curve over the
/// grid, and a unimodality flag for the curve (a sanity signal, not an
/// error).
#[derive(Clone, Debug)]
pub struct TauSelection {
    pub tau: f64,
    pub index: usize,
    pub mse_per_tau: Vec<f64>,
    pub unimodal: bool,
}

/// Selects the grid index minimizing the MSE curve; ties go to the
/// smaller weight.
pub fn select_tau(mse_per_tau: &[f64], grid: &TauGrid) -> TauSelection {
    let mut index = 0;
    for (i, &v) in mse_per_tau.iter().enumerate() {
        if v < mse_per_tau[index] {
            index = i;
        }
    }
    TauSelection {
        tau: grid.values()[index],
        index,
        mse_per_tau: mse_per_tau.to_vec(),
        unimodal: is_unimodal(mse_per_tau),
    }
}

fn is_unimodal(curve: &[f64]) -> bool {
    let tol = 1e-9;
    let mut rising = false;
    for w in curve.windows(2) {
        let scale = w[0].abs().max(w[1].abs()).max(1e-300);
        if w[1] > w[0] + tol * scale {
            rising = true;
        } else if w[1] < w[0] - tol * scale && rising {
            return false;
        }
    }
    true
}

/// Mean squared error of an estimator over a split at a fixed `τ`.
pub fn split_mse(
    kind: VariationalKind,
    inst: &ProblemInstance,
    cfg: &AdmmConfig,
    split: &[DatasetPair],
    tau: f64,
) -> Result<f64> {
    let solver_l2;
    let solver_l1;
    let solver_log;
    let mut acc = 0.0;
    match kind {
        VariationalKind::L2 => {
            solver_l2 = L2Solver::new(inst, tau)?;
            for pair in split {
                let est = solver_l2.solve(inst, &pair.measurements);
                acc += mse(est.as_slice(), pair.signal.as_slice());
            }
        }
        VariationalKind::L1 => {
            solver_l1 = L1Solver::new(inst, tau, cfg)?;
            for pair in split {
                let est = solver_l1.solve(inst, &pair.measurements);
                acc += mse(est.estimate.as_slice(), pair.signal.as_slice());
            }
        }
        VariationalKind::Log => {
            solver_log = LogSolver::new(inst, tau, cfg)?;
            for pair in split {
                let est = solver_log.solve(inst, &pair.measurements);
                acc += mse(est.estimate.as_slice(), pair.signal.as_slice());
            }
        }
    }
    Ok(acc / split.len() as f64)
}

/// Sweeps the grid on a validation split and picks the weight with the
/// lowest MSE.
pub fn tune_tau(
    kind: VariationalKind,
    inst: &ProblemInstance,
    cfg: &AdmmConfig,
    split: &[DatasetPair],
    grid: &TauGrid,
) -> Result<TauSelection> {
    if split.is_empty() {
        return Err(invalid("split", 0.0, "tuning split must be nonempty"));
    }
    let mut curve = Vec::with_capacity(grid.values().len());
    for &tau in grid.values() {
        curve.push(split_mse(kind, inst, cfg, split, tau)?);
    }
    Ok(select_tau(&curve, grid))
}

/// Oracle tuning: the same sweep, run directly on the split the estimator
/// will be scored on. Reported with a star in the benchmark output.
pub fn tune_tau_oracle(
    kind: VariationalKind,
    inst: &ProblemInstance,
    cfg: &AdmmConfig,
    test_split: &[DatasetPair],
    grid: &TauGrid,
) -> Result<TauSelection> {
    tune_tau(kind, inst, cfg, test_split, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::build_deconvolution;
    use crate::linalg::Mat;

    fn identity_instance(k: usize) -> ProblemInstance {
        ProblemInstance::from_matrix(Mat::identity(k), 0.0).unwrap()
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(2.0, 0.5), 1.5);
        assert_eq!(soft_threshold(-2.0, 0.5), -1.5);
    }

    #[test]
    fn log_prox_at_origin_is_zero() {
        assert_eq!(log_prox(0.0, 0.3), 0.0);
    }

    #[test]
    fn log_prox_matches_grid_search() {
        for &(x, gamma) in &[(5.0, 0.1), (0.7, 0.5), (-3.0, 2.0), (1.2, 1.0), (0.05, 0.2)] {
            let got = log_prox(x, gamma);
            // Fine grid search oracle.
            let mut best = 0.0;
            let mut best_val = f64::INFINITY;
            let lo = -(x.abs() + 1.0);
            let hi = x.abs() + 1.0;
            let n = 2_000_000usize;
            for i in 0..=n {
                let t = lo + (hi - lo) * i as f64 / n as f64;
                let v = gamma * math::ln_1p(t * t) + 0.5 * (t - x) * (t - x);
                if v < best_val {
                    best_val = v;
                    best = t;
                }
            }
            assert!(
                (got - best).abs() < 1e-5,
                "x={x} gamma={gamma}: got {got}, grid {best}"
            );
            let got_val = gamma * math::ln_1p(got * got) + 0.5 * (got - x) * (got - x);
            assert!(got_val <= best_val + 1e-10);
        }
    }

    #[test]
    fn l2_small_tau_reproduces_data() {
        let inst = identity_instance(6);
        let y = [1.0, -0.5, 2.0, 0.0, 3.0, -1.0];
        let est = estimate_l2(&y, &inst, 1e-12).unwrap();
        for i in 0..6 {
            assert!((est[i] - y[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn l2_roughness_decreases_with_tau() {
        let inst = build_deconvolution(24, 5, 4.0).unwrap();
        let mut rng = crate::rng::RngStream::new(4);
        let dist = crate::process::IdDistribution::laplace(1.0).unwrap();
        let (s, _) = crate::process::generate_signal(&mut rng, &dist, 24).unwrap();
        let y = inst.h().matvec(s.as_slice());
        let mut prev = f64::INFINITY;
        for &tau in TauGrid::log_spaced(1e-4, 1e3, 15).unwrap().values() {
            let est = estimate_l2(&y, &inst, tau).unwrap();
            let rough = norm2(&apply_d(est.as_slice()));
            assert!(rough <= prev + 1e-9, "roughness must fall as tau grows");
            prev = rough;
        }
    }

    #[test]
    fn admm_on_quadratic_matches_closed_form() {
        // The same machinery with the ridge prox must agree with the
        // closed-form quadratic solution.
        let inst = build_deconvolution(20, 5, 4.0).unwrap();
        let mut rng = crate::rng::RngStream::new(8);
        let dist = crate::process::IdDistribution::laplace(1.0).unwrap();
        let (s, _) = crate::process::generate_signal(&mut rng, &dist, 20).unwrap();
        let y = inst.h().matvec(s.as_slice());
        let tau = 0.7;
        let rho = 2.0;
        let engine = AdmmEngine::new(&inst, rho).unwrap();
        let cfg = AdmmConfig {
            max_iters: 20_000,
            tol_abs: 1e-12,
            tol_rel: 1e-10,
            ..AdmmConfig::default()
        };
        // prox of (tau/rho)·t² + (t-x)²/2 is x / (1 + 2 tau / rho).
        let shrink = 1.0 / (1.0 + 2.0 * tau / rho);
        let sol = engine.run(&inst, &y, &cfg, None, |x| shrink * x, |_| {});
        let closed = estimate_l2(&y, &inst, tau).unwrap();
        let rel = mse(sol.estimate.as_slice(), closed.as_slice())
            / mse(closed.as_slice(), &vec![0.0; 20]).max(1e-300);
        assert!(rel < 1e-6, "relative mse {rel}");
    }

    #[test]
    fn huge_tau_flattens_everything() {
        let inst = identity_instance(8);
        let y = [3.0; 8];
        let sol = estimate_l1(&y, &inst, 1e6, &AdmmConfig::default()).unwrap();
        let ds = apply_d(sol.estimate.as_slice());
        // The first increment is penalized too, so the flat solution is 0.
        for v in ds {
            assert!(v.abs() < 1e-6);
        }
        for v in sol.estimate.as_slice() {
            assert!(v.abs() < 1e-5);
        }
    }

    #[test]
    fn l1_dual_is_feasible_and_tight() {
        let inst = build_deconvolution(30, 5, 4.0).unwrap();
        let mut rng = crate::rng::RngStream::new(12);
        let dist = crate::process::IdDistribution::bernoulli_laplace(0.8, 1.0).unwrap();
        let (s, _) = crate::process::generate_signal(&mut rng, &dist, 30).unwrap();
        let y = inst.h().matvec(s.as_slice());
        let tau = 0.5;
        let cfg = AdmmConfig {
            max_iters: 50_000,
            tol_abs: 1e-10,
            tol_rel: 1e-9,
            ..AdmmConfig::default()
        };
        let sol = estimate_l1(&y, &inst, tau, &cfg).unwrap();
        assert!(sol.converged);
        let hty = inst.h().matvec_t(&y);
        let kkt_tol = 1e-4 * (1.0 + hty.iter().fold(0.0f64, |a, &b| a.max(b.abs())));
        // Stationarity: 2Hᵀ(Hs - y) + Dᵀ dual = 0.
        let hs = inst.h().matvec(sol.estimate.as_slice());
        let resid: Vec<f64> = (0..y.len()).map(|i| hs[i] - y[i]).collect();
        let grad_data = inst.h().matvec_t(&resid);
        let dt_dual = apply_dt(&sol.dual);
        for i in 0..30 {
            assert!(
                (2.0 * grad_data[i] + dt_dual[i]).abs() <= kkt_tol,
                "stationarity at {i}"
            );
        }
        // Dual feasibility and complementarity.
        let ds = apply_d(sol.estimate.as_slice());
        for i in 0..30 {
            assert!(sol.dual[i].abs() <= tau + 1e-4);
            if ds[i].abs() > 1e-5 {
                assert!(
                    (sol.dual[i] - tau * ds[i].signum()).abs() < 1e-3,
                    "active constraint {i}: dual {} vs {}",
                    sol.dual[i],
                    tau * ds[i].signum()
                );
            }
        }
    }

    #[test]
    fn l1_tv_norm_shrinks_with_tau() {
        let inst = build_deconvolution(30, 5, 4.0).unwrap();
        let mut rng = crate::rng::RngStream::new(21);
        let dist = crate::process::IdDistribution::bernoulli_laplace(0.7, 1.0).unwrap();
        let (s, _) = crate::process::generate_signal(&mut rng, &dist, 30).unwrap();
        let y = inst.h().matvec(s.as_slice());
        let cfg = AdmmConfig {
            max_iters: 20_000,
            tol_abs: 1e-9,
            tol_rel: 1e-8,
            ..AdmmConfig::default()
        };
        let mut prev = f64::INFINITY;
        for &tau in TauGrid::log_spaced(1e-3, 1e2, 11).unwrap().values() {
            let sol = estimate_l1(&y, &inst, tau, &cfg).unwrap();
            let tv: f64 = apply_d(sol.estimate.as_slice())
                .iter()
                .map(|v| v.abs())
                .sum();
            assert!(tv <= prev + 1e-6);
            prev = tv;
        }
    }

    #[test]
    fn log_never_falls_behind_warm_start() {
        let inst = build_deconvolution(25, 5, 4.0).unwrap();
        let mut rng = crate::rng::RngStream::new(30);
        let dist = crate::process::IdDistribution::student_t(3.0).unwrap();
        let (s, _) = crate::process::generate_signal(&mut rng, &dist, 25).unwrap();
        let y = inst.h().matvec(s.as_slice());
        for &tau in &[0.05, 0.5, 5.0] {
            let cfg = AdmmConfig::default();
            let warm = estimate_l1(&y, &inst, tau, &cfg).unwrap().estimate;
            let warm_obj = objective(VariationalKind::Log, &inst, &y, warm.as_slice(), tau);
            let sol = estimate_log(&y, &inst, tau, &cfg).unwrap();
            assert!(sol.objective <= warm_obj + 1e-9);
        }
    }

    #[test]
    fn single_point_grid_is_returned() {
        let grid = TauGrid::new(vec![0.3]).unwrap();
        let sel = select_tau(&[1.0], &grid);
        assert_eq!(sel.tau, 0.3);
    }

    #[test]
    fn ties_break_toward_smaller_tau() {
        let grid = TauGrid::new(vec![0.1, 1.0, 10.0]).unwrap();
        let sel = select_tau(&[2.0, 2.0, 3.0], &grid);
        assert_eq!(sel.tau, 0.1);
    }

    #[test]
    fn grid_validation() {
        assert!(TauGrid::new(vec![]).is_err());
        assert!(TauGrid::new(vec![1.0, 1.0]).is_err());
        assert!(TauGrid::new(vec![-1.0, 1.0]).is_err());
        assert!(TauGrid::log_spaced(1e-4, 1e2, 40).is_ok());
    }
}
