//! The SLTR estimator.
//!
//! Fitting runs in three stages:
//!
//! 1. The ridge backbone `B = tensor((X^T X + eps I)^{-1} X^T y)` is computed once.
//! 2. For every mode `m`, the subproblem
//!
//!    ```text
//!    min ||W||_1 + ||W||_*   s.t.  ||W - B_(m)||_inf <= lambda,  ||W - B_(m)||_spec <= tau
//!    ```
//!
//!    is solved over matrices shaped like the mode-`m` unfolding with the
//!    parallel proximal algorithm (PPXA). The four terms each keep their own
//!    copy of the iterate, take a proximal step independently, and are then
//!    recombined with equal weights and relaxation `rho`.
//! 3. The folded per-mode solutions are averaged.
//!
//! Modes are independent once the backbone is known, and the four proximal
//! steps inside one sweep are independent of each other; both layers can run
//! on the rayon pool. Summation orders are fixed, so the result does not
//! depend on scheduling.

use std::time::Instant;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{backbone, singular_values, spectral_norm};
use crate::prox::{prox_l1, prox_nuclear, project_linf_ball, project_spectral_ball, ConstraintCenter};
use crate::tensor::{fold, Matrix, Tensor};

/// Relative-change growth that counts as divergence.
const DIVERGENCE_FACTOR: f64 = 1e6;

/// Floor on the relative-change denominator, as a fraction of `||centre||_F`.
/// When the subproblem solution is zero the iterates spiral into the origin at
/// a fixed linear rate and the plain ratio never shrinks.
const ZERO_FLOOR: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Radius of the max-norm ball around the backbone.
    pub lambda: f64,
    /// Radius of the spectral-norm ball around the backbone.
    pub tau: f64,
    /// Ridge parameter of the backbone.
    pub epsilon: f64,
    /// PPXA relaxation, in `(0, 2)`.
    pub rho: f64,
    /// Proximal step for the l1 and nuclear terms.
    pub gamma: f64,
    pub max_iter: usize,
    /// Stop once `||W^{t+1} - W^t||_F / ||W^t||_F <= tol` (denominator floored
    /// at `1e-8 ||centre||_F`).
    pub tol: f64,
    /// Solve the mode subproblems concurrently.
    pub parallel_modes: bool,
    /// Evaluate the four proximal steps of a sweep concurrently.
    pub parallel_prox: bool,
    /// Use steps `4 lambda` (l1) and `4 tau` (nuclear) instead of `gamma`.
    pub paper_faithful_steps: bool,
    /// Seed recorded for callers that shuffle (cross-validation folds).
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 1.0,
            tau: 1.0,
            epsilon: 1.0,
            rho: 1.0,
            gamma: 1.0,
            max_iter: 1000,
            tol: 1e-3,
            parallel_modes: true,
            parallel_prox: true,
            paper_faithful_steps: false,
            seed: 0,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {v}")))
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        positive("lambda", self.lambda)?;
        positive("tau", self.tau)?;
        positive("epsilon", self.epsilon)?;
        positive("gamma", self.gamma)?;
        positive("tol", self.tol)?;
        if !(self.rho > 0.0 && self.rho < 2.0) {
            return Err(Error::invalid(format!("rho must lie in (0, 2), got {}", self.rho)));
        }
        if self.max_iter == 0 {
            return Err(Error::invalid("max_iter must be at least 1"));
        }
        Ok(())
    }

    /// Sequential in both layers.
    pub fn sequential(mut self) -> Self {
        self.parallel_modes = false;
        self.parallel_prox = false;
        self
    }

    fn prox_steps(&self) -> (f64, f64) {
        if self.paper_faithful_steps {
            (4.0 * self.lambda, 4.0 * self.tau)
        } else {
            (self.gamma, self.gamma)
        }
    }
}

/// One PPXA sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    pub iteration: usize,
    pub relative_change: f64,
    /// Norm of the step taken by the four copies together. PPXA is a relaxed
    /// fixed-point iteration on the copies, so this never increases.
    pub copy_step: f64,
    /// `||W||_1 + ||W||_*` at the new iterate.
    pub objective: f64,
}

#[derive(Debug, Clone)]
pub struct ModeSolution {
    pub mode: usize,
    pub matrix: Matrix,
    pub trace: Vec<TraceEntry>,
    pub iterations: usize,
    /// Whether the relative-change rule fired before `max_iter`.
    pub converged: bool,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Timings {
    pub backbone_secs: f64,
    pub mode_secs: Vec<f64>,
    pub total_secs: f64,
}

#[derive(Debug, Clone)]
pub struct FitResult {
    /// Mean of `per_mode`.
    pub w_hat: Tensor,
    pub per_mode: Vec<Tensor>,
    pub backbone: Tensor,
    pub traces: Vec<Vec<TraceEntry>>,
    pub iterations: Vec<usize>,
    pub converged: Vec<bool>,
    pub timings: Timings,
}

impl FitResult {
    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }
}

/// Objective terms and constraint gaps of a mode iterate. A gap `<= 0` is feasible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectiveGaps {
    pub l1: f64,
    pub nuclear: f64,
    pub linf_gap: f64,
    pub spec_gap: f64,
}

impl ObjectiveGaps {
    pub fn objective(&self) -> f64 {
        self.l1 + self.nuclear
    }
}

pub fn objective_and_gaps(w: &Matrix, ctr: &ConstraintCenter) -> Result<ObjectiveGaps> {
    let diff = w.sub(&ctr.center)?;
    Ok(ObjectiveGaps {
        l1: w.l1_norm(),
        nuclear: singular_values(w)?.iter().sum(),
        linf_gap: diff.linf_norm() - ctr.lambda,
        spec_gap: spectral_norm(&diff)? - ctr.tau,
    })
}

fn prox_sweep(copies: &[Matrix; 4], ctr: &ConstraintCenter, steps: (f64, f64), parallel: bool) -> Result<[Matrix; 4]> {
    let a1 = || prox_l1(&copies[0], steps.0);
    let a2 = || prox_nuclear(&copies[1], steps.1);
    let a3 = || project_linf_ball(&copies[2], ctr);
    let a4 = || project_spectral_ball(&copies[3], ctr);
    let ((r1, r2), (r3, r4)) = if parallel {
        rayon::join(|| rayon::join(a1, a2), || rayon::join(a3, a4))
    } else {
        ((a1(), a2()), (a3(), a4()))
    };
    Ok([r1?, r2?, r3?, r4?])
}

/// Pulls `w` radially toward the centre until both constraints hold exactly.
/// The PPXA average is only feasible in the limit; the shrink factor is
/// `1 - O(infeasibility)`.
fn retract_to_feasible(w: Matrix, ctr: &ConstraintCenter) -> Result<Matrix> {
    let diff = w.sub(&ctr.center)?;
    let linf = diff.linf_norm();
    let spec = spectral_norm(&diff)?;
    let mut theta: f64 = 1.0;
    if linf > ctr.lambda {
        theta = theta.min(ctr.lambda / linf);
    }
    if spec > ctr.tau {
        theta = theta.min(ctr.tau / spec);
    }
    if theta == 1.0 {
        return Ok(w);
    }
    let lambda = ctr.lambda;
    let data = diff
        .data()
        .iter()
        .zip(ctr.center.data())
        .map(|(&d, &c)| (c + theta * d).clamp(c - lambda, c + lambda))
        .collect();
    Matrix::new(w.rows(), w.cols(), data)
}

/// Runs PPXA on one mode subproblem, starting every copy at the centre.
pub fn solve_subproblem(mode: usize, ctr: &ConstraintCenter, cfg: &SolverConfig) -> Result<ModeSolution> {
    cfg.validate()?;
    let start = Instant::now();
    let steps = cfg.prox_steps();
    let rho = cfg.rho;
    let c = &ctr.center;
    let (rows, cols) = c.shape();
    let n = rows * cols;

    let mut w = c.clone();
    let mut copies = [c.clone(), c.clone(), c.clone(), c.clone()];
    let mut trace = Vec::new();
    let floor_sq = (ZERO_FLOOR * c.frobenius_norm()).powi(2);
    let mut first_change = None;
    let mut converged = false;

    for iteration in 1..=cfg.max_iter {
        let a = prox_sweep(&copies, ctr, steps, cfg.parallel_prox)?;
        let mut avg = vec![0.0; n];
        for (k, v) in avg.iter_mut().enumerate() {
            *v = 0.25 * (((a[0].data()[k] + a[1].data()[k]) + a[2].data()[k]) + a[3].data()[k]);
        }
        let mut copy_sq = 0.0;
        for (copy, ai) in copies.iter_mut().zip(&a) {
            let wd = w.data();
            for (k, y) in copy.data_mut().iter_mut().enumerate() {
                let delta = rho * (2.0 * avg[k] - wd[k] - ai.data()[k]);
                copy_sq += delta * delta;
                *y += delta;
            }
        }
        let mut step_sq = 0.0;
        let mut norm_sq = 0.0;
        for (wk, &ak) in w.data_mut().iter_mut().zip(&avg) {
            let delta = rho * (ak - *wk);
            norm_sq += *wk * *wk;
            step_sq += delta * delta;
            *wk += delta;
        }
        let denom_sq = norm_sq.max(floor_sq);
        let relative_change = if denom_sq > 0.0 { (step_sq / denom_sq).sqrt() } else { step_sq.sqrt() };
        let objective = w.l1_norm() + singular_values(&w)?.iter().sum::<f64>();
        trace.push(TraceEntry { iteration, relative_change, copy_step: copy_sq.sqrt(), objective });

        let first = *first_change.get_or_insert(relative_change);
        if !relative_change.is_finite() || relative_change > DIVERGENCE_FACTOR * first.max(f64::MIN_POSITIVE) {
            return Err(Error::Divergence { mode: Some(mode), iteration, trace });
        }
        if relative_change <= cfg.tol {
            converged = true;
            break;
        }
    }

    let iterations = trace.len();
    let matrix = retract_to_feasible(w, ctr)?;
    Ok(ModeSolution {
        mode,
        matrix,
        trace,
        iterations,
        converged,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Fits SLTR with a backbone computed from `ds`.
pub fn fit(ds: &Dataset, cfg: &SolverConfig) -> Result<FitResult> {
    cfg.validate()?;
    let start = Instant::now();
    let bb = backbone(&ds.design(), ds.y(), cfg.epsilon, ds.dims())?;
    let backbone_secs = start.elapsed().as_secs_f64();
    let mut result = fit_from_backbone(&bb.tensor, cfg)?;
    result.timings.backbone_secs = backbone_secs;
    result.timings.total_secs = start.elapsed().as_secs_f64();
    Ok(result)
}

/// Runs the per-mode solves and averaging around a given backbone tensor.
pub fn fit_from_backbone(backbone: &Tensor, cfg: &SolverConfig) -> Result<FitResult> {
    cfg.validate()?;
    let start = Instant::now();
    let dims = backbone.dims().to_vec();
    let order = dims.len();
    let solve = |mode: usize| -> Result<ModeSolution> {
        let ctr = ConstraintCenter::new(backbone.unfold(mode)?, cfg.lambda, cfg.tau)?;
        solve_subproblem(mode, &ctr, cfg)
    };
    let solutions: Vec<ModeSolution> = if cfg.parallel_modes {
        (0..order).into_par_iter().map(solve).collect::<Result<_>>()?
    } else {
        (0..order).map(solve).collect::<Result<_>>()?
    };

    let per_mode = solutions
        .iter()
        .map(|s| fold(&s.matrix, s.mode, &dims))
        .collect::<Result<Vec<_>>>()?;
    let mut mean = vec![0.0; backbone.len()];
    for t in &per_mode {
        for (acc, &v) in mean.iter_mut().zip(t.data()) {
            *acc += v;
        }
    }
    for v in &mut mean {
        *v /= order as f64;
    }

    Ok(FitResult {
        w_hat: Tensor::new(dims, mean)?,
        per_mode,
        backbone: backbone.clone(),
        traces: solutions.iter().map(|s| s.trace.clone()).collect(),
        iterations: solutions.iter().map(|s| s.iterations).collect(),
        converged: solutions.iter().map(|s| s.converged).collect(),
        timings: Timings {
            backbone_secs: 0.0,
            mode_secs: solutions.iter().map(|s| s.seconds).collect(),
            total_secs: start.elapsed().as_secs_f64(),
        },
    })
}

/// `y_i = <w, x_i>`.
pub fn predict(w: &Tensor, xs: &[Tensor]) -> Result<Vec<f64>> {
    xs.iter().map(|x| w.inner(x)).collect()
}
