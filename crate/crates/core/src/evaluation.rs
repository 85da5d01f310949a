//! Metrics, k-fold cross-validation, and the recovery-error bounds.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{backbone, numerical_rank};
use crate::rng::{Stream, StreamRng};
use crate::solver::{fit_from_backbone, predict, SolverConfig};
use crate::tensor::Tensor;

pub fn mse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    if y.len() != yhat.len() || y.is_empty() {
        return Err(Error::invalid(format!(
            "mse needs equal non-empty lengths, got {} and {}",
            y.len(),
            yhat.len()
        )));
    }
    Ok(y.iter().zip(yhat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / y.len() as f64)
}

/// `||w_hat - w_star||_F / ||w_star||_F`.
pub fn coefficient_error(w_hat: &Tensor, w_star: &Tensor) -> Result<f64> {
    let denom = w_star.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::invalid("coefficient error is undefined for a zero true tensor"));
    }
    Ok(w_hat.sub(w_star)?.frobenius_norm() / denom)
}

/// Area under the ROC curve as the Mann-Whitney statistic; tied scores count half.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels differ in length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::invalid("scores contain NaN"));
    }
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::invalid("auc needs both classes present"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // midranks over runs of equal scores
    let mut rank_sum_pos = 0.0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && scores[order[end]] == scores[order[start]] {
            end += 1;
        }
        let midrank = (start + end + 1) as f64 / 2.0;
        rank_sum_pos += midrank * order[start..end].iter().filter(|&&i| labels[i]).count() as f64;
        start = end;
    }
    let pos_f = pos as f64;
    Ok((rank_sum_pos - pos_f * (pos_f + 1.0) / 2.0) / (pos_f * neg as f64))
}

/// One `(lambda, tau, epsilon)` point of the tuning grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub lambda: f64,
    pub tau: f64,
    pub epsilon: f64,
}

impl GridCell {
    fn lex_cmp(&self, other: &GridCell) -> Ordering {
        self.lambda
            .total_cmp(&other.lambda)
            .then(self.tau.total_cmp(&other.tau))
            .then(self.epsilon.total_cmp(&other.epsilon))
    }
}

/// `count` log-spaced values from `10^lo` to `10^hi`.
pub fn log_space(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![10f64.powf(lo)],
        _ => (0..count).map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (count - 1) as f64)).collect(),
    }
}

/// Cartesian product in `lambda`-major order.
pub fn grid(lambdas: &[f64], taus: &[f64], epsilons: &[f64]) -> Vec<GridCell> {
    let mut out = Vec::with_capacity(lambdas.len() * taus.len() * epsilons.len());
    for &lambda in lambdas {
        for &tau in taus {
            for &epsilon in epsilons {
                out.push(GridCell { lambda, tau, epsilon });
            }
        }
    }
    out
}

/// Lambda and tau on nine log-spaced points in `[1e-3, 10]`, epsilon in `{0.1, 1, 10}`.
pub fn default_grid() -> Vec<GridCell> {
    let radii = log_space(-3.0, 1.0, 9);
    grid(&radii, &radii, &[0.1, 1.0, 10.0])
}

/// Shuffles `0..n` with the fold stream and cuts it into `k` contiguous
/// folds whose sizes differ by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::invalid(format!("need 2 <= k <= n for {k}-fold CV on {n} samples")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    StreamRng::new(seed, Stream::Folds).shuffle(&mut idx);
    let (base, extra) = (n / k, n % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for f in 0..k {
        let len = base + usize::from(f < extra);
        folds.push(idx[start..start + len].to_vec());
        start += len;
    }
    Ok(folds)
}

/// `(train, validation)` pairs, one per held-out fold.
pub fn train_validation_splits(ds: &Dataset, folds: &[Vec<usize>]) -> Result<Vec<(Dataset, Dataset)>> {
    folds
        .iter()
        .enumerate()
        .map(|(f, held_out)| {
            let train: Vec<usize> =
                folds.iter().enumerate().filter(|&(g, _)| g != f).flat_map(|(_, idx)| idx.iter().copied()).collect();
            Ok((ds.subset(&train)?, ds.subset(held_out)?))
        })
        .collect()
}

/// Per-candidate, per-fold validation scores; a failed fit scores `+inf`.
/// Candidates run concurrently.
pub fn cross_validate<P, F>(ds: &Dataset, candidates: &[P], folds: &[Vec<usize>], score: F) -> Result<Vec<Vec<f64>>>
where
    P: Sync,
    F: Fn(&P, &Dataset, &Dataset) -> Result<f64> + Sync,
{
    let splits = train_validation_splits(ds, folds)?;
    Ok(candidates
        .par_iter()
        .map(|cand| {
            splits
                .iter()
                .map(|(train, val)| score(cand, train, val).unwrap_or(f64::INFINITY))
                .collect()
        })
        .collect())
}

/// Index of the smallest score; ties go to the smallest key, so the answer
/// does not depend on candidate order. NaN scores never win.
pub fn select_min<K>(scores: &[f64], keys: &[K], key_cmp: impl Fn(&K, &K) -> Ordering) -> Option<usize> {
    (0..scores.len()).filter(|&i| !scores[i].is_nan()).min_by(|&a, &b| {
        scores[a].total_cmp(&scores[b]).then_with(|| key_cmp(&keys[a], &keys[b]))
    })
}

#[derive(Debug, Clone)]
pub struct CvReport {
    pub grid: Vec<GridCell>,
    /// `fold_mse[cell][fold]`; failed fits score `+inf`.
    pub fold_mse: Vec<Vec<f64>>,
    /// Mean validation MSE per cell.
    pub per_cell: Vec<f64>,
    pub selected: usize,
    pub folds: Vec<Vec<usize>>,
    pub fold_seed: u64,
    /// Fits, across all cells and folds, that stopped at `max_iter` in some mode.
    pub max_iter_exits: usize,
}

impl CvReport {
    pub fn selected_cell(&self) -> GridCell {
        self.grid[self.selected]
    }

    pub fn selected_mse(&self) -> f64 {
        self.per_cell[self.selected]
    }

    /// Tab-separated table, one row per cell; the last column flags the selection.
    pub fn to_table(&self) -> String {
        let mut out = String::from("lambda\ttau\tepsilon\tmean_mse");
        for f in 0..self.folds.len() {
            out.push_str(&format!("\tfold{f}_mse"));
        }
        out.push_str("\tselected\n");
        for (i, cell) in self.grid.iter().enumerate() {
            out.push_str(&format!("{}\t{}\t{}\t{}", cell.lambda, cell.tau, cell.epsilon, self.per_cell[i]));
            for m in &self.fold_mse[i] {
                out.push_str(&format!("\t{m}"));
            }
            out.push_str(if i == self.selected { "\t1\n" } else { "\t0\n" });
        }
        out
    }
}

/// `k`-fold CV of SLTR over `cells`, selecting the lowest mean validation MSE.
///
/// The backbone depends only on the training fold and `epsilon`, so it is
/// computed once per `(fold, epsilon)` and shared by every `(lambda, tau)`.
pub fn kfold_cv(ds: &Dataset, cells: &[GridCell], k: usize, seed: u64, template: &SolverConfig) -> Result<CvReport> {
    if cells.is_empty() {
        return Err(Error::invalid("empty parameter grid"));
    }
    template.validate()?;
    let folds = fold_assignment(ds.len(), k, seed)?;
    let mut epsilons: Vec<f64> = cells.iter().map(|c| c.epsilon).collect();
    epsilons.sort_by(f64::total_cmp);
    epsilons.dedup();

    let splits = train_validation_splits(ds, &folds)?;
    let jobs: Vec<(usize, f64)> = (0..folds.len()).flat_map(|f| epsilons.iter().map(move |&e| (f, e))).collect();
    let backbones: Vec<Option<Tensor>> = jobs
        .par_iter()
        .map(|&(f, eps)| {
            let train = &splits[f].0;
            backbone(&train.design(), train.y(), eps, train.dims()).ok().map(|b| b.tensor)
        })
        .collect();
    let lookup = |f: usize, eps: f64| {
        let e = epsilons.iter().position(|&x| x == eps).expect("epsilon listed");
        backbones[f * epsilons.len() + e].as_ref()
    };

    let scored: Vec<Vec<(f64, bool)>> = cells
        .par_iter()
        .map(|cell| {
            let cfg = SolverConfig { lambda: cell.lambda, tau: cell.tau, epsilon: cell.epsilon, ..template.clone() };
            splits
                .iter()
                .enumerate()
                .map(|(f, (_, val))| {
                    let score = || -> Result<(f64, bool)> {
                        let bb = lookup(f, cell.epsilon).ok_or(Error::NumericalFailure { what: "cv backbone", iterations: 0 })?;
                        let res = fit_from_backbone(bb, &cfg)?;
                        Ok((mse(val.y(), &predict(&res.w_hat, val.samples())?)?, res.all_converged()))
                    };
                    score().unwrap_or((f64::INFINITY, true))
                })
                .collect()
        })
        .collect();
    let max_iter_exits = scored.iter().flatten().filter(|&&(_, converged)| !converged).count();
    let fold_mse: Vec<Vec<f64>> = scored.iter().map(|row| row.iter().map(|&(m, _)| m).collect()).collect();
    let per_cell: Vec<f64> = fold_mse.iter().map(|f| f.iter().sum::<f64>() / f.len() as f64).collect();
    let selected = select_min(&per_cell, cells, GridCell::lex_cmp).unwrap_or_else(|| {
        // every cell NaN: fall back to the smallest parameters
        (0..cells.len()).min_by(|&a, &b| cells[a].lex_cmp(&cells[b])).expect("non-empty grid")
    });
    Ok(CvReport { grid: cells.to_vec(), fold_mse, per_cell, selected, folds, fold_seed: seed, max_iter_exits })
}

/// Inputs to the recovery-error bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs {
    pub lambda: f64,
    pub tau: f64,
    pub dims: Vec<usize>,
    /// Orthogonal rank `R` of the true tensor.
    pub orthogonal_rank: Option<usize>,
    /// Unfolding ranks `(r_1, r_2, r_3)` for third-order tensors.
    pub mode_ranks: Option<Vec<usize>>,
}

impl BoundInputs {
    fn check_radii(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.tau >= 0.0) {
            return Err(Error::invalid("bound radii must be non-negative"));
        }
        Tensor::zeros(&self.dims).map(|_| ())
    }

    fn sparse_term(&self) -> f64 {
        self.lambda * (self.dims.iter().product::<usize>() as f64).sqrt()
    }
}

/// `4 sqrt(2) (lambda sqrt(prod p) + tau sqrt(R))`.
pub fn theorem1_bound(b: &BoundInputs) -> Result<f64> {
    b.check_radii()?;
    let r = b.orthogonal_rank.ok_or_else(|| Error::invalid("orthogonal rank R is required"))?;
    if r == 0 {
        return Err(Error::invalid("orthogonal rank must be at least 1"));
    }
    Ok(4.0 * std::f64::consts::SQRT_2 * (b.sparse_term() + b.tau * (r as f64).sqrt()))
}

/// `max_m sqrt(r_m * min(other two ranks))`.
pub fn r_prime(ranks: &[usize]) -> Result<f64> {
    let [r1, r2, r3] = ranks else {
        return Err(Error::invalid("R' is defined for exactly three unfolding ranks"));
    };
    let (r1, r2, r3) = (*r1 as f64, *r2 as f64, *r3 as f64);
    Ok((r1 * r2.min(r3)).sqrt().max((r2 * r1.min(r3)).sqrt()).max((r3 * r1.min(r2)).sqrt()))
}

/// `4 sqrt(2) (lambda sqrt(prod p) + tau R')` for third-order tensors.
pub fn corollary1_bound(b: &BoundInputs) -> Result<f64> {
    b.check_radii()?;
    if b.dims.len() != 3 {
        return Err(Error::invalid(format!("corollary bound needs a third-order tensor, got order {}", b.dims.len())));
    }
    let ranks = b.mode_ranks.as_deref().ok_or_else(|| Error::invalid("unfolding ranks are required"))?;
    let p: usize = b.dims.iter().product();
    for (m, (&r, &d)) in ranks.iter().zip(&b.dims).enumerate() {
        if r > d.min(p / d) {
            return Err(Error::invalid(format!("rank {r} impossible for mode {m} of dims {:?}", b.dims)));
        }
    }
    Ok(4.0 * std::f64::consts::SQRT_2 * (b.sparse_term() + b.tau * r_prime(ranks)?))
}

/// Numerical rank of every unfolding at `rel_tol * sigma_max`.
pub fn unfolding_ranks(t: &Tensor, rel_tol: f64) -> Result<Vec<usize>> {
    (0..t.order()).map(|m| numerical_rank(&t.unfold(m)?, rel_tol)).collect()
}
