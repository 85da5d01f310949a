//! Dense SVD helpers, matrix and tensor norms, and the ridge backbone.

use faer::MatRef;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::tensor::{tensorize, Matrix, Tensor};

/// Thin SVD `a = u * diag(s) * v^T` with `s` non-increasing.
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

impl SvdFactors {
    /// `u * diag(f(s)) * v^T`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let (m, k) = self.u.shape();
        let n = self.v.rows();
        let mut out = Matrix::zeros(m, n);
        let data = out.data_mut();
        for r in 0..k {
            let sr = f(self.s[r]);
            if sr == 0.0 {
                continue;
            }
            let ucol = &self.u.data()[r * m..(r + 1) * m];
            for j in 0..n {
                let coef = sr * self.v.get(j, r);
                if coef == 0.0 {
                    continue;
                }
                let col = &mut data[j * m..(j + 1) * m];
                for (c, &ui) in col.iter_mut().zip(ucol) {
                    *c += coef * ui;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix {
        self.reconstruct_with(|s| s)
    }
}

fn ensure_finite(a: &Matrix) -> Result<()> {
    if a.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid("matrix has non-finite entries"))
    }
}

fn faer_view(a: &Matrix) -> MatRef<'_, f64> {
    MatRef::from_column_major_slice(a.data(), a.rows(), a.cols())
}

/// The QR sweep budget of the bidiagonal SVD, reported when it runs out.
fn sweep_budget(a: &Matrix) -> usize {
    let k = a.rows().min(a.cols());
    32 * k * k
}

pub fn svd(a: &Matrix) -> Result<SvdFactors> {
    ensure_finite(a)?;
    let f = faer_view(a)
        .thin_svd()
        .map_err(|_| Error::NumericalFailure { what: "svd", iterations: sweep_budget(a) })?;
    let to_matrix = |m: MatRef<'_, f64>| Matrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    Ok(SvdFactors {
        u: to_matrix(f.U()),
        s: f.S().column_vector().iter().copied().collect(),
        v: to_matrix(f.V()),
    })
}

/// Singular values in non-increasing order, without the vectors.
pub fn singular_values(a: &Matrix) -> Result<Vec<f64>> {
    ensure_finite(a)?;
    faer_view(a)
        .singular_values()
        .map_err(|_| Error::NumericalFailure { what: "svd", iterations: sweep_budget(a) })
}

pub fn spectral_norm(a: &Matrix) -> Result<f64> {
    Ok(singular_values(a)?.first().copied().unwrap_or(0.0))
}

pub fn nuclear_norm(a: &Matrix) -> Result<f64> {
    Ok(singular_values(a)?.iter().sum())
}

/// Number of singular values above `rel_tol * sigma_max`.
pub fn numerical_rank(a: &Matrix, rel_tol: f64) -> Result<usize> {
    let s = singular_values(a)?;
    let top = s.first().copied().unwrap_or(0.0);
    if top == 0.0 {
        return Ok(0);
    }
    Ok(s.iter().filter(|&&v| v > rel_tol * top).count())
}

/// Overlapped tensor nuclear norm: the mean of the nuclear norms of all unfoldings.
pub fn tensor_nuclear_norm(t: &Tensor) -> Result<f64> {
    let order = t.order();
    if order < 2 {
        return Err(Error::invalid("tensor nuclear norm needs order >= 2"));
    }
    let mut total = 0.0;
    for mode in 0..order {
        total += nuclear_norm(&t.unfold(mode)?)?;
    }
    Ok(total / order as f64)
}

/// The ridge plug-in point `tensor((X^T X + eps I)^{-1} X^T y)`.
#[derive(Debug, Clone)]
pub struct Backbone {
    pub tensor: Tensor,
    pub epsilon: f64,
}

/// Which linear system the ridge solve goes through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RidgeRoute {
    /// `(X^T X + eps I) w = X^T y`, a `P x P` system.
    Direct,
    /// `w = X^T (X X^T + eps I)^{-1} y`, an `N x N` system.
    Woodbury,
    /// `Direct` when `P <= N`, otherwise `Woodbury`.
    Auto,
}

/// Ridge solution for an `N x P` design.
pub fn ridge_solve(x: &Matrix, y: &[f64], epsilon: f64, route: RidgeRoute) -> Result<Vec<f64>> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::invalid(format!("design has {n} rows but y has {} entries", y.len())));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid(format!("epsilon must be positive, got {epsilon}")));
    }
    if !x.is_finite() || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure { what: "ridge backbone (non-finite input)", iterations: 0 });
    }
    let xv = x.view();
    let yv = DVector::from_column_slice(y);
    let route = match route {
        RidgeRoute::Auto if p <= n => RidgeRoute::Direct,
        RidgeRoute::Auto => RidgeRoute::Woodbury,
        r => r,
    };
    let fail = Error::NumericalFailure { what: "ridge backbone (cholesky)", iterations: 0 };
    let w = match route {
        RidgeRoute::Direct => {
            let mut gram = xv.tr_mul(&xv);
            gram += DMatrix::<f64>::identity(p, p) * epsilon;
            let chol = gram.cholesky().ok_or(fail)?;
            chol.solve(&xv.tr_mul(&yv))
        }
        RidgeRoute::Woodbury => {
            let mut kernel = &xv * xv.transpose();
            kernel += DMatrix::<f64>::identity(n, n) * epsilon;
            let chol = kernel.cholesky().ok_or(fail)?;
            xv.tr_mul(&chol.solve(&yv))
        }
        RidgeRoute::Auto => unreachable!(),
    };
    Ok(w.iter().copied().collect())
}

/// Computes the backbone tensor for an `N x P` design with `P = prod(dims)`.
pub fn backbone(x: &Matrix, y: &[f64], epsilon: f64, dims: &[usize]) -> Result<Backbone> {
    let p: usize = dims.iter().product();
    if x.cols() != p {
        return Err(Error::invalid(format!(
            "design has {} columns but dims {dims:?} hold {p} entries",
            x.cols()
        )));
    }
    let w = ridge_solve(x, y, epsilon, RidgeRoute::Auto)?;
    Ok(Backbone { tensor: tensorize(&w, dims)?, epsilon })
}
