//! Proximal maps of the four terms in each mode subproblem.
//!
//! `f1 = ||.||_1` and `f2 = ||.||_*` get soft-thresholding (entrywise and on
//! the singular values). The two indicator terms get Euclidean projections
//! onto balls centred on the backbone unfolding: an entrywise clamp for the
//! max-norm ball and singular-value clipping for the spectral ball.

use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::tensor::Matrix;

/// Relative slack absorbing the round-off between SVD code paths, so that a
/// threshold equal to a separately computed spectral norm behaves as `>=`.
const SPECTRAL_SLACK: f64 = 1e-12;

/// Centre and radii of the two constraint balls for one mode.
#[derive(Debug, Clone)]
pub struct ConstraintCenter {
    pub center: Matrix,
    pub lambda: f64,
    pub tau: f64,
}

impl ConstraintCenter {
    pub fn new(center: Matrix, lambda: f64, tau: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) || !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::invalid(format!(
                "constraint radii must be positive and finite (lambda={lambda}, tau={tau})"
            )));
        }
        Ok(ConstraintCenter { center, lambda, tau })
    }

    fn check(&self, v: &Matrix) -> Result<()> {
        if v.same_shape(&self.center) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "operand shape {:?} does not match centre shape {:?}",
                v.shape(),
                self.center.shape()
            )))
        }
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("prox step must be positive, got {gamma}")))
    }
}

#[inline]
pub fn soft_threshold(x: f64, gamma: f64) -> f64 {
    if x > gamma {
        x - gamma
    } else if x < -gamma {
        x + gamma
    } else {
        0.0
    }
}

/// `argmin_w gamma ||w||_1 + 1/2 ||w - v||_F^2`.
pub fn prox_l1(v: &Matrix, gamma: f64) -> Result<Matrix> {
    check_gamma(gamma)?;
    Ok(v.map(|x| soft_threshold(x, gamma)))
}

/// `argmin_w gamma ||w||_* + 1/2 ||w - v||_F^2`.
pub fn prox_nuclear(v: &Matrix, gamma: f64) -> Result<Matrix> {
    check_gamma(gamma)?;
    let f = svd(v)?;
    if f.s.first().is_none_or(|&top| top <= gamma * (1.0 + SPECTRAL_SLACK)) {
        return Ok(Matrix::zeros(v.rows(), v.cols()));
    }
    Ok(f.reconstruct_with(|s| (s - gamma).max(0.0)))
}

/// Projection onto `{w : ||w - c||_inf <= lambda}`.
pub fn project_linf_ball(v: &Matrix, ctr: &ConstraintCenter) -> Result<Matrix> {
    ctr.check(v)?;
    let lambda = ctr.lambda;
    let data = v
        .data()
        .iter()
        .zip(ctr.center.data())
        .map(|(&x, &c)| x.clamp(c - lambda, c + lambda))
        .collect();
    Matrix::new(v.rows(), v.cols(), data)
}

/// Projection onto `{w : ||w - c||_spec <= tau}`.
pub fn project_spectral_ball(v: &Matrix, ctr: &ConstraintCenter) -> Result<Matrix> {
    ctr.check(v)?;
    let diff = v.sub(&ctr.center)?;
    let f = svd(&diff)?;
    let tau = ctr.tau;
    if f.s.first().is_none_or(|&top| top <= tau * (1.0 + SPECTRAL_SLACK)) {
        return Ok(v.clone());
    }
    ctr.center.add(&f.reconstruct_with(|s| s.min(tau)))
}
