// Independent reference implementations shared by the integration tests and
// the acceptance suite. Nothing here calls the operators under test.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use sltr::rng::{Stream, StreamRng};
use sltr::Matrix;

pub fn to_na(m: &Matrix) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.data())
}

pub fn from_na(m: &DMatrix<f64>) -> Matrix {
    Matrix::new(m.nrows(), m.ncols(), m.as_slice().to_vec()).unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
    let mut rng = StreamRng::new(seed, Stream::Design);
    Matrix::from_fn(rows, cols, |_, _| rng.normal())
}

/// Thin `(U, s, V^T)` by one-sided Jacobi rotations on the columns of the
/// tall orientation, singular values sorted descending.
pub fn na_svd(m: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    if m.nrows() < m.ncols() {
        let (u, s, vt) = na_svd(&m.transpose());
        return (vt.transpose(), s, u.transpose());
    }
    let (rows, k) = m.shape();
    let mut a = m.clone();
    let mut v = DMatrix::<f64>::identity(k, k);
    for _sweep in 0..100 {
        let mut rotated = false;
        for i in 0..k {
            for j in i + 1..k {
                let alpha = a.column(i).norm_squared();
                let beta = a.column(j).norm_squared();
                let gamma = a.column(i).dot(&a.column(j));
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for r in 0..rows {
                    let (x, y) = (a[(r, i)], a[(r, j)]);
                    a[(r, i)] = c * x - s * y;
                    a[(r, j)] = s * x + c * y;
                }
                for r in 0..k {
                    let (x, y) = (v[(r, i)], v[(r, j)]);
                    v[(r, i)] = c * x - s * y;
                    v[(r, j)] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut order: Vec<usize> = (0..k).collect();
    let norms: Vec<f64> = (0..k).map(|j| a.column(j).norm()).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));
    let s = DVector::from_iterator(k, order.iter().map(|&j| norms[j]));
    let mut u = DMatrix::zeros(rows, k);
    let mut vs = DMatrix::zeros(k, k);
    for (dst, &j) in order.iter().enumerate() {
        vs.set_column(dst, &v.column(j));
        if norms[j] > 0.0 {
            u.set_column(dst, &(a.column(j) / norms[j]));
        }
    }
    (u, s, vs.transpose())
}

pub fn spec(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() { 0.0 } else { na_svd(m).1.max() }
}

pub fn nuclear(m: &DMatrix<f64>) -> f64 {
    na_svd(m).1.sum()
}

pub fn l1(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v.abs()).sum()
}

pub fn linf(m: &DMatrix<f64>) -> f64 {
    m.amax()
}

/// Minimizes `gamma |w| + (w - v)^2 / 2` by a coarse grid, then bisection on
/// the sign of the one-sided derivatives inside the best grid cell.
pub fn scalar_prox_abs(v: f64, gamma: f64) -> f64 {
    let f = |w: f64| gamma * w.abs() + 0.5 * (w - v) * (w - v);
    let half = v.abs() + gamma + 1.0;
    let steps = 400;
    let h = 2.0 * half / steps as f64;
    let mut best = 0;
    for k in 0..=steps {
        if f(-half + k as f64 * h) < f(-half + best as f64 * h) {
            best = k;
        }
    }
    let (mut a, mut b) = (-half + (best as f64 - 1.0) * h, -half + (best as f64 + 1.0) * h);
    let slope = |w: f64| if w > 0.0 { w - v + gamma } else if w < 0.0 { w - v - gamma } else { -v };
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if slope(mid) > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    0.5 * (a + b)
}

/// Distance of `(v - p) / gamma` from the subdifferential of the l1 norm at `p`.
pub fn l1_optimality_residual(v: &Matrix, p: &Matrix, gamma: f64) -> f64 {
    v.data()
        .iter()
        .zip(p.data())
        .map(|(&vi, &pi)| {
            let g = (vi - pi) / gamma;
            if pi != 0.0 { (g - pi.signum()).abs() } else { (g.abs() - 1.0).max(0.0) }
        })
        .fold(0.0, f64::max)
}

/// Distance of `G = (v - p) / gamma` from the nuclear-norm subdifferential at
/// `p`: `G = U V^T + W` with `W` orthogonal to both singular subspaces of `p`
/// and `||W|| <= 1`.
pub fn nuclear_optimality_residual(v: &Matrix, p: &Matrix, gamma: f64) -> f64 {
    let (pv, pp) = (to_na(v), to_na(p));
    let g = (&pv - &pp) / gamma;
    let (m, n) = pp.shape();
    let (u, sv, vt) = na_svd(&pp);
    let top = sv.max();
    let r = sv.iter().filter(|&&s| s > 1e-9 * top.max(1.0)).count();
    let ur = u.columns(0, r).into_owned();
    let vr = vt.rows(0, r).transpose();
    let pu = DMatrix::identity(m, m) - &ur * ur.transpose();
    let pvv = DMatrix::identity(n, n) - &vr * vr.transpose();
    let core = ur.transpose() * &g * &vr - DMatrix::identity(r, r);
    let left = &pu * &g * &vr;
    let right = ur.transpose() * &g * &pvv;
    let rest = &pu * &g * &pvv;
    let rest_excess = (spec(&rest) - 1.0).max(0.0);
    core.norm().max(left.norm()).max(right.norm()).max(rest_excess)
}

/// Clips the singular values of `d` at `tau`.
pub fn clip_singular_values(d: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let (u, s, vt) = na_svd(d);
    u * DMatrix::from_diagonal(&s.map(|v| v.min(tau))) * vt
}

/// Radial pull of `d` into the spectral ball; feasible but not the projection.
pub fn project_spectral_naive(d: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
    let s = spec(d);
    if s <= tau { d.clone() } else { d * (tau / s) }
}

/// A random point of `{q : ||q - c||_inf <= lambda}` and a random point of
/// `{q : ||q - c||_spec <= tau}`, both drawn near `anchor` half the time so
/// the probes also cover the neighbourhood of the candidate projection.
pub struct Probes {
    rng: StreamRng,
}

impl Probes {
    pub fn new(seed: u64) -> Self {
        Probes { rng: StreamRng::new(seed, Stream::Noise) }
    }

    fn scale(&mut self) -> f64 {
        if self.rng.uniform() < 0.5 { 1e-3 * self.rng.uniform() } else { self.rng.uniform() }
    }

    pub fn linf(&mut self, c: &DMatrix<f64>, anchor: &DMatrix<f64>, lambda: f64) -> DMatrix<f64> {
        let near = self.rng.uniform() < 0.5;
        let s = self.scale();
        DMatrix::from_fn(c.nrows(), c.ncols(), |i, j| {
            let base = if near { anchor[(i, j)] } else { c[(i, j)] };
            let q = base + s * lambda * (2.0 * self.rng.uniform() - 1.0);
            q.clamp(c[(i, j)] - lambda, c[(i, j)] + lambda)
        })
    }

    pub fn spectral(&mut self, c: &DMatrix<f64>, anchor: &DMatrix<f64>, tau: f64) -> DMatrix<f64> {
        let near = self.rng.uniform() < 0.5;
        let s = self.scale();
        let noise = DMatrix::from_fn(c.nrows(), c.ncols(), |_, _| self.rng.normal());
        let noise = &noise * (s * tau / spec(&noise).max(f64::MIN_POSITIVE));
        let d = if near { anchor - c + noise } else { noise };
        c + project_spectral_naive(&d, tau)
    }
}

/// Reference solve of `min ||W||_1 + ||W||_*` subject to
/// `||W - C||_inf <= lambda` and `||W - C||_spec <= tau` by the Condat-Vu
/// primal-dual method. The l1 term and the box share one prox (clamp of the
/// soft threshold); the nuclear norm and the spectral ball each get a dual
/// variable.
pub fn reference_subproblem(c: &Matrix, lambda: f64, tau: f64, iters: usize) -> Matrix {
    let c = to_na(c);
    let (m, n) = c.shape();
    let (t, s) = (0.5, 0.9);
    let mut x = c.clone();
    let mut y1 = DMatrix::<f64>::zeros(m, n);
    let mut y2 = DMatrix::<f64>::zeros(m, n);
    let mut avg = DMatrix::<f64>::zeros(m, n);
    let svt = |a: &DMatrix<f64>, g: f64| {
        let (u, s, vt) = na_svd(a);
        u * DMatrix::from_diagonal(&s.map(|v| (v - g).max(0.0))) * vt
    };
    for k in 0..iters {
        let grad = &x - (&y1 + &y2) * t;
        let x_new = DMatrix::from_fn(m, n, |i, j| {
            let v = grad[(i, j)];
            let soft = v.signum() * (v.abs() - t).max(0.0);
            soft.clamp(c[(i, j)] - lambda, c[(i, j)] + lambda)
        });
        let bar = &x_new * 2.0 - &x;
        // Moreau: prox of s g^* at u is u - s prox_{g/s}(u/s)
        let u1 = &y1 + &bar * s;
        y1 = &u1 - svt(&(&u1 / s), 1.0 / s) * s;
        let u2 = &y2 + &bar * s;
        y2 = &u2 - (&c + clip_singular_values(&(&u2 / s - &c), tau)) * s;
        x = x_new;
        if k >= iters / 2 {
            avg += &x;
        }
    }
    let x = avg / (iters - iters / 2) as f64;
    from_na(&x)
}

pub fn subproblem_objective(w: &Matrix) -> f64 {
    let w = to_na(w);
    l1(&w) + nuclear(&w)
}

/// Cyclic coordinate descent for
/// `1/2 ||y - X w||^2 + l1 ||w||_1 + l2/2 ||w||^2`.
pub fn coordinate_descent(x: &Matrix, y: &[f64], l1: f64, l2: f64) -> Vec<f64> {
    let xa = to_na(x);
    let (n, p) = xa.shape();
    let mut w = DVector::<f64>::zeros(p);
    let mut r = DVector::from_column_slice(y);
    let col_sq: Vec<f64> = (0..p).map(|j| xa.column(j).norm_squared()).collect();
    for _ in 0..100_000 {
        let mut max_delta: f64 = 0.0;
        for j in 0..p {
            let old = w[j];
            let rho = xa.column(j).dot(&r) + col_sq[j] * old;
            let new = rho.signum() * (rho.abs() - l1).max(0.0) / (col_sq[j] + l2);
            if new != old {
                r.axpy(old - new, &xa.column(j), 1.0);
                w[j] = new;
                max_delta = max_delta.max((new - old).abs());
            }
        }
        if max_delta < 1e-15 {
            break;
        }
    }
    assert_eq!(r.len(), n);
    w.iter().copied().collect()
}

pub fn penalized_objective(x: &Matrix, y: &[f64], w: &[f64], l1: f64, l2: f64) -> f64 {
    let r = to_na(x) * DVector::from_column_slice(w) - DVector::from_column_slice(y);
    let sq: f64 = w.iter().map(|v| v * v).sum();
    0.5 * r.norm_squared() + l1 * w.iter().map(|v| v.abs()).sum::<f64>() + 0.5 * l2 * sq
}

/// Largest violation of the stationarity conditions of the penalized objective.
pub fn kkt_residual(x: &Matrix, y: &[f64], w: &[f64], l1: f64, l2: f64) -> f64 {
    let xa = to_na(x);
    let r = DVector::from_column_slice(y) - &xa * DVector::from_column_slice(w);
    let corr = xa.tr_mul(&r);
    (0..w.len())
        .map(|j| {
            let g = corr[j] - l2 * w[j];
            if w[j] != 0.0 { (g - l1 * w[j].signum()).abs() } else { (g.abs() - l1).max(0.0) }
        })
        .fold(0.0, f64::max)
}
