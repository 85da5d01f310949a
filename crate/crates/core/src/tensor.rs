//! Dense tensors and matrices with the unfold/fold algebra.
//!
//! Storage is generalized column-major: element `(i_1, ..., i_M)` (zero-based)
//! lives at offset `sum_m i_m * prod_{l<m} p_l`, so mode 0 varies fastest.
//! Matrices use the same convention (plain column-major), which makes the
//! mode-0 unfolding a reshape of the tensor buffer.
//!
//! Mode indices are zero-based throughout the crate.

use std::fmt;

use nalgebra::{DMatrix, DMatrixView};

use crate::error::{Error, Result};

/// A dense tensor of order `M >= 1`.
#[derive(Clone, PartialEq)]
pub struct Tensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

/// A dense column-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::invalid("tensor must have at least one mode"));
    }
    if dims.iter().any(|&d| d == 0) {
        return Err(Error::invalid(format!("dimensions must be positive, got {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or_else(|| Error::invalid("tensor size overflows usize"))
}

/// Product of all dimensions.
pub fn num_elements(dims: &[usize]) -> usize {
    dims.iter().product()
}

impl Tensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if data.len() != len {
            return Err(Error::invalid(format!(
                "data length {} does not match dims {:?} (expected {len})",
                data.len(),
                dims
            )));
        }
        Ok(Tensor { dims, data })
    }

    pub fn zeros(dims: &[usize]) -> Result<Self> {
        let len = check_dims(dims)?;
        Ok(Tensor { dims: dims.to_vec(), data: vec![0.0; len] })
    }

    /// Builds a tensor by evaluating `f` at every multi-index, in storage order.
    pub fn from_fn(dims: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let len = check_dims(dims)?;
        let mut idx = vec![0usize; dims.len()];
        let mut data = Vec::with_capacity(len);
        for _ in 0..len {
            data.push(f(&idx));
            for (i, &d) in idx.iter_mut().zip(dims) {
                *i += 1;
                if *i < d {
                    break;
                }
                *i = 0;
            }
        }
        Ok(Tensor { dims: dims.to_vec(), data })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Storage offset of a multi-index. Panics if the index is out of bounds.
    pub fn offset(&self, index: &[usize]) -> usize {
        assert_eq!(index.len(), self.dims.len(), "index order mismatch");
        let mut stride = 1;
        let mut off = 0;
        for (&i, &d) in index.iter().zip(&self.dims) {
            assert!(i < d, "index {index:?} out of bounds for dims {:?}", self.dims);
            off += i * stride;
            stride *= d;
        }
        off
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    /// Mode-`mode` unfolding: a `p_mode x prod_{k != mode} p_k` matrix whose
    /// columns are the mode fibers. Column `j = sum_{k != mode} i_k J_k` with
    /// `J_k = prod_{l < k, l != mode} p_l`.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        let (left, mid, right) = split_dims(&self.dims, mode)?;
        let mut out = vec![0.0; self.data.len()];
        // tensor offset a + left*(i + mid*b)  ->  matrix (i, a + left*b)
        for b in 0..right {
            for i in 0..mid {
                let src = left * (i + mid * b);
                for a in 0..left {
                    out[i + mid * (a + left * b)] = self.data[src + a];
                }
            }
        }
        Ok(Matrix { rows: mid, cols: left * right, data: out })
    }

    /// The canonical flat layout as a vector.
    pub fn vectorize(&self) -> Vec<f64> {
        self.data.clone()
    }

    pub fn inner(&self, other: &Tensor) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::invalid(format!(
                "inner product of tensors with dims {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(dot(&self.data, &other.data))
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn linf_norm(&self) -> f64 {
        linf(&self.data)
    }

    /// Elementwise `self - other`.
    pub fn sub(&self, other: &Tensor) -> Result<Tensor> {
        if self.dims != other.dims {
            return Err(Error::invalid("tensor dims mismatch in subtraction"));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Tensor { dims: self.dims.clone(), data })
    }

    pub fn scaled(&self, s: f64) -> Tensor {
        Tensor { dims: self.dims.clone(), data: self.data.iter().map(|v| v * s).collect() }
    }
}

/// Inverse of [`Tensor::unfold`].
pub fn fold(matrix: &Matrix, mode: usize, dims: &[usize]) -> Result<Tensor> {
    check_dims(dims)?;
    let (left, mid, right) = split_dims(dims, mode)?;
    if matrix.rows != mid || matrix.cols != left * right {
        return Err(Error::invalid(format!(
            "cannot fold a {}x{} matrix along mode {mode} into dims {dims:?}",
            matrix.rows, matrix.cols
        )));
    }
    let mut out = vec![0.0; matrix.data.len()];
    for b in 0..right {
        for i in 0..mid {
            let dst = left * (i + mid * b);
            for a in 0..left {
                out[dst + a] = matrix.data[i + mid * (a + left * b)];
            }
        }
    }
    Ok(Tensor { dims: dims.to_vec(), data: out })
}

/// Inverse of [`Tensor::vectorize`].
pub fn tensorize(v: &[f64], dims: &[usize]) -> Result<Tensor> {
    Tensor::new(dims.to_vec(), v.to_vec())
}

fn split_dims(dims: &[usize], mode: usize) -> Result<(usize, usize, usize)> {
    if mode >= dims.len() {
        return Err(Error::invalid(format!(
            "mode {mode} out of range for a tensor of order {}",
            dims.len()
        )));
    }
    let left = dims[..mode].iter().product();
    let right = dims[mode + 1..].iter().product();
    Ok((left, dims[mode], right))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn frobenius(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn linf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!("matrix shape {rows}x{cols} must be positive")));
        }
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "data length {} does not match {rows}x{cols}",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Row-major nested literal, handy in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::invalid("ragged rows"));
        }
        Matrix::new(r, c, (0..r * c).map(|k| rows[k % r][k / r]).collect())
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Matrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.rows && j < self.cols);
        self.data[i + self.rows * j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i < self.rows && j < self.cols);
        self.data[i + self.rows * j] = v;
    }

    pub fn view(&self) -> DMatrixView<'_, f64> {
        DMatrixView::from_slice(&self.data, self.rows, self.cols)
    }

    pub fn from_nalgebra(m: DMatrix<f64>) -> Self {
        let (rows, cols) = m.shape();
        Matrix { rows, cols, data: m.as_slice().to_vec() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        frobenius(&self.data)
    }

    pub fn l1_norm(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).sum()
    }

    pub fn linf_norm(&self) -> f64 {
        linf(&self.data)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn same_shape(&self, other: &Matrix) -> bool {
        self.shape() == other.shape()
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if !self.same_shape(other) {
            return Err(Error::invalid(format!(
                "shape mismatch: {:?} vs {:?}",
                self.shape(),
                other.shape()
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * s).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

impl fmt::Debug for Tensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tensor").field("dims", &self.dims).field("data", &self.data).finish()
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:>12.6} ", self.get(i, j))?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}
