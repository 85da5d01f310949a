use crate::error::{Error, Result};
use crate::tensor::{num_elements, Matrix, Tensor};

/// `N` tensor observations sharing one shape, with scalar responses.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dims: Vec<usize>,
    samples: Vec<Tensor>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(dims: Vec<usize>, samples: Vec<Tensor>, y: Vec<f64>) -> Result<Self> {
        // validates dims
        Tensor::zeros(&dims)?;
        if samples.is_empty() {
            return Err(Error::invalid("dataset needs at least one sample"));
        }
        if samples.len() != y.len() {
            return Err(Error::invalid(format!(
                "{} samples but {} responses",
                samples.len(),
                y.len()
            )));
        }
        if let Some((i, s)) = samples.iter().enumerate().find(|(_, s)| s.dims() != dims.as_slice()) {
            return Err(Error::invalid(format!(
                "sample {i} has dims {:?}, expected {dims:?}",
                s.dims()
            )));
        }
        Ok(Dataset { dims, samples, y })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Number of coefficients, `prod(dims)`.
    pub fn num_features(&self) -> usize {
        num_elements(&self.dims)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Tensor] {
        &self.samples
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    /// The `N x P` design whose row `i` is `vec(X_i)`.
    pub fn design(&self) -> Matrix {
        let n = self.samples.len();
        let p = self.num_features();
        let mut data = vec![0.0; n * p];
        for (i, s) in self.samples.iter().enumerate() {
            for (k, &v) in s.data().iter().enumerate() {
                data[i + n * k] = v;
            }
        }
        Matrix::new(n, p, data).expect("non-empty design")
    }

    /// The samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Result<Dataset> {
        if let Some(&bad) = indices.iter().find(|&&i| i >= self.len()) {
            return Err(Error::invalid(format!("sample index {bad} out of range")));
        }
        Dataset::new(
            self.dims.clone(),
            indices.iter().map(|&i| self.samples[i].clone()).collect(),
            indices.iter().map(|&i| self.y[i]).collect(),
        )
    }
}
