//! Synthetic tensor regression data.
//!
//! `W*` and every `X_i` are filled with standard normals in storage order,
//! a uniformly chosen `round(s% * P)` entries of `W*` are zeroed, and
//! `y_i = <W*, X_i> + alpha * e_i` with standard normal `e_i`. Each of the four
//! random ingredients draws from its own [`Stream`].
//!
//! [`SimSpec::low_rank`] swaps the dense `W*` for a sum of random rank-one
//! outer products (drawn from the coefficient stream, factor by factor) before
//! the zero mask is applied. With `sparsity_pct = 0` the result is exactly
//! low-rank in every unfolding.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::rng::{Stream, StreamRng};
use crate::tensor::{num_elements, Tensor};

#[derive(Debug, Clone, PartialEq)]
pub struct SimSpec {
    pub dims: Vec<usize>,
    pub n: usize,
    /// Percentage of zeroed coefficients, `0..=100`.
    pub sparsity_pct: f64,
    pub noise_alpha: f64,
    pub seed: u64,
    pub low_rank: Option<usize>,
}

impl SimSpec {
    pub fn new(dims: Vec<usize>, n: usize) -> Self {
        SimSpec { dims, n, sparsity_pct: 80.0, noise_alpha: 0.1, seed: 0, low_rank: None }
    }

    pub fn sparsity(mut self, pct: f64) -> Self {
        self.sparsity_pct = pct;
        self
    }

    pub fn noise(mut self, alpha: f64) -> Self {
        self.noise_alpha = alpha;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn low_rank(mut self, rank: usize) -> Self {
        self.low_rank = Some(rank);
        self
    }

    pub fn validate(&self) -> Result<()> {
        Tensor::zeros(&self.dims)?;
        if self.n == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        if !(0.0..=100.0).contains(&self.sparsity_pct) {
            return Err(Error::invalid(format!("sparsity {}% outside [0, 100]", self.sparsity_pct)));
        }
        if !(self.noise_alpha >= 0.0 && self.noise_alpha.is_finite()) {
            return Err(Error::invalid(format!("noise alpha {} must be >= 0", self.noise_alpha)));
        }
        if self.low_rank == Some(0) {
            return Err(Error::invalid("low-rank variant needs rank >= 1"));
        }
        Ok(())
    }

    /// Number of coefficients zeroed by the mask.
    pub fn zero_count(&self) -> usize {
        let p = num_elements(&self.dims);
        ((self.sparsity_pct / 100.0 * p as f64).round() as usize).min(p)
    }
}

fn coefficients(spec: &SimSpec) -> Result<Tensor> {
    let mut rng = StreamRng::new(spec.seed, Stream::Coefficients);
    let p = num_elements(&spec.dims);
    let mut w = match spec.low_rank {
        None => (0..p).map(|_| rng.normal()).collect::<Vec<_>>(),
        Some(rank) => {
            let mut acc = vec![0.0; p];
            for _ in 0..rank {
                let factors: Vec<Vec<f64>> =
                    spec.dims.iter().map(|&d| (0..d).map(|_| rng.normal()).collect()).collect();
                let term = Tensor::from_fn(&spec.dims, |ix| {
                    ix.iter().zip(&factors).map(|(&i, f)| f[i]).product()
                })?;
                for (a, t) in acc.iter_mut().zip(term.data()) {
                    *a += t;
                }
            }
            acc
        }
    };

    let mut mask_rng = StreamRng::new(spec.seed, Stream::ZeroMask);
    let mut order: Vec<usize> = (0..p).collect();
    // partial Fisher-Yates: the first `zeros` slots are a uniform sample
    let zeros = spec.zero_count();
    for i in 0..zeros {
        let j = i + mask_rng.below(p - i);
        order.swap(i, j);
        w[order[i]] = 0.0;
    }
    Tensor::new(spec.dims.clone(), w)
}

/// Generates a dataset and the true coefficient tensor.
pub fn generate(spec: &SimSpec) -> Result<(Dataset, Tensor)> {
    spec.validate()?;
    let w_star = coefficients(spec)?;
    let p = w_star.len();

    let mut design = StreamRng::new(spec.seed, Stream::Design);
    let samples = (0..spec.n)
        .map(|_| Tensor::new(spec.dims.clone(), (0..p).map(|_| design.normal()).collect()))
        .collect::<Result<Vec<_>>>()?;

    let mut noise = StreamRng::new(spec.seed, Stream::Noise);
    let y = samples
        .iter()
        .map(|x| {
            let e = noise.normal();
            w_star.inner(x).map(|signal| signal + spec.noise_alpha * e)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok((Dataset::new(spec.dims.clone(), samples, y)?, w_star))
}
