//! Sparse and low-rank tensor regression.
//!
//! The estimator regresses a scalar response on tensor-valued covariates,
//! `y_i = <W, X_i> + noise`, and recovers a coefficient tensor `W` that is
//! simultaneously sparse (small entrywise l1 norm) and low-rank (small
//! overlapped nuclear norm). It starts from a closed-form ridge estimate and
//! then solves one constrained norm-minimization per mode with a parallel
//! proximal algorithm; the per-mode answers are averaged.
//!
//! ```
//! use sltr::{simulate::{generate, SimSpec}, solver::{fit, SolverConfig}};
//!
//! let (ds, _w_star) = generate(&SimSpec::new(vec![4, 3, 2], 30).sparsity(50.0).seed(7)).unwrap();
//! let cfg = SolverConfig { lambda: 0.5, tau: 1.0, ..Default::default() };
//! let result = fit(&ds, &cfg).unwrap();
//! assert_eq!(result.w_hat.dims(), &[4, 3, 2]);
//! assert!(result.all_converged());
//! ```

pub mod baselines;
pub mod dataset;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod linalg;
pub mod prox;
pub mod rng;
pub mod simulate;
pub mod solver;
pub mod tensor;

pub use dataset::Dataset;
pub use error::{Error, Result};
pub use solver::{fit, predict, FitResult, SolverConfig};
pub use tensor::{fold, tensorize, Matrix, Tensor};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/tensors.md")]
    mod tensors {}
    #[doc = include_str!("../../../book/src/backbone.md")]
    mod backbone {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/baselines.md")]
    mod baselines {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/file-formats.md")]
    mod file_formats {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
