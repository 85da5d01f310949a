//! Wall-clock comparison of sequential and parallel fits and the two
//! vector baselines, repeated over independently generated datasets.

use std::time::Instant;

use clap::Args;
use sltr::baselines::{fit_elastic_net, fit_lasso, lasso_lambda_max, BaselineConfig};
use sltr::simulate::{generate, SimSpec};
use sltr::solver::{fit, SolverConfig};
use sltr::{Error, Result};

#[derive(Args)]
pub struct BenchArgs {
    /// Shapes separated by `;` or spaces, e.g. "20x20x5;30x30x5".
    #[arg(long, default_value = "10x10x5;20x20x5;30x30x5")]
    dims_list: String,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 80.0)]
    sparsity: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    /// Samples per dataset [default: 50% of P for matrices, 8% of P otherwise].
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 0.3)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    /// Baseline penalty as a fraction of the lasso lambda_max.
    #[arg(long, default_value_t = 0.1)]
    baseline_frac: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

struct Stats {
    secs: Vec<f64>,
    iters: Vec<f64>,
}

impl Stats {
    fn new() -> Self {
        Stats { secs: Vec::new(), iters: Vec::new() }
    }

    fn mean(v: &[f64]) -> f64 {
        v.iter().sum::<f64>() / v.len() as f64
    }

    /// Unbiased sample variance.
    fn var(v: &[f64]) -> f64 {
        if v.len() < 2 {
            return 0.0;
        }
        let m = Self::mean(v);
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
    }
}

pub fn default_samples(dims: &[usize]) -> usize {
    let p: usize = dims.iter().product();
    let frac = if dims.len() == 2 { 0.5 } else { 0.08 };
    ((frac * p as f64).round() as usize).max(2)
}

fn parse_list(s: &str) -> Result<Vec<Vec<usize>>> {
    s.split([';', ' '])
        .filter(|t| !t.is_empty())
        .map(|t| crate::parse_dims(t).map_err(Error::InvalidArgument))
        .collect()
}

pub fn run(a: &BenchArgs, threads: Option<usize>) -> Result<()> {
    if a.trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    let shapes = parse_list(&a.dims_list)?;
    println!("dims\tn\tmethod\ttrials\tmean_secs\tvar_secs\tmean_iterations");
    for dims in shapes {
        let n = a.n.unwrap_or_else(|| default_samples(&dims));
        let label = dims.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("x");
        let names = ["sltr_sequential", "sltr_parallel", "lasso", "elastic_net"];
        let mut stats: Vec<Stats> = names.iter().map(|_| Stats::new()).collect();
        for trial in 0..a.trials {
            let spec = SimSpec::new(dims.clone(), n)
                .sparsity(a.sparsity)
                .noise(a.alpha)
                .seed(a.seed.wrapping_add(trial as u64));
            let (ds, _) = generate(&spec)?;
            let cfg = SolverConfig { lambda: a.lambda, tau: a.tau, epsilon: a.epsilon, ..Default::default() };
            let parallel_allowed = threads != Some(1);
            for (slot, parallel) in [(0, false), (1, parallel_allowed)] {
                let cfg = if parallel { cfg.clone() } else { cfg.clone().sequential() };
                let t = Instant::now();
                let r = fit(&ds, &cfg)?;
                stats[slot].secs.push(t.elapsed().as_secs_f64());
                stats[slot].iters.push(r.iterations.iter().sum::<usize>() as f64 / r.iterations.len() as f64);
            }
            let x = ds.design();
            let lambda = a.baseline_frac * lasso_lambda_max(&x, ds.y());
            let base = BaselineConfig { lambda, ..Default::default() };
            let t = Instant::now();
            let l = fit_lasso(&x, ds.y(), &base)?;
            stats[2].secs.push(t.elapsed().as_secs_f64());
            stats[2].iters.push(l.iterations as f64);
            let t = Instant::now();
            let e = fit_elastic_net(&x, ds.y(), &BaselineConfig { l1_ratio: 0.5, ..base })?;
            stats[3].secs.push(t.elapsed().as_secs_f64());
            stats[3].iters.push(e.iterations as f64);
        }
        for (name, s) in names.iter().zip(&stats) {
            println!(
                "{label}\t{n}\t{name}\t{}\t{:.6}\t{:.3e}\t{:.1}",
                a.trials,
                Stats::mean(&s.secs),
                Stats::var(&s.secs),
                Stats::mean(&s.iters)
            );
        }
    }
    Ok(())
}
