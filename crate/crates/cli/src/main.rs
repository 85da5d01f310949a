use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sltr::evaluation::{auc, coefficient_error, default_grid, kfold_cv, mse, GridCell};
use sltr::io::{read_dataset, read_tensor, read_vector_text, write_dataset, write_tensor, write_vector_text};
use sltr::simulate::{generate, SimSpec};
use sltr::solver::{fit, predict, SolverConfig};
use sltr::{Error, Result};

mod bench;

#[derive(Parser)]
#[command(name = "sltr", version, about = "Sparse and low-rank tensor regression")]
struct Cli {
    /// Worker threads for both parallel layers; 1 forces sequential execution.
    #[arg(long, global = true, env = "SLTR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset and its true coefficient tensor.
    Simulate(SimulateArgs),
    /// Fit the estimator and write the coefficient tensor.
    Fit(FitArgs),
    /// Predict responses for every sample of a dataset.
    Predict(PredictArgs),
    /// Cross-validate (lambda, tau, epsilon) over a grid.
    Cv(CvArgs),
    /// Time sequential and parallel fits against the baselines.
    Bench(bench::BenchArgs),
    /// Score predictions or coefficients.
    Eval(EvalArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Tensor shape, e.g. 20,20,5 or 20x20x5.
    #[arg(long, value_parser = parse_dims)]
    dims: ::std::vec::Vec<usize>,
    #[arg(long)]
    n: usize,
    /// Percentage of zeroed coefficients.
    #[arg(long, default_value_t = 80.0)]
    sparsity: f64,
    #[arg(long, default_value_t = 0.1)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Draw the true tensor as a sum of this many rank-one terms.
    #[arg(long)]
    low_rank: Option<usize>,
    /// Dataset output path.
    #[arg(long)]
    out: PathBuf,
    /// True-coefficient output path [default: <out>.wstar].
    #[arg(long)]
    truth: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolverArgs {
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    /// Run both layers sequentially.
    #[arg(long)]
    sequential: bool,
    /// Use proximal steps of 4*lambda (l1) and 4*tau (nuclear).
    #[arg(long)]
    paper_faithful_steps: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        let cfg = SolverConfig {
            lambda: self.lambda,
            tau: self.tau,
            epsilon: self.epsilon,
            rho: self.rho,
            gamma: self.gamma,
            max_iter: self.max_iter,
            tol: self.tol,
            paper_faithful_steps: self.paper_faithful_steps,
            ..SolverConfig::default()
        };
        if self.sequential {
            cfg.sequential()
        } else {
            cfg
        }
    }
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
    /// Coefficient tensor output path.
    #[arg(long)]
    out: PathBuf,
    /// Write the iteration trace here instead of stdout.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CvArgs {
    #[arg(long)]
    data: PathBuf,
    /// Tab-separated `lambda tau epsilon` rows after a header line [default: built-in grid].
    #[arg(long)]
    grid_file: Option<PathBuf>,
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Metric {
    Mse,
    Ce,
    Auc,
}

#[derive(Args)]
struct EvalArgs {
    /// Predictions (text) or, for `ce`, the estimated tensor file.
    #[arg(long)]
    pred: PathBuf,
    /// Responses or 0/1 labels (text) or, for `ce`, the true tensor file.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, value_enum)]
    metric: Metric,
}

fn parse_dims(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split([',', 'x', 'X'])
        .map(|p| match p.trim().parse::<usize>() {
            Ok(0) => Err(format!("dimension must be positive in {s:?}")),
            Ok(d) => Ok(d),
            Err(e) => Err(format!("bad dimension {p:?}: {e}")),
        })
        .collect()
}

fn trace_table(result: &sltr::FitResult) -> String {
    let mut out = String::from("mode\titeration\trelative_change\tcopy_step\tobjective\n");
    for (mode, trace) in result.traces.iter().enumerate() {
        for e in trace {
            out.push_str(&format!(
                "{mode}\t{}\t{:e}\t{:e}\t{}\n",
                e.iteration, e.relative_change, e.copy_step, e.objective
            ));
        }
    }
    out
}

fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_grid(path: &Path) -> Result<Vec<GridCell>> {
    let text = fs::read_to_string(path)?;
    let mut cells = Vec::new();
    let mut offset = 0u64;
    for (lineno, line) in text.split_inclusive('\n').enumerate() {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let header = lineno == 0 && fields.first().is_some_and(|f| f.parse::<f64>().is_err());
        if !fields.is_empty() && !header && !fields[0].starts_with('#') {
            let nums = fields
                .iter()
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .ok()
                .filter(|v| v.len() == 3)
                .ok_or_else(|| Error::Format { offset, message: format!("expected `lambda tau epsilon`, got {:?}", line.trim()) })?;
            cells.push(GridCell { lambda: nums[0], tau: nums[1], epsilon: nums[2] });
        }
        offset += line.len() as u64;
    }
    Ok(cells)
}

fn run(cli: Cli) -> Result<()> {
    let single_thread = cli.threads == Some(1);
    let solver_config = |args: &SolverArgs| {
        let cfg = args.config();
        if single_thread {
            cfg.sequential()
        } else {
            cfg
        }
    };
    match cli.command {
        Command::Simulate(a) => {
            let mut spec = SimSpec::new(a.dims, a.n).sparsity(a.sparsity).noise(a.alpha).seed(a.seed);
            spec.low_rank = a.low_rank;
            let (ds, w_star) = generate(&spec)?;
            write_dataset(&a.out, &ds)?;
            let truth = a.truth.unwrap_or_else(|| {
                let mut p = a.out.clone().into_os_string();
                p.push(".wstar");
                p.into()
            });
            write_tensor(&truth, &w_star)?;
        }
        Command::Fit(a) => {
            let ds = read_dataset(&a.data)?;
            let result = fit(&ds, &solver_config(&a.solver))?;
            write_tensor(&a.out, &result.w_hat)?;
            emit(&trace_table(&result), a.trace.as_deref())?;
            let t = &result.timings;
            let modes: Vec<String> = t.mode_secs.iter().map(|s| format!("{s:.3}")).collect();
            eprintln!(
                "iterations {:?}  backbone {:.3}s  modes [{}]s  total {:.3}s",
                result.iterations,
                t.backbone_secs,
                modes.join(", "),
                t.total_secs
            );
            if !result.all_converged() {
                eprintln!("warning: max_iter reached before the tolerance in some mode");
            }
        }
        Command::Predict(a) => {
            let w = read_tensor(&a.model)?;
            let ds = read_dataset(&a.data)?;
            write_vector_text(&a.out, &predict(&w, ds.samples())?)?;
        }
        Command::Cv(a) => {
            let ds = read_dataset(&a.data)?;
            let grid = match &a.grid_file {
                Some(p) => read_grid(p)?,
                None => default_grid(),
            };
            let template = SolverConfig { seed: a.seed, ..solver_config(&a.solver) };
            let report = kfold_cv(&ds, &grid, a.folds, a.seed, &template)?;
            emit(&report.to_table(), a.out.as_deref())?;
            let best = report.selected_cell();
            eprintln!(
                "selected lambda={} tau={} epsilon={} (mean mse {})",
                best.lambda,
                best.tau,
                best.epsilon,
                report.selected_mse()
            );
        }
        Command::Bench(a) => bench::run(&a, cli.threads)?,
        Command::Eval(a) => {
            let value = match a.metric {
                Metric::Mse => mse(&read_vector_text(&a.truth)?, &read_vector_text(&a.pred)?)?,
                Metric::Ce => coefficient_error(&read_tensor(&a.pred)?, &read_tensor(&a.truth)?)?,
                Metric::Auc => {
                    let labels = read_vector_text(&a.truth)?
                        .into_iter()
                        .map(|v| match v {
                            0.0 => Ok(false),
                            1.0 => Ok(true),
                            _ => Err(Error::InvalidArgument(format!("label {v} is not 0 or 1"))),
                        })
                        .collect::<Result<Vec<_>>>()?;
                    auc(&read_vector_text(&a.pred)?, &labels)?
                }
            };
            println!("{value}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        pool = pool.num_threads(n.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: thread pool: {e}");
            return ExitCode::FAILURE;
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
