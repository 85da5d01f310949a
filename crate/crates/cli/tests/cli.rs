use std::path::{Path, PathBuf};
use std::process::{Command, Output};

struct Scratch(PathBuf);

impl Scratch {
    fn new(name: &str) -> Self {
        let dir = std::env::temp_dir().join(format!("sltr-cli-{name}-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        Scratch(dir)
    }

    fn path(&self, file: &str) -> String {
        self.0.join(file).to_str().unwrap().to_owned()
    }
}

impl Drop for Scratch {
    fn drop(&mut self) {
        std::fs::remove_dir_all(&self.0).ok();
    }
}

fn sltr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sltr")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = sltr(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn scalar(stdout: &str) -> f64 {
    stdout.trim().parse().unwrap()
}

fn simulate(dir: &Scratch, extra: &[&str]) -> (String, String) {
    let (data, truth) = (dir.path("train.ds"), dir.path("train.w"));
    let mut args = vec!["simulate", "--dims", "4,3,2", "--n", "100", "--seed", "3", "--out", &data, "--truth", &truth];
    args.extend(extra);
    ok(&args);
    (data, truth)
}

#[test]
fn noiseless_pipeline_recovers_coefficients() {
    let dir = Scratch::new("pipeline");
    let (data, truth) = simulate(&dir, &["--alpha", "0", "--sparsity", "50"]);
    let w = dir.path("fit.w");
    let trace = ok(&["fit", "--data", &data, "--lambda", "0.1", "--tau", "0.1", "--out", &w]);
    assert!(trace.starts_with("mode\titeration\trelative_change\tcopy_step\tobjective\n"));
    let ce = scalar(&ok(&["eval", "--pred", &w, "--truth", &truth, "--metric", "ce"]));
    assert!(ce < 0.5, "coefficient error {ce}");

    let pred = dir.path("pred.txt");
    ok(&["predict", "--model", &truth, "--data", &data, "--out", &pred]);
    let y = dir.path("y.txt");
    let ys: Vec<String> = std::fs::read_to_string(&pred).unwrap().lines().map(str::to_owned).collect();
    std::fs::write(&y, ys.join("\n") + "\n").unwrap();
    assert_eq!(scalar(&ok(&["eval", "--pred", &pred, "--truth", &y, "--metric", "mse"])), 0.0);
}

#[test]
fn sequential_and_parallel_fits_write_identical_files() {
    let dir = Scratch::new("determinism");
    let (data, _) = simulate(&dir, &[]);
    let run = |name: &str, extra: &[&str]| {
        let (w, t) = (dir.path(&format!("{name}.w")), dir.path(&format!("{name}.tsv")));
        let mut args = vec!["fit", "--data", &data, "--lambda", "0.5", "--out", &w, "--trace", &t];
        args.extend(extra);
        ok(&args);
        (std::fs::read(w).unwrap(), std::fs::read(t).unwrap())
    };
    let parallel = run("par", &[]);
    assert_eq!(run("seq", &["--sequential"]), parallel);
    assert_eq!(run("one", &["--threads", "1"]), parallel);
}

#[test]
fn eval_of_a_file_against_itself_is_zero() {
    let dir = Scratch::new("eval");
    let (_, truth) = simulate(&dir, &[]);
    assert_eq!(scalar(&ok(&["eval", "--pred", &truth, "--truth", &truth, "--metric", "ce"])), 0.0);
    let v = dir.path("v.txt");
    std::fs::write(&v, "1.5\n-2\n0.25\n").unwrap();
    assert_eq!(scalar(&ok(&["eval", "--pred", &v, "--truth", &v, "--metric", "mse"])), 0.0);

    let labels = dir.path("labels.txt");
    std::fs::write(&labels, "0\n1\n0\n").unwrap();
    let scores = dir.path("scores.txt");
    std::fs::write(&scores, "0.1\n0.9\n0.2\n").unwrap();
    assert_eq!(scalar(&ok(&["eval", "--pred", &scores, "--truth", &labels, "--metric", "auc"])), 1.0);
}

#[test]
fn cv_reads_a_grid_file_and_marks_one_selection() {
    let dir = Scratch::new("cv");
    let (data, _) = simulate(&dir, &[]);
    let grid = dir.path("grid.tsv");
    std::fs::write(&grid, "lambda\ttau\tepsilon\n0.1\t0.5\t1\n1\t0.5\t1\n").unwrap();
    let report = ok(&["cv", "--data", &data, "--grid-file", &grid, "--folds", "4", "--seed", "1"]);
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "lambda\ttau\tepsilon\tmean_mse\tfold0_mse\tfold1_mse\tfold2_mse\tfold3_mse\tselected");
    assert_eq!(lines.len(), 3);
    assert_eq!(lines.iter().filter(|l| l.ends_with("\t1")).count(), 1);
    assert_eq!(report, ok(&["cv", "--data", &data, "--grid-file", &grid, "--folds", "4", "--seed", "1", "--sequential"]));
}

#[test]
fn bench_prints_one_row_per_method() {
    let out = ok(&["bench", "--dims-list", "3x3x2;4x4", "--trials", "2", "--n", "20"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "dims\tn\tmethod\ttrials\tmean_secs\tvar_secs\tmean_iterations");
    assert_eq!(lines.len(), 1 + 2 * 4);
    assert!(lines[1].starts_with("3x3x2\t20\tsltr_sequential\t2\t"));
    assert!(lines[8].starts_with("4x4\t20\telastic_net\t2\t"));
}

fn fails(args: &[&str]) -> String {
    let out = sltr(args);
    assert!(!out.status.success(), "{args:?} should fail");
    String::from_utf8(out.stderr).unwrap()
}

#[test]
fn errors_exit_nonzero_with_a_diagnostic() {
    let dir = Scratch::new("errors");
    let missing = dir.path("missing.ds");
    let err = fails(&["fit", "--data", &missing, "--out", &dir.path("w")]);
    assert!(err.starts_with("error: "), "{err}");
    assert_eq!(err.trim_end().lines().count(), 1);

    fails(&["simulate", "--dims", "3,0", "--n", "5", "--out", &dir.path("x")]);
    fails(&["fit", "--bogus-flag"]);

    let (data, _) = simulate(&dir, &[]);
    let err = fails(&["fit", "--data", &data, "--lambda=-1", "--out", &dir.path("w")]);
    assert!(err.contains("lambda"), "{err}");
    let err = fails(&["fit", "--data", &data, "--rho", "2", "--out", &dir.path("w")]);
    assert!(err.contains("rho"), "{err}");

    let junk = dir.path("junk.ds");
    std::fs::write(&junk, b"NOTSLTR!rest").unwrap();
    let err = fails(&["predict", "--model", &junk, "--data", &data, "--out", &dir.path("p")]);
    assert!(err.contains("byte 0"), "{err}");
    assert!(!Path::new(&dir.path("p")).exists());
}
