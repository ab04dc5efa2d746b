//! End-to-end tests driving the compiled `nvdlap` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn nvdlap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nvdlap"))
        .args(args)
        .output()
        .expect("failed to launch nvdlap")
}

fn stdout_value(out: &Output) -> f64 {
    let text = String::from_utf8_lossy(&out.stdout);
    text.trim()
        .parse()
        .unwrap_or_else(|_| panic!("stdout is not a number: {text:?}"))
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("process was killed by a signal")
}

fn write(path: &Path, content: &str) {
    fs::write(path, content).unwrap();
}

#[test]
fn generate_is_deterministic_and_writes_the_requested_edges() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = dir.path().join("g1.txt");
    let g2 = dir.path().join("g2.txt");
    for g in [&g1, &g2] {
        let out = nvdlap(&[
            "generate", "--model", "er", "--n", "40", "--m", "90", "--seed", "5", "--out",
            g.to_str().unwrap(),
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    }
    let body1 = fs::read_to_string(&g1).unwrap();
    let body2 = fs::read_to_string(&g2).unwrap();
    assert_eq!(body1, body2, "same seed must give identical files");
    assert_eq!(body1.lines().count(), 90);
    // Unit weights are left implicit: two whitespace-separated fields.
    assert!(body1.lines().all(|l| l.split_whitespace().count() == 2));
}

#[test]
fn generate_rejects_missing_model_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let out = nvdlap(&[
        "generate", "--model", "er", "--n", "40", "--seed", "5", "--out",
        dir.path().join("g.txt").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--m"), "unhelpful message: {err}");
}

#[test]
fn distance_on_a_single_edge_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.txt");
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    write(&graph, "0 1\n");
    write(&a, "0 1\n1 0\n");
    write(&b, "0 0\n1 1\n");
    for method in ["baseline", "cg", "cg_jacobi", "aug_tree", "approx_chol"] {
        let out = nvdlap(&[
            "distance",
            "--graph",
            graph.to_str().unwrap(),
            "--vec-a",
            a.to_str().unwrap(),
            "--vec-b",
            b.to_str().unwrap(),
            "--method",
            method,
        ]);
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        // y = a - b = (1, -1); on a unit edge the distance is exactly 1.
        assert!((stdout_value(&out) - 1.0).abs() < 1e-9, "method {method}");
    }
}

#[test]
fn unknown_method_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.txt");
    write(&graph, "0 1\n");
    let out = nvdlap(&[
        "resistance", "--graph", graph.to_str().unwrap(), "--u", "0", "--v", "1", "--method",
        "cholesky",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn missing_input_file_is_an_input_error() {
    let out = nvdlap(&[
        "resistance", "--graph", "/nonexistent/graph.txt", "--u", "0", "--v", "1",
    ]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("graph.txt"), "unhelpful message: {err}");
}

#[test]
fn strict_mode_exits_two_on_nonconvergence() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.txt");
    let mut edges = String::new();
    for i in 0..49 {
        edges.push_str(&format!("{} {}\n", i, i + 1));
    }
    write(&graph, &edges);
    let args = [
        "resistance",
        "--graph",
        graph.to_str().unwrap(),
        "--u",
        "0",
        "--v",
        "49",
        "--method",
        "cg",
        "--max-iters",
        "1",
        "--tol",
        "1e-15",
    ];
    // Without --strict the value is still printed and the exit is clean.
    let lax = nvdlap(&args);
    assert_eq!(code(&lax), 0);
    let strict = nvdlap(&[&args[..], &["--strict"]].concat());
    assert_eq!(code(&strict), 2);
}

#[test]
fn resistance_matches_the_series_formula() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.txt");
    write(&graph, "a b 2\nb c 2\n");
    let out = nvdlap(&[
        "resistance", "--graph", graph.to_str().unwrap(), "--u", "a", "--v", "c", "--method",
        "baseline",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!((stdout_value(&out) - 1.0).abs() < 1e-9);

    let same = nvdlap(&[
        "resistance", "--graph", graph.to_str().unwrap(), "--u", "b", "--v", "b",
    ]);
    assert_eq!(code(&same), 0);
    assert_eq!(stdout_value(&same), 0.0);
}

#[test]
fn polarization_pipeline_runs_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.txt");
    let groups = dir.path().join("groups.txt");
    let out = nvdlap(&[
        "generate", "--model", "sbm", "--n", "40", "--groups", "2", "--pin", "0.6", "--pout",
        "0.05", "--seed", "11", "--out", graph.to_str().unwrap(), "--groups-out",
        groups.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let score = nvdlap(&[
        "polarization", "--graph", graph.to_str().unwrap(), "--groups",
        groups.to_str().unwrap(), "--method", "cg",
    ]);
    assert_eq!(code(&score), 0, "{}", String::from_utf8_lossy(&score.stderr));
    assert!(stdout_value(&score) > 0.0);
    // Raw indicators give a different (larger-normed) input, so the score
    // must change.
    let raw = nvdlap(&[
        "polarization", "--graph", graph.to_str().unwrap(), "--groups",
        groups.to_str().unwrap(), "--method", "cg", "--no-normalize",
    ]);
    assert_eq!(code(&raw), 0);
    assert!(stdout_value(&raw) > stdout_value(&score));
}

#[test]
fn bench_size_sweep_emits_csv_that_fit_accepts() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("sweep.csv");
    let out = nvdlap(&[
        "bench", "size", "--model", "er", "--sizes", "20,40,80", "--methods",
        "cg,approx_chol", "--reps", "2", "--seed", "1", "--format", "csv", "--out",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let body = fs::read_to_string(&csv).unwrap();
    let mut lines = body.lines();
    assert_eq!(
        lines.next().unwrap(),
        "model,n,m,avg_degree,method,mean_time,sd_time,runs_kept,converged_fraction,seed"
    );
    assert_eq!(lines.count(), 6, "3 sizes x 2 methods");

    let fit = nvdlap(&["fit", "--input", csv.to_str().unwrap()]);
    assert_eq!(code(&fit), 0, "{}", String::from_utf8_lossy(&fit.stderr));
    let text = String::from_utf8_lossy(&fit.stdout);
    assert!(text.starts_with("exponent "), "unexpected output: {text}");
}

#[test]
fn fit_recovers_a_planted_exponent() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("planted.csv");
    write(&csv, "n,mean_time\n10,300\n20,1200\n40,4800\n80,19200\n");
    let out = nvdlap(&["fit", "--input", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    let exponent: f64 = text
        .lines()
        .next()
        .unwrap()
        .strip_prefix("exponent ")
        .unwrap()
        .parse()
        .unwrap();
    assert!((exponent - 2.0).abs() < 1e-9, "exponent {exponent}");
    assert!(text.lines().any(|l| l.starts_with("r_squared 1")));
}

#[test]
fn fit_rejects_a_missing_column() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("planted.csv");
    write(&csv, "n,mean_time\n10,300\n20,1200\n40,4800\n");
    let out = nvdlap(&["fit", "--input", csv.to_str().unwrap(), "--y", "p99_time"]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("p99_time"), "unhelpful message: {err}");
}

#[test]
fn bench_density_sweep_writes_json() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("density.json");
    let out = nvdlap(&[
        "bench", "density", "--model", "er", "--n", "60", "--degrees", "2,4", "--methods",
        "cg", "--reps", "2", "--seed", "3", "--format", "json", "--out",
        json.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let body = fs::read_to_string(&json).unwrap();
    assert!(body.trim_start().starts_with('['));
    assert_eq!(body.matches("\"method\"").count(), 2);
}
