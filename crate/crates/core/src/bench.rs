//! Benchmark harness: timed distance computations under a fixed run
//! protocol, size and density sweeps over the generators, scaling-law
//! exponent fits, and CSV/JSON emission.
//!
//! Protocol: for each (graph, method) cell the distance computation runs
//! `warmup_runs` untimed repetitions, then `repetitions` timed ones. Runs
//! slower than `outlier_factor` times the mean are dropped, once (the
//! filter is not iterated). Graph and vector generation happen before the
//! clock starts; preconditioner construction is part of the measured solve,
//! as it must be repaid on every distance query.

use std::io::{Read, Write};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::generate::{params_for_avg_degree, GenError, GenSpec, ModelKind};
use crate::graph::Graph;
use crate::metrics::{ge_distance, MetricsError};
use crate::oracle::EigScalar;
use crate::solve::{Method, SolverConfig};

use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Errors from the benchmark layer.
#[derive(Debug, Error)]
pub enum BenchError {
    /// Exponent fits need at least three points.
    #[error("scaling fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    /// Exponent fits work in log space, so data must be positive.
    #[error("scaling fit needs positive finite values, got ({x}, {y})")]
    NonPositiveData { x: f64, y: f64 },
    /// All x values coincide; no slope is identifiable.
    #[error("scaling fit needs at least two distinct x values")]
    DegenerateInput,
    /// A requested CSV column is missing.
    #[error("column `{0}` not found in CSV header")]
    MissingColumn(String),
    /// Output format name not recognized.
    #[error("unknown output format `{0}`; expected csv or json")]
    UnknownFormat(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Repetition and outlier policy for timed runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunProtocol {
    /// Timed repetitions per cell.
    pub repetitions: usize,
    /// Untimed warmup repetitions, discarded.
    pub warmup_runs: usize,
    /// Drop runs slower than this multiple of the mean (applied once).
    pub outlier_factor: f64,
}

impl Default for RunProtocol {
    fn default() -> Self {
        RunProtocol {
            repetitions: 10,
            warmup_runs: 1,
            outlier_factor: 2.0,
        }
    }
}

/// One benchmark measurement: a (graph, method) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub model: String,
    pub n: usize,
    pub m: usize,
    pub avg_degree: f64,
    pub method: String,
    /// Mean wall-clock seconds over the kept runs.
    pub mean_time: f64,
    /// Sample standard deviation over the kept runs (0 for a single run).
    pub sd_time: f64,
    /// Runs surviving the outlier filter.
    pub runs_kept: usize,
    /// Fraction of timed runs whose solve converged.
    pub converged_fraction: f64,
    /// Master seed of the sweep that produced this record.
    pub seed: u64,
}

/// Applies the outlier rule once: compute the mean of all runs and drop
/// any run slower than `factor` times that mean.
pub fn filter_outliers(times: &[f64], factor: f64) -> Vec<f64> {
    if times.is_empty() {
        return Vec::new();
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let kept: Vec<f64> = times.iter().copied().filter(|&t| t <= factor * mean).collect();
    if kept.is_empty() {
        times.to_vec() // all equal and huge: nothing is an outlier then
    } else {
        kept
    }
}

fn mean_sd(times: &[f64]) -> (f64, f64) {
    let k = times.len();
    let mean = times.iter().sum::<f64>() / k as f64;
    if k < 2 {
        return (mean, 0.0);
    }
    let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (k - 1) as f64;
    (mean, var.sqrt())
}

/// Times `ge_distance(g, a, b, method)` under the protocol and produces a
/// record. Non-convergence is data, not an error: it lowers
/// `converged_fraction`.
#[allow(clippy::too_many_arguments)]
pub fn time_distance<T: EigScalar>(
    g: &Graph<T>,
    a: &[T],
    b: &[T],
    model: &str,
    method: Method,
    protocol: &RunProtocol,
    cfg: &SolverConfig<T>,
    seed: u64,
) -> Result<BenchRecord, BenchError> {
    for _ in 0..protocol.warmup_runs {
        let (d, r) = ge_distance(g, a, b, method, cfg)?;
        std::hint::black_box((d, r.iterations));
    }
    let mut times = Vec::with_capacity(protocol.repetitions);
    let mut converged = 0usize;
    for _ in 0..protocol.repetitions.max(1) {
        let start = Instant::now();
        let (d, r) = ge_distance(g, a, b, method, cfg)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(d);
        if r.converged {
            converged += 1;
        }
    }
    let kept = filter_outliers(&times, protocol.outlier_factor);
    let (mean_time, sd_time) = mean_sd(&kept);
    Ok(BenchRecord {
        model: model.to_string(),
        n: g.n(),
        m: g.m(),
        avg_degree: 2.0 * g.m() as f64 / g.n() as f64,
        method: method.name().to_string(),
        mean_time,
        sd_time,
        runs_kept: kept.len(),
        converged_fraction: converged as f64 / times.len() as f64,
        seed,
    })
}

/// SplitMix64-style mixer for deriving independent per-cell seeds from the
/// sweep master seed.
fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        ^ a.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ b.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn random_vector_pair<T: EigScalar>(n: usize, seed: u64) -> (Vec<T>, Vec<T>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |_: usize| T::from_f64_lossy(rng.random::<f64>());
    let a: Vec<T> = (0..n).map(&mut draw).collect();
    let b: Vec<T> = (0..n).map(&mut draw).collect();
    (a, b)
}

/// Runs the size sweep: one graph per size at the target average degree,
/// shared by all methods; one record per (size, method). The baseline is
/// skipped (with a log note) above its node cap.
pub fn bench_size_sweep<T: EigScalar>(
    kind: ModelKind,
    sizes: &[usize],
    avg_degree: f64,
    methods: &[Method],
    protocol: &RunProtocol,
    cfg: &SolverConfig<T>,
    seed: u64,
) -> Result<Vec<BenchRecord>, BenchError> {
    let mut out = Vec::new();
    for &n in sizes {
        let spec = GenSpec {
            n,
            model: params_for_avg_degree(kind, n, avg_degree),
            seed: mix_seed(seed, n as u64, 0),
        };
        let g: Graph<T> = spec.generate()?;
        let (a, b) = random_vector_pair(n, mix_seed(seed, n as u64, 1));
        for &method in methods {
            if method == Method::Baseline && n > cfg.cap() {
                log::info!("skipping baseline at n = {n}: above cap {}", cfg.cap());
                continue;
            }
            log::info!("size sweep: model={kind} n={n} method={method}");
            out.push(time_distance(&g, &a, &b, kind.name(), method, protocol, cfg, seed)?);
        }
    }
    Ok(out)
}

/// Runs the density sweep at fixed `n` over target average degrees. The
/// baseline, if requested, runs at a single reference degree (the sweep
/// value closest to 10, ties toward the smaller) — it is degree-insensitive
/// to first order and too slow to repeat across the whole sweep.
pub fn bench_density_sweep<T: EigScalar>(
    kind: ModelKind,
    n: usize,
    degrees: &[f64],
    methods: &[Method],
    protocol: &RunProtocol,
    cfg: &SolverConfig<T>,
    seed: u64,
) -> Result<Vec<BenchRecord>, BenchError> {
    let reference = degrees
        .iter()
        .copied()
        .min_by(|a, b| {
            (a - 10.0)
                .abs()
                .total_cmp(&(b - 10.0).abs())
                .then(a.total_cmp(b))
        })
        .unwrap_or(10.0);
    let mut out = Vec::new();
    for &degree in degrees {
        let spec = GenSpec {
            n,
            model: params_for_avg_degree(kind, n, degree),
            seed: mix_seed(seed, degree.to_bits(), 0),
        };
        let g: Graph<T> = spec.generate()?;
        let (a, b) = random_vector_pair(n, mix_seed(seed, degree.to_bits(), 1));
        for &method in methods {
            if method == Method::Baseline && (degree != reference || n > cfg.cap()) {
                continue;
            }
            log::info!("density sweep: model={kind} n={n} degree={degree} method={method}");
            out.push(time_distance(&g, &a, &b, kind.name(), method, protocol, cfg, seed)?);
        }
    }
    Ok(out)
}

/// Power-law fit `y = c * x^e` by least squares on `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    /// Fitted exponent `e` (the log-log slope).
    pub exponent: f64,
    /// Fitted `ln c` (the log-log intercept).
    pub intercept: f64,
    /// Coefficient of determination in log space; 1.0 for an exact fit.
    pub r_squared: f64,
}

/// Fits the scaling exponent of `ys` against `xs`. Needs at least three
/// points with positive finite coordinates and two distinct `x` values.
pub fn fit_exponent(xs: &[f64], ys: &[f64]) -> Result<ExponentFit, BenchError> {
    let k = xs.len().min(ys.len());
    if xs.len() != ys.len() || k < 3 {
        return Err(BenchError::TooFewPoints(k));
    }
    for (&x, &y) in xs.iter().zip(ys) {
        if !(x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite()) {
            return Err(BenchError::NonPositiveData { x, y });
        }
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k as f64;
    let my = ly.iter().sum::<f64>() / k as f64;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(BenchError::DegenerateInput);
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let exponent = sxy / sxx;
    let intercept = my - exponent * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let e = y - (intercept + exponent * x);
            e * e
        })
        .sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(ExponentFit {
        exponent,
        intercept,
        r_squared,
    })
}

/// Output format for benchmark records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(BenchError::UnknownFormat(other.to_string())),
        }
    }
}

/// Writes records in the chosen format, preserving their order. CSV uses a
/// fixed header (the record's field order); JSON emits an array of objects.
pub fn emit_results<W: Write>(
    records: &[BenchRecord],
    format: OutputFormat,
    out: W,
) -> Result<(), BenchError> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(out);
            if records.is_empty() {
                // Serde-driven headers need a record; write them manually.
                w.write_record([
                    "model",
                    "n",
                    "m",
                    "avg_degree",
                    "method",
                    "mean_time",
                    "sd_time",
                    "runs_kept",
                    "converged_fraction",
                    "seed",
                ])?;
            }
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(out, records)?;
        }
    }
    Ok(())
}

/// Reads records back from CSV, the inverse of [`emit_results`].
pub fn read_records<R: Read>(reader: R) -> Result<Vec<BenchRecord>, BenchError> {
    let mut r = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for rec in r.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Extracts two numeric columns by header name from arbitrary CSV, for
/// fitting scaling laws over previously written sweeps.
pub fn read_xy_columns<R: Read>(
    reader: R,
    x_col: &str,
    y_col: &str,
) -> Result<(Vec<f64>, Vec<f64>), BenchError> {
    let mut r = csv::Reader::from_reader(reader);
    let headers = r.headers()?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| BenchError::MissingColumn(name.to_string()))
    };
    let xi = find(x_col)?;
    let yi = find(y_col)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64, BenchError> {
            let tok = rec.get(i).unwrap_or("");
            tok.parse::<f64>().map_err(|_| BenchError::NonPositiveData {
                x: f64::NAN,
                y: f64::NAN,
            })
        };
        xs.push(parse(xi)?);
        ys.push(parse(yi)?);
    }
    Ok((xs, ys))
}
