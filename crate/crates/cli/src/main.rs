//! `nvdlap`: node-vector distances on sparse graphs.
//!
//! Subcommands cover the full pipeline: generating random graphs,
//! computing distances / effective resistances / polarization scores with
//! a choice of solver, running timing sweeps, and fitting scaling
//! exponents to the results. Values go to stdout; diagnostics go to
//! stderr through the logger.
//!
//! Exit codes: 0 on success, 1 on any input or solver error, 2 when
//! `--strict` is set and the solve did not converge.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use nvdlap_core::bench::{
    bench_density_sweep, bench_size_sweep, emit_results, fit_exponent, read_xy_columns,
    BenchRecord, OutputFormat, RunProtocol,
};
use nvdlap_core::generate::{gen_sbm, GenModel, GenSpec, ModelKind};
use nvdlap_core::io::{
    read_edge_list, read_groups, read_node_vector, write_graph, LabelMap, ReadOptions,
};
use nvdlap_core::metrics::{effective_resistance, ge_distance, polarization_score};
use nvdlap_core::{Graph64, Method, SolveReport64, SolverConfig64};

#[derive(Parser)]
#[command(name = "nvdlap", version, about = "Node-vector distances on sparse graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Distance between two node vectors over a graph.
    Distance(DistanceArgs),
    /// Effective resistance between two nodes.
    Resistance(ResistanceArgs),
    /// Polarization score of a two-group node labeling.
    Polarization(PolarizationArgs),
    /// Timing sweeps over graph size or density.
    Bench(BenchArgs),
    /// Fit a power law to two columns of a results table.
    Fit(FitArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Graph model: er, ba, ws, or sbm.
    #[arg(long)]
    model: ModelKind,
    /// Number of nodes.
    #[arg(long)]
    n: usize,
    /// Exact number of edges (er).
    #[arg(long)]
    m: Option<usize>,
    /// Edges per arriving node (ba) or even ring degree (ws).
    #[arg(long)]
    k: Option<usize>,
    /// Rewiring probability (ws).
    #[arg(long)]
    p: Option<f64>,
    /// Number of groups (sbm).
    #[arg(long)]
    groups: Option<usize>,
    /// Within-group edge probability (sbm).
    #[arg(long)]
    pin: Option<f64>,
    /// Between-group edge probability (sbm).
    #[arg(long)]
    pout: Option<f64>,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output edge-list file.
    #[arg(long)]
    out: PathBuf,
    /// Also write group labels as "node group" lines (sbm only).
    #[arg(long)]
    groups_out: Option<PathBuf>,
}

/// Solver selection shared by the metric subcommands.
#[derive(Args)]
struct SolverOpts {
    /// Solve method: baseline, cg, cg_jacobi, aug_tree, or approx_chol.
    #[arg(long, default_value = "cg")]
    method: Method,
    /// Relative residual tolerance.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Iteration cap (default: 10 per node).
    #[arg(long)]
    max_iters: Option<usize>,
    /// Seed for randomized preconditioners.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra off-tree edge budget for aug_tree.
    #[arg(long)]
    aug_budget: Option<usize>,
    /// Node cap for the dense baseline.
    #[arg(long)]
    baseline_cap: Option<usize>,
    /// Exit with code 2 if the solve does not converge.
    #[arg(long)]
    strict: bool,
}

impl SolverOpts {
    fn config(&self) -> SolverConfig64 {
        SolverConfig64 {
            rel_tolerance: self.tol,
            max_iters: self.max_iters,
            seed: self.seed,
            aug_budget: self.aug_budget,
            baseline_cap: self.baseline_cap,
        }
    }
}

#[derive(Args)]
struct DistanceArgs {
    /// Input edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// First node vector, "node value" lines.
    #[arg(long)]
    vec_a: PathBuf,
    /// Second node vector, "node value" lines.
    #[arg(long)]
    vec_b: PathBuf,
    /// Ignore edge weights and duplicates in the graph file.
    #[arg(long)]
    unweighted: bool,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Args)]
struct ResistanceArgs {
    /// Input edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// First node, by its label in the graph file.
    #[arg(long)]
    u: String,
    /// Second node, by its label in the graph file.
    #[arg(long)]
    v: String,
    /// Ignore edge weights and duplicates in the graph file.
    #[arg(long)]
    unweighted: bool,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Args)]
struct PolarizationArgs {
    /// Input edge-list file.
    #[arg(long)]
    graph: PathBuf,
    /// Group file, "node group" lines with exactly two distinct groups.
    #[arg(long)]
    groups: PathBuf,
    /// Use raw group indicators instead of size-normalized ones.
    #[arg(long)]
    no_normalize: bool,
    /// Ignore edge weights and duplicates in the graph file.
    #[arg(long)]
    unweighted: bool,
    #[command(flatten)]
    solver: SolverOpts,
}

#[derive(Args)]
struct BenchArgs {
    #[command(subcommand)]
    sweep: SweepCommand,
}

#[derive(Subcommand)]
enum SweepCommand {
    /// Sweep graph size at a fixed target average degree.
    Size(SizeArgs),
    /// Sweep average degree at a fixed graph size.
    Density(DensityArgs),
}

/// Timing protocol and solver knobs shared by both sweeps.
#[derive(Args)]
struct ProtocolOpts {
    /// Timed repetitions per (graph, method) cell.
    #[arg(long, default_value_t = 10)]
    reps: usize,
    /// Master seed for graphs, vectors, and preconditioners.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative residual tolerance for the iterative methods.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Node cap above which the baseline method is skipped.
    #[arg(long)]
    baseline_cap: Option<usize>,
}

impl ProtocolOpts {
    fn protocol(&self) -> RunProtocol {
        RunProtocol {
            repetitions: self.reps,
            ..RunProtocol::default()
        }
    }

    fn config(&self) -> SolverConfig64 {
        SolverConfig64 {
            rel_tolerance: self.tol,
            seed: self.seed,
            baseline_cap: self.baseline_cap,
            ..SolverConfig64::default()
        }
    }
}

#[derive(Args)]
struct OutputOpts {
    /// Output format: csv or json.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Output file (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SizeArgs {
    /// Graph model: er, ba, ws, or sbm.
    #[arg(long, default_value = "er")]
    model: ModelKind,
    /// Comma-separated node counts, ascending.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    /// Target average degree held fixed across sizes.
    #[arg(long, default_value_t = 10.0)]
    avg_degree: f64,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<Method>,
    #[command(flatten)]
    proto: ProtocolOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct DensityArgs {
    /// Graph model: er, ba, ws, or sbm.
    #[arg(long, default_value = "er")]
    model: ModelKind,
    /// Fixed node count.
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Comma-separated average degrees.
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8,16,32,64")]
    degrees: Vec<f64>,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<Method>,
    #[command(flatten)]
    proto: ProtocolOpts,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct FitArgs {
    /// CSV file with a header row, e.g. a bench sweep output.
    #[arg(long)]
    input: PathBuf,
    /// Column holding the independent variable.
    #[arg(long, default_value = "n")]
    x: String,
    /// Column holding the dependent variable.
    #[arg(long, default_value = "mean_time")]
    y: String,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    // Map usage errors to exit code 1 (clap defaults to 2, which is
    // reserved here for strict-mode non-convergence); help and version
    // displays stay successful exits.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                ExitCode::FAILURE
            } else {
                ExitCode::SUCCESS
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Generate(args) => cmd_generate(args),
        Command::Distance(args) => cmd_distance(args),
        Command::Resistance(args) => cmd_resistance(args),
        Command::Polarization(args) => cmd_polarization(args),
        Command::Bench(args) => match args.sweep {
            SweepCommand::Size(args) => cmd_bench_size(args),
            SweepCommand::Density(args) => cmd_bench_density(args),
        },
        Command::Fit(args) => cmd_fit(args),
    }
}

fn cmd_generate(args: GenerateArgs) -> Result<ExitCode> {
    let model = build_model(&args)?;
    if args.groups_out.is_some() && args.model != ModelKind::Sbm {
        bail!("--groups-out applies to the sbm model only");
    }
    let (graph, group_labels): (Graph64, Option<Vec<usize>>) = match model {
        GenModel::Sbm {
            groups,
            p_in,
            p_out,
        } => {
            let (g, labels) = gen_sbm(args.n, groups, p_in, p_out, args.seed)?;
            (g, Some(labels))
        }
        other => {
            let spec = GenSpec {
                n: args.n,
                model: other,
                seed: args.seed,
            };
            (spec.generate()?, None)
        }
    };
    let file = create(&args.out)?;
    write_graph(&graph, BufWriter::new(file))?;
    log::info!(
        "wrote {} nodes, {} edges to {}",
        graph.n(),
        graph.m(),
        args.out.display()
    );
    if let (Some(path), Some(labels)) = (&args.groups_out, &group_labels) {
        let mut w = BufWriter::new(create(path)?);
        for (node, group) in labels.iter().enumerate() {
            writeln!(w, "{node} {group}")?;
        }
        w.flush()?;
        log::info!("wrote group labels to {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn build_model(args: &GenerateArgs) -> Result<GenModel> {
    let need = |flag: &str| anyhow!("--{flag} is required for --model {}", args.model);
    Ok(match args.model {
        ModelKind::Er => GenModel::Er {
            m: args.m.ok_or_else(|| need("m"))?,
        },
        ModelKind::Ba => GenModel::Ba {
            k: args.k.ok_or_else(|| need("k"))?,
        },
        ModelKind::Ws => GenModel::Ws {
            k: args.k.ok_or_else(|| need("k"))?,
            p: args.p.ok_or_else(|| need("p"))?,
        },
        ModelKind::Sbm => GenModel::Sbm {
            groups: args.groups.ok_or_else(|| need("groups"))?,
            p_in: args.pin.ok_or_else(|| need("pin"))?,
            p_out: args.pout.ok_or_else(|| need("pout"))?,
        },
    })
}

fn cmd_distance(args: DistanceArgs) -> Result<ExitCode> {
    let (g, labels) = load_graph(&args.graph, args.unweighted)?;
    let a = load_vector(&args.vec_a, &labels)?;
    let b = load_vector(&args.vec_b, &labels)?;
    let (d, report) = ge_distance(&g, &a, &b, args.solver.method, &args.solver.config())?;
    finish(d, &report, args.solver.strict)
}

fn cmd_resistance(args: ResistanceArgs) -> Result<ExitCode> {
    let (g, labels) = load_graph(&args.graph, args.unweighted)?;
    let u = node_id(&labels, &args.u)?;
    let v = node_id(&labels, &args.v)?;
    let (r, report) = effective_resistance(&g, u, v, args.solver.method, &args.solver.config())?;
    finish(r, &report, args.solver.strict)
}

fn cmd_polarization(args: PolarizationArgs) -> Result<ExitCode> {
    let (g, labels) = load_graph(&args.graph, args.unweighted)?;
    let file = open(&args.groups)?;
    let groups = read_groups(BufReader::new(file), &labels)
        .with_context(|| format!("reading {}", args.groups.display()))?;
    let sizes = groups.sizes();
    log::info!(
        "groups: {} ({} nodes) vs {} ({} nodes)",
        groups.names.first().map_or("-", |s| s),
        sizes[0],
        groups.names.get(1).map_or("-", |s| s),
        sizes[1],
    );
    let (score, report) = polarization_score(
        &g,
        &groups,
        args.solver.method,
        &args.solver.config(),
        !args.no_normalize,
    )?;
    finish(score, &report, args.solver.strict)
}

fn cmd_bench_size(args: SizeArgs) -> Result<ExitCode> {
    let records = bench_size_sweep::<f64>(
        args.model,
        &args.sizes,
        args.avg_degree,
        &args.methods,
        &args.proto.protocol(),
        &args.proto.config(),
        args.proto.seed,
    )?;
    write_records(&records, &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bench_density(args: DensityArgs) -> Result<ExitCode> {
    let records = bench_density_sweep::<f64>(
        args.model,
        args.n,
        &args.degrees,
        &args.methods,
        &args.proto.protocol(),
        &args.proto.config(),
        args.proto.seed,
    )?;
    write_records(&records, &args.output)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fit(args: FitArgs) -> Result<ExitCode> {
    let file = open(&args.input)?;
    let (xs, ys) = read_xy_columns(BufReader::new(file), &args.x, &args.y)
        .with_context(|| format!("reading {}", args.input.display()))?;
    let fit = fit_exponent(&xs, &ys)?;
    println!("exponent {}", fit.exponent);
    println!("intercept {}", fit.intercept);
    println!("r_squared {}", fit.r_squared);
    Ok(ExitCode::SUCCESS)
}

fn open(path: &Path) -> Result<File> {
    File::open(path).with_context(|| format!("opening {}", path.display()))
}

fn create(path: &Path) -> Result<File> {
    File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn load_graph(path: &Path, unweighted: bool) -> Result<(Graph64, LabelMap)> {
    let file = open(path)?;
    let opts = ReadOptions { unweighted };
    let (g, labels) = read_edge_list(BufReader::new(file), &opts)
        .with_context(|| format!("reading {}", path.display()))?;
    log::info!("read {} nodes, {} edges from {}", g.n(), g.m(), path.display());
    Ok((g, labels))
}

fn load_vector(path: &Path, labels: &LabelMap) -> Result<Vec<f64>> {
    let file = open(path)?;
    let (v, defaulted) = read_node_vector(BufReader::new(file), labels)
        .with_context(|| format!("reading {}", path.display()))?;
    if defaulted > 0 {
        log::info!("{defaulted} nodes defaulted to 0 in {}", path.display());
    }
    Ok(v)
}

fn node_id(labels: &LabelMap, name: &str) -> Result<usize> {
    labels
        .id_of(name)
        .ok_or_else(|| anyhow!("node label {name:?} does not appear in the graph file"))
}

/// Prints the computed value on stdout and the solve diagnostics on
/// stderr; decides the exit code from convergence and `--strict`.
fn finish(value: f64, report: &SolveReport64, strict: bool) -> Result<ExitCode> {
    log::info!(
        "method={} iterations={} residual={:.3e} wall_time={:.3}s converged={}",
        report.method,
        report.iterations,
        report.residual,
        report.wall_time,
        report.converged
    );
    println!("{value}");
    if !report.converged {
        log::warn!(
            "solve did not converge (relative residual {:.3e})",
            report.residual
        );
        if strict {
            return Ok(ExitCode::from(2));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn write_records(records: &[BenchRecord], output: &OutputOpts) -> Result<()> {
    match &output.out {
        Some(path) => {
            emit_results(records, output.format, BufWriter::new(create(path)?))?;
            log::info!("wrote {} records to {}", records.len(), path.display());
        }
        None => {
            let stdout = std::io::stdout();
            emit_results(records, output.format, stdout.lock())?;
        }
    }
    Ok(())
}
