//! Command-line front end for the structure-aware graph engine.
//!
//! Exit codes: 0 on success (including runs that stop at the iteration
//! cap, which report their status), 2 on configuration errors, 1 on I/O or
//! validation errors.

use std::path::{Path, PathBuf};

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sage_core::engine::{RunConfig, RunOutcome, RunStatus};
use sage_core::metrics::ComparisonReport;
use sage_core::scheduler::RepartitionMode;
use sage_core::{Algorithm, AlgorithmSpec, DegreeTable, Error as CoreError, Graph};

#[derive(Parser)]
#[command(
    name = "sage",
    version,
    about = "Structure-aware graph processing: activity-based hot/cold/dead partitioning \
             with adaptive priority scheduling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one algorithm on one graph and emit a metrics document.
    Run(RunArgs),
    /// Run structure-aware and static-baseline back to back and emit a
    /// comparison CSV row.
    BenchCompare(BenchArgs),
    /// Dump the initial partition layout as CSV.
    PartitionStats(StatsArgs),
    /// Convert a text edge list to the binary cache format.
    Convert(ConvertArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum AlgorithmArg {
    Pagerank,
    Sssp,
    Cc,
    Bfs,
}

impl AlgorithmArg {
    fn to_core(self) -> Algorithm {
        match self {
            AlgorithmArg::Pagerank => Algorithm::PageRank,
            AlgorithmArg::Sssp => Algorithm::Sssp,
            AlgorithmArg::Cc => Algorithm::Cc,
            AlgorithmArg::Bfs => Algorithm::Bfs,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Mode {
    StructureAware,
    StaticBaseline,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum RepartitionArg {
    Auto,
    General,
    Barrier,
}

impl RepartitionArg {
    fn to_core(self) -> RepartitionMode {
        match self {
            RepartitionArg::Auto => RepartitionMode::Auto,
            RepartitionArg::General => RepartitionMode::General,
            RepartitionArg::Barrier => RepartitionMode::Barrier,
        }
    }
}

#[derive(Args, Serialize)]
struct RunArgs {
    /// Graph file: text edge list or binary cache, sniffed by magic bytes.
    #[arg(long)]
    graph: PathBuf,

    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,

    /// Parse a third whitespace-separated field as the edge weight.
    #[arg(long)]
    weighted: bool,

    /// Degree-function parameter in [0.5, 1.0].
    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    /// Fraction of the sample treated as hot.
    #[arg(long, default_value_t = 0.1)]
    hot_ratio: f64,

    /// Threshold sample size; defaults to min(1000, vertex count).
    #[arg(long)]
    sample_size: Option<usize>,

    /// Skip sampling and use this hotness threshold directly.
    #[arg(long)]
    t1_override: Option<f64>,

    /// Convergence threshold on the sum of partition state degrees.
    #[arg(long, default_value_t = 1e-6)]
    t2: f64,

    /// Iterations between repartitions before growth.
    #[arg(long, default_value_t = 5)]
    i1: u64,

    /// Cold partitions join the plan every this many iterations.
    #[arg(long, default_value_t = 4)]
    i2: u64,

    /// Geometric growth applied to the repartition interval.
    #[arg(long, default_value_t = 2.0)]
    i1_growth: f64,

    /// Vertex cap per partition (cache-block stand-in).
    #[arg(long, default_value_t = 4096)]
    vertices_per_block: usize,

    /// Worker threads; defaults to SAGE_WORKERS, then machine parallelism.
    #[arg(long)]
    workers: Option<usize>,

    /// Hot partitions serviced per cold-cadence iteration (the m override).
    #[arg(long, alias = "m")]
    hot_slots: Option<usize>,

    /// Cold partitions serviced per cold-cadence iteration (the n override).
    #[arg(long, alias = "n")]
    cold_slots: Option<usize>,

    /// Source vertex for sssp/bfs.
    #[arg(long)]
    source: Option<u32>,

    /// Fall back to vertex 0 when --source is omitted for sssp/bfs.
    #[arg(long)]
    allow_default_source: bool,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Also write the metrics document to this path.
    #[arg(long)]
    metrics_out: Option<PathBuf>,

    #[arg(long, value_enum, default_value = "structure-aware")]
    mode: Mode,

    /// Repartition variant; auto picks barrier for monotone-cooling
    /// algorithms and the tag table otherwise.
    #[arg(long, value_enum, default_value = "auto")]
    repartition: RepartitionArg,

    /// Iteration safety cap; defaults to 10*ceil(log2(n)) + 100.
    #[arg(long)]
    max_iterations: Option<u64>,

    /// Progress line cadence on stderr; 0 disables.
    #[arg(long, default_value_t = 0)]
    progress_every: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    run: RunArgs,

    /// Also append the CSV row (with header when creating) to this path.
    #[arg(long)]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[arg(long)]
    graph: PathBuf,

    #[arg(long)]
    weighted: bool,

    #[arg(long, default_value_t = 0.5)]
    alpha: f64,

    #[arg(long, default_value_t = 0.1)]
    hot_ratio: f64,

    #[arg(long)]
    sample_size: Option<usize>,

    #[arg(long)]
    t1_override: Option<f64>,

    #[arg(long, default_value_t = 4096)]
    vertices_per_block: usize,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ConvertArgs {
    /// Input graph (text edge list, or an existing binary cache).
    #[arg(long)]
    input: PathBuf,

    /// Output path for the binary cache.
    #[arg(long)]
    output: PathBuf,

    /// Parse a third whitespace-separated field as the edge weight.
    #[arg(long)]
    weighted: bool,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => {}
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(exit_code_for(&err));
        }
    }
}

fn exit_code_for(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<CoreError>() {
        Some(CoreError::Config(_)) => 2,
        Some(_) => 1,
        None => 1,
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::BenchCompare(args) => cmd_bench(args),
        Command::PartitionStats(args) => cmd_stats(args),
        Command::Convert(args) => cmd_convert(args),
    }
}

fn resolve_workers(flag: Option<usize>) -> anyhow::Result<usize> {
    if let Some(w) = flag {
        return Ok(w);
    }
    if let Ok(raw) = std::env::var("SAGE_WORKERS") {
        let w: usize = raw
            .parse()
            .map_err(|_| CoreError::Config(format!("SAGE_WORKERS must be an integer, got `{raw}`")))?;
        return Ok(w);
    }
    Ok(std::thread::available_parallelism().map_or(1, |p| p.get()))
}

fn resolve_spec(args: &RunArgs) -> anyhow::Result<AlgorithmSpec> {
    let algorithm = args.algorithm.to_core();
    let source = match (algorithm, args.source) {
        (Algorithm::Sssp | Algorithm::Bfs, Some(s)) => Some(s),
        (Algorithm::Sssp | Algorithm::Bfs, None) => {
            if args.allow_default_source {
                Some(0)
            } else {
                return Err(CoreError::Config(format!(
                    "{} requires --source (or pass --allow-default-source to start from vertex 0)",
                    algorithm.as_str()
                ))
                .into());
            }
        }
        (_, s) => s,
    };
    Ok(AlgorithmSpec {
        algorithm,
        source,
        damping: 0.85,
    })
}

fn resolve_run_config(args: &RunArgs, workers: usize) -> RunConfig {
    RunConfig {
        alpha: args.alpha,
        sample_size: args.sample_size,
        hot_ratio: args.hot_ratio,
        t1_override: args.t1_override,
        t2: args.t2,
        vertices_per_block: args.vertices_per_block,
        seed: args.seed,
        workers,
        hot_slots: args.hot_slots,
        cold_slots: args.cold_slots,
        repartition_interval: args.i1,
        cold_cadence: args.i2,
        interval_growth: args.i1_growth,
        max_iterations: args.max_iterations,
        repartition_mode: args.repartition.to_core(),
        perturbation: sage_core::SchedulePerturbation::None,
        progress_every: args.progress_every,
        record_value_history: false,
    }
}

fn load_graph(path: &Path, weighted: bool) -> anyhow::Result<Graph> {
    let g = Graph::load(path, weighted)
        .with_context(|| format!("loading graph from {}", path.display()))?;
    let report = g.validate();
    if !report.is_valid() {
        return Err(CoreError::Validation(format!(
            "graph failed validation: {}",
            report.violations().join("; ")
        ))
        .into());
    }
    Ok(g)
}

/// Everything that went into a run, echoed into the metrics document.
#[derive(Serialize)]
struct ConfigEcho<'a> {
    graph: String,
    algorithm: AlgorithmArg,
    mode: Mode,
    weighted: bool,
    alpha: f64,
    hot_ratio: f64,
    sample_size: Option<usize>,
    t1_override: Option<f64>,
    t2: f64,
    i1: u64,
    i2: u64,
    i1_growth: f64,
    vertices_per_block: usize,
    workers: usize,
    hot_slots: Option<usize>,
    cold_slots: Option<usize>,
    source: Option<u32>,
    seed: u64,
    repartition: RepartitionArg,
    max_iterations: Option<u64>,
    vertex_count: usize,
    edge_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'a str>,
}

#[derive(Serialize)]
struct MetricsDoc<'a> {
    config: ConfigEcho<'a>,
    metrics: &'a sage_core::RunMetrics,
    per_iteration_psd_sum: &'a [f64],
}

fn cmd_run(args: RunArgs) -> anyhow::Result<()> {
    let workers = resolve_workers(args.workers)?;
    let spec = resolve_spec(&args)?;
    let cfg = resolve_run_config(&args, workers);
    let graph = load_graph(&args.graph, args.weighted)?;

    let outcome: RunOutcome = match args.mode {
        Mode::StructureAware => sage_core::run(&graph, spec, &cfg)?,
        Mode::StaticBaseline => sage_core::run_baseline(&graph, spec, &cfg)?,
    };

    match outcome.status {
        RunStatus::Converged => eprintln!(
            "status: converged in {} iterations (t1={}, psd_sum={:.3e})",
            outcome.metrics.iterations,
            outcome.t1,
            outcome.metrics.per_iteration_psd_sum.last().copied().unwrap_or(0.0)
        ),
        RunStatus::IterationCapReached => eprintln!(
            "status: unconverged after {} iterations (iteration cap reached)",
            outcome.metrics.iterations
        ),
    }

    let mut metrics = outcome.metrics.clone();
    let series = std::mem::take(&mut metrics.per_iteration_psd_sum);
    let doc = MetricsDoc {
        config: ConfigEcho {
            graph: args.graph.display().to_string(),
            algorithm: args.algorithm,
            mode: args.mode,
            weighted: args.weighted,
            alpha: args.alpha,
            hot_ratio: args.hot_ratio,
            sample_size: args.sample_size,
            t1_override: args.t1_override,
            t2: args.t2,
            i1: args.i1,
            i2: args.i2,
            i1_growth: args.i1_growth,
            vertices_per_block: args.vertices_per_block,
            workers,
            hot_slots: args.hot_slots,
            cold_slots: args.cold_slots,
            source: spec.source,
            seed: args.seed,
            repartition: args.repartition,
            max_iterations: args.max_iterations,
            vertex_count: graph.vertex_count(),
            edge_count: graph.edge_count(),
            note: None,
        },
        metrics: &metrics,
        per_iteration_psd_sum: &series,
    };
    let rendered = serde_json::to_string_pretty(&doc)?;
    println!("{rendered}");
    if let Some(path) = &args.metrics_out {
        std::fs::write(path, rendered.as_bytes())
            .with_context(|| format!("writing metrics to {}", path.display()))?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> anyhow::Result<()> {
    let workers = resolve_workers(args.run.workers)?;
    let spec = resolve_spec(&args.run)?;
    let cfg = resolve_run_config(&args.run, workers);
    let graph = load_graph(&args.run.graph, args.run.weighted)?;

    let report: ComparisonReport = sage_core::compare(&graph, spec, &cfg)?;
    println!("{}", ComparisonReport::CSV_HEADER);
    println!("{}", report.csv_row());
    if let Some(path) = &args.csv_out {
        let mut body = String::new();
        if !path.exists() {
            body.push_str(ComparisonReport::CSV_HEADER);
            body.push('\n');
        }
        body.push_str(&report.csv_row());
        body.push('\n');
        use std::io::Write;
        let mut f = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        f.write_all(body.as_bytes())?;
    }
    if !report.valid {
        eprintln!("warning: comparison INVALID (unconverged run or value disagreement)");
    }
    Ok(())
}

fn cmd_stats(args: StatsArgs) -> anyhow::Result<()> {
    let graph = load_graph(&args.graph, args.weighted)?;
    let mut degrees = DegreeTable::compute(&graph, args.alpha)?;
    sage_core::compute_active_degrees(&graph, &mut degrees);
    let live = graph.vertices().any(|v| !degrees.is_dead(v));
    let t1 = match args.t1_override {
        Some(t1) => t1,
        None if !live => 0.0,
        None => {
            let sample = args
                .sample_size
                .unwrap_or_else(|| graph.vertex_count().min(1000));
            sage_core::sample_threshold(&graph, &degrees, sample, args.hot_ratio, args.seed)?.t1()
        }
    };
    let ps = sage_core::initial_partition(&graph, &degrees, t1, args.vertices_per_block)?;

    let mut csv = String::from("id,kind,vertex_count,edge_weight,psd\n");
    for p in ps.partitions() {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            p.id(),
            p.kind().as_str(),
            p.len(),
            p.edge_weight(),
            0.0
        ));
    }
    match &args.out {
        Some(path) => std::fs::write(path, csv.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_convert(args: ConvertArgs) -> anyhow::Result<()> {
    let graph = load_graph(&args.input, args.weighted)?;
    graph
        .write_binary(&args.output)
        .with_context(|| format!("writing binary cache to {}", args.output.display()))?;
    eprintln!(
        "wrote {} ({} vertices, {} edges)",
        args.output.display(),
        graph.vertex_count(),
        graph.edge_count()
    );
    Ok(())
}
