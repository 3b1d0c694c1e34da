//! Run metrics and baseline comparison.
//!
//! Cache-miss and I/O rates are not measured directly; partition loads (one
//! per serviced partition) and vertex-update counts stand in as portable,
//! deterministic proxies. The static baseline chunk-partitions vertices in
//! id order and services every partition every iteration under the same
//! convergence rule, embodying the design the structure-aware engine is
//! measured against.

use serde::Serialize;

use crate::algorithms::{Algorithm, AlgorithmSpec};
use crate::engine::{run, run_loop, LoopParams, RunConfig, RunOutcome};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::partition::{PartitionKind, PartitionSet};
use crate::scheduler::{
    default_max_iterations, default_slot_split, SchedulePerturbation, SchedulerConfig,
};

/// Tag snapshot taken after a repartition event.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RepartitionEvent {
    pub iteration: u64,
    pub kinds: Vec<PartitionKind>,
}

/// Software proxies collected over one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub algorithm: Algorithm,
    pub mode: String,
    pub total_vertex_updates: u64,
    pub partition_loads: u64,
    pub iterations: u64,
    pub repartition_events: u64,
    /// Sub-threshold commits drained after convergence.
    pub finalize_commits: u64,
    pub wall_time_ms: f64,
    pub converged: bool,
    pub partition_count: usize,
    pub initial_hot_partitions: usize,
    pub initial_cold_partitions: usize,
    pub initial_dead_partitions: usize,
    pub t1: f64,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub per_iteration_psd_sum: Vec<f64>,
    /// Serviced partition ids per iteration, in partition-order.
    pub schedule_trace: Vec<Vec<u32>>,
    pub repartition_trace: Vec<RepartitionEvent>,
}

impl RunMetrics {
    pub(crate) fn new(
        algorithm: Algorithm,
        mode: &str,
        ps: &PartitionSet,
        t1: f64,
    ) -> RunMetrics {
        let count_kind = |kind: PartitionKind| {
            ps.partitions().iter().filter(|p| p.kind() == kind).count()
        };
        RunMetrics {
            algorithm,
            mode: mode.to_string(),
            total_vertex_updates: 0,
            partition_loads: 0,
            iterations: 0,
            repartition_events: 0,
            finalize_commits: 0,
            wall_time_ms: 0.0,
            converged: false,
            partition_count: ps.partition_count(),
            initial_hot_partitions: count_kind(PartitionKind::Hot),
            initial_cold_partitions: count_kind(PartitionKind::Cold),
            initial_dead_partitions: count_kind(PartitionKind::Dead),
            t1,
            per_iteration_psd_sum: Vec::new(),
            schedule_trace: Vec::new(),
            repartition_trace: Vec::new(),
        }
    }

    /// Copy with the wall-time field zeroed, for determinism comparisons.
    pub fn without_wall_time(&self) -> RunMetrics {
        let mut m = self.clone();
        m.wall_time_ms = 0.0;
        m
    }
}

/// Id-ordered chunk partitioning with no activity sort, no hot/cold split,
/// and no dead filter.
pub fn baseline_partition(graph: &Graph, vertices_per_block: usize) -> Result<PartitionSet> {
    if vertices_per_block == 0 {
        return Err(Error::config("vertices_per_block must be positive"));
    }
    let ids: Vec<VertexId> = graph.vertices().collect();
    let blocks = ids
        .chunks(vertices_per_block)
        .map(|chunk| (PartitionKind::Hot, chunk.to_vec()))
        .collect();
    Ok(PartitionSet::from_blocks(blocks))
}

/// Runs the static synchronous baseline: every partition, every iteration,
/// same kernels and convergence rule.
pub fn run_baseline(graph: &Graph, spec: AlgorithmSpec, cfg: &RunConfig) -> Result<RunOutcome> {
    spec.validate(graph)?;
    let ps = baseline_partition(graph, cfg.vertices_per_block)?;
    let (hot, cold) = default_slot_split(cfg.workers);
    let sched = SchedulerConfig {
        worker_count: cfg.workers,
        hot_slots: hot,
        cold_slots: cold,
        repartition_interval: cfg.repartition_interval,
        cold_cadence: cfg.cold_cadence,
        interval_growth: cfg.interval_growth,
        t1: 0.0,
        t2: cfg.t2,
        max_iterations: cfg
            .max_iterations
            .unwrap_or_else(|| default_max_iterations(graph.vertex_count())),
    };
    sched.validate()?;
    run_loop(
        graph,
        spec,
        ps,
        sched,
        &LoopParams {
            mode_label: "static-baseline",
            baseline: true,
            use_barrier: false,
            perturbation: SchedulePerturbation::None,
            progress_every: cfg.progress_every,
            record_value_history: cfg.record_value_history,
        },
    )
}

/// Result agreement tolerance per algorithm: rank values carry iteration
/// tails, lattice fixpoints are unique.
pub fn value_tolerance(algorithm: Algorithm) -> f64 {
    match algorithm {
        Algorithm::PageRank => 1e-4,
        Algorithm::Sssp | Algorithm::Cc | Algorithm::Bfs => 0.0,
    }
}

/// L-infinity discrepancy between two final value vectors; two infinite
/// entries agree exactly.
pub fn max_value_discrepancy(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            if x.is_infinite() && y.is_infinite() {
                0.0
            } else {
                (x - y).abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Structure-aware versus static-baseline comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub algorithm: Algorithm,
    pub mode_a: String,
    pub mode_b: String,
    pub updates_a: u64,
    pub updates_b: u64,
    pub update_ratio: f64,
    pub loads_a: u64,
    pub loads_b: u64,
    pub load_ratio: f64,
    pub iterations_a: u64,
    pub iterations_b: u64,
    pub value_agreement: f64,
    pub tolerance: f64,
    pub converged_a: bool,
    pub converged_b: bool,
    /// Performance figures only count when both runs converged and agree
    /// within tolerance.
    pub valid: bool,
}

impl ComparisonReport {
    pub const CSV_HEADER: &'static str = "algorithm,mode_a,mode_b,updates_a,updates_b,\
        update_ratio,loads_a,loads_b,load_ratio,iterations_a,iterations_b,value_agreement,\
        tolerance,converged_a,converged_b,valid";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.algorithm.as_str(),
            self.mode_a,
            self.mode_b,
            self.updates_a,
            self.updates_b,
            self.update_ratio,
            self.loads_a,
            self.loads_b,
            self.load_ratio,
            self.iterations_a,
            self.iterations_b,
            self.value_agreement,
            self.tolerance,
            self.converged_a,
            self.converged_b,
            if self.valid { "VALID" } else { "INVALID" },
        )
    }
}

/// Runs both modes with identical inputs and reports update and load ratios
/// plus the maximum final-value discrepancy.
pub fn compare(graph: &Graph, spec: AlgorithmSpec, cfg: &RunConfig) -> Result<ComparisonReport> {
    let a = run(graph, spec, cfg)?;
    let b = run_baseline(graph, spec, cfg)?;
    Ok(report_from_outcomes(spec.algorithm, &a, &b))
}

/// Builds the report from two finished runs (mode A structure-aware, mode B
/// baseline).
pub fn report_from_outcomes(
    algorithm: Algorithm,
    a: &RunOutcome,
    b: &RunOutcome,
) -> ComparisonReport {
    let tolerance = value_tolerance(algorithm);
    let value_agreement = max_value_discrepancy(&a.values, &b.values);
    ComparisonReport {
        algorithm,
        mode_a: a.metrics.mode.clone(),
        mode_b: b.metrics.mode.clone(),
        updates_a: a.metrics.total_vertex_updates,
        updates_b: b.metrics.total_vertex_updates,
        update_ratio: a.metrics.total_vertex_updates as f64
            / b.metrics.total_vertex_updates.max(1) as f64,
        loads_a: a.metrics.partition_loads,
        loads_b: b.metrics.partition_loads,
        load_ratio: a.metrics.partition_loads as f64 / b.metrics.partition_loads.max(1) as f64,
        iterations_a: a.metrics.iterations,
        iterations_b: b.metrics.iterations,
        value_agreement,
        tolerance,
        converged_a: a.metrics.converged,
        converged_b: b.metrics.converged,
        valid: a.metrics.converged && b.metrics.converged && value_agreement <= tolerance,
    }
}
