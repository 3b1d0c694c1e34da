//! Bulk-synchronous execution engine.
//!
//! Each iteration: plan the partitions to service, process them in parallel,
//! then run a single-threaded barrier phase that merges pushed proposals,
//! credits state degrees, recomputes partition state degrees, repartitions
//! when due, and tests convergence.
//!
//! Per-vertex owner data (committed value, pending proposal, pagerank
//! residual, state degree) is indexed by the partition order, so each
//! serviced partition is a disjoint plain slice. Cross-partition traffic
//! goes through id-indexed atomic push buffers whose combines are exact and
//! commutative; together with single-threaded barrier phases this makes a
//! run bit-deterministic for a fixed seed and flag set.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::Instant;

use crate::algorithms::{
    bfs_update, cc_update, pagerank_update, sssp_update, Algorithm, AlgorithmSpec, MaxSinks,
    MinSinks, ResidualSinks,
};
use crate::error::{Error, Result};
use crate::graph::{DegreeTable, Graph, VertexId};
use crate::metrics::{RepartitionEvent, RunMetrics};
use crate::partition::{
    compute_active_degrees, initial_partition, sample_threshold, PartitionSet,
};
use crate::scheduler::{
    default_max_iterations, default_slot_split, plan_iteration_perturbed, PlanPhase,
    RepartitionCadence, RepartitionMode, SchedulePerturbation, SchedulerConfig,
};
use crate::state::{
    check_convergence, sd_contribution_cc, sd_contribution_sssp, PartitionStateTable,
    StateDegreeTable, ValueTables,
};

/// Everything a structure-aware run needs beyond the graph and algorithm.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Degree-function parameter in `[0.5, 1.0]`.
    pub alpha: f64,
    /// Vertices sampled for the hotness threshold; default `min(1000, n)`.
    pub sample_size: Option<usize>,
    /// Fraction of the sample treated as hot.
    pub hot_ratio: f64,
    /// Skip sampling and use this threshold directly.
    pub t1_override: Option<f64>,
    /// Convergence threshold on the sum of partition state degrees.
    pub t2: f64,
    /// Cache-block stand-in: vertex cap per partition.
    pub vertices_per_block: usize,
    pub seed: u64,
    pub workers: usize,
    /// Hot selections at the cold cadence; default `ceil(0.7 * workers)`.
    pub hot_slots: Option<usize>,
    /// Cold selections at the cold cadence; default `workers - hot_slots`.
    pub cold_slots: Option<usize>,
    /// Iterations between repartitions before growth.
    pub repartition_interval: u64,
    /// Cold partitions join the plan every this many iterations.
    pub cold_cadence: u64,
    /// Geometric growth of the repartition interval.
    pub interval_growth: f64,
    pub max_iterations: Option<u64>,
    pub repartition_mode: RepartitionMode,
    pub perturbation: SchedulePerturbation,
    /// Emit a progress line on stderr every N iterations; 0 disables.
    pub progress_every: u64,
    /// Record committed values per iteration (tests and diagnostics).
    pub record_value_history: bool,
}

impl Default for RunConfig {
    fn default() -> RunConfig {
        RunConfig {
            alpha: 0.5,
            sample_size: None,
            hot_ratio: 0.1,
            t1_override: None,
            t2: 1e-6,
            vertices_per_block: 4096,
            seed: 42,
            workers: std::thread::available_parallelism().map_or(1, |p| p.get()),
            hot_slots: None,
            cold_slots: None,
            repartition_interval: 5,
            cold_cadence: 4,
            interval_growth: 2.0,
            max_iterations: None,
            repartition_mode: RepartitionMode::Auto,
            perturbation: SchedulePerturbation::None,
            progress_every: 0,
            record_value_history: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Converged,
    IterationCapReached,
}

/// Result of a run: final values by vertex id plus metrics.
#[derive(Debug)]
pub struct RunOutcome {
    pub values: Vec<f64>,
    pub status: RunStatus,
    pub metrics: RunMetrics,
    /// Threshold actually used (sampled or overridden).
    pub t1: f64,
    /// The partition layout the run executed with, tags as of the end.
    pub partitions: PartitionSet,
    /// Committed values after each iteration, when recording was requested.
    pub value_history: Option<Vec<Vec<f64>>>,
}

/// Runs the structure-aware engine: activity partitioning, adaptive
/// scheduling, dynamic repartitioning.
pub fn run(graph: &Graph, spec: AlgorithmSpec, cfg: &RunConfig) -> Result<RunOutcome> {
    spec.validate(graph)?;
    let mut degrees = DegreeTable::compute(graph, cfg.alpha)?;
    compute_active_degrees(graph, &mut degrees);

    let live_count = graph.vertices().filter(|&v| !degrees.is_dead(v)).count();
    let t1 = match cfg.t1_override {
        Some(t1) => t1,
        None if live_count == 0 => 0.0,
        None => {
            let sample = cfg
                .sample_size
                .unwrap_or_else(|| graph.vertex_count().min(1000));
            sample_threshold(graph, &degrees, sample, cfg.hot_ratio, cfg.seed)?.t1()
        }
    };
    let mut ps = initial_partition(graph, &degrees, t1, cfg.vertices_per_block)?;

    let use_barrier = match cfg.repartition_mode {
        RepartitionMode::Auto => spec.monotone_cooling(),
        RepartitionMode::General => false,
        RepartitionMode::Barrier => {
            if !spec.monotone_cooling() {
                return Err(Error::config(format!(
                    "barrier repartitioning cannot represent {}: its activity is not \
                     monotone cooling",
                    spec.algorithm.as_str()
                )));
            }
            true
        }
    };
    if !use_barrier {
        ps.clear_barrier();
    }

    let sched = resolve_scheduler_config(graph, cfg, t1)?;
    run_loop(
        graph,
        spec,
        ps,
        sched,
        &LoopParams {
            mode_label: "structure-aware",
            baseline: false,
            use_barrier,
            perturbation: cfg.perturbation,
            progress_every: cfg.progress_every,
            record_value_history: cfg.record_value_history,
        },
    )
}

fn resolve_scheduler_config(graph: &Graph, cfg: &RunConfig, t1: f64) -> Result<SchedulerConfig> {
    if cfg.workers == 0 {
        return Err(Error::config("workers must be positive"));
    }
    let (hot, cold) = match (cfg.hot_slots, cfg.cold_slots) {
        (Some(m), Some(n)) => (m, n),
        (Some(m), None) => (m, cfg.workers.saturating_sub(m)),
        (None, Some(n)) => (cfg.workers.saturating_sub(n), n),
        (None, None) => default_slot_split(cfg.workers),
    };
    let sched = SchedulerConfig {
        worker_count: cfg.workers,
        hot_slots: hot,
        cold_slots: cold,
        repartition_interval: cfg.repartition_interval,
        cold_cadence: cfg.cold_cadence,
        interval_growth: cfg.interval_growth,
        t1,
        t2: cfg.t2,
        max_iterations: cfg
            .max_iterations
            .unwrap_or_else(|| default_max_iterations(graph.vertex_count())),
    };
    sched.validate()?;
    Ok(sched)
}

pub(crate) struct LoopParams {
    pub mode_label: &'static str,
    pub baseline: bool,
    pub use_barrier: bool,
    pub perturbation: SchedulePerturbation,
    pub progress_every: u64,
    pub record_value_history: bool,
}

/// Shared run loop for the structure-aware engine and the static baseline.
pub(crate) fn run_loop(
    graph: &Graph,
    spec: AlgorithmSpec,
    mut ps: PartitionSet,
    sched: SchedulerConfig,
    params: &LoopParams,
) -> Result<RunOutcome> {
    let started = Instant::now();
    let n = graph.vertex_count();
    let order: Vec<VertexId> = ps.order().to_vec();
    let live: Vec<VertexId> = graph
        .vertices()
        .filter(|&v| graph.in_degree(v) > 0 || graph.out_degree(v) > 0)
        .collect();

    // Fixed-point scale for rank mass: total outstanding mass is bounded by
    // n, so n * scale must stay well inside u64.
    let scale_exp = (61 - (64 - (n as u64).leading_zeros()) as i32).min(48);
    let scale = 2f64.powi(scale_exp);

    let mut values = ValueTables::from_values(
        order.iter().map(|&v| spec.initial_value(v)).collect(),
    );
    let mut sealed_residual: Vec<u64> = vec![0; n];
    let mut sd = StateDegreeTable::new(n, ps.partition_count());

    // Initial pending work is seeded into the state-degree table so that
    // untouched partitions keep a nonzero priority until first service.
    match spec.algorithm {
        Algorithm::PageRank => {
            let unit = ((1.0 - spec.damping) * scale) as u64;
            for (pos, &v) in order.iter().enumerate() {
                sealed_residual[pos] = unit;
                if graph.in_degree(v) > 0 || graph.out_degree(v) > 0 {
                    sd.add(pos, unit as f64 / scale);
                }
            }
        }
        Algorithm::Cc => {
            for (pos, &v) in order.iter().enumerate() {
                if graph.in_degree(v) > 0 || graph.out_degree(v) > 0 {
                    sd.add(pos, 1.0);
                }
            }
        }
        Algorithm::Sssp | Algorithm::Bfs => {
            let source = spec.source.expect("validated");
            if graph.in_degree(source) > 0 || graph.out_degree(source) > 0 {
                sd.add(ps.position_of(source), 1.0);
            }
        }
    }

    let incoming_identity: u64 = match spec.algorithm {
        Algorithm::PageRank => 0,
        Algorithm::Sssp | Algorithm::Bfs => f64::INFINITY.to_bits(),
        Algorithm::Cc => 0.0f64.to_bits(),
    };
    let incoming: Vec<AtomicU64> = (0..n).map(|_| AtomicU64::new(incoming_identity)).collect();
    let touched: Vec<AtomicBool> = (0..n).map(|_| AtomicBool::new(false)).collect();
    let dangling_pool = AtomicU64::new(0);

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sched.worker_count)
        .build()
        .map_err(|e| Error::config(format!("cannot build worker pool: {e}")))?;

    let mut pst = PartitionStateTable::accumulate(&ps, &sd);
    let mut cadence = RepartitionCadence::new(sched.repartition_interval, sched.interval_growth);
    let mut metrics = RunMetrics::new(spec.algorithm, params.mode_label, &ps, sched.t1);
    let mut history: Option<Vec<Vec<f64>>> = params.record_value_history.then(Vec::new);

    let mut iteration: u64 = 0;
    let status = loop {
        let mut plan = if params.baseline {
            crate::scheduler::IterationPlan {
                iteration,
                selected: (0..ps.partition_count() as u32).collect(),
                repartition_due: false,
                phase: PlanPhase::Steady,
            }
        } else {
            plan_iteration_perturbed(iteration, &ps, &pst, &sched, params.perturbation)
        };
        if !params.baseline && iteration > 0 {
            plan.repartition_due = cadence.check(iteration)?;
        }

        // Parallel phase: service the selected partitions.
        let mut by_range: Vec<u32> = plan.selected.clone();
        by_range.sort_by_key(|&id| ps.partition(id).range().start);
        let ranges: Vec<std::ops::Range<usize>> =
            by_range.iter().map(|&id| ps.partition(id).range()).collect();
        {
            let curr_slices = split_ranges(&mut values.curr, &ranges);
            let next_slices = split_ranges(&mut values.next, &ranges);
            let changed_slices = split_ranges(&mut values.changed, &ranges);
            let sealed_slices = split_ranges(&mut sealed_residual, &ranges);
            let tasks: Vec<Task> = by_range
                .iter()
                .zip(ranges.iter())
                .zip(curr_slices)
                .zip(next_slices)
                .zip(changed_slices)
                .zip(sealed_slices)
                .map(|(((((_, range), curr), next), changed), sealed)| Task {
                    vertices: &order[range.clone()],
                    curr,
                    next,
                    changed,
                    sealed,
                })
                .collect();

            let sinks = Sinks::new(spec.algorithm, &incoming, &touched, &dangling_pool, scale);
            pool.install(|| {
                use rayon::prelude::*;
                tasks.into_par_iter().for_each(|task| {
                    service_partition(graph, &spec, task, &sinks);
                });
            });
        }

        for &pid in &plan.selected {
            metrics.total_vertex_updates += ps.partition(pid).len() as u64;
        }
        metrics.partition_loads += plan.selected.len() as u64;
        metrics.schedule_trace.push(by_range);

        // Barrier phase, single-threaded from here on.
        for &pid in &plan.selected {
            sd.reset_window(ps.partition(pid), iteration);
        }
        if spec.algorithm == Algorithm::PageRank {
            redistribute_dangling(&dangling_pool, &live, &incoming, &touched);
        }
        merge_incoming(
            &spec,
            &ps,
            &incoming,
            &touched,
            incoming_identity,
            &mut values,
            &mut sealed_residual,
            &mut sd,
            scale,
        );
        pst.recompute(&ps, &sd);

        if plan.repartition_due {
            if params.use_barrier {
                ps.repartition_barrier(&pst, sched.t1)?;
            } else {
                ps.repartition_general(&pst, sched.t1);
            }
            metrics.repartition_events += 1;
            metrics.repartition_trace.push(RepartitionEvent {
                iteration,
                kinds: ps.kinds(),
            });
        }

        let psd_sum = pst.sum();
        metrics.per_iteration_psd_sum.push(psd_sum);
        if let Some(h) = history.as_mut() {
            h.push(values_by_id(&ps, &values.curr));
        }
        if params.progress_every > 0 && iteration.is_multiple_of(params.progress_every) {
            eprintln!(
                "iteration {iteration}: psd_sum={psd_sum:.3e} serviced={} phase={:?}",
                plan.selected.len(),
                plan.phase
            );
        }

        if check_convergence(&pst, sched.t2)? {
            break RunStatus::Converged;
        }
        if iteration + 1 >= sched.max_iterations {
            break RunStatus::IterationCapReached;
        }
        iteration += 1;
    };

    metrics.iterations = metrics.per_iteration_psd_sum.len() as u64;
    metrics.converged = status == RunStatus::Converged;
    metrics.finalize_commits = finalize(
        graph,
        &spec,
        &ps,
        &order,
        &live,
        &mut values,
        &mut sealed_residual,
        &dangling_pool,
        scale,
    );
    metrics.wall_time_ms = started.elapsed().as_secs_f64() * 1e3;

    Ok(RunOutcome {
        values: values_by_id(&ps, &values.curr),
        status,
        metrics,
        t1: sched.t1,
        partitions: ps,
        value_history: history,
    })
}

struct Task<'a> {
    vertices: &'a [VertexId],
    curr: &'a mut [f64],
    next: &'a mut [f64],
    changed: &'a mut [bool],
    sealed: &'a mut [u64],
}

enum Sinks<'a> {
    Residual(ResidualSinks<'a>),
    Min(MinSinks<'a>),
    Max(MaxSinks<'a>),
}

impl<'a> Sinks<'a> {
    fn new(
        algorithm: Algorithm,
        incoming: &'a [AtomicU64],
        touched: &'a [AtomicBool],
        dangling_pool: &'a AtomicU64,
        scale: f64,
    ) -> Sinks<'a> {
        match algorithm {
            Algorithm::PageRank => {
                Sinks::Residual(ResidualSinks::new(incoming, touched, dangling_pool, scale))
            }
            Algorithm::Sssp | Algorithm::Bfs => Sinks::Min(MinSinks::new(incoming, touched)),
            Algorithm::Cc => Sinks::Max(MaxSinks::new(incoming, touched)),
        }
    }
}

fn service_partition(graph: &Graph, spec: &AlgorithmSpec, task: Task<'_>, sinks: &Sinks<'_>) {
    let Task {
        vertices,
        curr,
        next,
        changed,
        sealed,
    } = task;
    match (spec.algorithm, sinks) {
        (Algorithm::PageRank, Sinks::Residual(s)) => {
            for (i, &v) in vertices.iter().enumerate() {
                pagerank_update(v, graph, &mut curr[i], &mut sealed[i], s, spec.damping);
            }
        }
        (Algorithm::Sssp, Sinks::Min(s)) => {
            for (i, &v) in vertices.iter().enumerate() {
                sssp_update(v, graph, &mut curr[i], &mut next[i], &mut changed[i], s, false);
            }
        }
        (Algorithm::Bfs, Sinks::Min(s)) => {
            for (i, &v) in vertices.iter().enumerate() {
                bfs_update(v, graph, &mut curr[i], &mut next[i], &mut changed[i], s);
            }
        }
        (Algorithm::Cc, Sinks::Max(s)) => {
            for (i, &v) in vertices.iter().enumerate() {
                cc_update(v, graph, &mut curr[i], &mut next[i], &mut changed[i], s);
            }
        }
        _ => unreachable!("sink kind always matches the algorithm"),
    }
}

/// Splits `slice` into disjoint mutable sub-slices for ascending,
/// non-overlapping ranges.
fn split_ranges<'a, T>(
    slice: &'a mut [T],
    ranges: &[std::ops::Range<usize>],
) -> Vec<&'a mut [T]> {
    let mut out = Vec::with_capacity(ranges.len());
    let mut rest = slice;
    let mut consumed = 0usize;
    for r in ranges {
        let (_, tail) = rest.split_at_mut(r.start - consumed);
        let (mine, tail) = tail.split_at_mut(r.len());
        out.push(mine);
        rest = tail;
        consumed = r.end;
    }
    out
}

/// Uniformly folds pooled dangling mass back over live vertices. Integer
/// division keeps the combine exact; the sub-unit remainder stays pooled.
fn redistribute_dangling(
    pool: &AtomicU64,
    live: &[VertexId],
    incoming: &[AtomicU64],
    touched: &[AtomicBool],
) {
    if live.is_empty() {
        return;
    }
    let pooled = pool.load(Ordering::Relaxed);
    let share = pooled / live.len() as u64;
    if share == 0 {
        return;
    }
    for &v in live {
        incoming[v as usize].fetch_add(share, Ordering::Relaxed);
        touched[v as usize].store(true, Ordering::Relaxed);
    }
    pool.store(pooled - share * live.len() as u64, Ordering::Relaxed);
}

/// Merges this iteration's pushes into the pending buffers and credits each
/// receiving vertex's state degree with the contribution of the change.
#[allow(clippy::too_many_arguments)]
fn merge_incoming(
    spec: &AlgorithmSpec,
    ps: &PartitionSet,
    incoming: &[AtomicU64],
    touched: &[AtomicBool],
    identity: u64,
    values: &mut ValueTables,
    sealed_residual: &mut [u64],
    sd: &mut StateDegreeTable,
    scale: f64,
) {
    for v in 0..incoming.len() {
        if !touched[v].load(Ordering::Relaxed) {
            continue;
        }
        touched[v].store(false, Ordering::Relaxed);
        let raw = incoming[v].load(Ordering::Relaxed);
        incoming[v].store(identity, Ordering::Relaxed);
        let pos = ps.position_of(v as VertexId);
        match spec.algorithm {
            Algorithm::PageRank => {
                if raw > 0 {
                    sealed_residual[pos] += raw;
                    sd.add(pos, raw as f64 / scale);
                }
            }
            Algorithm::Sssp | Algorithm::Bfs => {
                let proposal = f64::from_bits(raw);
                if proposal < values.next[pos] {
                    let credit = sd_contribution_sssp(values.next[pos], proposal)
                        .expect("distances stay non-negative");
                    sd.add(pos, credit);
                    values.next[pos] = proposal;
                    values.changed[pos] = true;
                }
            }
            Algorithm::Cc => {
                let proposal = f64::from_bits(raw);
                if proposal > values.next[pos] {
                    sd.add(pos, sd_contribution_cc(values.next[pos], proposal));
                    values.next[pos] = proposal;
                    values.changed[pos] = true;
                }
            }
        }
    }
}

/// Drains sub-threshold pending work after the convergence test so final
/// values sit exactly on the algorithm's fixpoint: leftover rank mass is
/// absorbed and cascaded, pending distance/label commits are applied and
/// relaxed to a fixpoint. Single-threaded and deterministic; returns the
/// number of commits performed.
#[allow(clippy::too_many_arguments, clippy::needless_range_loop)]
fn finalize(
    graph: &Graph,
    spec: &AlgorithmSpec,
    ps: &PartitionSet,
    order: &[VertexId],
    live: &[VertexId],
    values: &mut ValueTables,
    sealed_residual: &mut [u64],
    dangling_pool: &AtomicU64,
    scale: f64,
) -> u64 {
    let mut commits = 0u64;
    match spec.algorithm {
        Algorithm::PageRank => {
            let n = order.len();
            loop {
                let mut any = false;
                for pos in 0..n {
                    let units = std::mem::take(&mut sealed_residual[pos]);
                    if units == 0 {
                        continue;
                    }
                    any = true;
                    commits += 1;
                    values.curr[pos] += units as f64 / scale;
                    let v = order[pos];
                    let dout = graph.out_degree(v);
                    if dout > 0 {
                        let per_edge = (spec.damping * units as f64 / dout as f64) as u64;
                        if per_edge > 0 {
                            for &t in graph.out_neighbors(v) {
                                sealed_residual[ps.position_of(t)] += per_edge;
                            }
                        }
                    } else if graph.in_degree(v) > 0 {
                        let pooled = (spec.damping * units as f64) as u64;
                        dangling_pool.fetch_add(pooled, Ordering::Relaxed);
                    }
                }
                if !live.is_empty() {
                    let pooled = dangling_pool.load(Ordering::Relaxed);
                    let share = pooled / live.len() as u64;
                    if share > 0 {
                        for &v in live {
                            sealed_residual[ps.position_of(v)] += share;
                        }
                        dangling_pool
                            .store(pooled - share * live.len() as u64, Ordering::Relaxed);
                        any = true;
                    }
                }
                if !any {
                    break;
                }
            }
        }
        Algorithm::Sssp | Algorithm::Bfs | Algorithm::Cc => {
            let unit_weights = spec.algorithm != Algorithm::Sssp;
            let maximize = spec.algorithm == Algorithm::Cc;
            loop {
                let mut any = false;
                for pos in 0..order.len() {
                    if !values.changed[pos] {
                        continue;
                    }
                    values.changed[pos] = false;
                    let better = if maximize {
                        values.next[pos] > values.curr[pos]
                    } else {
                        values.next[pos] < values.curr[pos]
                    };
                    if !better {
                        continue;
                    }
                    values.curr[pos] = values.next[pos];
                    commits += 1;
                    any = true;
                    let v = order[pos];
                    let own = values.curr[pos];
                    if maximize {
                        for &t in graph.out_neighbors(v).iter().chain(graph.in_neighbors(v)) {
                            let tpos = ps.position_of(t);
                            if own > values.next[tpos] {
                                values.next[tpos] = own;
                                values.changed[tpos] = true;
                            }
                        }
                    } else if own.is_finite() {
                        for (i, &t) in graph.out_neighbors(v).iter().enumerate() {
                            let w = if unit_weights {
                                1.0
                            } else {
                                graph.out_weight_or_unit(v, i)
                            };
                            let tpos = ps.position_of(t);
                            if own + w < values.next[tpos] {
                                values.next[tpos] = own + w;
                                values.changed[tpos] = true;
                            }
                        }
                    }
                }
                if !any {
                    break;
                }
            }
        }
    }
    commits
}

fn values_by_id(ps: &PartitionSet, curr: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; curr.len()];
    for (pos, &v) in ps.order().iter().enumerate() {
        out[v as usize] = curr[pos];
    }
    out
}
