//! Vertex-update kernels.
//!
//! Each kernel owns exactly its vertex's slots (committed value, pending
//! proposal, flags) and communicates with other vertices only through push
//! sinks whose combines are associative, commutative, and exact — fixed-point
//! addition for rank mass, bitwise min/max on non-negative float encodings
//! for distances and labels. Any interleaving of concurrent pushes therefore
//! produces identical state, which keeps parallel runs bit-deterministic.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::state::{sd_contribution_cc, sd_contribution_sssp};

/// Supported iterative algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    PageRank,
    Sssp,
    Cc,
    Bfs,
}

impl Algorithm {
    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::PageRank => "pagerank",
            Algorithm::Sssp => "sssp",
            Algorithm::Cc => "cc",
            Algorithm::Bfs => "bfs",
        }
    }

    pub fn parse(name: &str) -> Result<Algorithm> {
        match name {
            "pagerank" | "pr" => Ok(Algorithm::PageRank),
            "sssp" => Ok(Algorithm::Sssp),
            "cc" => Ok(Algorithm::Cc),
            "bfs" => Ok(Algorithm::Bfs),
            other => Err(Error::config(format!("unknown algorithm `{other}`"))),
        }
    }
}

/// An algorithm instance: which kernel to run and its parameters.
#[derive(Debug, Clone, Copy)]
pub struct AlgorithmSpec {
    pub algorithm: Algorithm,
    /// Start vertex for sssp/bfs.
    pub source: Option<VertexId>,
    /// Damping factor for pagerank.
    pub damping: f64,
}

impl AlgorithmSpec {
    pub fn pagerank() -> AlgorithmSpec {
        AlgorithmSpec {
            algorithm: Algorithm::PageRank,
            source: None,
            damping: 0.85,
        }
    }

    pub fn sssp(source: VertexId) -> AlgorithmSpec {
        AlgorithmSpec {
            algorithm: Algorithm::Sssp,
            source: Some(source),
            damping: 0.85,
        }
    }

    pub fn cc() -> AlgorithmSpec {
        AlgorithmSpec {
            algorithm: Algorithm::Cc,
            source: None,
            damping: 0.85,
        }
    }

    pub fn bfs(source: VertexId) -> AlgorithmSpec {
        AlgorithmSpec {
            algorithm: Algorithm::Bfs,
            source: Some(source),
            damping: 0.85,
        }
    }

    /// Whether partition activity only ever cools, making the partition
    /// barrier a valid representation. True for pagerank; traversal
    /// algorithms heat cold regions as the frontier reaches them.
    pub fn monotone_cooling(&self) -> bool {
        matches!(self.algorithm, Algorithm::PageRank)
    }

    pub fn requires_source(&self) -> bool {
        matches!(self.algorithm, Algorithm::Sssp | Algorithm::Bfs)
    }

    pub fn validate(&self, graph: &Graph) -> Result<()> {
        if self.requires_source() {
            match self.source {
                None => {
                    return Err(Error::config(format!(
                        "{} requires a source vertex",
                        self.algorithm.as_str()
                    )))
                }
                Some(s) if s as usize >= graph.vertex_count() => {
                    return Err(Error::config(format!(
                        "source vertex {s} is outside 0..{}",
                        graph.vertex_count()
                    )))
                }
                _ => {}
            }
        }
        if self.algorithm == Algorithm::PageRank && !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::config(format!(
                "damping must lie in (0, 1), got {}",
                self.damping
            )));
        }
        Ok(())
    }

    /// Initial committed value of vertex `v`.
    pub fn initial_value(&self, v: VertexId) -> f64 {
        match self.algorithm {
            Algorithm::PageRank => 0.0,
            Algorithm::Sssp | Algorithm::Bfs => {
                if Some(v) == self.source {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Algorithm::Cc => v as f64,
        }
    }
}

/// Shared sink for min-combined distance proposals.
///
/// Non-negative f64 values (including the infinity sentinel) compare the
/// same as their bit patterns, so `fetch_min` on the bits is an exact,
/// order-free combine.
pub struct MinSinks<'a> {
    slots: &'a [AtomicU64],
    touched: &'a [AtomicBool],
}

impl<'a> MinSinks<'a> {
    pub fn new(slots: &'a [AtomicU64], touched: &'a [AtomicBool]) -> Self {
        MinSinks { slots, touched }
    }

    pub fn propose(&self, target: VertexId, value: f64) {
        debug_assert!(value >= 0.0);
        let bits = value.to_bits();
        let old = self.slots[target as usize].fetch_min(bits, Ordering::Relaxed);
        if bits < old {
            self.touched[target as usize].store(true, Ordering::Relaxed);
        }
    }
}

/// Shared sink for max-combined label proposals.
pub struct MaxSinks<'a> {
    slots: &'a [AtomicU64],
    touched: &'a [AtomicBool],
}

impl<'a> MaxSinks<'a> {
    pub fn new(slots: &'a [AtomicU64], touched: &'a [AtomicBool]) -> Self {
        MaxSinks { slots, touched }
    }

    pub fn propose(&self, target: VertexId, value: f64) {
        debug_assert!(value >= 0.0);
        let bits = value.to_bits();
        let old = self.slots[target as usize].fetch_max(bits, Ordering::Relaxed);
        if bits > old {
            self.touched[target as usize].store(true, Ordering::Relaxed);
        }
    }
}

/// Shared sink for rank mass, accumulated in fixed-point units so that
/// concurrent additions are exact and commutative.
pub struct ResidualSinks<'a> {
    incoming: &'a [AtomicU64],
    touched: &'a [AtomicBool],
    dangling_pool: &'a AtomicU64,
    scale: f64,
}

impl<'a> ResidualSinks<'a> {
    pub fn new(
        incoming: &'a [AtomicU64],
        touched: &'a [AtomicBool],
        dangling_pool: &'a AtomicU64,
        scale: f64,
    ) -> Self {
        ResidualSinks {
            incoming,
            touched,
            dangling_pool,
            scale,
        }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn to_f64(&self, units: u64) -> f64 {
        units as f64 / self.scale
    }

    fn push(&self, target: VertexId, units: u64) {
        if units > 0 {
            self.incoming[target as usize].fetch_add(units, Ordering::Relaxed);
            self.touched[target as usize].store(true, Ordering::Relaxed);
        }
    }
}

/// Absorbs vertex `v`'s pending rank mass and pushes the damped share to its
/// out-neighbors. Returns the absolute rank change.
///
/// A dangling live vertex (out-degree 0, in-degree > 0) hands its damped
/// mass to the shared pool for uniform redistribution over live vertices at
/// the iteration barrier. A dead vertex keeps its rank and forwards nothing:
/// converged after its single service.
pub fn pagerank_update(
    v: VertexId,
    graph: &Graph,
    rank: &mut f64,
    sealed_residual: &mut u64,
    sinks: &ResidualSinks<'_>,
    damping: f64,
) -> f64 {
    let units = std::mem::take(sealed_residual);
    if units == 0 {
        return 0.0;
    }
    let delta = sinks.to_f64(units);
    *rank += delta;

    let dout = graph.out_degree(v);
    if dout > 0 {
        let per_edge = (damping * units as f64 / dout as f64) as u64;
        if per_edge > 0 {
            for &t in graph.out_neighbors(v) {
                sinks.push(t, per_edge);
            }
        }
    } else if graph.in_degree(v) > 0 {
        let pooled = (damping * units as f64) as u64;
        if pooled > 0 {
            self_add(sinks.dangling_pool, pooled);
        }
    }
    delta
}

fn self_add(pool: &AtomicU64, units: u64) {
    pool.fetch_add(units, Ordering::Relaxed);
}

/// Commits vertex `v`'s pending distance, then relaxes its out-edges.
/// Returns the state-degree contribution of the commit on `v`'s own old and
/// new distance.
pub fn sssp_update(
    v: VertexId,
    graph: &Graph,
    curr: &mut f64,
    next: &mut f64,
    changed: &mut bool,
    sinks: &MinSinks<'_>,
    unit_weights: bool,
) -> f64 {
    let mut contribution = 0.0;
    if *changed && *next < *curr {
        contribution = sd_contribution_sssp(*curr, *next)
            .expect("distances stay non-negative under non-negative weights");
        *curr = *next;
    }
    *changed = false;
    *next = *curr;

    if curr.is_finite() {
        for (i, &t) in graph.out_neighbors(v).iter().enumerate() {
            let w = if unit_weights {
                1.0
            } else {
                graph.out_weight_or_unit(v, i)
            };
            sinks.propose(t, *curr + w);
        }
    }
    contribution
}

/// BFS is unit-weight shortest paths: levels equal hop distance.
pub fn bfs_update(
    v: VertexId,
    graph: &Graph,
    curr: &mut f64,
    next: &mut f64,
    changed: &mut bool,
    sinks: &MinSinks<'_>,
) -> f64 {
    sssp_update(v, graph, curr, next, changed, sinks, true)
}

/// Commits vertex `v`'s pending label, then offers its label to every
/// neighbor in both directions (components of the underlying undirected
/// graph). Returns the contribution of the commit.
pub fn cc_update(
    v: VertexId,
    graph: &Graph,
    curr: &mut f64,
    next: &mut f64,
    changed: &mut bool,
    sinks: &MaxSinks<'_>,
) -> f64 {
    let mut contribution = 0.0;
    if *changed && *next > *curr {
        contribution = sd_contribution_cc(*curr, *next);
        *curr = *next;
    }
    *changed = false;
    *next = *curr;

    for &t in graph.out_neighbors(v) {
        sinks.propose(t, *curr);
    }
    for &s in graph.in_neighbors(v) {
        sinks.propose(s, *curr);
    }
    contribution
}
