//! Activity-based partitioning.
//!
//! Vertices are scored by an active degree that mixes a vertex's own degree
//! function with its neighbors' degrees, sorted descending, and cut into
//! cache-block-sized hot/cold partitions; zero-degree vertices are isolated
//! into dead partitions up front. As the run converges, partitions are
//! re-tagged either generally (tag table) or, for monotone-cooling
//! algorithms, by retreating a single barrier index over the activity order.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::{DegreeTable, Graph, VertexId};
use crate::state::PartitionStateTable;

/// Partition temperature tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionKind {
    Hot,
    Cold,
    Dead,
}

impl PartitionKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            PartitionKind::Hot => "hot",
            PartitionKind::Cold => "cold",
            PartitionKind::Dead => "dead",
        }
    }
}

/// A contiguous block of the activity-sorted vertex order.
#[derive(Debug, Clone)]
pub struct Partition {
    id: u32,
    kind: PartitionKind,
    range: Range<usize>,
    edge_weight: u64,
}

impl Partition {
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    /// Positions of this partition's vertices in the owning set's order.
    pub fn range(&self) -> Range<usize> {
        self.range.clone()
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn is_empty(&self) -> bool {
        self.range.is_empty()
    }

    /// Out-edges covered by this partition (the chunk-balancing measure).
    pub fn edge_weight(&self) -> u64 {
        self.edge_weight
    }
}

/// Hotness cutoff selected by sampling.
#[derive(Debug, Clone, Copy)]
pub struct ActivityThreshold {
    t1: f64,
    sample_size: usize,
    hot_ratio: f64,
}

impl ActivityThreshold {
    pub fn t1(&self) -> f64 {
        self.t1
    }

    /// Effective sample size after clipping to the live vertex count.
    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn hot_ratio(&self) -> f64 {
        self.hot_ratio
    }
}

/// Ordered partitions over an activity-sorted vertex order.
///
/// The order is fixed at construction; repartitioning moves tags (or the
/// barrier), never vertices.
#[derive(Debug, Clone)]
pub struct PartitionSet {
    partitions: Vec<Partition>,
    order: Vec<VertexId>,
    pos_of: Vec<u32>,
    barrier: Option<usize>,
    vertices_per_block: usize,
    generation: u64,
}

impl PartitionSet {
    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn partition(&self, id: u32) -> &Partition {
        &self.partitions[id as usize]
    }

    pub fn partition_count(&self) -> usize {
        self.partitions.len()
    }

    /// The activity-sorted vertex order (hot stream, cold stream, dead).
    pub fn order(&self) -> &[VertexId] {
        &self.order
    }

    /// Position of vertex `v` in the sorted order.
    pub fn position_of(&self, v: VertexId) -> usize {
        self.pos_of[v as usize] as usize
    }

    pub fn vertices_of(&self, id: u32) -> &[VertexId] {
        &self.order[self.partitions[id as usize].range()]
    }

    /// Vertex-order index separating hot from cold; `None` once the set is
    /// managed by tag-table repartitioning.
    pub fn barrier(&self) -> Option<usize> {
        self.barrier
    }

    /// Drops the barrier for algorithms whose activity is not monotone
    /// cooling, where a single index cannot represent the tag assignment.
    pub fn clear_barrier(&mut self) {
        self.barrier = None;
    }

    pub fn vertices_per_block(&self) -> usize {
        self.vertices_per_block
    }

    /// Repartition counter.
    pub fn generation(&self) -> u64 {
        self.generation
    }

    pub fn kind_of_vertex(&self, v: VertexId) -> PartitionKind {
        let pos = self.position_of(v);
        self.partitions
            .iter()
            .find(|p| p.range().contains(&pos))
            .map(|p| p.kind())
            .expect("every vertex belongs to exactly one partition")
    }

    /// Current tag assignment, indexed by partition id.
    pub fn kinds(&self) -> Vec<PartitionKind> {
        self.partitions.iter().map(|p| p.kind()).collect()
    }

    /// Re-tags partitions against `t1`: hot blocks whose state degree fell
    /// below the threshold become cold, cold blocks that heated up become
    /// hot. Membership is untouched; only tags move. The barrier is dropped
    /// because an arbitrary tag assignment has no single split index.
    pub fn repartition_general(&mut self, pst: &PartitionStateTable, t1: f64) {
        for p in &mut self.partitions {
            let psd = pst.psd(p.id);
            match p.kind {
                PartitionKind::Hot if psd < t1 => p.kind = PartitionKind::Cold,
                PartitionKind::Cold if psd >= t1 => p.kind = PartitionKind::Hot,
                _ => {}
            }
        }
        self.barrier = None;
        self.generation += 1;
    }

    /// Barrier repartitioning for monotone-cooling algorithms: the barrier
    /// retreats over trailing hot partitions whose state degree fell below
    /// `t1`. No tag table is consulted; partitions before the barrier are
    /// hot, after it cold. The hot region never grows back.
    pub fn repartition_barrier(&mut self, pst: &PartitionStateTable, t1: f64) -> Result<()> {
        let mut barrier = self.barrier.ok_or_else(|| {
            Error::config(
                "barrier repartitioning requires a monotone-cooling algorithm \
                 (no barrier is maintained for this run)",
            )
        })?;

        for p in self.partitions.iter_mut().rev() {
            if p.kind != PartitionKind::Hot || p.range.end > barrier {
                continue;
            }
            if p.range.end < barrier {
                break; // interior hot partition: the cooling front stopped
            }
            if pst.psd(p.id) < t1 {
                barrier = p.range.start;
                p.kind = PartitionKind::Cold;
            } else {
                break;
            }
        }

        debug_assert!(barrier <= self.barrier.unwrap_or(barrier));
        self.barrier = Some(barrier);
        self.generation += 1;
        Ok(())
    }

    /// Builds a set from explicit blocks, for tests and synthetic schedules.
    ///
    /// Blocks are laid out in the given order; the barrier is set only when
    /// the layout is hot blocks, then cold, then dead. Edge weights are not
    /// derived.
    pub fn from_blocks(blocks: Vec<(PartitionKind, Vec<VertexId>)>) -> PartitionSet {
        let mut order = Vec::new();
        let mut partitions = Vec::new();
        let mut start = 0usize;
        for (id, (kind, vs)) in blocks.into_iter().enumerate() {
            let end = start + vs.len();
            order.extend_from_slice(&vs);
            partitions.push(Partition {
                id: id as u32,
                kind,
                range: start..end,
                edge_weight: 0,
            });
            start = end;
        }
        let max_id = order.iter().copied().max().map_or(0, |v| v as usize);
        let mut pos_of = vec![u32::MAX; max_id + 1];
        for (pos, &v) in order.iter().enumerate() {
            pos_of[v as usize] = pos as u32;
        }
        let monotone_layout = partitions
            .windows(2)
            .all(|w| layout_rank(w[0].kind) <= layout_rank(w[1].kind));
        let barrier = monotone_layout.then(|| {
            partitions
                .iter()
                .filter(|p| p.kind == PartitionKind::Hot)
                .map(|p| p.range.end)
                .max()
                .unwrap_or(0)
        });
        PartitionSet {
            partitions,
            order,
            pos_of,
            barrier,
            vertices_per_block: 0,
            generation: 0,
        }
    }
}

fn layout_rank(kind: PartitionKind) -> u8 {
    match kind {
        PartitionKind::Hot => 0,
        PartitionKind::Cold => 1,
        PartitionKind::Dead => 2,
    }
}

/// Active degree of a single live vertex.
///
/// `AD(v) = D(v) + sum_{k in N(v)} D(k) / (sqrt(D_max) * D(v))` where `N(v)`
/// is the deduplicated union of in- and out-neighbors. A vertex with no
/// edges has no defined score and is routed to the dead partition instead.
pub fn active_degree(graph: &Graph, degrees: &DegreeTable, v: VertexId) -> Result<f64> {
    let dv = degrees.degree(v);
    if dv <= 0.0 {
        return Err(Error::contract(format!(
            "active degree is undefined for zero-degree vertex {v}"
        )));
    }
    Ok(active_degree_live(graph, degrees, v, dv))
}

fn active_degree_live(graph: &Graph, degrees: &DegreeTable, v: VertexId, dv: f64) -> f64 {
    let mut neighbors: Vec<VertexId> = graph
        .out_neighbors(v)
        .iter()
        .chain(graph.in_neighbors(v).iter())
        .copied()
        .collect();
    neighbors.sort_unstable();
    neighbors.dedup();
    let neighbor_sum: f64 = neighbors.iter().map(|&k| degrees.degree(k)).sum();
    dv + neighbor_sum / (degrees.max_degree().sqrt() * dv)
}

/// Fills the active-degree column of `degrees` for every live vertex.
///
/// Dead vertices keep 0.0. Vertices are independent, so the scan is
/// parallel.
pub fn compute_active_degrees(graph: &Graph, degrees: &mut DegreeTable) {
    let ads: Vec<f64> = (0..graph.vertex_count() as u32)
        .into_par_iter()
        .map(|v| {
            let dv = degrees.degree(v);
            if dv <= 0.0 {
                0.0
            } else {
                active_degree_live(graph, degrees, v, dv)
            }
        })
        .collect();
    degrees.active_degree_slice_mut().copy_from_slice(&ads);
}

/// Selects the hotness threshold from a uniform sample of live vertices.
///
/// `t1` is the active degree of the `ceil(hot_ratio * k)`-th highest-scored
/// vertex among the `k` sampled ones (ties broken by ascending id). Dead
/// vertices are excluded: their score is undefined. A sample size above the
/// live count is clipped with a warning.
pub fn sample_threshold(
    graph: &Graph,
    degrees: &DegreeTable,
    sample_size: usize,
    hot_ratio: f64,
    seed: u64,
) -> Result<ActivityThreshold> {
    if sample_size == 0 {
        return Err(Error::config("sample_size must be positive"));
    }
    if sample_size > graph.vertex_count() {
        return Err(Error::config(format!(
            "sample_size {sample_size} exceeds vertex count {}",
            graph.vertex_count()
        )));
    }
    if !(hot_ratio > 0.0 && hot_ratio <= 1.0) {
        return Err(Error::config(format!(
            "hot_ratio must lie in (0, 1], got {hot_ratio}"
        )));
    }

    let live: Vec<VertexId> = graph.vertices().filter(|&v| !degrees.is_dead(v)).collect();
    if live.is_empty() {
        return Err(Error::validation(
            "cannot sample a threshold: every vertex is dead",
        ));
    }
    let k = if sample_size > live.len() {
        log::warn!(
            "sample_size {sample_size} exceeds live vertex count {}; clipping",
            live.len()
        );
        live.len()
    } else {
        sample_size
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sampled: Vec<(f64, VertexId)> = rand::seq::index::sample(&mut rng, live.len(), k)
        .into_iter()
        .map(|i| {
            let v = live[i];
            (active_degree_live(graph, degrees, v, degrees.degree(v)), v)
        })
        .collect();
    sampled.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let rank = ((hot_ratio * k as f64).ceil() as usize).clamp(1, k);
    Ok(ActivityThreshold {
        t1: sampled[rank - 1].0,
        sample_size: k,
        hot_ratio,
    })
}

/// Builds the initial partition set.
///
/// Zero-degree vertices go to dead partitions (chunked by vertex count:
/// they carry no edges). Live vertices are sorted by active degree
/// descending, split at `t1` (score >= t1 is hot, so the boundary vertex is
/// assigned once), and each stream is cut greedily so accumulated out-edges
/// per partition reach the expected chunk size (remaining edges over
/// remaining partitions), with vertex counts capped at `vertices_per_block`.
/// The barrier lands on the first cold vertex in the sorted order.
///
/// Requires [`compute_active_degrees`] to have filled the degree table.
pub fn initial_partition(
    graph: &Graph,
    degrees: &DegreeTable,
    t1: f64,
    vertices_per_block: usize,
) -> Result<PartitionSet> {
    if vertices_per_block == 0 {
        return Err(Error::config("vertices_per_block must be positive"));
    }

    let mut live: Vec<VertexId> = Vec::new();
    let mut dead: Vec<VertexId> = Vec::new();
    for v in graph.vertices() {
        if degrees.is_dead(v) {
            dead.push(v);
        } else {
            live.push(v);
        }
    }
    live.sort_by(|&a, &b| {
        degrees
            .active_degree(b)
            .total_cmp(&degrees.active_degree(a))
            .then(a.cmp(&b))
    });
    let hot_len = live.partition_point(|&v| degrees.active_degree(v) >= t1);

    let mut partitions: Vec<Partition> = Vec::new();
    let push_stream = |ids: &[VertexId], base: usize, kind: PartitionKind, out: &mut Vec<Partition>| {
        for (start, end, weight) in cut_stream_by_edges(ids, degrees, vertices_per_block) {
            out.push(Partition {
                id: out.len() as u32,
                kind,
                range: base + start..base + end,
                edge_weight: weight,
            });
        }
    };
    push_stream(&live[..hot_len], 0, PartitionKind::Hot, &mut partitions);
    push_stream(&live[hot_len..], hot_len, PartitionKind::Cold, &mut partitions);

    let mut base = live.len();
    for chunk in dead.chunks(vertices_per_block) {
        partitions.push(Partition {
            id: partitions.len() as u32,
            kind: PartitionKind::Dead,
            range: base..base + chunk.len(),
            edge_weight: 0,
        });
        base += chunk.len();
    }

    let mut order = live;
    order.extend_from_slice(&dead);
    let mut pos_of = vec![u32::MAX; graph.vertex_count()];
    for (pos, &v) in order.iter().enumerate() {
        pos_of[v as usize] = pos as u32;
    }

    Ok(PartitionSet {
        partitions,
        order,
        pos_of,
        barrier: Some(hot_len),
        vertices_per_block,
        generation: 0,
    })
}

/// Greedy edge-balanced cuts of one activity stream into exactly
/// `ceil(len / block)` partitions of at most `block` vertices each.
///
/// Keeping the partition count tied to the block size keeps one partition
/// service comparable to one cache-block load. Within that constraint the
/// edge rule closes a partition once its accumulated out-edges reach the
/// expected chunk size (remaining edges over remaining partitions), as soon
/// as the rest still fits the remaining blocks; the block cap and the
/// leave-none-empty rule force a cut regardless.
fn cut_stream_by_edges(
    ids: &[VertexId],
    degrees: &DegreeTable,
    block: usize,
) -> Vec<(usize, usize, u64)> {
    if ids.is_empty() {
        return Vec::new();
    }
    let total_parts = ids.len().div_ceil(block);
    let mut remaining_edges: u64 = ids.iter().map(|&v| degrees.out_degree(v) as u64).sum();
    let mut cuts = Vec::with_capacity(total_parts);
    let mut start = 0usize;
    for i in 0..total_parts {
        let parts_left = total_parts - i;
        let slots_after = (parts_left - 1) * block;
        let expected = remaining_edges as f64 / parts_left as f64;
        let mut weight: u64 = 0;
        let mut end = start;
        loop {
            weight += degrees.out_degree(ids[end]) as u64;
            end += 1;
            let left = ids.len() - end;
            if parts_left == 1 {
                if left == 0 {
                    break;
                }
                continue;
            }
            let must_cut = end - start == block || left == parts_left - 1;
            let may_cut = left <= slots_after;
            if must_cut || (may_cut && remaining_edges > 0 && weight as f64 >= expected) {
                break;
            }
        }
        cuts.push((start, end, weight));
        start = end;
        remaining_edges -= weight;
    }
    debug_assert_eq!(start, ids.len());
    cuts
}
