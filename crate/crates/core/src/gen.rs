//! Seeded synthetic graph generators.
//!
//! The recursive-quadrant generator is the standard skewed-graph stand-in
//! for power-law datasets; the ring and uniform generators provide the
//! no-skew and mixed cases. All generators are deterministic in their seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};

/// Recursive-quadrant (RMAT-style) generator parameters.
#[derive(Debug, Clone)]
pub struct RmatConfig {
    /// Vertex count is `2^scale`.
    pub scale: u32,
    /// Edges per vertex.
    pub edge_factor: usize,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub seed: u64,
    /// Draw edge weights uniformly from `[1, 10)`.
    pub weighted: bool,
}

impl Default for RmatConfig {
    fn default() -> RmatConfig {
        RmatConfig {
            scale: 10,
            edge_factor: 16,
            a: 0.57,
            b: 0.19,
            c: 0.19,
            d: 0.05,
            seed: 42,
            weighted: false,
        }
    }
}

/// Generates a skewed directed multigraph with `2^scale` vertices.
/// Duplicate edges and self-loops are kept.
pub fn rmat(cfg: &RmatConfig) -> Result<Graph> {
    let sum = cfg.a + cfg.b + cfg.c + cfg.d;
    if (sum - 1.0).abs() > 1e-9 {
        return Err(Error::config(format!(
            "quadrant probabilities must sum to 1, got {sum}"
        )));
    }
    let n = 1usize << cfg.scale;
    let m = n * cfg.edge_factor;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let mut src = 0u32;
        let mut dst = 0u32;
        for _ in 0..cfg.scale {
            let r: f64 = rng.gen();
            let (sbit, dbit) = if r < cfg.a {
                (0, 0)
            } else if r < cfg.a + cfg.b {
                (0, 1)
            } else if r < cfg.a + cfg.b + cfg.c {
                (1, 0)
            } else {
                (1, 1)
            };
            src = (src << 1) | sbit;
            dst = (dst << 1) | dbit;
        }
        edges.push((src, dst));
    }
    let weights = cfg
        .weighted
        .then(|| (0..m).map(|_| rng.gen_range(1.0..10.0)).collect());
    Graph::from_edges(n, &edges, weights)
}

/// Directed ring: every vertex has out-degree and in-degree exactly 1.
pub fn directed_ring(n: usize) -> Result<Graph> {
    if n == 0 {
        return Err(Error::config("ring size must be positive"));
    }
    let edges: Vec<(VertexId, VertexId)> = (0..n as u32)
        .map(|v| (v, ((v as usize + 1) % n) as u32))
        .collect();
    Graph::from_edges(n, &edges, None)
}

/// Uniform random directed multigraph over `vertex_count` vertices whose
/// edge endpoints are drawn from `0..endpoint_count`; the remaining
/// vertices stay isolated.
pub fn uniform_random(
    vertex_count: usize,
    endpoint_count: usize,
    edge_count: usize,
    seed: u64,
    weighted: bool,
) -> Result<Graph> {
    if endpoint_count == 0 || endpoint_count > vertex_count {
        return Err(Error::config(format!(
            "endpoint_count must lie in 1..={vertex_count}, got {endpoint_count}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges: Vec<(VertexId, VertexId)> = (0..edge_count)
        .map(|_| {
            (
                rng.gen_range(0..endpoint_count as u32),
                rng.gen_range(0..endpoint_count as u32),
            )
        })
        .collect();
    let weights = weighted.then(|| (0..edge_count).map(|_| rng.gen_range(1.0..10.0)).collect());
    Graph::from_edges(vertex_count, &edges, weights)
}
