//! Shared oracles and fixtures for integration tests.
//!
//! The oracles are deliberately independent of the engine: a binary-heap
//! Dijkstra, a FIFO BFS, union-find components, and dense power iteration.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use sage_core::engine::RunConfig;
use sage_core::gen::{rmat, uniform_random, RmatConfig};
use sage_core::{Graph, VertexId};

/// The 6-vertex worked example: 0->1, 0->2, 0->3, 1->0, 2->0, 3->4, vertex 5
/// isolated.
pub fn g1() -> Graph {
    Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (1, 0), (2, 0), (3, 4)], None).unwrap()
}

/// Engine configuration pinned for reproducible tests: fixed workers, small
/// blocks so small graphs still split into several partitions, and a
/// generous iteration cap so runs terminate by convergence.
pub fn test_config(block: usize) -> RunConfig {
    RunConfig {
        workers: 4,
        vertices_per_block: block,
        max_iterations: Some(200_000),
        seed: 42,
        ..RunConfig::default()
    }
}

/// Binary-heap Dijkstra over out-edges; unreachable vertices stay infinite.
pub fn dijkstra(graph: &Graph, source: VertexId) -> Vec<f64> {
    let n = graph.vertex_count();
    let mut dist = vec![f64::INFINITY; n];
    dist[source as usize] = 0.0;
    // (distance bits, vertex): non-negative f64 bits order like the values.
    let mut heap: BinaryHeap<Reverse<(u64, VertexId)>> = BinaryHeap::new();
    heap.push(Reverse((0.0f64.to_bits(), source)));
    while let Some(Reverse((dbits, v))) = heap.pop() {
        let d = f64::from_bits(dbits);
        if d > dist[v as usize] {
            continue;
        }
        for (i, &t) in graph.out_neighbors(v).iter().enumerate() {
            let cand = d + graph.out_weight_or_unit(v, i);
            if cand < dist[t as usize] {
                dist[t as usize] = cand;
                heap.push(Reverse((cand.to_bits(), t)));
            }
        }
    }
    dist
}

/// Queue BFS levels with unit edges; unreachable vertices stay infinite.
pub fn fifo_bfs(graph: &Graph, source: VertexId) -> Vec<f64> {
    let n = graph.vertex_count();
    let mut level = vec![f64::INFINITY; n];
    level[source as usize] = 0.0;
    let mut queue = std::collections::VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &t in graph.out_neighbors(v) {
            if level[t as usize].is_infinite() {
                level[t as usize] = level[v as usize] + 1.0;
                queue.push_back(t);
            }
        }
    }
    level
}

/// Union-find components of the underlying undirected graph; every vertex
/// gets the maximum id of its component, matching the max-label rule.
pub fn union_find_labels(graph: &Graph) -> Vec<f64> {
    let n = graph.vertex_count();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], v: u32) -> u32 {
        let mut root = v;
        while parent[root as usize] != root {
            root = parent[root as usize];
        }
        let mut cur = v;
        while parent[cur as usize] != root {
            let next = parent[cur as usize];
            parent[cur as usize] = root;
            cur = next;
        }
        root
    }
    for v in graph.vertices() {
        for &t in graph.out_neighbors(v) {
            let (a, b) = (find(&mut parent, v), find(&mut parent, t));
            if a != b {
                parent[a as usize] = b;
            }
        }
    }
    let mut max_label = vec![0u32; n];
    for v in 0..n as u32 {
        let root = find(&mut parent, v);
        max_label[root as usize] = max_label[root as usize].max(v);
    }
    (0..n as u32)
        .map(|v| {
            let root = find(&mut parent, v);
            max_label[root as usize] as f64
        })
        .collect()
}

/// Dense synchronous power iteration for the engine's rank model:
/// `x[v] = (1-d) + d * (in-edge shares + uniform dangling share)`, where
/// dangling mass from live sinks spreads uniformly over live vertices and
/// dead vertices neither receive nor forward mass.
pub fn dense_pagerank(graph: &Graph, damping: f64, tol: f64) -> Vec<f64> {
    let n = graph.vertex_count();
    let live: Vec<bool> = graph
        .vertices()
        .map(|v| graph.in_degree(v) > 0 || graph.out_degree(v) > 0)
        .collect();
    let n_live = live.iter().filter(|&&l| l).count();
    let mut x = vec![1.0f64; n];
    for v in 0..n {
        if !live[v] {
            x[v] = 1.0 - damping;
        }
    }
    for _ in 0..100_000 {
        let mut next = vec![0.0f64; n];
        let mut dangling_mass = 0.0;
        for v in graph.vertices() {
            if !live[v as usize] {
                continue;
            }
            let dout = graph.out_degree(v);
            if dout == 0 {
                dangling_mass += x[v as usize];
            } else {
                let share = x[v as usize] / dout as f64;
                for &t in graph.out_neighbors(v) {
                    next[t as usize] += share;
                }
            }
        }
        let uniform = if n_live > 0 {
            dangling_mass / n_live as f64
        } else {
            0.0
        };
        let mut max_delta = 0.0f64;
        for v in 0..n {
            let fresh = if live[v] {
                (1.0 - damping) + damping * (next[v] + uniform)
            } else {
                1.0 - damping
            };
            max_delta = max_delta.max((fresh - x[v]).abs());
            next[v] = fresh;
        }
        x = next;
        if max_delta < tol {
            break;
        }
    }
    x
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
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

/// A corpus of seeded graphs with mixed skew: recursive-quadrant power-law
/// graphs, uniform random graphs, and variants with isolated vertices and
/// weights. All at most 2^10 vertices.
pub fn mixed_skew_corpus() -> Vec<(String, Graph)> {
    let mut corpus = Vec::new();
    for seed in 0..6u64 {
        let g = rmat(&RmatConfig {
            scale: 9,
            edge_factor: 6,
            seed: 1000 + seed,
            weighted: seed % 2 == 0,
            ..RmatConfig::default()
        })
        .unwrap();
        corpus.push((format!("rmat9-s{seed}"), g));
    }
    for seed in 0..6u64 {
        let g = rmat(&RmatConfig {
            scale: 10,
            edge_factor: 4,
            seed: 2000 + seed,
            weighted: seed % 2 == 1,
            ..RmatConfig::default()
        })
        .unwrap();
        corpus.push((format!("rmat10-s{seed}"), g));
    }
    for seed in 0..5u64 {
        let n = 600 + 80 * seed as usize;
        let g = uniform_random(n, n, 4 * n, 3000 + seed, seed % 2 == 0).unwrap();
        corpus.push((format!("uniform-{n}-s{seed}"), g));
    }
    for seed in 0..5u64 {
        // 30% isolated tail plus a dense live prefix.
        let n = 512;
        let endpoints = 358;
        let g = uniform_random(n, endpoints, 5 * endpoints, 4000 + seed, seed % 2 == 1).unwrap();
        corpus.push((format!("isolated30-{n}-s{seed}"), g));
    }
    corpus
}
