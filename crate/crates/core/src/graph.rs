//! Compact immutable graph storage.
//!
//! Graphs are held in a CSR-style layout with both out- and in-edge access.
//! Vertex ids are dense `0..n`; input ids are used directly so downstream
//! partition layouts are reproducible. Duplicate edges and self-loops are
//! preserved: dropping them would silently change degrees.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Dense vertex identifier.
pub type VertexId = u32;

/// Magic bytes of the binary cache format.
pub const BINARY_MAGIC: &[u8; 5] = b"SAGE1";

/// Immutable directed multigraph with forward and reverse adjacency.
///
/// `out_offsets` has `vertex_count + 1` monotone entries ending at
/// `edge_count`; `weights`, when present, is parallel to `out_targets`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    vertex_count: usize,
    edge_count: usize,
    out_offsets: Vec<usize>,
    out_targets: Vec<VertexId>,
    in_offsets: Vec<usize>,
    in_sources: Vec<VertexId>,
    weights: Option<Vec<f64>>,
}

impl Graph {
    /// Builds a graph from an explicit edge list over `vertex_count` dense ids.
    ///
    /// Edge order within each source follows the input order, which keeps
    /// weight association and construction deterministic.
    pub fn from_edges(
        vertex_count: usize,
        edges: &[(VertexId, VertexId)],
        weights: Option<Vec<f64>>,
    ) -> Result<Graph> {
        if vertex_count == 0 {
            return Err(Error::validation("zero-vertex graphs are rejected"));
        }
        if vertex_count > u32::MAX as usize {
            return Err(Error::validation("vertex count exceeds id space"));
        }
        if let Some(w) = &weights {
            if w.len() != edges.len() {
                return Err(Error::validation("weight array not parallel to edge list"));
            }
            if let Some(bad) = w.iter().find(|x| !x.is_finite() || **x < 0.0) {
                return Err(Error::validation(format!(
                    "edge weight {bad} is negative or non-finite"
                )));
            }
        }
        for &(s, t) in edges {
            if s as usize >= vertex_count || t as usize >= vertex_count {
                return Err(Error::validation(format!(
                    "edge ({s}, {t}) references a vertex outside 0..{vertex_count}"
                )));
            }
        }

        let m = edges.len();
        let mut out_offsets = vec![0usize; vertex_count + 1];
        for &(s, _) in edges {
            out_offsets[s as usize + 1] += 1;
        }
        for i in 1..out_offsets.len() {
            out_offsets[i] += out_offsets[i - 1];
        }
        let mut out_targets = vec![0 as VertexId; m];
        let mut out_weights = weights.as_ref().map(|_| vec![0.0f64; m]);
        let mut cursor = out_offsets.clone();
        for (e, &(s, t)) in edges.iter().enumerate() {
            let slot = cursor[s as usize];
            out_targets[slot] = t;
            if let (Some(dst), Some(src)) = (out_weights.as_mut(), weights.as_ref()) {
                dst[slot] = src[e];
            }
            cursor[s as usize] += 1;
        }

        let (in_offsets, in_sources) = reverse_adjacency(vertex_count, &out_offsets, &out_targets);

        Ok(Graph {
            vertex_count,
            edge_count: m,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            weights: out_weights,
        })
    }

    /// Assembles a graph from raw CSR parts without checking invariants.
    ///
    /// Intended for tests and diagnostics together with [`Graph::validate`];
    /// every other constructor validates.
    pub fn from_raw_parts(
        vertex_count: usize,
        edge_count: usize,
        out_offsets: Vec<usize>,
        out_targets: Vec<VertexId>,
        in_offsets: Vec<usize>,
        in_sources: Vec<VertexId>,
        weights: Option<Vec<f64>>,
    ) -> Graph {
        Graph {
            vertex_count,
            edge_count,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            weights,
        }
    }

    /// Parses a whitespace-separated text edge list.
    ///
    /// Lines are `src dst` or `src dst weight`; `#`-prefixed lines are
    /// comments. `vertex_count` becomes the maximum id plus one. An input
    /// with no edges is rejected.
    pub fn from_edge_list_reader<R: BufRead>(reader: R, weighted: bool) -> Result<Graph> {
        let mut edges: Vec<(VertexId, VertexId)> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut max_id: u64 = 0;

        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let body = line.trim();
            if body.is_empty() || body.starts_with('#') {
                continue;
            }
            let mut fields = body.split_whitespace();
            let src = parse_id(fields.next(), line_no, "source id")?;
            let dst = parse_id(fields.next(), line_no, "target id")?;
            if weighted {
                let raw = fields.next().ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "missing edge weight".into(),
                })?;
                let w: f64 = raw.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid edge weight `{raw}`"),
                })?;
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::validation(format!(
                        "negative or non-finite weight {w} at line {line_no}"
                    )));
                }
                weights.push(w);
            }
            max_id = max_id.max(src as u64).max(dst as u64);
            edges.push((src, dst));
        }

        if edges.is_empty() {
            return Err(Error::validation(
                "edge list is empty; zero-vertex graphs are rejected",
            ));
        }
        let vertex_count = (max_id + 1) as usize;
        Graph::from_edges(vertex_count, &edges, weighted.then_some(weights))
    }

    /// Loads either a text edge list or a binary cache, sniffed by magic bytes.
    pub fn load(path: &Path, weighted: bool) -> Result<Graph> {
        let mut file = File::open(path)?;
        let mut magic = [0u8; 5];
        let n = read_up_to(&mut file, &mut magic)?;
        if n == 5 && &magic == BINARY_MAGIC {
            drop(file);
            return Graph::read_binary(path);
        }
        drop(file);
        Graph::from_edge_list_reader(BufReader::new(File::open(path)?), weighted)
    }

    /// Number of vertices.
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Number of directed edges.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Whether per-edge weights were loaded.
    pub fn is_weighted(&self) -> bool {
        self.weights.is_some()
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_offsets[v as usize + 1] - self.out_offsets[v as usize]
    }

    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_offsets[v as usize + 1] - self.in_offsets[v as usize]
    }

    /// Targets of all out-edges of `v`, in input order.
    pub fn out_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.out_targets[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]]
    }

    /// Sources of all in-edges of `v`.
    pub fn in_neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.in_sources[self.in_offsets[v as usize]..self.in_offsets[v as usize + 1]]
    }

    /// Weights parallel to [`Graph::out_neighbors`]; `None` when unweighted.
    pub fn out_weights(&self, v: VertexId) -> Option<&[f64]> {
        self.weights
            .as_ref()
            .map(|w| &w[self.out_offsets[v as usize]..self.out_offsets[v as usize + 1]])
    }

    /// Weight of the `i`-th out-edge of `v`, defaulting to 1.0 when the graph
    /// is unweighted (SSSP/BFS unification).
    pub fn out_weight_or_unit(&self, v: VertexId, i: usize) -> f64 {
        match &self.weights {
            Some(w) => w[self.out_offsets[v as usize] + i],
            None => 1.0,
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count as u32).map(|v| v as VertexId)
    }

    /// Checks every structural invariant and reports the violated ones.
    ///
    /// An empty report means the graph is well formed. Report-only: never
    /// fails.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();

        if self.out_offsets.len() != self.vertex_count + 1 {
            violations.push("offset length: out_offsets must have vertex_count+1 entries".into());
        }
        if self.in_offsets.len() != self.vertex_count + 1 {
            violations.push("offset length: in_offsets must have vertex_count+1 entries".into());
        }
        if self.out_offsets.windows(2).any(|w| w[0] > w[1]) {
            violations.push("offset monotonicity: out_offsets must be non-decreasing".into());
        }
        if self.in_offsets.windows(2).any(|w| w[0] > w[1]) {
            violations.push("offset monotonicity: in_offsets must be non-decreasing".into());
        }
        if self.out_offsets.last().copied().unwrap_or(0) != self.edge_count
            || self.out_targets.len() != self.edge_count
        {
            violations.push("edge count: out adjacency does not cover edge_count edges".into());
        }
        if self.in_offsets.last().copied().unwrap_or(0) != self.edge_count
            || self.in_sources.len() != self.edge_count
        {
            violations.push("edge count: in adjacency does not cover edge_count edges".into());
        }
        if self
            .out_targets
            .iter()
            .chain(self.in_sources.iter())
            .any(|&v| v as usize >= self.vertex_count)
        {
            violations.push("id range: adjacency references a vertex id >= vertex_count".into());
        }
        if let Some(w) = &self.weights {
            if w.len() != self.out_targets.len() {
                violations.push("weights: array not parallel to out_targets".into());
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                violations.push("weights: negative or non-finite edge weight".into());
            }
        }
        // Degree-sum identity, plus out/in edge multiset agreement.
        if violations.is_empty() {
            let mut fwd: Vec<(VertexId, VertexId)> = Vec::with_capacity(self.edge_count);
            for v in self.vertices() {
                for &t in self.out_neighbors(v) {
                    fwd.push((v, t));
                }
            }
            let mut rev: Vec<(VertexId, VertexId)> = Vec::with_capacity(self.edge_count);
            for v in self.vertices() {
                for &s in self.in_neighbors(v) {
                    rev.push((s, v));
                }
            }
            fwd.sort_unstable();
            rev.sort_unstable();
            if fwd != rev {
                violations
                    .push("adjacency agreement: out- and in-edges are not the same multiset".into());
            }
        }

        ValidationReport { violations }
    }

    /// Writes the binary cache format: magic, flags, little-endian 64-bit
    /// counts, then offsets/targets/weights arrays.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&[u8::from(self.weights.is_some())])?;
        w.write_all(&(self.vertex_count as u64).to_le_bytes())?;
        w.write_all(&(self.edge_count as u64).to_le_bytes())?;
        for &off in &self.out_offsets {
            w.write_all(&(off as u64).to_le_bytes())?;
        }
        for &t in &self.out_targets {
            w.write_all(&t.to_le_bytes())?;
        }
        if let Some(weights) = &self.weights {
            for &x in weights {
                w.write_all(&x.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a binary cache produced by [`Graph::write_binary`].
    pub fn read_binary(path: &Path) -> Result<Graph> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::validation("bad magic bytes: not a binary graph cache"));
        }
        let mut flags = [0u8; 1];
        r.read_exact(&mut flags)?;
        let weighted = match flags[0] {
            0 => false,
            1 => true,
            other => return Err(Error::validation(format!("unknown flag byte {other}"))),
        };
        let vertex_count = read_u64(&mut r)? as usize;
        let edge_count = read_u64(&mut r)? as usize;
        if vertex_count == 0 {
            return Err(Error::validation("zero-vertex graphs are rejected"));
        }
        let mut out_offsets = Vec::with_capacity(vertex_count + 1);
        for _ in 0..=vertex_count {
            out_offsets.push(read_u64(&mut r)? as usize);
        }
        let mut out_targets = Vec::with_capacity(edge_count);
        for _ in 0..edge_count {
            out_targets.push(read_u32(&mut r)?);
        }
        let weights = if weighted {
            let mut w = Vec::with_capacity(edge_count);
            for _ in 0..edge_count {
                w.push(read_f64(&mut r)?);
            }
            Some(w)
        } else {
            None
        };

        let (in_offsets, in_sources) = reverse_adjacency(vertex_count, &out_offsets, &out_targets);
        let g = Graph {
            vertex_count,
            edge_count,
            out_offsets,
            out_targets,
            in_offsets,
            in_sources,
            weights,
        };
        let report = g.validate();
        if !report.is_valid() {
            return Err(Error::validation(format!(
                "binary cache failed validation: {}",
                report.violations().join("; ")
            )));
        }
        Ok(g)
    }
}

/// Outcome of [`Graph::validate`]: the list of violated invariants.
#[derive(Debug, Clone)]
pub struct ValidationReport {
    violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }
}

/// Per-vertex degree tables: raw counts plus the degree function
/// `D(v) = out_degree(v) + alpha * in_degree(v)` mixing both directions.
///
/// `active_degree` is filled later by the partitioner; it stays 0.0 until
/// then (and permanently for zero-degree vertices).
#[derive(Debug, Clone)]
pub struct DegreeTable {
    pub alpha: f64,
    in_degree: Vec<u32>,
    out_degree: Vec<u32>,
    degree: Vec<f64>,
    active_degree: Vec<f64>,
    max_degree: f64,
}

impl DegreeTable {
    /// Computes degree tables for `alpha` in `[0.5, 1.0]`.
    ///
    /// The closed endpoints are accepted: the per-dataset tuning guidance
    /// speaks of values trending to 0.5 for even in/out distributions and to
    /// 1.0 for heavily skewed follower graphs, so rejecting the documented
    /// limits would be useless.
    pub fn compute(graph: &Graph, alpha: f64) -> Result<DegreeTable> {
        if !(0.5..=1.0).contains(&alpha) {
            return Err(Error::config(format!(
                "alpha must lie in [0.5, 1.0], got {alpha}"
            )));
        }
        let n = graph.vertex_count();
        let mut in_degree = Vec::with_capacity(n);
        let mut out_degree = Vec::with_capacity(n);
        let mut degree = Vec::with_capacity(n);
        let mut max_degree = 0.0f64;
        for v in graph.vertices() {
            let di = graph.in_degree(v) as u32;
            let dout = graph.out_degree(v) as u32;
            let d = dout as f64 + alpha * di as f64;
            max_degree = max_degree.max(d);
            in_degree.push(di);
            out_degree.push(dout);
            degree.push(d);
        }
        Ok(DegreeTable {
            alpha,
            in_degree,
            out_degree,
            degree,
            active_degree: vec![0.0; n],
            max_degree,
        })
    }

    pub fn in_degree(&self, v: VertexId) -> u32 {
        self.in_degree[v as usize]
    }

    pub fn out_degree(&self, v: VertexId) -> u32 {
        self.out_degree[v as usize]
    }

    /// Degree function `D(v)`.
    pub fn degree(&self, v: VertexId) -> f64 {
        self.degree[v as usize]
    }

    /// Maximum of the degree function over all vertices.
    pub fn max_degree(&self) -> f64 {
        self.max_degree
    }

    /// Whether `v` has no edges in either direction.
    pub fn is_dead(&self, v: VertexId) -> bool {
        self.in_degree[v as usize] == 0 && self.out_degree[v as usize] == 0
    }

    pub fn active_degree(&self, v: VertexId) -> f64 {
        self.active_degree[v as usize]
    }

    pub(crate) fn active_degree_slice_mut(&mut self) -> &mut [f64] {
        &mut self.active_degree
    }

    pub fn vertex_count(&self) -> usize {
        self.degree.len()
    }
}

fn parse_id(field: Option<&str>, line: usize, what: &str) -> Result<VertexId> {
    let raw = field.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    raw.parse::<VertexId>().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{raw}`"),
    })
}

fn reverse_adjacency(
    vertex_count: usize,
    out_offsets: &[usize],
    out_targets: &[VertexId],
) -> (Vec<usize>, Vec<VertexId>) {
    let m = out_targets.len();
    let mut in_offsets = vec![0usize; vertex_count + 1];
    for &t in out_targets {
        in_offsets[t as usize + 1] += 1;
    }
    for i in 1..in_offsets.len() {
        in_offsets[i] += in_offsets[i - 1];
    }
    let mut in_sources = vec![0 as VertexId; m];
    let mut cursor = in_offsets.clone();
    for src in 0..vertex_count {
        for &t in &out_targets[out_offsets[src]..out_offsets[src + 1]] {
            in_sources[cursor[t as usize]] = src as VertexId;
            cursor[t as usize] += 1;
        }
    }
    (in_offsets, in_sources)
}

fn read_up_to<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = r.read(&mut buf[filled..])?;
        if n == 0 {
            break;
        }
        filled += n;
    }
    Ok(filled)
}

fn read_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_f64<R: Read>(r: &mut R) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
