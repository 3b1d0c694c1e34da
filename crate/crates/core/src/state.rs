//! Vertex value tables, state-degree accumulation, and convergence.
//!
//! A vertex's state degree accumulates the magnitude of its value changes,
//! one contribution per committed change; the partition state degree is the
//! mean over members and drives both scheduling priority and the global
//! convergence test.

use crate::error::{Error, Result};
use crate::partition::{Partition, PartitionKind, PartitionSet};

/// Double-buffered per-vertex values.
///
/// `curr` holds committed values, `next` the best pending proposal, and
/// `changed` marks vertices whose pending value differs from the committed
/// one. The engine indexes these by partition-order position.
#[derive(Debug, Clone)]
pub struct ValueTables {
    pub curr: Vec<f64>,
    pub next: Vec<f64>,
    pub changed: Vec<bool>,
}

impl ValueTables {
    /// Both buffers initialized to `value` everywhere.
    pub fn uniform(len: usize, value: f64) -> ValueTables {
        ValueTables {
            curr: vec![value; len],
            next: vec![value; len],
            changed: vec![false; len],
        }
    }

    /// Both buffers initialized from the same per-vertex values.
    pub fn from_values(values: Vec<f64>) -> ValueTables {
        let changed = vec![false; values.len()];
        ValueTables {
            curr: values.clone(),
            next: values,
            changed,
        }
    }

    pub fn len(&self) -> usize {
        self.curr.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curr.is_empty()
    }
}

/// Per-vertex state-degree accumulators plus per-partition window markers.
///
/// `sd` is indexed by partition-order position; `window_start` records the
/// iteration at which each partition's window was last reset.
#[derive(Debug, Clone)]
pub struct StateDegreeTable {
    sd: Vec<f64>,
    window_start: Vec<u64>,
}

impl StateDegreeTable {
    pub fn new(vertex_count: usize, partition_count: usize) -> StateDegreeTable {
        StateDegreeTable {
            sd: vec![0.0; vertex_count],
            window_start: vec![0; partition_count],
        }
    }

    pub fn sd(&self, pos: usize) -> f64 {
        self.sd[pos]
    }

    pub fn add(&mut self, pos: usize, amount: f64) {
        debug_assert!(amount >= 0.0);
        self.sd[pos] += amount;
    }

    pub fn values(&self) -> &[f64] {
        &self.sd
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.sd
    }

    /// Zeroes the accumulators of a just-processed partition, so its state
    /// degree measures change since last service.
    pub fn reset_window(&mut self, partition: &Partition, iteration: u64) {
        for slot in &mut self.sd[partition.range()] {
            *slot = 0.0;
        }
        self.window_start[partition.id() as usize] = iteration;
    }

    pub fn window_start(&self, partition_id: u32) -> u64 {
        self.window_start[partition_id as usize]
    }
}

/// Per-partition state degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionStateTable {
    psd: Vec<f64>,
}

impl PartitionStateTable {
    /// Mean state degree per partition; dead and empty partitions get 0.
    pub fn accumulate(ps: &PartitionSet, sdt: &StateDegreeTable) -> PartitionStateTable {
        let mut table = PartitionStateTable {
            psd: vec![0.0; ps.partition_count()],
        };
        table.recompute(ps, sdt);
        table
    }

    pub fn recompute(&mut self, ps: &PartitionSet, sdt: &StateDegreeTable) {
        self.psd.resize(ps.partition_count(), 0.0);
        for p in ps.partitions() {
            self.psd[p.id() as usize] = if p.kind() == PartitionKind::Dead || p.is_empty() {
                0.0
            } else {
                let sum: f64 = sdt.values()[p.range()].iter().sum();
                sum / p.len() as f64
            };
        }
    }

    pub fn from_values(psd: Vec<f64>) -> PartitionStateTable {
        PartitionStateTable { psd }
    }

    pub fn psd(&self, partition_id: u32) -> f64 {
        self.psd[partition_id as usize]
    }

    pub fn values(&self) -> &[f64] {
        &self.psd
    }

    /// Sum over all partitions, the quantity compared against `t2`.
    pub fn sum(&self) -> f64 {
        self.psd.iter().sum()
    }
}

/// State-degree contribution of one value change under the difference rule:
/// the absolute change between the two results.
pub fn sd_contribution_pagerank(curr: f64, next: f64) -> f64 {
    (curr - next).abs()
}

/// State-degree contribution of one distance change: the smaller of the two
/// results when they differ, 0 otherwise.
///
/// The infinity sentinel contributes 0 when both operands are infinite and
/// the finite operand when exactly one is, so unreached regions stay silent.
pub fn sd_contribution_sssp(curr: f64, next: f64) -> Result<f64> {
    if curr < 0.0 || next < 0.0 {
        return Err(Error::contract(format!(
            "distances must be non-negative, got ({curr}, {next})"
        )));
    }
    if curr == next {
        Ok(0.0)
    } else {
        Ok(curr.min(next))
    }
}

/// State-degree contribution of one label change: the larger of the two
/// results when they differ, 0 otherwise.
pub fn sd_contribution_cc(curr: f64, next: f64) -> f64 {
    if curr == next {
        0.0
    } else {
        curr.max(next)
    }
}

/// True when the sum of partition state degrees has fallen below `t2`.
pub fn check_convergence(pst: &PartitionStateTable, t2: f64) -> Result<bool> {
    if t2.is_nan() || t2 <= 0.0 {
        return Err(Error::config(format!(
            "convergence threshold t2 must be positive, got {t2}"
        )));
    }
    Ok(pst.sum() < t2)
}
