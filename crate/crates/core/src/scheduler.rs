//! Adaptive partition scheduling.
//!
//! Iteration 0 services every dead partition once, alongside the single
//! highest-priority hot partition. Later iterations select the top hot
//! partitions by partition state degree, mixing in the top cold partitions
//! at the cold-service cadence; once no active hot partition remains, the
//! busiest cold partitions fill all worker slots. Repartitioning runs on a
//! geometrically growing iteration interval.

use crate::error::{Error, Result};
use crate::partition::{PartitionKind, PartitionSet};
use crate::state::PartitionStateTable;

/// Resolved scheduling parameters for one run.
#[derive(Debug, Clone)]
pub struct SchedulerConfig {
    /// Parallel workers; also the number of partitions serviced per steady
    /// iteration.
    pub worker_count: usize,
    /// Hot selections per cold-cadence iteration (the paper's m).
    pub hot_slots: usize,
    /// Cold selections per cold-cadence iteration (the paper's n).
    pub cold_slots: usize,
    /// Iterations between repartitions before growth (I1).
    pub repartition_interval: u64,
    /// Every this many iterations, cold partitions share the slots (I2).
    pub cold_cadence: u64,
    /// Growth factor applied to the repartition interval after each event.
    pub interval_growth: f64,
    /// Hot/cold threshold, shared between activity and state degrees (T1).
    pub t1: f64,
    /// Global convergence threshold on the sum of partition state
    /// degrees (T2).
    pub t2: f64,
    /// Safety valve; a run that reaches it returns unconverged.
    pub max_iterations: u64,
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.worker_count == 0 {
            return Err(Error::config("worker_count must be positive"));
        }
        if self.hot_slots + self.cold_slots != self.worker_count {
            return Err(Error::config(format!(
                "hot_slots + cold_slots must equal worker_count ({} + {} != {})",
                self.hot_slots, self.cold_slots, self.worker_count
            )));
        }
        if self.hot_slots <= self.cold_slots {
            return Err(Error::config(format!(
                "hot_slots must exceed cold_slots ({} <= {})",
                self.hot_slots, self.cold_slots
            )));
        }
        if self.repartition_interval == 0 {
            return Err(Error::config("repartition_interval must be at least 1"));
        }
        if self.cold_cadence == 0 {
            return Err(Error::config("cold_cadence must be at least 1"));
        }
        if self.interval_growth < 1.0 {
            return Err(Error::config(format!(
                "interval_growth must be at least 1, got {}",
                self.interval_growth
            )));
        }
        if self.t2.is_nan() || self.t2 <= 0.0 {
            return Err(Error::config(format!(
                "t2 must be positive, got {}",
                self.t2
            )));
        }
        Ok(())
    }
}

/// Default hot/cold slot split: 70% of workers go to hot partitions,
/// rounded up, which keeps the hot majority for any worker count.
pub fn default_slot_split(worker_count: usize) -> (usize, usize) {
    let hot = ((0.7 * worker_count as f64).ceil() as usize).clamp(1, worker_count);
    (hot, worker_count - hot)
}

/// Default iteration cap: generous headroom over the expected convergence
/// horizon for desk-scale graphs.
pub fn default_max_iterations(vertex_count: usize) -> u64 {
    10 * (vertex_count.max(1) as f64).log2().ceil() as u64 + 100
}

/// Which phase of the run produced a plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanPhase {
    Initial,
    Steady,
    ColdOnly,
}

/// Partitions selected for one iteration.
#[derive(Debug, Clone)]
pub struct IterationPlan {
    pub iteration: u64,
    pub selected: Vec<u32>,
    pub repartition_due: bool,
    pub phase: PlanPhase,
}

/// Ranking perturbations for schedule-order independence experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchedulePerturbation {
    /// Priority order: descending state degree.
    None,
    /// Ascending state degree among active partitions.
    Reverse,
    /// Pseudo-random ranking re-drawn each iteration from the seed.
    Shuffle(u64),
}

/// Which repartition variant a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RepartitionMode {
    /// Barrier for monotone-cooling algorithms, tag table otherwise.
    Auto,
    General,
    Barrier,
}

/// Selects the partitions to service at `iteration`.
///
/// Iteration 0: all dead partitions plus the single highest-priority hot
/// partition. Afterwards, only partitions with nonzero state degree are
/// candidates; ties break by ascending partition id.
pub fn plan_iteration(
    iteration: u64,
    ps: &PartitionSet,
    pst: &PartitionStateTable,
    cfg: &SchedulerConfig,
) -> IterationPlan {
    plan_iteration_perturbed(iteration, ps, pst, cfg, SchedulePerturbation::None)
}

/// [`plan_iteration`] with a perturbed priority ranking.
pub fn plan_iteration_perturbed(
    iteration: u64,
    ps: &PartitionSet,
    pst: &PartitionStateTable,
    cfg: &SchedulerConfig,
    perturbation: SchedulePerturbation,
) -> IterationPlan {
    let rank_key = |id: u32| -> (f64, u32) {
        match perturbation {
            SchedulePerturbation::None => (-pst.psd(id), id),
            SchedulePerturbation::Reverse => (pst.psd(id), id),
            SchedulePerturbation::Shuffle(seed) => {
                (splitmix64(seed ^ iteration.wrapping_mul(0x9e37_79b9) ^ id as u64) as f64, id)
            }
        }
    };
    let top = |ids: &mut Vec<u32>, k: usize| {
        ids.sort_by(|&a, &b| {
            let (ka, ta) = rank_key(a);
            let (kb, tb) = rank_key(b);
            ka.total_cmp(&kb).then(ta.cmp(&tb))
        });
        ids.truncate(k);
    };

    if iteration == 0 {
        let mut selected: Vec<u32> = ps
            .partitions()
            .iter()
            .filter(|p| p.kind() == PartitionKind::Dead)
            .map(|p| p.id())
            .collect();
        let mut hot: Vec<u32> = ps
            .partitions()
            .iter()
            .filter(|p| p.kind() == PartitionKind::Hot)
            .map(|p| p.id())
            .collect();
        top(&mut hot, 1);
        selected.extend(hot);
        return IterationPlan {
            iteration,
            selected,
            repartition_due: false,
            phase: PlanPhase::Initial,
        };
    }

    let active = |kind: PartitionKind| -> Vec<u32> {
        ps.partitions()
            .iter()
            .filter(|p| p.kind() == kind && pst.psd(p.id()) > 0.0)
            .map(|p| p.id())
            .collect()
    };
    let mut hot = active(PartitionKind::Hot);
    let mut cold = active(PartitionKind::Cold);

    let (selected, phase) = if !hot.is_empty() {
        if iteration.is_multiple_of(cfg.cold_cadence) {
            top(&mut hot, cfg.hot_slots);
            top(&mut cold, cfg.cold_slots);
            hot.extend(cold);
            (hot, PlanPhase::Steady)
        } else {
            top(&mut hot, cfg.worker_count);
            (hot, PlanPhase::Steady)
        }
    } else {
        top(&mut cold, cfg.worker_count);
        (cold, PlanPhase::ColdOnly)
    };

    IterationPlan {
        iteration,
        selected,
        repartition_due: false,
        phase,
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// True when `iteration - last` has reached the current interval. The caller
/// then grows the interval by `growth`.
pub fn repartition_due(iteration: u64, last: u64, interval: u64, growth: f64) -> Result<bool> {
    if growth < 1.0 {
        return Err(Error::config(format!(
            "repartition interval growth must be at least 1, got {growth}"
        )));
    }
    if interval == 0 {
        return Err(Error::config("repartition interval must be at least 1"));
    }
    Ok(iteration - last >= interval)
}

/// Mutable repartition cadence state: interval grows geometrically after
/// every event, so rescheduling becomes rarer as the run ages.
#[derive(Debug, Clone)]
pub struct RepartitionCadence {
    last: u64,
    interval: u64,
    growth: f64,
}

impl RepartitionCadence {
    pub fn new(interval: u64, growth: f64) -> RepartitionCadence {
        RepartitionCadence {
            last: 0,
            interval,
            growth,
        }
    }

    /// Checks whether a repartition is due at `iteration`, advancing the
    /// cadence when it is.
    pub fn check(&mut self, iteration: u64) -> Result<bool> {
        let due = repartition_due(iteration, self.last, self.interval, self.growth)?;
        if due {
            self.last = iteration;
            self.interval = ((self.interval as f64 * self.growth).ceil() as u64).max(1);
        }
        Ok(due)
    }

    pub fn interval(&self) -> u64 {
        self.interval
    }
}
