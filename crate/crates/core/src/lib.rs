//! Structure-aware graph-processing engine.
//!
//! Partitions vertices into hot, cold, and dead cache-block-sized blocks by
//! a degree-derived activity score, repartitions dynamically as vertices
//! converge, and each iteration schedules the partitions with the highest
//! state degree. Ships PageRank (accumulative/residual form), SSSP,
//! connected components, and BFS, plus a static synchronous baseline for
//! comparison runs.

pub mod algorithms;
pub mod engine;
pub mod error;
pub mod gen;
pub mod graph;
pub mod metrics;
pub mod partition;
pub mod scheduler;
pub mod state;

pub use algorithms::{Algorithm, AlgorithmSpec};
pub use engine::{run, RunConfig, RunOutcome, RunStatus};
pub use error::{Error, Result};
pub use graph::{DegreeTable, Graph, VertexId};
pub use metrics::{compare, run_baseline, ComparisonReport, RunMetrics};
pub use partition::{
    active_degree, compute_active_degrees, initial_partition, sample_threshold,
    ActivityThreshold, Partition, PartitionKind, PartitionSet,
};
pub use scheduler::{
    plan_iteration, repartition_due, RepartitionMode, SchedulePerturbation, SchedulerConfig,
};
pub use state::{
    check_convergence, sd_contribution_cc, sd_contribution_pagerank, sd_contribution_sssp,
    PartitionStateTable, StateDegreeTable, ValueTables,
};
