//! Experiment driver: workloads, the three read modes, and latency and error
//! statistics.

pub mod run;
pub mod stats;
pub mod workload;

pub use run::{run, BenchError, MetricsReport, RunConfig, RunOutput, CSV_HEADER};
pub use stats::{percentile, StatsError};
pub use workload::{adversarial_climb, climb_mix, gen_workload, gnm, gnp, WorkloadError, WorkloadPlan};
