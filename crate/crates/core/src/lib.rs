//! Approximate k-core decomposition over a dynamic graph. Edge updates are
//! applied in parallel batches while readers obtain linearizable coreness
//! estimates without locks.

pub mod bench;
pub mod clock;
pub mod cplds;
pub mod descriptor;
pub mod engine;
pub mod graph;
pub mod oracle;
pub mod params;

pub use cplds::{BatchOutcome, Cplds, Reader};
pub use descriptor::{ConcurrencyError, DescriptorTable, ReadResult};
pub use engine::{LevelArray, LevelState, NoHooks, PassReport, UpdateHooks};
pub use graph::{BatchKind, EdgeBatch, Graph, GraphError, VertexId};
pub use params::{LevelParams, ParamsError};
