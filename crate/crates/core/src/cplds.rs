//! The assembled structure: graph, levels and descriptors behind one update
//! entry point, plus cloneable reader handles.

use std::sync::Arc;

use thiserror::Error;

use crate::clock::now_ns;
use crate::descriptor::{ConcurrencyError, DescriptorTable, ReadResult};
use crate::engine::{EngineError, LevelArray, LevelState, PassReport, UpdateHooks};
use crate::graph::{BatchKind, EdgeBatch, Graph, GraphError, VertexId};
use crate::oracle::history::{BatchRecord, MoverRecord};
use crate::params::{LevelParams, ParamsError};

#[derive(Debug, Error)]
pub enum CpldsError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Concurrency(#[from] ConcurrencyError),
    #[error("thread pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct BatchOutcome {
    pub kind: BatchKind,
    /// Edges actually applied after normalization.
    pub applied: usize,
    pub dropped: usize,
    pub report: PassReport,
    pub record: BatchRecord,
}

/// Forwards to the descriptor table and reports each finished level.
struct Observed<'a> {
    table: &'a DescriptorTable,
    on_level: &'a (dyn Fn(u32) + Sync),
}

impl UpdateHooks for Observed<'_> {
    fn mark(&self, v: VertexId, old_level: u32, triggers: &[VertexId]) {
        UpdateHooks::mark(self.table, v, old_level, triggers)
    }
    fn merge(&self, v: VertexId, triggers: &[VertexId]) {
        UpdateHooks::merge(self.table, v, triggers)
    }
    fn level_processed(&self, level: u32) {
        (self.on_level)(level)
    }
}

struct Plain<'a> {
    on_level: &'a (dyn Fn(u32) + Sync),
}

impl UpdateHooks for Plain<'_> {
    fn tracks_dependencies(&self) -> bool {
        false
    }
    fn mark(&self, _: VertexId, _: u32, _: &[VertexId]) {}
    fn merge(&self, _: VertexId, _: &[VertexId]) {}
    fn level_processed(&self, level: u32) {
        (self.on_level)(level)
    }
}

pub struct Cplds {
    graph: Graph,
    state: LevelState,
    table: Arc<DescriptorTable>,
    pool: rayon::ThreadPool,
    track: bool,
    batches: u64,
}

impl Cplds {
    /// `track` selects whether updates maintain descriptors. Without it the
    /// structure only supports unsynchronized reads.
    pub fn new(params: LevelParams, workers: usize, track: bool) -> Result<Self, CpldsError> {
        let n = params.n();
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| CpldsError::Pool(e.to_string()))?;
        Ok(Self {
            graph: Graph::new(n),
            state: LevelState::new(params),
            table: Arc::new(DescriptorTable::new(n)),
            pool,
            track,
            batches: 0,
        })
    }

    pub fn with_defaults(n: usize) -> Result<Self, CpldsError> {
        Self::new(LevelParams::new(n, 0.2, 9.0)?, 1, true)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn state(&self) -> &LevelState {
        &self.state
    }

    pub fn params(&self) -> &LevelParams {
        self.state.params()
    }

    pub fn table(&self) -> &Arc<DescriptorTable> {
        &self.table
    }

    pub fn levels(&self) -> Vec<u32> {
        self.state.levels().snapshot()
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.state.estimates()
    }

    pub fn batches_applied(&self) -> u64 {
        self.batches
    }

    pub fn reader(&self) -> Reader {
        Reader {
            levels: Arc::clone(self.state.levels()),
            table: Arc::clone(&self.table),
            params: self.params().clone(),
        }
    }

    pub fn apply(&mut self, raw: &EdgeBatch) -> Result<BatchOutcome, CpldsError> {
        self.apply_observed(raw, &|_| {})
    }

    /// Like [`apply`](Self::apply), calling `on_level` on an update worker
    /// after each level of the pass. Blocking inside it pauses the batch with
    /// its descriptors still marked.
    pub fn apply_observed(
        &mut self,
        raw: &EdgeBatch,
        on_level: &(dyn Fn(u32) + Sync),
    ) -> Result<BatchOutcome, CpldsError> {
        let (batch, dropped) = self.graph.normalize_batch(raw);
        let begin_ts = now_ns();
        let id = if self.track { self.table.begin_batch(&batch.edges)? } else { self.batches + 1 };
        if let Err(e) = self.graph.apply_batch(&batch) {
            if self.track {
                self.table.unmark_all();
            }
            return Err(e.into());
        }
        let (graph, state, table) = (&self.graph, &mut self.state, &*self.table);
        let report = if self.track {
            let hooks = Observed { table, on_level };
            self.pool.install(|| state.apply(graph, &batch, &hooks))?
        } else {
            let hooks = Plain { on_level };
            self.pool.install(|| state.apply(graph, &batch, &hooks))?
        };
        let movers = if self.track {
            table.seal();
            report
                .moves
                .iter()
                .map(|m| MoverRecord {
                    vertex: m.vertex,
                    old_level: m.old_level,
                    new_level: m.new_level,
                    dag_root: table.find(m.vertex).expect("every mover is marked"),
                })
                .collect()
        } else {
            report
                .moves
                .iter()
                .map(|m| MoverRecord {
                    vertex: m.vertex,
                    old_level: m.old_level,
                    new_level: m.new_level,
                    dag_root: m.vertex,
                })
                .collect()
        };
        if self.track {
            self.pool.install(|| table.unmark_all());
        }
        let end_ts = now_ns().max(begin_ts + 1);
        self.batches += 1;
        Ok(BatchOutcome {
            kind: batch.kind,
            applied: batch.len(),
            dropped,
            report,
            record: BatchRecord { id, begin_ts, end_ts, movers },
        })
    }

    /// Overwrites one level without running a pass. Fault injection only.
    #[doc(hidden)]
    pub fn set_level(&mut self, v: VertexId, level: u32) {
        self.state.force_level(&self.graph, v, level);
    }
}

/// Cheap, cloneable read handle usable from any thread.
#[derive(Clone)]
pub struct Reader {
    levels: Arc<LevelArray>,
    table: Arc<DescriptorTable>,
    params: LevelParams,
}

impl Reader {
    /// Linearizable read.
    #[inline]
    pub fn read(&self, v: VertexId) -> ReadResult {
        self.table.read(&self.levels, &self.params, v)
    }

    /// Unsynchronized read of the live level.
    #[inline]
    pub fn read_live(&self, v: VertexId) -> ReadResult {
        let level = self.levels.get(v);
        ReadResult { level, estimate: self.params.estimate(level), retries: 0 }
    }

    pub fn batch_number(&self) -> u64 {
        self.table.batch_number()
    }

    pub fn num_vertices(&self) -> usize {
        self.levels.len()
    }

    pub fn params(&self) -> &LevelParams {
        &self.params
    }

    pub fn table(&self) -> &DescriptorTable {
        &self.table
    }

    pub fn levels(&self) -> &LevelArray {
        &self.levels
    }
}
