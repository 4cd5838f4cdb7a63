//! Exhaustive exploration of small updater/reader interleavings.
//!
//! An updater script runs against a real [`DescriptorTable`] and
//! [`LevelArray`] one shared-memory action at a time, while a single reader
//! performs a fixed sequence of reads through [`ReadCursor`]. Every
//! interleaving of the two is executed, its history recorded with the step
//! index as the clock, and the history checked by exhaustive linearization.

use std::collections::BTreeMap;

use super::history::{check_history, BatchRecord, MoverRecord, ReadMode, ReadRecord};
use super::linearize::linearize;
use crate::descriptor::{DescriptorTable, ReadCursor};
use crate::engine::LevelArray;
use crate::graph::{Edge, VertexId};
use crate::params::LevelParams;

#[derive(Debug, Clone)]
pub enum UpdStep {
    Begin(Vec<Edge>),
    Mark { v: VertexId, triggers: Vec<VertexId> },
    SetLevel { v: VertexId, level: u32 },
    Merge(VertexId, VertexId),
    UnmarkRoots,
    UnmarkRest,
    /// Both phases as one step. Only faithful when every marked vertex is a
    /// root, since phase two then clears nothing readers can observe.
    UnmarkAll,
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub n: usize,
    pub script: Vec<UpdStep>,
    /// Vertices read one after another by the reader.
    pub reads: Vec<VertexId>,
}

#[derive(Debug, Clone, Default)]
pub struct Exploration {
    pub schedules: u64,
    pub failures: u64,
    /// First few failing schedules, described.
    pub examples: Vec<String>,
    pub max_retries: u32,
    pub max_ops: usize,
}

#[derive(Clone)]
struct OpenBatch {
    id: u64,
    begin: u64,
    old: BTreeMap<VertexId, u32>,
    roots: BTreeMap<VertexId, VertexId>,
}

#[derive(Clone)]
struct Sim {
    table: DescriptorTable,
    levels: LevelArray,
    clock: u64,
    pc: usize,
    open: Option<OpenBatch>,
    batches: Vec<BatchRecord>,
    cursor: Option<(ReadCursor, u64)>,
    next_read: usize,
    reads: Vec<ReadRecord>,
    retries: u32,
    trace: Vec<char>,
}

impl Sim {
    fn update(&mut self, step: &UpdStep) {
        self.clock += 1;
        self.trace.push('u');
        match step {
            UpdStep::Begin(edges) => {
                let id = self.table.begin_batch(edges).expect("script begins after unmarking");
                self.open = Some(OpenBatch { id, begin: self.clock, old: BTreeMap::new(), roots: BTreeMap::new() });
            }
            UpdStep::Mark { v, triggers } => {
                let old = self.levels.get(*v);
                self.table.mark(*v, old, triggers).expect("script marks once");
                self.open.as_mut().expect("mark inside a batch").old.insert(*v, old);
            }
            UpdStep::SetLevel { v, level } => self.levels.set(*v, *level),
            UpdStep::Merge(a, b) => self.table.merge(*a, *b).expect("script merges marked vertices"),
            UpdStep::UnmarkRoots => {
                let open = self.open.as_mut().expect("unmark inside a batch");
                for &v in open.old.keys() {
                    open.roots.insert(v, self.table.peek_root(v).expect("marked"));
                }
                self.table.unmark_roots();
            }
            UpdStep::UnmarkRest | UpdStep::UnmarkAll => {
                if matches!(step, UpdStep::UnmarkAll) {
                    let open = self.open.as_mut().expect("unmark inside a batch");
                    for &v in open.old.keys() {
                        open.roots.insert(v, self.table.peek_root(v).expect("marked"));
                    }
                    assert!(open.roots.iter().all(|(v, r)| v == r), "single-step unmark needs all roots");
                    self.table.unmark_roots();
                }
                self.table.unmark_rest();
                let open = self.open.take().expect("unmark inside a batch");
                let movers = open
                    .old
                    .iter()
                    .filter_map(|(&v, &old)| {
                        let new = self.levels.get(v);
                        (new != old).then(|| MoverRecord { vertex: v, old_level: old, new_level: new, dag_root: open.roots[&v] })
                    })
                    .collect();
                self.batches.push(BatchRecord { id: open.id, begin_ts: open.begin, end_ts: self.clock, movers });
            }
        }
    }

    fn read_step(&mut self, s: &Scenario, params: &LevelParams) {
        self.clock += 1;
        self.trace.push('r');
        let (cursor, start) =
            self.cursor.get_or_insert_with(|| (ReadCursor::new(s.reads[self.next_read]), self.clock));
        if let Some(r) = cursor.step(&self.table, &self.levels, params) {
            self.reads.push(ReadRecord {
                vertex: cursor.vertex(),
                invoke_ts: *start,
                return_ts: self.clock,
                level: r.level,
                mode: ReadMode::Cplds,
            });
            self.retries = self.retries.max(r.retries);
            self.cursor = None;
            self.next_read += 1;
        }
    }
}

/// Runs every interleaving of the scenario's updater script with its reads.
pub fn explore(s: &Scenario) -> Exploration {
    let params = LevelParams::new(s.n.max(2), 0.2, 9.0).expect("valid params");
    let sim = Sim {
        table: DescriptorTable::new(s.n),
        levels: LevelArray::new(s.n),
        clock: 0,
        pc: 0,
        open: None,
        batches: Vec::new(),
        cursor: None,
        next_read: 0,
        reads: Vec::new(),
        retries: 0,
        trace: Vec::new(),
    };
    let mut out = Exploration::default();
    dfs(s, &params, sim, &mut out);
    out
}

fn dfs(s: &Scenario, params: &LevelParams, sim: Sim, out: &mut Exploration) {
    let can_update = sim.pc < s.script.len();
    let can_read = sim.next_read < s.reads.len();
    if !can_update && !can_read {
        verify(s, sim, out);
        return;
    }
    if can_update && can_read {
        let mut a = sim.clone();
        a.update(&s.script[a.pc]);
        a.pc += 1;
        dfs(s, params, a, out);
        let mut b = sim;
        b.read_step(s, params);
        dfs(s, params, b, out);
    } else if can_update {
        let mut a = sim;
        a.update(&s.script[a.pc]);
        a.pc += 1;
        dfs(s, params, a, out);
    } else {
        let mut b = sim;
        b.read_step(s, params);
        dfs(s, params, b, out);
    }
}

fn verify(s: &Scenario, sim: Sim, out: &mut Exploration) {
    out.schedules += 1;
    out.max_retries = out.max_retries.max(sim.retries);
    let ops = sim.reads.len() + sim.batches.iter().map(|b| {
        let mut r: Vec<_> = b.movers.iter().map(|m| m.dag_root).collect();
        r.sort_unstable();
        r.dedup();
        r.len()
    }).sum::<usize>();
    out.max_ops = out.max_ops.max(ops);
    let initial = vec![0; s.n];
    let problem = match linearize(&initial, &sim.batches, &sim.reads) {
        Ok(Some(_)) => match check_history(&sim.batches, &sim.reads) {
            Ok(v) if v.is_empty() => None,
            Ok(v) => Some(format!("checker: {}", v[0])),
            Err(e) => Some(format!("checker: {e}")),
        },
        Ok(None) => Some("no linearization".to_string()),
        Err(e) => Some(format!("search: {e}")),
    };
    if let Some(p) = problem {
        out.failures += 1;
        if out.examples.len() < 5 {
            let trace: String = sim.trace.iter().collect();
            out.examples.push(format!("{}: {p}; schedule {trace}; reads {:?}", s.name, sim.reads));
        }
    }
}

/// The scenarios used by the test suite.
pub fn standard_scenarios() -> Vec<Scenario> {
    use UpdStep::*;
    vec![
        Scenario {
            name: "chain",
            n: 3,
            script: vec![
                Begin(vec![(0, 1)]),
                Mark { v: 0, triggers: vec![] },
                SetLevel { v: 0, level: 2 },
                Mark { v: 1, triggers: vec![0] },
                SetLevel { v: 1, level: 2 },
                Mark { v: 2, triggers: vec![1] },
                SetLevel { v: 2, level: 1 },
                UnmarkRoots,
                UnmarkRest,
            ],
            reads: vec![2, 0],
        },
        Scenario {
            name: "union-during-batch",
            n: 4,
            script: vec![
                Begin(vec![]),
                Mark { v: 2, triggers: vec![] },
                Mark { v: 1, triggers: vec![] },
                Mark { v: 3, triggers: vec![2] },
                SetLevel { v: 3, level: 2 },
                Merge(2, 1),
                SetLevel { v: 1, level: 1 },
                UnmarkRoots,
                UnmarkRest,
            ],
            reads: vec![3, 1],
        },
        Scenario {
            name: "back-to-back",
            n: 2,
            script: vec![
                Begin(vec![]),
                Mark { v: 0, triggers: vec![] },
                SetLevel { v: 0, level: 1 },
                UnmarkAll,
                Begin(vec![(0, 1)]),
                Mark { v: 1, triggers: vec![] },
                SetLevel { v: 1, level: 1 },
                UnmarkAll,
            ],
            reads: vec![0, 1],
        },
        Scenario {
            name: "inter-phase-window",
            n: 2,
            script: vec![
                Begin(vec![(0, 1)]),
                Mark { v: 0, triggers: vec![] },
                Mark { v: 1, triggers: vec![] },
                SetLevel { v: 0, level: 3 },
                SetLevel { v: 1, level: 3 },
                UnmarkRoots,
                UnmarkRest,
            ],
            reads: vec![1, 0, 1],
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_scenario_all_schedules_pass() {
        let s = Scenario {
            name: "tiny",
            n: 2,
            script: vec![
                UpdStep::Begin(vec![]),
                UpdStep::Mark { v: 0, triggers: vec![] },
                UpdStep::SetLevel { v: 0, level: 1 },
                UpdStep::UnmarkRoots,
                UpdStep::UnmarkRest,
            ],
            reads: vec![0],
        };
        let e = explore(&s);
        assert!(e.schedules > 10);
        assert_eq!(e.failures, 0, "{:?}", e.examples);
    }

    #[test]
    fn unsynchronized_script_is_caught() {
        // level written with no descriptor: an intermediate value leaks
        let s = Scenario {
            name: "broken",
            n: 1,
            script: vec![
                UpdStep::Begin(vec![]),
                UpdStep::Mark { v: 0, triggers: vec![] },
                UpdStep::UnmarkRoots,
                UpdStep::UnmarkRest,
                UpdStep::SetLevel { v: 0, level: 1 },
            ],
            reads: vec![0],
        };
        let e = explore(&s);
        assert!(e.failures > 0);
    }
}
