//! Exhaustive linearization search for small histories.
//!
//! Operations are reads plus one commit per dependency DAG per batch. A
//! commit moves every vertex of its DAG to its new level at once and may take
//! effect anywhere inside its batch's interval.

use std::collections::{BTreeMap, HashSet};

use super::history::{BatchRecord, HistoryError, ReadRecord};
use crate::graph::VertexId;

/// Largest history this search accepts.
pub const MAX_OPS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Read { index: usize },
    Commit { batch: u64, root: VertexId },
}

struct Item {
    op: Op,
    start: u64,
    end: u64,
    /// Level changes for a commit; the expected observation for a read.
    sets: Vec<(VertexId, u32)>,
    read: Option<(VertexId, u32)>,
}

/// Returns a legal sequential order of the history's operations, or `None`
/// if no order respects both real time and the sequential level semantics.
pub fn linearize(
    initial: &[u32],
    batches: &[BatchRecord],
    reads: &[ReadRecord],
) -> Result<Option<Vec<Op>>, HistoryError> {
    let mut items = Vec::new();
    for b in batches {
        let mut dags: BTreeMap<VertexId, Vec<(VertexId, u32)>> = BTreeMap::new();
        for m in &b.movers {
            dags.entry(m.dag_root).or_default().push((m.vertex, m.new_level));
        }
        for (root, sets) in dags {
            items.push(Item { op: Op::Commit { batch: b.id, root }, start: b.begin_ts, end: b.end_ts, sets, read: None });
        }
    }
    for (i, r) in reads.iter().enumerate() {
        items.push(Item {
            op: Op::Read { index: i },
            start: r.invoke_ts,
            end: r.return_ts,
            sets: Vec::new(),
            read: Some((r.vertex, r.level)),
        });
    }
    if items.len() > MAX_OPS {
        return Err(HistoryError::Malformed(format!("{} operations exceed the search limit {MAX_OPS}", items.len())));
    }
    for it in &items {
        if it.start >= it.end {
            return Err(HistoryError::Malformed(format!("{:?} has an empty interval", it.op)));
        }
    }
    // preds[i]: operations that finished before i started
    let preds: Vec<u32> = items
        .iter()
        .map(|a| {
            items.iter().enumerate().filter(|(_, b)| b.end < a.start).fold(0u32, |m, (j, _)| m | 1 << j)
        })
        .collect();

    struct Search<'a> {
        items: &'a [Item],
        preds: &'a [u32],
        levels: Vec<u32>,
        order: Vec<usize>,
        failed: HashSet<u32>,
    }

    impl Search<'_> {
        fn level(&self, v: VertexId) -> u32 {
            self.levels.get(v as usize).copied().unwrap_or(0)
        }

        fn dfs(&mut self, done: u32) -> bool {
            let full = (1u32 << self.items.len()) - 1;
            if done == full {
                return true;
            }
            if self.failed.contains(&done) {
                return false;
            }
            for i in 0..self.items.len() {
                if done >> i & 1 == 1 || self.preds[i] & !done != 0 {
                    continue;
                }
                let it = &self.items[i];
                if let Some((v, l)) = it.read {
                    if self.level(v) != l {
                        continue;
                    }
                    self.order.push(i);
                    if self.dfs(done | 1 << i) {
                        return true;
                    }
                    self.order.pop();
                } else {
                    let saved: Vec<(VertexId, u32)> = it.sets.iter().map(|&(v, _)| (v, self.level(v))).collect();
                    for &(v, l) in &it.sets {
                        if self.levels.len() <= v as usize {
                            self.levels.resize(v as usize + 1, 0);
                        }
                        self.levels[v as usize] = l;
                    }
                    self.order.push(i);
                    if self.dfs(done | 1 << i) {
                        return true;
                    }
                    self.order.pop();
                    for (v, l) in saved {
                        self.levels[v as usize] = l;
                    }
                }
            }
            self.failed.insert(done);
            false
        }
    }

    let mut s = Search { items: &items, preds: &preds, levels: initial.to_vec(), order: Vec::new(), failed: HashSet::new() };
    if s.dfs(0) {
        Ok(Some(s.order.iter().map(|&i| items[i].op.clone()).collect()))
    } else {
        Ok(None)
    }
}

#[cfg(test)]
mod tests {
    use super::super::history::{MoverRecord, ReadMode};
    use super::*;

    fn rd(vertex: u32, inv: u64, ret: u64, level: u32) -> ReadRecord {
        ReadRecord { vertex, invoke_ts: inv, return_ts: ret, level, mode: ReadMode::Cplds }
    }

    fn batch(roots: [u32; 2]) -> Vec<BatchRecord> {
        vec![BatchRecord {
            id: 1,
            begin_ts: 10,
            end_ts: 20,
            movers: vec![
                MoverRecord { vertex: 0, old_level: 0, new_level: 3, dag_root: roots[0] },
                MoverRecord { vertex: 1, old_level: 0, new_level: 3, dag_root: roots[1] },
            ],
        }]
    }

    #[test]
    fn sequential_history() {
        let reads = [rd(0, 1, 2, 0), rd(0, 21, 22, 3)];
        let order = linearize(&[0, 0], &batch([0, 0]), &reads).unwrap().unwrap();
        assert_eq!(order, vec![Op::Read { index: 0 }, Op::Commit { batch: 1, root: 0 }, Op::Read { index: 1 }]);
    }

    #[test]
    fn stale_after_batch_rejected() {
        assert!(linearize(&[0, 0], &batch([0, 0]), &[rd(0, 21, 22, 0)]).unwrap().is_none());
    }

    #[test]
    fn inversion_depends_on_dags() {
        let reads = [rd(0, 11, 12, 3), rd(1, 13, 14, 0)];
        assert!(linearize(&[0, 0], &batch([0, 0]), &reads).unwrap().is_none());
        assert!(linearize(&[0, 0], &batch([0, 1]), &reads).unwrap().is_some());
    }

    #[test]
    fn limit() {
        let reads: Vec<_> = (0..30).map(|i| rd(0, 2 * i + 1, 2 * i + 2, 0)).collect();
        assert!(linearize(&[0], &[], &reads).is_err());
    }
}
