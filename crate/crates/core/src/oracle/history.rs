//! Recorded read/batch histories, their text format, and the consistency
//! checker.
//!
//! File format, one record per line, tab separated, `#` starts a comment:
//!
//! ```text
//! R  vertex  invoke_ts  return_ts  level  mode
//! B  id      begin_ts   end_ts     vertex:old:new:root,...
//! ```

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::graph::VertexId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReadMode {
    Cplds,
    Sync,
    NonSync,
}

impl ReadMode {
    pub const ALL: [ReadMode; 3] = [ReadMode::Cplds, ReadMode::Sync, ReadMode::NonSync];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Cplds => "cplds",
            Self::Sync => "sync",
            Self::NonSync => "nonsync",
        }
    }
}

impl fmt::Display for ReadMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReadMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "cplds" => Ok(Self::Cplds),
            "sync" => Ok(Self::Sync),
            "nonsync" => Ok(Self::NonSync),
            _ => Err(format!("unknown read mode {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReadRecord {
    pub vertex: VertexId,
    pub invoke_ts: u64,
    pub return_ts: u64,
    pub level: u32,
    pub mode: ReadMode,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoverRecord {
    pub vertex: VertexId,
    pub old_level: u32,
    pub new_level: u32,
    pub dag_root: VertexId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchRecord {
    pub id: u64,
    pub begin_ts: u64,
    pub end_ts: u64,
    pub movers: Vec<MoverRecord>,
}

#[derive(Debug, Error)]
pub enum HistoryError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("malformed history: {0}")]
    Malformed(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HistoryViolation {
    /// The returned level is not the vertex's level at any batch boundary the
    /// read could have observed.
    Boundary { read: usize, vertex: VertexId, level: u32, candidates: Vec<u32> },
    /// `old_read` returned a pre-batch level after `new_read` had returned a
    /// post-batch level of a vertex in the same dependency DAG.
    Inversion { batch: u64, root: VertexId, new_read: usize, old_read: usize },
}

impl fmt::Display for HistoryViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Boundary { read, vertex, level, candidates } => write!(
                f,
                "read #{read} of vertex {vertex} returned level {level}; boundary levels were {candidates:?}"
            ),
            Self::Inversion { batch, root, new_read, old_read } => write!(
                f,
                "batch {batch}, DAG rooted at {root}: read #{old_read} saw an old level after read #{new_read} saw a new one"
            ),
        }
    }
}

impl HistoryViolation {
    pub fn is_boundary(&self) -> bool {
        matches!(self, Self::Boundary { .. })
    }
}

/// Per-vertex level as a function of the number of completed batches.
struct Timeline {
    /// `(position, level)` change points per vertex, ascending by position.
    changes: HashMap<VertexId, Vec<(usize, u32)>>,
}

impl Timeline {
    fn build(batches: &[BatchRecord]) -> Result<Self, HistoryError> {
        let mut changes: HashMap<VertexId, Vec<(usize, u32)>> = HashMap::new();
        for (i, b) in batches.iter().enumerate() {
            for m in &b.movers {
                if m.old_level == m.new_level {
                    return Err(HistoryError::Malformed(format!(
                        "batch {} records vertex {} without a level change",
                        b.id, m.vertex
                    )));
                }
                let list = changes.entry(m.vertex).or_default();
                let before = list.last().map_or(0, |&(_, l)| l);
                if before != m.old_level {
                    return Err(HistoryError::Malformed(format!(
                        "batch {} moves vertex {} from level {} but it was at {}",
                        b.id, m.vertex, m.old_level, before
                    )));
                }
                if list.last().is_some_and(|&(p, _)| p == i + 1) {
                    return Err(HistoryError::Malformed(format!(
                        "batch {} records vertex {} twice",
                        b.id, m.vertex
                    )));
                }
                list.push((i + 1, m.new_level));
            }
        }
        Ok(Self { changes })
    }

    fn level(&self, v: VertexId, p: usize) -> u32 {
        match self.changes.get(&v) {
            None => 0,
            Some(list) => {
                let k = list.partition_point(|&(q, _)| q <= p);
                if k == 0 {
                    0
                } else {
                    list[k - 1].1
                }
            }
        }
    }
}

fn validate(batches: &[BatchRecord], reads: &[ReadRecord]) -> Result<(), HistoryError> {
    for (i, b) in batches.iter().enumerate() {
        if b.begin_ts >= b.end_ts {
            return Err(HistoryError::Malformed(format!("batch {} ends before it begins", b.id)));
        }
        if i > 0 {
            let prev = &batches[i - 1];
            if b.id <= prev.id {
                return Err(HistoryError::Malformed(format!("batch ids not increasing at {}", b.id)));
            }
            if b.begin_ts < prev.end_ts {
                return Err(HistoryError::Malformed(format!("batch {} overlaps batch {}", b.id, prev.id)));
            }
        }
    }
    for (i, r) in reads.iter().enumerate() {
        if r.invoke_ts >= r.return_ts {
            return Err(HistoryError::Malformed(format!("read #{i} returns before it is invoked")));
        }
    }
    Ok(())
}

/// Checks every read against the batch boundaries it overlaps, and every
/// pair of reads on one dependency DAG for new-then-old inversions. Batches
/// must be in execution order; every vertex starts at level 0.
pub fn check_history(batches: &[BatchRecord], reads: &[ReadRecord]) -> Result<Vec<HistoryViolation>, HistoryError> {
    validate(batches, reads)?;
    let timeline = Timeline::build(batches)?;
    let nb = batches.len();
    // State p (after p batches) is observable from the start of batch p to the
    // end of batch p + 1.
    let begins: Vec<u64> = batches.iter().map(|b| b.begin_ts).collect();
    let ends: Vec<u64> = batches.iter().map(|b| b.end_ts).collect();
    let roots: Vec<HashMap<VertexId, VertexId>> =
        batches.iter().map(|b| b.movers.iter().map(|m| (m.vertex, m.dag_root)).collect()).collect();

    #[derive(Default)]
    struct Agg {
        max_old_inv: Option<(u64, usize)>,
        min_new_ret: Option<(u64, usize)>,
    }
    let mut aggs: HashMap<(usize, VertexId), Agg> = HashMap::new();
    let mut out = Vec::new();

    for (idx, r) in reads.iter().enumerate() {
        // smallest p with end of batch p+1 >= invoke, i.e. batches ending
        // before the read starts are certainly visible
        let p_lo = ends.partition_point(|&e| e < r.invoke_ts);
        // largest p with begin of batch p <= return
        let p_hi = begins.partition_point(|&b| b <= r.return_ts).min(nb);
        let mut matches = Vec::new();
        let mut candidates = Vec::new();
        for p in p_lo..=p_hi {
            let l = timeline.level(r.vertex, p);
            if l == r.level {
                matches.push(p);
            }
            if candidates.last() != Some(&l) {
                candidates.push(l);
            }
        }
        if matches.is_empty() {
            out.push(HistoryViolation::Boundary { read: idx, vertex: r.vertex, level: r.level, candidates });
            continue;
        }
        // Batch i (1-based) separates positions i-1 and i.
        for i in p_lo + 1..=p_hi {
            let Some(&root) = roots[i - 1].get(&r.vertex) else { continue };
            let all_old = matches.iter().all(|&p| p < i);
            let all_new = matches.iter().all(|&p| p >= i);
            let agg = aggs.entry((i, root)).or_default();
            if all_old && agg.max_old_inv.is_none_or(|(t, _)| r.invoke_ts > t) {
                agg.max_old_inv = Some((r.invoke_ts, idx));
            }
            if all_new && agg.min_new_ret.is_none_or(|(t, _)| r.return_ts < t) {
                agg.min_new_ret = Some((r.return_ts, idx));
            }
        }
    }

    let mut inversions: Vec<_> = aggs
        .into_iter()
        .filter_map(|((i, root), a)| match (a.max_old_inv, a.min_new_ret) {
            (Some((inv, old_read)), Some((ret, new_read))) if inv > ret => Some(HistoryViolation::Inversion {
                batch: batches[i - 1].id,
                root,
                new_read,
                old_read,
            }),
            _ => None,
        })
        .collect();
    inversions.sort_by_key(|v| match v {
        HistoryViolation::Inversion { batch, root, .. } => (*batch, *root),
        _ => unreachable!(),
    });
    out.extend(inversions);
    Ok(out)
}

pub fn write_history<W: Write>(mut w: W, batches: &[BatchRecord], reads: &[ReadRecord]) -> std::io::Result<()> {
    writeln!(w, "# R\tvertex\tinvoke_ts\treturn_ts\tlevel\tmode")?;
    writeln!(w, "# B\tid\tbegin_ts\tend_ts\tvertex:old:new:root,...")?;
    for b in batches {
        write!(w, "B\t{}\t{}\t{}\t", b.id, b.begin_ts, b.end_ts)?;
        for (i, m) in b.movers.iter().enumerate() {
            if i > 0 {
                w.write_all(b",")?;
            }
            write!(w, "{}:{}:{}:{}", m.vertex, m.old_level, m.new_level, m.dag_root)?;
        }
        writeln!(w)?;
    }
    for r in reads {
        writeln!(w, "R\t{}\t{}\t{}\t{}\t{}", r.vertex, r.invoke_ts, r.return_ts, r.level, r.mode)?;
    }
    Ok(())
}

fn field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, HistoryError> {
    let tok = tok.ok_or_else(|| HistoryError::Parse { line, msg: format!("missing {what}") })?;
    tok.parse().map_err(|_| HistoryError::Parse { line, msg: format!("bad {what} {tok:?}") })
}

/// Parses a history file. Batches are returned sorted by begin time and
/// reads in file order.
pub fn read_history<R: BufRead>(r: R) -> Result<(Vec<BatchRecord>, Vec<ReadRecord>), HistoryError> {
    let (mut batches, mut reads) = (Vec::new(), Vec::new());
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split('\t');
        match it.next() {
            Some("R") => {
                let rec = ReadRecord {
                    vertex: field(it.next(), n, "vertex")?,
                    invoke_ts: field(it.next(), n, "invoke timestamp")?,
                    return_ts: field(it.next(), n, "return timestamp")?,
                    level: field(it.next(), n, "level")?,
                    mode: field(it.next(), n, "mode")?,
                };
                reads.push(rec);
            }
            Some("B") => {
                let id = field(it.next(), n, "batch id")?;
                let begin_ts = field(it.next(), n, "begin timestamp")?;
                let end_ts = field(it.next(), n, "end timestamp")?;
                let mut movers = Vec::new();
                for m in it.next().unwrap_or("").split(',').filter(|s| !s.is_empty()) {
                    let mut p = m.split(':');
                    movers.push(MoverRecord {
                        vertex: field(p.next(), n, "mover vertex")?,
                        old_level: field(p.next(), n, "old level")?,
                        new_level: field(p.next(), n, "new level")?,
                        dag_root: field(p.next(), n, "dag root")?,
                    });
                    if p.next().is_some() {
                        return Err(HistoryError::Parse { line: n, msg: format!("bad mover {m:?}") });
                    }
                }
                batches.push(BatchRecord { id, begin_ts, end_ts, movers });
            }
            Some(tag) => return Err(HistoryError::Parse { line: n, msg: format!("unknown record type {tag:?}") }),
            None => unreachable!(),
        }
        if it.next().is_some() {
            return Err(HistoryError::Parse { line: n, msg: "trailing fields".into() });
        }
    }
    batches.sort_by_key(|b: &BatchRecord| b.begin_ts);
    Ok((batches, reads))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(vertex: u32, old: u32, new: u32, root: u32) -> MoverRecord {
        MoverRecord { vertex, old_level: old, new_level: new, dag_root: root }
    }

    fn rd(vertex: u32, inv: u64, ret: u64, level: u32) -> ReadRecord {
        ReadRecord { vertex, invoke_ts: inv, return_ts: ret, level, mode: ReadMode::Cplds }
    }

    fn one_batch() -> Vec<BatchRecord> {
        vec![BatchRecord { id: 1, begin_ts: 100, end_ts: 200, movers: vec![mv(0, 0, 4, 0), mv(1, 0, 4, 0)] }]
    }

    #[test]
    fn stable_vertex_ok() {
        assert!(check_history(&one_batch(), &[rd(5, 10, 300, 0)]).unwrap().is_empty());
    }

    #[test]
    fn boundary_values_ok() {
        let reads = [rd(0, 50, 60, 0), rd(0, 120, 130, 0), rd(0, 150, 160, 4), rd(0, 250, 260, 4)];
        assert!(check_history(&one_batch(), &reads).unwrap().is_empty());
    }

    #[test]
    fn intermediate_level_flagged() {
        let v = check_history(&one_batch(), &[rd(0, 120, 130, 2)]).unwrap();
        assert_eq!(v, vec![HistoryViolation::Boundary { read: 0, vertex: 0, level: 2, candidates: vec![0, 4] }]);
        let v = check_history(&one_batch(), &[rd(0, 250, 260, 0)]).unwrap();
        assert!(v[0].is_boundary());
    }

    #[test]
    fn inversion_flagged() {
        // vertex 0 seen new, then vertex 1 (same DAG) seen old
        let reads = [rd(0, 110, 120, 4), rd(1, 130, 140, 0)];
        let v = check_history(&one_batch(), &reads).unwrap();
        assert_eq!(v, vec![HistoryViolation::Inversion { batch: 1, root: 0, new_read: 0, old_read: 1 }]);
        // overlapping reads are fine
        let reads = [rd(0, 110, 135, 4), rd(1, 130, 140, 0)];
        assert!(check_history(&one_batch(), &reads).unwrap().is_empty());
    }

    #[test]
    fn different_dags_not_ordered() {
        let mut b = one_batch();
        b[0].movers[1].dag_root = 1;
        let reads = [rd(0, 110, 120, 4), rd(1, 130, 140, 0)];
        assert!(check_history(&b, &reads).unwrap().is_empty());
    }

    #[test]
    fn malformed_rejected() {
        assert!(check_history(&one_batch(), &[rd(0, 5, 5, 0)]).is_err());
        let mut b = one_batch();
        b.push(BatchRecord { id: 2, begin_ts: 300, end_ts: 400, movers: vec![mv(0, 3, 5, 0)] });
        assert!(check_history(&b, &[]).is_err());
        let b = vec![BatchRecord { id: 1, begin_ts: 10, end_ts: 5, movers: vec![] }];
        assert!(check_history(&b, &[]).is_err());
    }

    #[test]
    fn empty_history() {
        assert!(check_history(&[], &[]).unwrap().is_empty());
    }

    #[test]
    fn round_trip() {
        let b = one_batch();
        let r = vec![rd(0, 1, 2, 0), ReadRecord { mode: ReadMode::NonSync, ..rd(1, 3, 9, 4) }];
        let mut buf = Vec::new();
        write_history(&mut buf, &b, &r).unwrap();
        let (b2, r2) = read_history(buf.as_slice()).unwrap();
        assert_eq!((b, r), (b2, r2));
        assert!(matches!(read_history("R\t1\t2\n".as_bytes()), Err(HistoryError::Parse { line: 1, .. })));
        assert!(matches!(read_history("X\n".as_bytes()), Err(HistoryError::Parse { .. })));
    }
}
