//! Per-vertex operation descriptors, the dependency forest built from them,
//! and the lock-free read.
//!
//! A descriptor is one `u64`: zero when unmarked, otherwise
//! `MARK | epoch << 32 | parent` with `parent == ROOT` for roots. The epoch is
//! the low 31 bits of the batch number and keeps conditional updates from
//! succeeding against a word left over from an earlier batch.

use std::sync::atomic::{AtomicBool, AtomicU32, AtomicU64, AtomicUsize, Ordering::SeqCst};
use std::sync::{Mutex, RwLock};

use rayon::prelude::*;
use thiserror::Error;

use crate::engine::{LevelArray, UpdateHooks};
use crate::graph::{Edge, VertexId};
use crate::params::LevelParams;

pub const ROOT: VertexId = u32::MAX;
const MARK: u64 = 1 << 63;
const EPOCH_MASK: u64 = 0x7FFF_FFFF;
const PAR_MIN: usize = 4096;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConcurrencyError {
    #[error("batch already in progress")]
    BatchInProgress,
    #[error("no batch in progress")]
    NoBatch,
    #[error("vertex {0} is already marked")]
    AlreadyMarked(VertexId),
    #[error("vertex {0} is not marked")]
    NotMarked(VertexId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Descriptor {
    Unmarked,
    /// `parent` is `None` for a root.
    Marked { parent: Option<VertexId>, old_level: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DagState {
    Marked,
    Unmarked,
}

#[inline]
fn encode(epoch: u64, parent: VertexId) -> u64 {
    MARK | (epoch & EPOCH_MASK) << 32 | parent as u64
}

#[inline]
fn is_marked(word: u64) -> bool {
    word & MARK != 0
}

#[inline]
fn parent_of(word: u64) -> VertexId {
    word as u32
}

#[inline]
fn epoch_of(word: u64) -> u64 {
    (word >> 32) & EPOCH_MASK
}

/// Batch edges in CSR form, for locating a vertex's batch neighbors.
#[derive(Debug, Default, Clone)]
struct BatchIndex {
    offsets: Vec<usize>,
    targets: Vec<VertexId>,
}

impl BatchIndex {
    fn build(n: usize, edges: &[Edge]) -> Self {
        if edges.is_empty() {
            return Self::default();
        }
        let mut offsets = vec![0usize; n + 1];
        for &(u, v) in edges {
            offsets[u as usize + 1] += 1;
            offsets[v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut targets = vec![0; 2 * edges.len()];
        for &(u, v) in edges {
            targets[fill[u as usize]] = v;
            fill[u as usize] += 1;
            targets[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        Self { offsets, targets }
    }

    fn neighbors(&self, v: VertexId) -> &[VertexId] {
        if self.offsets.is_empty() {
            return &[];
        }
        &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }
}

#[derive(Debug)]
pub struct DescriptorTable {
    words: Vec<AtomicU64>,
    old_levels: Vec<AtomicU32>,
    batch_number: AtomicU64,
    in_batch: AtomicBool,
    marked_count: AtomicUsize,
    marked_list: Mutex<Vec<VertexId>>,
    batch_index: RwLock<BatchIndex>,
}

impl DescriptorTable {
    pub fn new(n: usize) -> Self {
        Self {
            words: (0..n).map(|_| AtomicU64::new(0)).collect(),
            old_levels: (0..n).map(|_| AtomicU32::new(0)).collect(),
            batch_number: AtomicU64::new(0),
            in_batch: AtomicBool::new(false),
            marked_count: AtomicUsize::new(0),
            marked_list: Mutex::new(Vec::new()),
            batch_index: RwLock::new(BatchIndex::default()),
        }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    #[inline]
    pub fn batch_number(&self) -> u64 {
        self.batch_number.load(SeqCst)
    }

    pub fn in_batch(&self) -> bool {
        self.in_batch.load(SeqCst)
    }

    pub fn marked_count(&self) -> usize {
        self.marked_count.load(SeqCst)
    }

    #[inline]
    fn word(&self, v: VertexId) -> u64 {
        self.words[v as usize].load(SeqCst)
    }

    pub fn is_marked(&self, v: VertexId) -> bool {
        is_marked(self.word(v))
    }

    pub fn descriptor(&self, v: VertexId) -> Descriptor {
        let w = self.word(v);
        if !is_marked(w) {
            return Descriptor::Unmarked;
        }
        let p = parent_of(w);
        Descriptor::Marked {
            parent: (p != ROOT).then_some(p),
            old_level: self.old_levels[v as usize].load(SeqCst),
        }
    }

    /// Starts a batch and returns its number. `batch_edges` are the edges the
    /// batch inserts or deletes.
    pub fn begin_batch(&self, batch_edges: &[Edge]) -> Result<u64, ConcurrencyError> {
        if self.in_batch.swap(true, SeqCst) {
            return Err(ConcurrencyError::BatchInProgress);
        }
        *self.batch_index.write().unwrap() = BatchIndex::build(self.words.len(), batch_edges);
        Ok(self.batch_number.fetch_add(1, SeqCst) + 1)
    }

    fn epoch(&self) -> u64 {
        self.batch_number() & EPOCH_MASK
    }

    /// Root of `v`'s tree, compressing the traversed path. `None` if an
    /// unmarked node is reached.
    pub fn find(&self, v: VertexId) -> Option<VertexId> {
        let root = self.peek_root(v)?;
        let mut x = v;
        while x != root {
            let w = self.word(x);
            if !is_marked(w) {
                return None;
            }
            let p = parent_of(w);
            if p == ROOT {
                // x became a root after the walk; nothing left to compress
                return Some(x);
            }
            if p != root {
                let _ = self.words[x as usize].compare_exchange(w, encode(epoch_of(w), root), SeqCst, SeqCst);
            }
            x = p;
        }
        Some(root)
    }

    /// Root of `v`'s tree without modifying anything.
    pub fn peek_root(&self, v: VertexId) -> Option<VertexId> {
        let mut x = v;
        loop {
            let w = self.word(x);
            if !is_marked(w) {
                return None;
            }
            match parent_of(w) {
                ROOT => return Some(x),
                p => x = p,
            }
        }
    }

    /// Joins the trees of `a` and `b`. The smaller root id wins.
    fn union(&self, a: VertexId, b: VertexId) -> Result<VertexId, ConcurrencyError> {
        loop {
            let ra = self.find(a).ok_or(ConcurrencyError::NotMarked(a))?;
            let rb = self.find(b).ok_or(ConcurrencyError::NotMarked(b))?;
            if ra == rb {
                return Ok(ra);
            }
            let (win, lose) = if ra < rb { (ra, rb) } else { (rb, ra) };
            let w = self.word(lose);
            if !is_marked(w) || parent_of(w) != ROOT {
                continue;
            }
            if self.words[lose as usize]
                .compare_exchange(w, encode(epoch_of(w), win), SeqCst, SeqCst)
                .is_ok()
            {
                return Ok(win);
            }
        }
    }

    /// Publishes a descriptor for `v`, joining it with the trees of every
    /// trigger and every marked batch neighbor.
    pub fn mark(&self, v: VertexId, old_level: u32, triggers: &[VertexId]) -> Result<(), ConcurrencyError> {
        if !self.in_batch() {
            return Err(ConcurrencyError::NoBatch);
        }
        if self.is_marked(v) {
            return Err(ConcurrencyError::AlreadyMarked(v));
        }
        self.old_levels[v as usize].store(old_level, SeqCst);
        let mut root: Option<VertexId> = None;
        let mut join = |w: VertexId| -> Result<(), ConcurrencyError> {
            root = Some(match root {
                None => self.find(w).ok_or(ConcurrencyError::NotMarked(w))?,
                Some(r) => self.union(r, w)?,
            });
            Ok(())
        };
        for &w in triggers {
            join(w)?;
        }
        {
            let idx = self.batch_index.read().unwrap();
            for &w in idx.neighbors(v) {
                if self.is_marked(w) {
                    join(w)?;
                }
            }
        }
        let word = encode(self.epoch(), root.unwrap_or(ROOT));
        self.words[v as usize]
            .compare_exchange(0, word, SeqCst, SeqCst)
            .map_err(|_| ConcurrencyError::AlreadyMarked(v))?;
        self.marked_count.fetch_add(1, SeqCst);
        self.marked_list.lock().unwrap().push(v);
        Ok(())
    }

    pub fn merge(&self, v: VertexId, w: VertexId) -> Result<(), ConcurrencyError> {
        for x in [v, w] {
            if !self.is_marked(x) {
                return Err(ConcurrencyError::NotMarked(x));
            }
        }
        self.union(v, w).map(|_| ())
    }

    /// Joins `v` with each of `others`.
    pub fn merge_all(&self, v: VertexId, others: &[VertexId]) -> Result<(), ConcurrencyError> {
        let mut root = self.find(v).ok_or(ConcurrencyError::NotMarked(v))?;
        for &w in others {
            let word = self.word(w);
            if !is_marked(word) {
                return Err(ConcurrencyError::NotMarked(w));
            }
            if w == root || parent_of(word) == root {
                continue;
            }
            root = self.union(root, w)?;
        }
        Ok(())
    }

    /// Joins both endpoints of every batch edge that are both marked.
    pub fn seal(&self) {
        let marked = self.marked_list.lock().unwrap().clone();
        let idx = self.batch_index.read().unwrap();
        for v in marked {
            for &w in idx.neighbors(v) {
                if w > v && self.is_marked(w) {
                    self.union(v, w).expect("both endpoints are marked");
                }
            }
        }
    }

    pub fn marked(&self) -> Vec<VertexId> {
        let mut m = self.marked_list.lock().unwrap().clone();
        m.sort_unstable();
        m
    }

    /// Follows parents from a snapshot of `origin`'s descriptor.
    pub fn check_dag(&self, origin: VertexId, word_of_origin: u64) -> DagState {
        let mut cursor = CheckDag::new(origin, word_of_origin);
        loop {
            if let Some(s) = cursor.step(self) {
                return s;
            }
        }
    }

    /// Raw descriptor word, for callers that drive `check_dag` themselves.
    pub fn raw(&self, v: VertexId) -> u64 {
        self.word(v)
    }

    /// Phase one of unmarking: clears every root.
    pub fn unmark_roots(&self) {
        let list = self.marked_list.lock().unwrap();
        let clear = |&v: &VertexId| {
            let w = self.word(v);
            if is_marked(w) && parent_of(w) == ROOT {
                self.words[v as usize].store(0, SeqCst);
            }
        };
        if list.len() >= PAR_MIN {
            list.par_iter().for_each(clear);
        } else {
            list.iter().for_each(clear);
        }
    }

    /// Phase two: clears everything still marked and closes the batch.
    pub fn unmark_rest(&self) {
        let mut list = self.marked_list.lock().unwrap();
        let clear = |&v: &VertexId| self.words[v as usize].store(0, SeqCst);
        if list.len() >= PAR_MIN {
            list.par_iter().for_each(clear);
        } else {
            list.iter().for_each(clear);
        }
        list.clear();
        self.marked_count.store(0, SeqCst);
        self.in_batch.store(false, SeqCst);
    }

    pub fn unmark_all(&self) {
        self.unmark_roots();
        self.unmark_rest();
    }

    /// Linearizable read of `v`'s level. Follows [`ReadCursor`]'s access order
    /// without the state machine; a parent chain longer than one hop is
    /// walked again from `v`.
    pub fn read(&self, levels: &LevelArray, params: &LevelParams, v: VertexId) -> ReadResult {
        let mut retries = 0;
        loop {
            let b1 = self.batch_number();
            let l1 = levels.get(v);
            let word = self.word(v);
            let old = if is_marked(word) {
                let old = self.old_levels[v as usize].load(SeqCst);
                (self.dag_state(v, word) == DagState::Marked).then_some(old)
            } else {
                None
            };
            let l2 = levels.get(v);
            if self.batch_number() == b1 {
                if let Some(level) = old.or((l1 == l2).then_some(l1)) {
                    return ReadResult { level, estimate: params.estimate(level), retries };
                }
            }
            retries += 1;
        }
    }

    /// [`check_dag`](Self::check_dag) with the one-hop case inlined.
    #[inline]
    fn dag_state(&self, origin: VertexId, word: u64) -> DagState {
        let p = parent_of(word);
        if p == ROOT {
            return DagState::Marked;
        }
        let w = self.word(p);
        if !is_marked(w) || epoch_of(w) != epoch_of(word) {
            return DagState::Unmarked;
        }
        if parent_of(w) == ROOT {
            return DagState::Marked;
        }
        self.check_dag(origin, word)
    }
}

/// Snapshot copy; only meaningful while no other thread mutates the table.
impl Clone for DescriptorTable {
    fn clone(&self) -> Self {
        Self {
            words: self.words.iter().map(|w| AtomicU64::new(w.load(SeqCst))).collect(),
            old_levels: self.old_levels.iter().map(|w| AtomicU32::new(w.load(SeqCst))).collect(),
            batch_number: AtomicU64::new(self.batch_number()),
            in_batch: AtomicBool::new(self.in_batch()),
            marked_count: AtomicUsize::new(self.marked_count()),
            marked_list: Mutex::new(self.marked_list.lock().unwrap().clone()),
            batch_index: RwLock::new(self.batch_index.read().unwrap().clone()),
        }
    }
}

impl UpdateHooks for DescriptorTable {
    fn mark(&self, v: VertexId, old_level: u32, triggers: &[VertexId]) {
        DescriptorTable::mark(self, v, old_level, triggers).expect("engine marks each mover once");
    }

    fn merge(&self, v: VertexId, triggers: &[VertexId]) {
        self.merge_all(v, triggers).expect("engine merges marked vertices only");
    }
}

/// Resumable traversal from a descriptor snapshot to its root. Each `step`
/// performs one shared load or one conditional update.
#[derive(Debug, Clone)]
struct CheckDag {
    epoch: u64,
    next: Option<VertexId>,
    path: Vec<(VertexId, u64)>,
    root: VertexId,
    compress_at: usize,
    result: Option<DagState>,
}

impl CheckDag {
    fn new(origin: VertexId, word: u64) -> Self {
        let mut c = Self {
            epoch: epoch_of(word),
            next: None,
            path: Vec::new(),
            root: ROOT,
            compress_at: 0,
            result: None,
        };
        if !is_marked(word) {
            c.result = Some(DagState::Unmarked);
        } else if parent_of(word) == ROOT {
            c.result = Some(DagState::Marked);
        } else {
            c.path.push((origin, word));
            c.next = Some(parent_of(word));
        }
        c
    }

    fn done(&self) -> Option<DagState> {
        if self.next.is_none() && self.compress_at >= self.path.len() {
            self.result
        } else {
            None
        }
    }

    fn step(&mut self, t: &DescriptorTable) -> Option<DagState> {
        if let Some(x) = self.next.take() {
            let w = t.word(x);
            if !is_marked(w) || epoch_of(w) != self.epoch {
                // Root already cleared, or a later batch reused the slot.
                self.result = Some(DagState::Unmarked);
                self.path.clear();
            } else if parent_of(w) == ROOT {
                self.result = Some(DagState::Marked);
                self.root = x;
                // Only nodes not already pointing at the root need updating.
                self.path.pop();
            } else {
                self.path.push((x, w));
                self.next = Some(parent_of(w));
            }
            return self.done();
        }
        if let Some(&(y, w)) = self.path.get(self.compress_at) {
            self.compress_at += 1;
            let _ = t.words[y as usize].compare_exchange(w, encode(self.epoch, self.root), SeqCst, SeqCst);
            return self.done();
        }
        self.result
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReadResult {
    pub level: u32,
    pub estimate: f64,
    pub retries: u32,
}

#[derive(Debug, Clone)]
enum Phase {
    B1,
    L1,
    Desc,
    OldLevel,
    Dag(CheckDag),
    L2,
    B2,
}

/// The read as an explicit state machine, so tests can interleave its shared
/// memory accesses with updater steps. [`DescriptorTable::read`] drives it to
/// completion.
#[derive(Debug, Clone)]
pub struct ReadCursor {
    v: VertexId,
    phase: Phase,
    b1: u64,
    l1: u32,
    word: u64,
    old_level: u32,
    state: DagState,
    l2: u32,
    retries: u32,
}

impl ReadCursor {
    pub fn new(v: VertexId) -> Self {
        Self {
            v,
            phase: Phase::B1,
            b1: 0,
            l1: 0,
            word: 0,
            old_level: 0,
            state: DagState::Unmarked,
            l2: 0,
            retries: 0,
        }
    }

    pub fn vertex(&self) -> VertexId {
        self.v
    }

    pub fn retries(&self) -> u32 {
        self.retries
    }

    /// Performs one shared-memory access. Returns the result once the read
    /// completes.
    pub fn step(&mut self, t: &DescriptorTable, levels: &LevelArray, params: &LevelParams) -> Option<ReadResult> {
        match &mut self.phase {
            Phase::B1 => {
                self.b1 = t.batch_number();
                self.phase = Phase::L1;
            }
            Phase::L1 => {
                self.l1 = levels.get(self.v);
                self.phase = Phase::Desc;
            }
            Phase::Desc => {
                self.word = t.word(self.v);
                if is_marked(self.word) {
                    self.phase = Phase::OldLevel;
                } else {
                    self.state = DagState::Unmarked;
                    self.phase = Phase::L2;
                }
            }
            Phase::OldLevel => {
                self.old_level = t.old_levels[self.v as usize].load(SeqCst);
                let c = CheckDag::new(self.v, self.word);
                match c.done() {
                    Some(s) => {
                        self.state = s;
                        self.phase = Phase::L2;
                    }
                    None => self.phase = Phase::Dag(c),
                }
            }
            Phase::Dag(c) => {
                if let Some(s) = c.step(t) {
                    self.state = s;
                    self.phase = Phase::L2;
                }
            }
            Phase::L2 => {
                self.l2 = levels.get(self.v);
                self.phase = Phase::B2;
            }
            Phase::B2 => {
                let b2 = t.batch_number();
                let level = if b2 != self.b1 {
                    None
                } else if self.state == DagState::Marked {
                    Some(self.old_level)
                } else if self.l1 == self.l2 {
                    Some(self.l1)
                } else {
                    None
                };
                match level {
                    Some(level) => {
                        return Some(ReadResult { level, estimate: params.estimate(level), retries: self.retries })
                    }
                    None => {
                        self.retries += 1;
                        self.phase = Phase::B1;
                    }
                }
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(n: usize) -> DescriptorTable {
        DescriptorTable::new(n)
    }

    fn roots(t: &DescriptorTable) -> Vec<VertexId> {
        t.marked().into_iter().filter(|&v| matches!(t.descriptor(v), Descriptor::Marked { parent: None, .. })).collect()
    }

    #[test]
    fn batch_counter() {
        let t = table(4);
        assert_eq!(t.begin_batch(&[]), Ok(1));
        assert_eq!(t.begin_batch(&[]), Err(ConcurrencyError::BatchInProgress));
        t.unmark_all();
        assert_eq!(t.begin_batch(&[]), Ok(2));
    }

    #[test]
    fn mark_requires_batch_and_is_once() {
        let t = table(4);
        assert_eq!(t.mark(0, 0, &[]), Err(ConcurrencyError::NoBatch));
        t.begin_batch(&[]).unwrap();
        t.mark(0, 3, &[]).unwrap();
        assert_eq!(t.descriptor(0), Descriptor::Marked { parent: None, old_level: 3 });
        assert_eq!(t.mark(0, 3, &[]), Err(ConcurrencyError::AlreadyMarked(0)));
        assert_eq!(t.merge(0, 1), Err(ConcurrencyError::NotMarked(1)));
    }

    #[test]
    fn mark_with_trigger_joins() {
        let t = table(4);
        t.begin_batch(&[]).unwrap();
        t.mark(2, 0, &[]).unwrap();
        t.mark(1, 0, &[2]).unwrap();
        assert_eq!(t.find(1), t.find(2));
        assert_eq!(t.find(1), Some(2));
    }

    #[test]
    fn batch_neighbors_share_dag() {
        let t = table(4);
        t.begin_batch(&[(0, 3)]).unwrap();
        t.mark(3, 0, &[]).unwrap();
        t.mark(0, 0, &[]).unwrap();
        assert_eq!(t.find(0), t.find(3));
        t.mark(1, 0, &[]).unwrap();
        assert_ne!(t.find(1), t.find(0));
    }

    #[test]
    fn merge_rules() {
        let t = table(8);
        t.begin_batch(&[]).unwrap();
        for v in 0..6 {
            t.mark(v, 0, &[]).unwrap();
        }
        t.merge(4, 2).unwrap();
        assert_eq!(t.find(4), Some(2));
        t.merge(4, 2).unwrap();
        assert_eq!(roots(&t).len(), 5);
        for v in (0..5).rev() {
            t.merge(v + 1, v).unwrap();
        }
        assert_eq!(roots(&t), vec![0]);
        assert!((0..6).all(|v| t.find(v) == Some(0)));
    }

    #[test]
    fn find_compresses() {
        let t = table(4);
        t.begin_batch(&[]).unwrap();
        t.mark(3, 0, &[]).unwrap();
        t.mark(2, 0, &[]).unwrap();
        t.mark(1, 0, &[]).unwrap();
        t.merge(2, 3).unwrap(); // 3 -> 2
        t.merge(1, 2).unwrap(); // 2 -> 1
        assert_eq!(t.descriptor(3), Descriptor::Marked { parent: Some(2), old_level: 0 });
        assert_eq!(t.find(3), Some(1));
        assert_eq!(t.descriptor(3), Descriptor::Marked { parent: Some(1), old_level: 0 });
    }

    #[test]
    fn check_dag_cases() {
        let t = table(4);
        assert_eq!(t.check_dag(0, t.raw(0)), DagState::Unmarked);
        t.begin_batch(&[]).unwrap();
        t.mark(0, 0, &[]).unwrap();
        t.mark(1, 0, &[0]).unwrap();
        t.mark(2, 0, &[1]).unwrap();
        let snap = t.raw(2);
        assert_eq!(t.check_dag(2, snap), DagState::Marked);
        t.unmark_roots();
        assert!(t.is_marked(2));
        assert_eq!(t.check_dag(2, t.raw(2)), DagState::Unmarked);
        t.unmark_rest();
        assert_eq!(t.marked_count(), 0);
        assert!((0..4).all(|v| t.descriptor(v) == Descriptor::Unmarked));
        t.unmark_all();
    }

    #[test]
    fn stale_word_does_not_resurrect() {
        let t = table(3);
        t.begin_batch(&[]).unwrap();
        t.mark(0, 0, &[]).unwrap();
        t.mark(1, 0, &[]).unwrap();
        t.mark(2, 0, &[]).unwrap();
        t.merge(2, 1).unwrap();
        t.merge(1, 0).unwrap();
        let snap = t.raw(2);
        t.unmark_all();
        t.begin_batch(&[]).unwrap();
        t.mark(1, 5, &[]).unwrap();
        t.mark(2, 5, &[]).unwrap();
        // stale snapshot from the old batch meets a new-epoch word
        assert_eq!(t.check_dag(2, snap), DagState::Unmarked);
        assert_eq!(t.descriptor(2), Descriptor::Marked { parent: None, old_level: 5 });
    }

    #[test]
    fn read_paths() {
        let p = LevelParams::new(1000, 0.2, 9.0).unwrap();
        let levels = LevelArray::new(4);
        let t = table(4);
        let r = t.read(&levels, &p, 0);
        assert_eq!((r.level, r.estimate, r.retries), (0, 1.0, 0));

        t.begin_batch(&[]).unwrap();
        t.mark(1, 0, &[]).unwrap();
        levels.set(1, 400);
        assert_eq!(t.read(&levels, &p, 1).level, 0);
        t.unmark_all();
        let r = t.read(&levels, &p, 1);
        assert_eq!(r.level, 400);
        assert!((r.estimate - 1.2).abs() < 1e-12);
    }

    #[test]
    fn read_retries_on_batch_change() {
        let p = LevelParams::new(100, 0.2, 9.0).unwrap();
        let levels = LevelArray::new(2);
        let t = table(2);
        let mut c = ReadCursor::new(0);
        assert!(c.step(&t, &levels, &p).is_none()); // b1
        t.begin_batch(&[]).unwrap();
        t.mark(0, 0, &[]).unwrap();
        levels.set(0, 3);
        t.unmark_all();
        let r = loop {
            if let Some(r) = c.step(&t, &levels, &p) {
                break r;
            }
        };
        assert_eq!(r.retries, 1);
        assert_eq!(r.level, 3);
    }

    #[test]
    fn concurrent_unions_leave_one_root() {
        let t = table(64);
        t.begin_batch(&[]).unwrap();
        for v in 0..64 {
            t.mark(v, 0, &[]).unwrap();
        }
        std::thread::scope(|s| {
            for k in 0..4u32 {
                let t = &t;
                s.spawn(move || {
                    for i in 0..63u32 {
                        let a = (i * 7 + k * 13) % 64;
                        t.merge(a, (a + 1 + k) % 64).unwrap();
                    }
                });
            }
        });
        let r: Vec<_> = (0..64).map(|v| t.find(v)).collect();
        assert!(r.iter().all(|&x| x == r[0]));
        assert_eq!(roots(&t), vec![0]);
    }

    #[test]
    fn fast_read_agrees_with_cursor() {
        let params = LevelParams::new(8, 0.2, 9.0).unwrap();
        let levels = LevelArray::new(8);
        let t = table(8);
        let via_cursor = |v: VertexId| {
            let mut c = ReadCursor::new(v);
            loop {
                if let Some(r) = c.step(&t, &levels, &params) {
                    return r.level;
                }
            }
        };
        let check = |what: &str| {
            for v in 0..8 {
                assert_eq!(t.read(&levels, &params, v).level, via_cursor(v), "{what}, vertex {v}");
            }
        };
        check("quiescent");
        t.begin_batch(&[]).unwrap();
        t.mark(3, 0, &[]).unwrap();
        t.mark(2, 0, &[3]).unwrap();
        t.mark(1, 0, &[2]).unwrap();
        t.mark(0, 0, &[]).unwrap();
        t.merge(0, 1).unwrap();
        for v in 0..4 {
            levels.set(v, 5);
        }
        levels.set(6, 2);
        check("marked chain");
        t.unmark_roots();
        check("between phases");
        t.unmark_rest();
        check("after");
        assert_eq!(t.read(&levels, &params, 1).level, 5);
    }
}
