//! Level assignment and the batch-parallel insertion and deletion passes.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU32, Ordering};
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::graph::{BatchKind, EdgeBatch, Graph, VertexId};
use crate::params::LevelParams;

/// Movers per level below which the pass stays on the calling thread.
const PAR_MIN: usize = 256;
const NONE: u32 = u32::MAX;

thread_local! {
    static TRIGGERS: std::cell::RefCell<Vec<VertexId>> = const { std::cell::RefCell::new(Vec::new()) };
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("contract violation: {0}")]
    Contract(String),
}

/// Per-vertex levels, readable from any thread as one atomic word.
#[derive(Debug)]
pub struct LevelArray {
    levels: Vec<AtomicU32>,
}

impl LevelArray {
    pub fn new(n: usize) -> Self {
        Self { levels: (0..n).map(|_| AtomicU32::new(0)).collect() }
    }

    #[inline]
    pub fn get(&self, v: VertexId) -> u32 {
        self.levels[v as usize].load(Ordering::SeqCst)
    }

    #[doc(hidden)]
    #[inline]
    pub fn set(&self, v: VertexId, level: u32) {
        self.levels[v as usize].store(level, Ordering::SeqCst)
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn snapshot(&self) -> Vec<u32> {
        self.levels.iter().map(|l| l.load(Ordering::SeqCst)).collect()
    }
}

/// Snapshot copy; only meaningful while no other thread writes levels.
impl Clone for LevelArray {
    fn clone(&self) -> Self {
        Self { levels: self.snapshot().into_iter().map(AtomicU32::new).collect() }
    }
}

/// Callbacks the passes invoke so a synchronization layer can track which
/// moves depend on which.
pub trait UpdateHooks: Sync {
    /// When false the passes skip trigger computation entirely.
    fn tracks_dependencies(&self) -> bool {
        true
    }
    /// First move of `v` in the batch. Called before `v`'s level changes.
    fn mark(&self, v: VertexId, old_level: u32, triggers: &[VertexId]);
    /// A later move of `v` that depends on the already marked `triggers`.
    fn merge(&self, v: VertexId, triggers: &[VertexId]);
    /// All moves targeting `level` have been written.
    fn level_processed(&self, _level: u32) {}
}

pub struct NoHooks;

impl UpdateHooks for NoHooks {
    fn tracks_dependencies(&self) -> bool {
        false
    }
    fn mark(&self, _: VertexId, _: u32, _: &[VertexId]) {}
    fn merge(&self, _: VertexId, _: &[VertexId]) {}
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub vertex: VertexId,
    pub old_level: u32,
    pub new_level: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PassReport {
    /// Net movement per vertex, ascending by vertex id.
    pub moves: Vec<Move>,
    /// Number of single-level steps across all vertices.
    pub steps: u64,
    /// Number of distinct levels visited.
    pub levels_visited: u32,
}

/// Output of one mover's neighbor scan.
struct Scan {
    up: u32,
    up_star: u32,
    /// Non-mover neighbors whose up-degree changed.
    up_hits: Vec<VertexId>,
    /// Non-mover neighbors whose up*-degree changed.
    star_hits: Vec<VertexId>,
}

pub struct LevelState {
    params: LevelParams,
    levels: Arc<LevelArray>,
    up: Vec<u32>,
    up_star: Vec<u32>,
    // Per-pass scratch, reset through `touched`.
    marked_at: Vec<u32>,
    moved_at: Vec<u32>,
    /// Level before the current step, valid for its movers.
    pre: Vec<u32>,
    /// `(moved_at, pre)` as they were before the current step.
    last_move: Vec<(u32, u32)>,
    first_old: Vec<u32>,
    desire: Vec<u32>,
    touched: Vec<VertexId>,
    step: u32,
}

impl LevelState {
    pub fn new(params: LevelParams) -> Self {
        let n = params.n();
        Self {
            params,
            levels: Arc::new(LevelArray::new(n)),
            up: vec![0; n],
            up_star: vec![0; n],
            marked_at: vec![NONE; n],
            moved_at: vec![NONE; n],
            pre: vec![0; n],
            last_move: vec![(NONE, 0); n],
            first_old: vec![NONE; n],
            desire: vec![NONE; n],
            touched: Vec::new(),
            step: 0,
        }
    }

    pub fn params(&self) -> &LevelParams {
        &self.params
    }

    pub fn levels(&self) -> &Arc<LevelArray> {
        &self.levels
    }

    #[inline]
    pub fn level(&self, v: VertexId) -> u32 {
        self.levels.get(v)
    }

    pub fn up_degree(&self, v: VertexId) -> u32 {
        self.up[v as usize]
    }

    pub fn up_star_degree(&self, v: VertexId) -> u32 {
        self.up_star[v as usize]
    }

    pub fn invariant1_holds(&self, v: VertexId) -> bool {
        self.params.upper_ok(self.level(v), self.up[v as usize])
    }

    pub fn invariant2_holds(&self, v: VertexId) -> bool {
        self.params.lower_ok(self.level(v), self.up_star[v as usize])
    }

    pub fn estimate(&self, v: VertexId) -> f64 {
        self.params.estimate(self.level(v))
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.levels.snapshot().into_iter().map(|l| self.params.estimate(l)).collect()
    }

    /// Overwrites a level and recounts all bookkeeping. Test hook for
    /// building arbitrary states and injecting faults.
    #[doc(hidden)]
    pub fn force_level(&mut self, g: &Graph, v: VertexId, level: u32) {
        self.levels.set(v, level);
        self.rebuild_bookkeeping(g);
    }

    pub fn rebuild_bookkeeping(&mut self, g: &Graph) {
        for v in 0..g.num_vertices() as VertexId {
            let (u, s) = self.count_from_scratch(g, v);
            self.up[v as usize] = u;
            self.up_star[v as usize] = s;
        }
    }

    fn count_from_scratch(&self, g: &Graph, v: VertexId) -> (u32, u32) {
        let lv = self.level(v);
        let (mut up, mut star) = (0, 0);
        for &w in g.neighbors(v) {
            let lw = self.level(w);
            up += (lw >= lv) as u32;
            star += (lw + 1 >= lv) as u32;
        }
        (up, star)
    }

    /// Compares the incremental counts against a full recount.
    pub fn audit_bookkeeping(&self, g: &Graph) -> Result<(), String> {
        for v in 0..g.num_vertices() as VertexId {
            let (u, s) = self.count_from_scratch(g, v);
            if u != self.up[v as usize] || s != self.up_star[v as usize] {
                return Err(format!(
                    "vertex {v}: stored up/up* {}/{} but recount gives {u}/{s}",
                    self.up[v as usize], self.up_star[v as usize]
                ));
            }
        }
        Ok(())
    }

    /// Adjusts `u`'s counts for a gained (+1) or lost (-1) neighbor `v`.
    fn count_edge(&mut self, u: VertexId, v: VertexId, add: bool) {
        let (lu, lv) = (self.level(u), self.level(v));
        let slot = |x: &mut u32| if add { *x += 1 } else { *x -= 1 };
        if lv >= lu {
            slot(&mut self.up[u as usize]);
        }
        if lv + 1 >= lu {
            slot(&mut self.up_star[u as usize]);
        }
    }

    /// Highest level below `v`'s current level at which the lower-bound
    /// invariant would hold for `v`.
    pub fn desire_level(&self, g: &Graph, v: VertexId) -> Result<u32, EngineError> {
        if self.invariant2_holds(v) {
            return Err(EngineError::Contract(format!("vertex {v} does not violate the lower bound")));
        }
        Ok(self.compute_desire(g, v))
    }

    fn compute_desire(&self, g: &Graph, v: VertexId) -> u32 {
        let lv = self.level(v);
        if lv < 2 {
            return 0;
        }
        let mut nl: Vec<u32> = g.neighbors(v).iter().map(|&w| self.level(w)).collect();
        nl.sort_unstable_by(|a, b| b.cmp(a));
        let count_at_least = |j: u32| nl.partition_point(|&x| x >= j) as u32;
        // Placing v at j + 1 needs count(level >= j) >= lower_min(j + 1); the
        // predicate only weakens as j decreases.
        let ok = |j: u32| count_at_least(j) >= self.params.lower_min(j + 1);
        let (mut lo, mut hi) = (0u32, lv - 1); // search j in [lo, hi)
        if !ok(0) {
            return 0;
        }
        lo += 1;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if ok(mid) {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo // largest good j is lo - 1, so the level is lo
    }

    fn require_kind(batch: &EdgeBatch, kind: BatchKind) -> Result<(), EngineError> {
        if batch.kind != kind {
            return Err(EngineError::Contract(format!("expected a {kind:?} batch")));
        }
        Ok(())
    }

    fn touch(&mut self, v: VertexId) {
        if self.first_old[v as usize] == NONE
            && self.marked_at[v as usize] == NONE
            && self.moved_at[v as usize] == NONE
            && self.desire[v as usize] == NONE
        {
            self.touched.push(v);
        }
    }

    fn finish_pass(&mut self, steps: u64, levels_visited: u32) -> PassReport {
        let mut touched = std::mem::take(&mut self.touched);
        touched.sort_unstable();
        touched.dedup();
        let mut moves = Vec::new();
        for &v in &touched {
            let i = v as usize;
            if self.first_old[i] != NONE {
                moves.push(Move { vertex: v, old_level: self.first_old[i], new_level: self.level(v) });
            }
            self.first_old[i] = NONE;
            self.marked_at[i] = NONE;
            self.moved_at[i] = NONE;
            self.last_move[i] = (NONE, 0);
            self.desire[i] = NONE;
        }
        self.step = 0;
        PassReport { moves, steps, levels_visited }
    }

    /// One step: every mover goes from its current level to `target`.
    ///
    /// Each mover is marked (or merged) through `hooks` before its own level
    /// is written, then its neighborhood is recounted against the post-step
    /// levels. Triggers are marked neighbors selected by
    /// `is_trigger(neighbor_level, mover_level)` on pre-step levels.
    /// `hit(lw, prev)` classifies a non-mover neighbor at level `lw` of a
    /// mover that left `prev`: (up changed, up* changed).
    fn advance<H, T, F>(&mut self, g: &Graph, movers: &[VertexId], target: u32, hooks: &H, is_trigger: T, hit: F) -> Vec<Scan>
    where
        H: UpdateHooks + ?Sized,
        T: Fn(u32, u32) -> bool + Sync,
        F: Fn(u32, u32) -> (bool, bool) + Sync,
    {
        self.step += 1;
        let step = self.step;
        // (previous level, first move in this pass)
        let info: Vec<(u32, bool)> =
            movers.iter().map(|&v| (self.level(v), self.marked_at[v as usize] == NONE)).collect();
        for (&v, &(prev, first)) in movers.iter().zip(&info) {
            self.touch(v);
            let i = v as usize;
            if first {
                self.first_old[i] = prev;
                self.marked_at[i] = step;
            }
            self.last_move[i] = (self.moved_at[i], self.pre[i]);
            self.moved_at[i] = step;
            self.pre[i] = prev;
        }
        let tracks = hooks.tracks_dependencies();
        let this = &*self;
        let work = |(&v, &(prev, first)): (&VertexId, &(u32, bool))| {
            let (last, last_pre) = this.last_move[v as usize];
            let mut s = Scan { up: 0, up_star: 0, up_hits: Vec::new(), star_hits: Vec::new() };
            TRIGGERS.with_borrow_mut(|triggers| {
                triggers.clear();
                for &w in g.neighbors(v) {
                    let i = w as usize;
                    let mw = this.moved_at[i];
                    let (before, after) = if mw == step {
                        (this.pre[i], target)
                    } else {
                        let l = this.level(w);
                        (l, l)
                    };
                    // Already joined: a neighbor idle since v last moved is
                    // a trigger now only if it was one then, and a neighbor
                    // that moved alongside v may have been one then.
                    let (m, p) = if mw == step { this.last_move[i] } else { (mw, this.pre[i]) };
                    let joined = !first
                        && (m == NONE
                            || m < last
                            || (m == last && this.marked_at[i] < last && is_trigger(p, last_pre)));
                    if tracks && !joined && this.marked_at[i] < step && is_trigger(before, prev) {
                        triggers.push(w);
                    }
                    s.up += (after >= target) as u32;
                    s.up_star += (after + 1 >= target) as u32;
                    if mw != step {
                        let (u, st) = hit(after, prev);
                        if u {
                            s.up_hits.push(w);
                        }
                        if st {
                            s.star_hits.push(w);
                        }
                    }
                }
                if tracks {
                    if first {
                        hooks.mark(v, prev, triggers);
                    } else if !triggers.is_empty() {
                        hooks.merge(v, triggers);
                    }
                }
            });
            this.levels.set(v, target);
            s
        };
        if movers.len() >= PAR_MIN {
            movers.par_iter().zip(info.par_iter()).map(work).collect()
        } else {
            movers.iter().zip(info.iter()).map(work).collect()
        }
    }

    /// Raises vertices until no upper-bound violation remains.
    /// `batch` must already be applied to `g`.
    pub fn batch_insert<H>(&mut self, g: &Graph, batch: &EdgeBatch, hooks: &H) -> Result<PassReport, EngineError>
    where
        H: UpdateHooks + ?Sized,
    {
        Self::require_kind(batch, BatchKind::Insert)?;
        let mut frontier: BTreeMap<u32, Vec<VertexId>> = BTreeMap::new();
        for &(u, v) in &batch.edges {
            self.count_edge(u, v, true);
            self.count_edge(v, u, true);
            for x in [u, v] {
                frontier.entry(self.level(x)).or_default().push(x);
            }
        }
        let top = self.params.num_levels() - 1;
        let (mut steps, mut visited) = (0u64, 0u32);
        while let Some((level, mut cand)) = frontier.pop_first() {
            cand.sort_unstable();
            cand.dedup();
            cand.retain(|&v| self.level(v) == level && !self.invariant1_holds(v));
            if cand.is_empty() {
                continue;
            }
            assert!(level < top, "upper-bound violation at the top level");
            let movers = cand;
            visited += 1;
            steps += movers.len() as u64;
            let next = level + 1;
            let scans =
                self.advance(g, &movers, next, hooks, |lw, lv| lw >= lv, |lw, _| (lw == next, lw == next + 1));
            let mut cands = movers.clone();
            for (&v, s) in movers.iter().zip(scans) {
                self.up[v as usize] = s.up;
                self.up_star[v as usize] = s.up_star;
                for w in s.up_hits {
                    self.up[w as usize] += 1;
                    cands.push(w);
                }
                for w in s.star_hits {
                    self.up_star[w as usize] += 1;
                }
            }
            frontier.entry(next).or_default().extend(cands);
            hooks.level_processed(next);
        }
        Ok(self.finish_pass(steps, visited))
    }

    fn enqueue_desire(&mut self, g: &Graph, v: VertexId, queue: &mut BTreeMap<u32, Vec<VertexId>>) {
        let d = self.compute_desire(g, v);
        if self.desire[v as usize] != d {
            self.touch(v);
            self.desire[v as usize] = d;
            queue.entry(d).or_default().push(v);
        }
    }

    /// Lowers vertices to their desire levels until no lower-bound violation
    /// remains. `batch` must already be applied to `g`.
    pub fn batch_delete<H>(&mut self, g: &Graph, batch: &EdgeBatch, hooks: &H) -> Result<PassReport, EngineError>
    where
        H: UpdateHooks + ?Sized,
    {
        Self::require_kind(batch, BatchKind::Delete)?;
        for &(u, v) in &batch.edges {
            self.count_edge(u, v, false);
            self.count_edge(v, u, false);
        }
        let mut queue: BTreeMap<u32, Vec<VertexId>> = BTreeMap::new();
        let mut seeds: Vec<VertexId> = batch.edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        seeds.sort_unstable();
        seeds.dedup();
        for v in seeds {
            if !self.invariant2_holds(v) {
                self.enqueue_desire(g, v, &mut queue);
            }
        }
        let (mut steps, mut visited) = (0u64, 0u32);
        while let Some((level, mut cand)) = queue.pop_first() {
            cand.sort_unstable();
            cand.dedup();
            cand.retain(|&v| self.desire[v as usize] == level && self.level(v) > level);
            if cand.is_empty() {
                continue;
            }
            let movers = cand;
            visited += 1;
            steps += movers.len() as u64;
            for &v in &movers {
                self.desire[v as usize] = NONE;
            }
            let scans = self.advance(g, &movers, level, hooks, |lw, lv| lw + 1 < lv, |lw, a| {
                (level < lw && lw <= a, level + 2 <= lw && lw <= a + 1)
            });
            let mut affected = Vec::new();
            for (&v, s) in movers.iter().zip(scans) {
                self.up[v as usize] = s.up;
                self.up_star[v as usize] = s.up_star;
                for w in s.up_hits {
                    self.up[w as usize] -= 1;
                }
                for w in s.star_hits {
                    self.up_star[w as usize] -= 1;
                    affected.push(w);
                }
            }
            affected.extend_from_slice(&movers);
            affected.sort_unstable();
            affected.dedup();
            for w in affected {
                if !self.invariant2_holds(w) {
                    self.enqueue_desire(g, w, &mut queue);
                }
            }
            hooks.level_processed(level);
        }
        Ok(self.finish_pass(steps, visited))
    }

    pub fn apply<H>(&mut self, g: &Graph, batch: &EdgeBatch, hooks: &H) -> Result<PassReport, EngineError>
    where
        H: UpdateHooks + ?Sized,
    {
        match batch.kind {
            BatchKind::Insert => self.batch_insert(g, batch, hooks),
            BatchKind::Delete => self.batch_delete(g, batch, hooks),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Mutex;

    fn setup(n: usize) -> (Graph, LevelState) {
        (Graph::new(n), LevelState::new(LevelParams::new(n, 0.2, 9.0).unwrap()))
    }

    fn insert(g: &mut Graph, s: &mut LevelState, edges: Vec<(u32, u32)>) -> PassReport {
        let b = EdgeBatch::insert(edges);
        g.apply_batch(&b).unwrap();
        s.batch_insert(g, &b, &NoHooks).unwrap()
    }

    fn delete(g: &mut Graph, s: &mut LevelState, edges: Vec<(u32, u32)>) -> PassReport {
        let b = EdgeBatch::delete(edges);
        g.apply_batch(&b).unwrap();
        s.batch_delete(g, &b, &NoHooks).unwrap()
    }

    fn all_hold(g: &Graph, s: &LevelState) {
        s.audit_bookkeeping(g).unwrap();
        for v in 0..g.num_vertices() as u32 {
            assert!(s.invariant1_holds(v) && s.invariant2_holds(v), "vertex {v}");
        }
    }

    fn clique(k: u32) -> Vec<(u32, u32)> {
        (0..k).flat_map(|u| (u + 1..k).map(move |v| (u, v))).collect()
    }

    #[test]
    fn single_edge_moves_nothing() {
        let (mut g, mut s) = setup(4);
        let r = insert(&mut g, &mut s, vec![(0, 1)]);
        assert!(r.moves.is_empty());
        assert_eq!(s.level(0), 0);
    }

    #[test]
    fn triangle_within_factor() {
        let (mut g, mut s) = setup(3);
        insert(&mut g, &mut s, clique(3));
        all_hold(&g, &s);
        for v in 0..3 {
            let e = s.estimate(v);
            assert!((2.0 / 2.8..=2.0 * 2.8).contains(&e));
        }
    }

    #[test]
    fn k5_common_level() {
        let (mut g, mut s) = setup(5);
        let r = insert(&mut g, &mut s, clique(5));
        all_hold(&g, &s);
        let l0 = s.level(0);
        assert!(l0 > 0);
        assert!((1..5).all(|v| s.level(v) == l0));
        assert_eq!(r.moves.len(), 5);
        assert!(r.moves.iter().all(|m| m.old_level == 0 && m.new_level == l0));
    }

    #[test]
    fn delete_triangle_returns_to_zero() {
        let (mut g, mut s) = setup(3);
        insert(&mut g, &mut s, clique(3));
        delete(&mut g, &mut s, clique(3));
        all_hold(&g, &s);
        assert!((0..3).all(|v| s.level(v) == 0));
    }

    #[test]
    fn k5_minus_edge() {
        let (mut g, mut s) = setup(5);
        insert(&mut g, &mut s, clique(5));
        delete(&mut g, &mut s, vec![(0, 1)]);
        all_hold(&g, &s);
        for v in 0..5 {
            let e = s.estimate(v);
            assert!(e <= 3.0 * 2.8 && 3.0 / e <= 2.8);
        }
        let r = delete(&mut g, &mut s, vec![]);
        assert!(r.moves.is_empty());
    }

    #[test]
    fn wrong_kind_rejected() {
        let (g, mut s) = setup(3);
        let b = EdgeBatch::delete(vec![]);
        assert!(s.batch_insert(&g, &b, &NoHooks).is_err());
        let b = EdgeBatch::insert(vec![]);
        assert!(s.batch_delete(&g, &b, &NoHooks).is_err());
    }

    #[test]
    fn desire_levels() {
        // n large enough that level 2 is still in group 0
        let (mut g, mut s) = setup(100);
        s.force_level(&g, 5, 5);
        assert_eq!(s.desire_level(&g, 5), Ok(0));

        g.apply_batch(&EdgeBatch::insert(vec![(0, 1)])).unwrap();
        s.force_level(&g, 1, 1);
        s.force_level(&g, 0, 2);
        assert!(s.desire_level(&g, 0).is_err());

        s.force_level(&g, 1, 0);
        assert_eq!(s.desire_level(&g, 0), Ok(1));
    }

    #[test]
    fn desire_level_matches_linear_scan() {
        let (mut g, mut s) = setup(300);
        let edges: Vec<_> = (1..40).map(|w| (0, w)).collect();
        g.apply_batch(&EdgeBatch::insert(edges)).unwrap();
        for w in 1..40u32 {
            s.force_level(&g, w, (w * 37) % 900);
        }
        s.force_level(&g, 0, 2000);
        let linear = (1..2000u32)
            .rev()
            .find(|&l| {
                let c = g.neighbors(0).iter().filter(|&&w| s.level(w) + 1 >= l).count() as u32;
                s.params().lower_ok(l, c)
            })
            .unwrap_or(0);
        assert_eq!(s.desire_level(&g, 0).unwrap(), linear);
    }

    #[derive(Default)]
    struct Recorder {
        marks: Mutex<Vec<(u32, u32, Vec<u32>)>>,
        merges: Mutex<Vec<(u32, u32)>>,
        levels: Mutex<Vec<u32>>,
    }

    impl UpdateHooks for Recorder {
        fn mark(&self, v: VertexId, old: u32, t: &[VertexId]) {
            let mut t = t.to_vec();
            t.sort();
            self.marks.lock().unwrap().push((v, old, t));
        }
        fn merge(&self, v: VertexId, t: &[VertexId]) {
            self.merges.lock().unwrap().extend(t.iter().map(|&w| (v, w)));
        }
        fn level_processed(&self, l: u32) {
            self.levels.lock().unwrap().push(l);
        }
    }

    #[test]
    fn hooks_mark_once_before_moving() {
        let (mut g, mut s) = setup(6);
        let b = EdgeBatch::insert(clique(6));
        g.apply_batch(&b).unwrap();
        let rec = Recorder::default();
        let r = s.batch_insert(&g, &b, &rec).unwrap();
        let marks = rec.marks.into_inner().unwrap();
        let mut marked: Vec<u32> = marks.iter().map(|m| m.0).collect();
        marked.sort();
        let movers: Vec<u32> = r.moves.iter().map(|m| m.vertex).collect();
        assert_eq!(marked, movers);
        assert!(marks.iter().all(|m| m.1 == 0));
        let levels = rec.levels.into_inner().unwrap();
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn monotone_moves() {
        let (mut g, mut s) = setup(40);
        let r = insert(&mut g, &mut s, clique(12));
        assert!(r.moves.iter().all(|m| m.new_level > m.old_level));
        let r = delete(&mut g, &mut s, clique(12)[..40].to_vec());
        assert!(r.moves.iter().all(|m| m.new_level < m.old_level));
        all_hold(&g, &s);
    }
}
