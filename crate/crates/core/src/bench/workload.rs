//! Edge streams and their partition into update batches.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{normalize_edge, Edge, EdgeBatch, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WorkloadError {
    #[error("edge stream is empty")]
    EmptyStream,
    #[error("batch size must be at least 1")]
    ZeroBatch,
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkloadPlan {
    pub batch_size: usize,
    /// Append a delete phase that removes the insert batches in reverse.
    pub mirror_deletes: bool,
    /// Shuffle the stream with this seed before partitioning.
    pub shuffle_seed: Option<u64>,
}

impl WorkloadPlan {
    pub fn new(batch_size: usize) -> Self {
        Self { batch_size, mirror_deletes: false, shuffle_seed: None }
    }
}

pub fn gen_workload(stream: &[Edge], plan: &WorkloadPlan) -> Result<Vec<EdgeBatch>, WorkloadError> {
    if stream.is_empty() {
        return Err(WorkloadError::EmptyStream);
    }
    if plan.batch_size == 0 {
        return Err(WorkloadError::ZeroBatch);
    }
    let mut edges = stream.to_vec();
    if let Some(seed) = plan.shuffle_seed {
        edges.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let inserts: Vec<EdgeBatch> = edges.chunks(plan.batch_size).map(|c| EdgeBatch::insert(c.to_vec())).collect();
    let mut out = inserts.clone();
    if plan.mirror_deletes {
        out.extend(inserts.iter().rev().map(|b| EdgeBatch::delete(b.edges.clone())));
    }
    Ok(out)
}

/// Uniform random graph with exactly `m` distinct edges on `n` vertices.
pub fn gnm(n: usize, m: usize, seed: u64) -> Result<Vec<Edge>, WorkloadError> {
    let max = n * n.saturating_sub(1) / 2;
    if m > max {
        return Err(WorkloadError::Invalid(format!("{m} edges do not fit on {n} vertices")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut out = Vec::with_capacity(m);
    while out.len() < m {
        let u = rng.gen_range(0..n as VertexId);
        let v = rng.gen_range(0..n as VertexId);
        if let Some(e) = normalize_edge(u, v) {
            if seen.insert(e) {
                out.push(e);
            }
        }
    }
    Ok(out)
}

/// G(n, p): every pair independently with probability `p`.
pub fn gnp(n: usize, p: f64, seed: u64) -> Result<Vec<Edge>, WorkloadError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(WorkloadError::Invalid(format!("probability {p} out of range")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for u in 0..n as VertexId {
        for v in u + 1..n as VertexId {
            if rng.gen_bool(p) {
                out.push((u, v));
            }
        }
    }
    Ok(out)
}

/// Clique on `0..n_core` emitted in `steps` stages of growing circulant
/// offsets, each stage shuffled. Fed as one batch, the whole set climbs many
/// levels at once.
pub fn adversarial_climb(n_core: usize, steps: usize, seed: u64) -> Result<Vec<Edge>, WorkloadError> {
    if n_core < 3 {
        return Err(WorkloadError::Invalid("adversarial climb needs at least 3 vertices".into()));
    }
    let steps = steps.max(1);
    let max_off = n_core / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for s in 0..steps {
        let lo = 1 + s * max_off / steps;
        let hi = 1 + (s + 1) * max_off / steps;
        let mut stage = Vec::new();
        for off in lo..hi {
            for u in 0..n_core {
                let v = (u + off) % n_core;
                if let Some(e) = normalize_edge(u as VertexId, v as VertexId) {
                    if seen.insert(e) {
                        stage.push(e);
                    }
                }
            }
        }
        stage.shuffle(&mut rng);
        out.extend(stage);
    }
    debug_assert_eq!(out.len(), n_core * (n_core - 1) / 2);
    Ok(out)
}

/// Random background edges on `0..n` interleaved with `cliques` dense blocks
/// on disjoint vertex ranges. Each block is emitted contiguously as one
/// `climb_batch`-sized run so it lands in a single batch when the stream is
/// partitioned with that batch size.
pub fn climb_mix(
    n: usize,
    background: usize,
    n_core: usize,
    cliques: usize,
    climb_batch: usize,
    seed: u64,
) -> Result<Vec<Edge>, WorkloadError> {
    if cliques * n_core > n {
        return Err(WorkloadError::Invalid("cliques do not fit in the vertex range".into()));
    }
    let clique_edges = n_core * (n_core - 1) / 2;
    if clique_edges > climb_batch {
        return Err(WorkloadError::Invalid("a clique must fit in one batch".into()));
    }
    let bg = gnm(n, background, seed)?;
    let mut seen: HashSet<Edge> = HashSet::new();
    let mut blocks = Vec::new();
    for c in 0..cliques {
        let base = (c * n_core) as VertexId;
        let block: Vec<Edge> = adversarial_climb(n_core, 1, seed.wrapping_add(c as u64 + 1))?
            .into_iter()
            .map(|(u, v)| (u + base, v + base))
            .collect();
        seen.extend(block.iter().copied());
        blocks.push(block);
    }
    let bg: Vec<Edge> = bg.into_iter().filter(|e| !seen.contains(e)).collect();
    // Pad each clique with background edges to exactly one batch.
    let mut out = Vec::with_capacity(bg.len() + cliques * clique_edges);
    let mut bg_iter = bg.into_iter();
    let gap = background / (cliques + 1);
    for block in blocks {
        let mut filler = 0;
        while filler < gap {
            match bg_iter.next() {
                Some(e) => out.push(e),
                None => break,
            }
            filler += 1;
        }
        while out.len() % climb_batch != 0 {
            match bg_iter.next() {
                Some(e) => out.push(e),
                None => {
                    return Err(WorkloadError::Invalid("too few background edges to align the cliques".into()))
                }
            }
        }
        out.extend(block);
    }
    out.extend(bg_iter);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::BatchKind;

    fn stream(k: u32) -> Vec<Edge> {
        (0..k).map(|i| (i, i + 1)).collect()
    }

    #[test]
    fn partition_sizes() {
        let b = gen_workload(&stream(10), &WorkloadPlan::new(4)).unwrap();
        assert_eq!(b.iter().map(|b| b.len()).collect::<Vec<_>>(), vec![4, 4, 2]);
        assert!(b.iter().all(|b| b.kind == BatchKind::Insert));
    }

    #[test]
    fn mirrored() {
        let plan = WorkloadPlan { mirror_deletes: true, ..WorkloadPlan::new(4) };
        let b = gen_workload(&stream(10), &plan).unwrap();
        let sizes: Vec<_> = b.iter().map(|b| (b.kind, b.len())).collect();
        use BatchKind::*;
        assert_eq!(sizes, vec![(Insert, 4), (Insert, 4), (Insert, 2), (Delete, 2), (Delete, 4), (Delete, 4)]);
        assert_eq!(b[3].edges, b[2].edges);
    }

    #[test]
    fn deterministic() {
        let plan = WorkloadPlan { shuffle_seed: Some(7), ..WorkloadPlan::new(3) };
        let s = gnm(50, 100, 3).unwrap();
        assert_eq!(gen_workload(&s, &plan).unwrap(), gen_workload(&s, &plan).unwrap());
        assert_eq!(s, gnm(50, 100, 3).unwrap());
        assert_ne!(s, gnm(50, 100, 4).unwrap());
    }

    #[test]
    fn rejects() {
        assert_eq!(gen_workload(&[], &WorkloadPlan::new(3)), Err(WorkloadError::EmptyStream));
        assert_eq!(gen_workload(&stream(3), &WorkloadPlan::new(0)), Err(WorkloadError::ZeroBatch));
        assert!(adversarial_climb(2, 1, 0).is_err());
        assert!(gnm(3, 4, 0).is_err());
    }

    #[test]
    fn climb_is_clique() {
        let t = adversarial_climb(3, 1, 0).unwrap();
        let mut s = t.clone();
        s.sort();
        assert_eq!(s, vec![(0, 1), (0, 2), (1, 2)]);
        for steps in [1, 3, 8] {
            let c = adversarial_climb(20, steps, 5).unwrap();
            assert_eq!(c.len(), 190);
            assert_eq!(c.iter().collect::<HashSet<_>>().len(), 190);
        }
        assert_eq!(adversarial_climb(30, 4, 9).unwrap(), adversarial_climb(30, 4, 9).unwrap());
    }

    #[test]
    fn mix_places_cliques_in_single_batches() {
        let s = climb_mix(400, 4000, 20, 3, 500, 1).unwrap();
        assert!(climb_mix(400, 1000, 20, 3, 500, 1).is_err());
        assert_eq!(s.iter().collect::<HashSet<_>>().len(), s.len());
        let batches = gen_workload(&s, &WorkloadPlan::new(500)).unwrap();
        for c in 0..3u32 {
            let lo = c * 20;
            let holding: Vec<_> = batches
                .iter()
                .enumerate()
                .filter(|(_, b)| b.edges.iter().any(|&(u, v)| u >= lo && v < lo + 20 && u < lo + 20))
                .map(|(i, _)| i)
                .collect();
            assert_eq!(holding.len(), 1, "clique {c} spread over {holding:?}");
        }
    }
}
