//! Dynamic undirected graph over a fixed vertex universe, plus the edge-list
//! loader and batch normalization.

use std::collections::HashSet;
use std::io::BufRead;

use thiserror::Error;

pub type VertexId = u32;

/// An undirected edge stored with `0 < 1` endpoint order.
pub type Edge = (VertexId, VertexId);

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge list contains no edges or vertex ids")]
    EmptyInput,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("batch does not satisfy its precondition: {0}")]
    Contract(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BatchKind {
    Insert,
    Delete,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeBatch {
    pub kind: BatchKind,
    pub edges: Vec<Edge>,
}

impl EdgeBatch {
    pub fn insert(edges: Vec<Edge>) -> Self {
        Self { kind: BatchKind::Insert, edges }
    }

    pub fn delete(edges: Vec<Edge>) -> Self {
        Self { kind: BatchKind::Delete, edges }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

/// Orders the endpoints of an edge; `None` for self-loops.
#[inline]
pub fn normalize_edge(u: VertexId, v: VertexId) -> Option<Edge> {
    match u.cmp(&v) {
        std::cmp::Ordering::Less => Some((u, v)),
        std::cmp::Ordering::Greater => Some((v, u)),
        std::cmp::Ordering::Equal => None,
    }
}

#[inline]
fn key(e: Edge) -> u64 {
    ((e.0 as u64) << 32) | e.1 as u64
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    adj: Vec<Vec<VertexId>>,
    edges: HashSet<u64>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n], edges: HashSet::new() }
    }

    pub fn num_vertices(&self) -> usize {
        self.adj.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adj[v as usize]
    }

    #[inline]
    pub fn degree(&self, v: VertexId) -> usize {
        self.adj[v as usize].len()
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        normalize_edge(u, v).is_some_and(|e| self.edges.contains(&key(e)))
    }

    /// Edges in ascending `(u, v)` order.
    pub fn edges(&self) -> Vec<Edge> {
        let mut out: Vec<Edge> = self.edges.iter().map(|k| ((k >> 32) as u32, *k as u32)).collect();
        out.sort_unstable();
        out
    }

    fn in_range(&self, e: Edge) -> bool {
        (e.1 as usize) < self.adj.len()
    }

    /// Dedupes `raw` and drops edges that would be no-ops against the current
    /// graph. Returns the cleaned batch and the number of dropped entries.
    pub fn normalize_batch(&self, raw: &EdgeBatch) -> (EdgeBatch, usize) {
        let mut seen = HashSet::with_capacity(raw.edges.len());
        let mut edges = Vec::with_capacity(raw.edges.len());
        for &(u, v) in &raw.edges {
            let Some(e) = normalize_edge(u, v) else { continue };
            if !self.in_range(e) || !seen.insert(key(e)) {
                continue;
            }
            let present = self.edges.contains(&key(e));
            let keep = match raw.kind {
                BatchKind::Insert => !present,
                BatchKind::Delete => present,
            };
            if keep {
                edges.push(e);
            }
        }
        let dropped = raw.edges.len() - edges.len();
        (EdgeBatch { kind: raw.kind, edges }, dropped)
    }

    /// Applies a normalized batch. The batch is checked in full before any
    /// mutation, so a contract error leaves the graph untouched.
    pub fn apply_batch(&mut self, b: &EdgeBatch) -> Result<(), GraphError> {
        let mut seen = HashSet::with_capacity(b.edges.len());
        for &e in &b.edges {
            if e.0 >= e.1 || !self.in_range(e) {
                return Err(GraphError::Contract(format!("malformed edge {e:?}")));
            }
            if !seen.insert(key(e)) {
                return Err(GraphError::Contract(format!("duplicate edge {e:?}")));
            }
            let present = self.edges.contains(&key(e));
            match b.kind {
                BatchKind::Insert if present => {
                    return Err(GraphError::Contract(format!("edge {e:?} already present")))
                }
                BatchKind::Delete if !present => {
                    return Err(GraphError::Contract(format!("edge {e:?} not present")))
                }
                _ => {}
            }
        }
        match b.kind {
            BatchKind::Insert => {
                for &(u, v) in &b.edges {
                    self.edges.insert(key((u, v)));
                    self.adj[u as usize].push(v);
                    self.adj[v as usize].push(u);
                }
            }
            BatchKind::Delete => {
                for &(u, v) in &b.edges {
                    self.edges.remove(&key((u, v)));
                    remove_one(&mut self.adj[u as usize], v);
                    remove_one(&mut self.adj[v as usize], u);
                }
            }
        }
        Ok(())
    }

    /// Walks the adjacency and reports the first structural inconsistency.
    pub fn audit(&self) -> Result<(), String> {
        let mut half = 0usize;
        for (u, list) in self.adj.iter().enumerate() {
            let mut sorted = list.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(format!("vertex {u} has a duplicate neighbor"));
            }
            for &v in list {
                if v as usize == u {
                    return Err(format!("self-loop at {u}"));
                }
                if !self.adj[v as usize].contains(&(u as u32)) {
                    return Err(format!("asymmetric adjacency {u} -> {v}"));
                }
                if !self.has_edge(u as u32, v) {
                    return Err(format!("edge ({u}, {v}) missing from edge set"));
                }
            }
            half += list.len();
        }
        if half != 2 * self.edges.len() {
            return Err(format!("edge count {} != half adjacency {}", self.edges.len(), half / 2));
        }
        Ok(())
    }
}

fn remove_one(list: &mut Vec<VertexId>, x: VertexId) {
    if let Some(i) = list.iter().position(|&y| y == x) {
        list.swap_remove(i);
    }
}

/// Result of parsing an edge list: an empty graph sized to the largest id
/// seen, and the cleaned edge stream in file order.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    pub stream: Vec<Edge>,
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Parses a whitespace-separated `u v` edge list. Lines starting with `#`
/// are comments; extra columns after the first two are ignored.
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<LoadedGraph, GraphError> {
    let mut stream = Vec::new();
    let mut seen = HashSet::new();
    let mut max_id: Option<u32> = None;
    let (mut self_loops, mut duplicates) = (0, 0);
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line_no = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut it = t.split_whitespace();
        let mut id = |what: &str| -> Result<u32, GraphError> {
            let tok = it.next().ok_or_else(|| GraphError::Parse {
                line: line_no,
                msg: format!("missing {what} endpoint"),
            })?;
            let v: u32 = tok.parse().map_err(|_| GraphError::Parse {
                line: line_no,
                msg: format!("bad vertex id {tok:?}"),
            })?;
            if v == u32::MAX {
                return Err(GraphError::Parse { line: line_no, msg: "vertex id too large".into() });
            }
            Ok(v)
        };
        let u = id("first")?;
        let v = id("second")?;
        max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
        match normalize_edge(u, v) {
            None => self_loops += 1,
            Some(e) => {
                if seen.insert(key(e)) {
                    stream.push(e);
                } else {
                    duplicates += 1;
                }
            }
        }
    }
    let n = max_id.ok_or(GraphError::EmptyInput)? as usize + 1;
    Ok(LoadedGraph { graph: Graph::new(n), stream, self_loops, duplicates })
}
