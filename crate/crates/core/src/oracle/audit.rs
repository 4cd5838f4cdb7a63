//! From-scratch invariant audit and the approximation-ratio check.

use std::fmt;

use crate::engine::LevelState;
use crate::graph::{Graph, VertexId};
use crate::params::LevelParams;

#[derive(Debug, Clone, PartialEq)]
pub enum InvariantViolation {
    /// Too many neighbors at or above the vertex's level.
    Upper { vertex: VertexId, level: u32, up_degree: u32, bound: f64 },
    /// Too few neighbors at or above one below the vertex's level.
    Lower { vertex: VertexId, level: u32, up_star_degree: u32, bound: f64 },
    OutOfRange { vertex: VertexId, level: u32 },
}

impl fmt::Display for InvariantViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Upper { vertex, level, up_degree, bound } => {
                write!(f, "vertex {vertex} at level {level}: up-degree {up_degree} exceeds {bound:.4}")
            }
            Self::Lower { vertex, level, up_star_degree, bound } => {
                write!(f, "vertex {vertex} at level {level}: up*-degree {up_star_degree} below {bound:.4}")
            }
            Self::OutOfRange { vertex, level } => write!(f, "vertex {vertex}: level {level} out of range"),
        }
    }
}

/// Checks both level invariants for every vertex of `g` against `levels`.
pub fn audit_levels(g: &Graph, params: &LevelParams, levels: &[u32]) -> Vec<InvariantViolation> {
    let mut out = Vec::new();
    for v in 0..g.num_vertices() as VertexId {
        let lv = levels[v as usize];
        if lv >= params.num_levels() {
            out.push(InvariantViolation::OutOfRange { vertex: v, level: lv });
            continue;
        }
        let (mut up, mut star) = (0u32, 0u32);
        for &w in g.neighbors(v) {
            let lw = levels[w as usize];
            up += (lw >= lv) as u32;
            star += (lw + 1 >= lv) as u32;
        }
        if !params.upper_ok(lv, up) {
            out.push(InvariantViolation::Upper { vertex: v, level: lv, up_degree: up, bound: params.upper_bound(lv) });
        }
        if !params.lower_ok(lv, star) {
            out.push(InvariantViolation::Lower {
                vertex: v,
                level: lv,
                up_star_degree: star,
                bound: params.lower_bound(lv),
            });
        }
    }
    out
}

pub fn audit_lds(g: &Graph, state: &LevelState) -> Vec<InvariantViolation> {
    audit_levels(g, state.params(), &state.levels().snapshot())
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BoundReport {
    /// Largest `max(est/k, k/est)` over vertices with `k >= 1`; 1 if none.
    pub max_ratio: f64,
    pub mean_ratio: f64,
    /// Vertices whose ratio exceeds the factor, with their ratio.
    pub offenders: Vec<(VertexId, f64)>,
    /// Vertices with coreness 0, excluded from the ratio.
    pub zero_coreness: usize,
    pub checked: usize,
}

impl BoundReport {
    pub fn passes(&self) -> bool {
        self.offenders.is_empty()
    }
}

#[inline]
pub fn ratio(estimate: f64, k: u32) -> f64 {
    let k = k as f64;
    (estimate / k).max(k / estimate)
}

pub fn check_bound(estimates: &[f64], exact: &[u32], factor: f64) -> BoundReport {
    assert_eq!(estimates.len(), exact.len(), "estimates and coreness cover different vertex sets");
    let mut r = BoundReport { max_ratio: 1.0, ..Default::default() };
    let mut sum = 0.0;
    for (v, (&e, &k)) in estimates.iter().zip(exact).enumerate() {
        if k == 0 {
            r.zero_coreness += 1;
            continue;
        }
        let x = ratio(e, k);
        sum += x;
        r.checked += 1;
        r.max_ratio = r.max_ratio.max(x);
        if x > factor {
            r.offenders.push((v as VertexId, x));
        }
    }
    r.mean_ratio = if r.checked > 0 { sum / r.checked as f64 } else { 1.0 };
    r
}
