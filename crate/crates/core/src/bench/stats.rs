//! Summary statistics over latency samples.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("no samples")]
    Empty,
    #[error("quantile must lie in (0, 1), got {0}")]
    BadQuantile(f64),
}

/// Nearest-rank percentile: the `ceil(q * N)`-th smallest sample.
pub fn percentile(samples: &[u64], q: f64) -> Result<u64, StatsError> {
    if samples.is_empty() {
        return Err(StatsError::Empty);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(StatsError::BadQuantile(q));
    }
    let mut s = samples.to_vec();
    Ok(percentile_sorted(sort(&mut s), q))
}

fn sort(s: &mut [u64]) -> &[u64] {
    s.sort_unstable();
    s
}

/// [`percentile`] on already sorted, non-empty samples.
pub fn percentile_sorted(sorted: &[u64], q: f64) -> u64 {
    let n = sorted.len();
    // tolerate representation error in q * n, e.g. 0.99 * 100
    let rank = ((q * n as f64) - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

pub fn mean(samples: &[u64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    samples.iter().map(|&x| x as f64).sum::<f64>() / samples.len() as f64
}
