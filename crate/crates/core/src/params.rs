//! Level-structure parameterization: group sizes, level count, and the
//! per-group degree thresholds used by the two level invariants.

use thiserror::Error;

/// Slack applied when comparing an integer degree against a real-valued bound.
pub const BOUND_GUARD: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParamsError {
    #[error("vertex count must be at least 2 (got {0})")]
    TooFewVertices(usize),
    #[error("delta must be a positive finite number (got {0})")]
    BadDelta(f64),
    #[error("lambda must be a positive finite number (got {0})")]
    BadLambda(f64),
    #[error("level {level} out of range (K = {num_levels})")]
    LevelOutOfRange { level: u32, num_levels: u32 },
}

/// Derived parameters of the level structure for a fixed vertex universe.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelParams {
    n: usize,
    delta: f64,
    lambda: f64,
    num_groups: u32,
    levels_per_group: u32,
    num_levels: u32,
    theoretical_factor: f64,
    /// Largest up-degree that satisfies the upper-bound invariant, per group.
    up_cap: Vec<u32>,
    /// Smallest up*-degree that satisfies the lower-bound invariant, per group.
    up_star_min: Vec<u32>,
    /// `(1 + delta)^i` for every group index `i`.
    powers: Vec<f64>,
}

/// `ceil(ln n / ln(1 + delta))`, snapping values within 1e-9 of an integer to
/// that integer so the result does not depend on the last ulp of `ln`.
fn ceil_log(n: usize, delta: f64) -> u32 {
    let x = (n as f64).ln() / (1.0 + delta).ln();
    let r = x.round();
    let c = if (x - r).abs() < 1e-9 { r } else { x.ceil() };
    c.max(1.0) as u32
}

impl LevelParams {
    pub fn new(n: usize, delta: f64, lambda: f64) -> Result<Self, ParamsError> {
        if n < 2 {
            return Err(ParamsError::TooFewVertices(n));
        }
        if !(delta.is_finite() && delta > 0.0) {
            return Err(ParamsError::BadDelta(delta));
        }
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(ParamsError::BadLambda(lambda));
        }
        let num_groups = ceil_log(n, delta);
        let levels_per_group = 4 * num_groups;
        let num_levels = levels_per_group * num_groups;
        let upper = 2.0 + 3.0 / lambda;
        let powers: Vec<f64> = (0..num_groups).map(|i| (1.0 + delta).powi(i as i32)).collect();
        let clamp = |x: f64| if x >= u32::MAX as f64 { u32::MAX } else { x as u32 };
        let up_cap = powers.iter().map(|p| clamp((upper * p + BOUND_GUARD).floor())).collect();
        let up_star_min = powers.iter().map(|p| clamp((p - BOUND_GUARD).ceil())).collect();
        Ok(Self {
            n,
            delta,
            lambda,
            num_groups,
            levels_per_group,
            num_levels,
            theoretical_factor: upper * (1.0 + delta),
            up_cap,
            up_star_min,
            powers,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn num_groups(&self) -> u32 {
        self.num_groups
    }

    pub fn levels_per_group(&self) -> u32 {
        self.levels_per_group
    }

    /// Total number of levels `K`; valid levels are `0..K`.
    pub fn num_levels(&self) -> u32 {
        self.num_levels
    }

    /// `(2 + 3/lambda)(1 + delta)`, the boundary approximation factor.
    pub fn theoretical_factor(&self) -> f64 {
        self.theoretical_factor
    }

    pub fn group_of(&self, level: u32) -> Result<u32, ParamsError> {
        if level >= self.num_levels {
            return Err(ParamsError::LevelOutOfRange { level, num_levels: self.num_levels });
        }
        Ok(self.group(level))
    }

    #[inline]
    pub(crate) fn group(&self, level: u32) -> u32 {
        level / self.levels_per_group
    }

    /// Real-valued upper bound on the up-degree of a vertex at `level`.
    pub fn upper_bound(&self, level: u32) -> f64 {
        (2.0 + 3.0 / self.lambda) * self.powers[self.group(level) as usize]
    }

    /// Real-valued lower bound on the up*-degree of a vertex at `level > 0`.
    pub fn lower_bound(&self, level: u32) -> f64 {
        debug_assert!(level > 0);
        self.powers[self.group(level - 1) as usize]
    }

    /// Upper-bound invariant for a vertex at `level` with `up_degree`
    /// neighbors at or above its level.
    #[inline]
    pub fn upper_ok(&self, level: u32, up_degree: u32) -> bool {
        up_degree <= self.up_cap[self.group(level) as usize]
    }

    /// Lower-bound invariant for a vertex at `level` with `up_star_degree`
    /// neighbors at or above `level - 1`. Level 0 is exempt.
    #[inline]
    pub fn lower_ok(&self, level: u32, up_star_degree: u32) -> bool {
        level == 0 || up_star_degree >= self.up_star_min[self.group(level - 1) as usize]
    }

    /// Minimum up*-degree needed to sit at `level > 0`.
    #[inline]
    pub(crate) fn lower_min(&self, level: u32) -> u32 {
        self.up_star_min[self.group(level - 1) as usize]
    }

    pub fn coreness_estimate(&self, level: u32) -> Result<f64, ParamsError> {
        if level >= self.num_levels {
            return Err(ParamsError::LevelOutOfRange { level, num_levels: self.num_levels });
        }
        Ok(self.estimate(level))
    }

    /// `(1+delta)^max(floor((level+1)/levels_per_group) - 1, 0)`.
    #[inline]
    pub fn estimate(&self, level: u32) -> f64 {
        let exp = ((level + 1) / self.levels_per_group).saturating_sub(1);
        self.powers[(exp as usize).min(self.powers.len() - 1)]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_vertices() {
        let p = LevelParams::new(2, 0.2, 9.0).unwrap();
        assert_eq!(p.num_groups(), 4);
        assert_eq!(p.levels_per_group(), 16);
        assert_eq!(p.num_levels(), 64);
        assert!((p.theoretical_factor() - 2.8).abs() < 1e-12);
    }

    #[test]
    fn thousand_vertices() {
        let p = LevelParams::new(1000, 0.2, 9.0).unwrap();
        assert_eq!(p.num_groups(), 38);
        assert_eq!(p.levels_per_group(), 152);
        assert_eq!(p.num_levels(), 5776);
        assert_eq!(p.group_of(0).unwrap(), 0);
        assert_eq!(p.group_of(151).unwrap(), 0);
        assert_eq!(p.group_of(152).unwrap(), 1);
        assert_eq!(p.group_of(5775).unwrap(), 37);
        assert!(p.group_of(5776).is_err());
    }

    #[test]
    fn estimates() {
        let p = LevelParams::new(1000, 0.2, 9.0).unwrap();
        assert_eq!(p.coreness_estimate(0).unwrap(), 1.0);
        assert_eq!(p.coreness_estimate(151).unwrap(), 1.0);
        assert!((p.coreness_estimate(303).unwrap() - 1.2).abs() < 1e-12);
        assert!(p.coreness_estimate(5776).is_err());
    }

    #[test]
    fn bad_knobs() {
        assert_eq!(LevelParams::new(1, 0.2, 9.0), Err(ParamsError::TooFewVertices(1)));
        assert!(matches!(LevelParams::new(10, 0.0, 9.0), Err(ParamsError::BadDelta(_))));
        assert!(matches!(LevelParams::new(10, -1.0, 9.0), Err(ParamsError::BadDelta(_))));
        assert!(matches!(LevelParams::new(10, 0.2, 0.0), Err(ParamsError::BadLambda(_))));
        assert!(matches!(LevelParams::new(10, 0.2, f64::NAN), Err(ParamsError::BadLambda(_))));
    }

    #[test]
    fn invariant_thresholds() {
        let p = LevelParams::new(1000, 0.2, 9.0).unwrap();
        // group 0: upper bound 2.333.., lower bound 1
        assert!(p.upper_ok(0, 2));
        assert!(!p.upper_ok(0, 3));
        assert!(p.upper_ok(7, 0));
        assert!(p.lower_ok(0, 0));
        assert!(p.lower_ok(1, 1));
        assert!(!p.lower_ok(1, 0));
    }

    #[test]
    fn top_group_never_binds() {
        for &n in &[2usize, 10, 1000, 100_000, 3_000_000] {
            let p = LevelParams::new(n, 0.2, 9.0).unwrap();
            assert!(p.upper_ok(p.num_levels() - 1, (n - 1) as u32), "n={n}");
        }
    }
}
