use statrs::distribution::{ContinuousCDF, Normal};

/// Confidence level of a three-sigma two-sided interval.
pub const THREE_SIGMA: f64 = 0.9973;

/// Two-sided standard normal quantile for a confidence `level` in (0, 1).
pub fn z_for_level(level: f64) -> f64 {
    assert!(level > 0.0 && level < 1.0, "confidence level must be in (0, 1), got {level}");
    Normal::standard().inverse_cdf(0.5 + level / 2.0)
}

/// Two-sided coverage of a `z`-sigma interval.
pub fn level_for_z(z: f64) -> f64 {
    2.0 * Normal::standard().cdf(z) - 1.0
}

/// A Monte Carlo point estimate of a probability with its interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateWithCI {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    /// `(upper - lower) / 2`
    pub half_width: f64,
    pub trials: u64,
    pub level: f64,
}

impl EstimateWithCI {
    /// Estimate backed by no trials at all: the whole unit interval.
    pub fn vacuous(level: f64) -> Self {
        EstimateWithCI {
            value: 0.0,
            lower: 0.0,
            upper: 1.0,
            half_width: 0.5,
            trials: 0,
            level,
        }
    }

    pub fn from_bounds(value: f64, lower: f64, upper: f64, trials: u64, level: f64) -> Self {
        EstimateWithCI {
            value,
            lower,
            upper,
            half_width: (upper - lower) / 2.0,
            trials,
            level,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// Wilson score interval for `successes` out of `trials` at `z` sigma.
pub fn wilson(successes: u64, trials: u64, z: f64) -> EstimateWithCI {
    let level = level_for_z(z);
    if trials == 0 {
        return EstimateWithCI::vacuous(level);
    }
    debug_assert!(successes <= trials);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lower = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let upper = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    EstimateWithCI::from_bounds(p, lower, upper, trials, level)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn three_sigma_quantile() {
        assert!((z_for_level(THREE_SIGMA) - 3.0).abs() < 1e-3);
        assert!((level_for_z(4.0) - 0.999_936_657_516_334).abs() < 1e-12);
    }

    #[test]
    fn wilson_matches_closed_form() {
        // 30 of 100 at z = 2: center 0.3077, half 0.0882 (hand computed)
        let e = wilson(30, 100, 2.0);
        assert_eq!(e.value, 0.3);
        let center = (0.3 + 4.0 / 200.0) / 1.04;
        let half = 2.0 / 1.04 * (0.21f64 / 100.0 + 4.0 / 40_000.0).sqrt();
        assert!((e.lower - (center - half)).abs() < 1e-15);
        assert!((e.upper - (center + half)).abs() < 1e-15);
    }

    #[test]
    fn wilson_edges() {
        let none = wilson(0, 1000, 3.0);
        assert_eq!(none.value, 0.0);
        assert_eq!(none.lower, 0.0);
        assert!(none.upper > 0.0 && none.upper < 0.01);

        let all = wilson(1000, 1000, 3.0);
        assert_eq!(all.value, 1.0);
        assert_eq!(all.upper, 1.0);
        assert!(all.lower > 0.99);

        let empty = wilson(0, 0, 3.0);
        assert_eq!(empty.trials, 0);
        assert!(empty.contains(0.0) && empty.contains(1.0));
    }
}
