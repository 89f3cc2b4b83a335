//! Upper binomial tails `X(n, k) = sum_{m >= k} C(n, m) x^m (1 - x)^(n - m)`.
//!
//! Terms are formed in log space and accumulated relative to the largest one
//! with Neumaier summation, so tails far below the smallest normal product
//! of the naive form (the vacuum branch sits near 1e-14 and beyond) keep
//! full relative precision.

use crate::error::{EsdError, Result};

/// Above this, `C(n, m)` is no longer formed exactly in `u128`.
const EXACT_CHOOSE_MAX_N: u32 = 100;

pub(crate) fn ln_choose(n: u32, m: u32) -> f64 {
    debug_assert!(m <= n);
    let m = m.min(n - m);
    if n <= EXACT_CHOOSE_MAX_N {
        let mut c: u128 = 1;
        for i in 0..m {
            // exact: C(n, i) * (n - i) is divisible by (i + 1)
            c = c * u128::from(n - i) / u128::from(i + 1);
        }
        (c as f64).ln()
    } else {
        (1..=m)
            .map(|i| (f64::from(n - m + i)).ln() - f64::from(i).ln())
            .sum()
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut carry = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

/// Probability of at least `k` successes in `n` Bernoulli(`x`) trials.
pub fn binomial_tail(n: u32, k: u32, x: f64) -> Result<f64> {
    if k > n {
        return Err(EsdError::invalid(format!(
            "binomial tail threshold k={k} exceeds n={n}"
        )));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(EsdError::invalid(format!(
            "binomial tail probability must be in [0, 1], got {x}"
        )));
    }
    if k == 0 || x == 1.0 {
        return Ok(1.0);
    }
    if x == 0.0 {
        return Ok(0.0);
    }

    let ln_x = x.ln();
    let ln_1mx = (-x).ln_1p();
    let log_term = |m: u32| ln_choose(n, m) + f64::from(m) * ln_x + f64::from(n - m) * ln_1mx;
    // Sum the smaller side: the upper tail directly when k lies above the
    // mean, otherwise one minus the lower tail, so results near 1 round
    // consistently and stay monotone in x.
    if f64::from(k) > f64::from(n) * x {
        Ok(sum_exp((k..=n).map(log_term)).min(1.0))
    } else {
        Ok((1.0 - sum_exp((0..k).map(log_term))).clamp(0.0, 1.0))
    }
}

/// `sum(exp(l))`, scaled by the largest term.
fn sum_exp(log_terms: impl Iterator<Item = f64>) -> f64 {
    let log_terms: Vec<f64> = log_terms.collect();
    let peak = log_terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if peak == f64::NEG_INFINITY {
        return 0.0;
    }
    peak.exp() * compensated_sum(log_terms.iter().map(|l| (l - peak).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_threshold_is_one() {
        for n in [0, 1, 7, 64] {
            for x in [0.0, 1e-300, 0.3, 1.0] {
                assert_eq!(binomial_tail(n, 0, x).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn two_coins_at_least_one() {
        assert_eq!(binomial_tail(2, 1, 0.5).unwrap(), 0.75);
    }

    #[test]
    fn seven_choose_three_reference() {
        // leading three terms summed at 50 digits (mpmath):
        // 4.8537284233995892688813e-6
        let v = binomial_tail(7, 3, 5.2031423e-3).unwrap();
        assert!((v / 4.853_728_423_399_589e-6 - 1.0).abs() < 1e-13, "{v:e}");
    }

    #[test]
    fn deep_tail_keeps_precision() {
        // x^n for n = 40, x = 1e-8 is 1e-320 (subnormal); n = 37 gives 1e-296
        let v = binomial_tail(37, 37, 1e-8).unwrap();
        assert!((v / 1e-296 - 1.0).abs() < 1e-10, "{v:e}");
    }

    #[test]
    fn exact_choose_matches_log_sum() {
        for n in [10u32, 50, 100] {
            for m in 0..=n {
                let slow: f64 = (1..=m.min(n - m))
                    .map(|i| f64::from(n - m.min(n - m) + i).ln() - f64::from(i).ln())
                    .sum();
                assert!((ln_choose(n, m) - slow).abs() < 1e-12 * slow.abs().max(1.0));
            }
        }
        let c = 1_832_624_140_942_590_534f64;
        assert!((ln_choose(64, 32) - c.ln()).abs() < 1e-15 * c.ln());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(binomial_tail(3, 4, 0.5).is_err());
        assert!(binomial_tail(3, 1, -0.1).is_err());
        assert!(binomial_tail(3, 1, 1.5).is_err());
        assert!(binomial_tail(3, 1, f64::NAN).is_err());
    }
}
