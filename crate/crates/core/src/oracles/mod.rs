//! Independent reference values for testing the engines.
//!
//! None of these share code with the layered program: the closed forms cover
//! `t = 1` under uniform drawing, and the linear solver works on the raw
//! per-draw chain, self-loops included.

mod linear;

use serde::Serialize;

use crate::error::{CcpError, Result};
use crate::summation::CompensatedSum;

pub use linear::{brute_force_linear_solve, BRUTE_FORCE_STATE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleResult {
    pub expectation: f64,
    /// Absent where the oracle only yields the mean.
    pub variance: Option<f64>,
}

/// `sum_{j=lo}^{n} 1/j`, summed from the smallest term up.
fn harmonic_tail(n: usize, lo: usize) -> f64 {
    (lo..=n)
        .rev()
        .map(|j| 1.0 / j as f64)
        .collect::<CompensatedSum>()
        .value()
}

/// `n (H_n - H_{n-k})`: expected draws to see `k` distinct coupons out of `n`
/// equally likely ones.
pub fn harmonic_expectation(n: usize, k: usize) -> Result<f64> {
    if k < 1 || k > n {
        return Err(CcpError::BadBounds { n, k, t: 1 });
    }
    Ok(n as f64 * harmonic_tail(n, n - k + 1))
}

/// Mean and variance of the full collection time with `t = 1` under uniform
/// drawing, as a sum of independent geometric stages. Stage `m` waits for a
/// new coupon with success probability `(n - m)/n`.
pub fn geometric_stage_moments(n: usize) -> OracleResult {
    if n == 0 {
        return OracleResult {
            expectation: 0.0,
            variance: Some(0.0),
        };
    }
    let nf = n as f64;
    let mut var = CompensatedSum::ZERO;
    for m in 0..n {
        let p = (n - m) as f64 / nf;
        var.add((1.0 - p) / (p * p));
    }
    OracleResult {
        expectation: nf * harmonic_tail(n, 1),
        variance: Some(var.value()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_small_values() {
        assert_eq!(harmonic_expectation(2, 2).unwrap(), 3.0);
        assert_eq!(harmonic_expectation(1, 1).unwrap(), 1.0);
        assert!((harmonic_expectation(3, 3).unwrap() - 5.5).abs() < 1e-15);
        let direct: f64 = 100.0 * (51..=100).map(|j| 1.0 / j as f64).sum::<f64>();
        assert!((harmonic_expectation(100, 50).unwrap() - direct).abs() < 1e-12);
        assert!(matches!(harmonic_expectation(3, 4), Err(CcpError::BadBounds { .. })));
        assert!(matches!(harmonic_expectation(3, 0), Err(CcpError::BadBounds { .. })));
    }

    #[test]
    fn stage_moments() {
        assert_eq!(
            geometric_stage_moments(1),
            OracleResult {
                expectation: 1.0,
                variance: Some(0.0)
            }
        );
        let two = geometric_stage_moments(2);
        assert_eq!((two.expectation, two.variance), (3.0, Some(2.0)));
        let three = geometric_stage_moments(3);
        assert!((three.expectation - 5.5).abs() < 1e-15);
        assert!((three.variance.unwrap() - 6.75).abs() < 1e-14);
    }

    #[test]
    fn full_collection_forms_agree() {
        for n in 1..=10_000 {
            assert_eq!(
                harmonic_expectation(n, n).unwrap(),
                geometric_stage_moments(n).expectation,
                "n={n}"
            );
        }
    }
}
