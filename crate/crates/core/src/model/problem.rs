use serde::Serialize;

use super::DrawingDistribution;
use crate::error::{CcpError, Result};

/// Maximum deviation of an explicit distribution's total from 1.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;
/// Largest deviation `--renormalize` is willing to absorb.
pub const RENORMALIZE_TOLERANCE: f64 = 1e-3;

/// How to treat explicit probabilities whose sum is not exactly one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Normalization {
    #[default]
    Strict,
    /// Divide by the sum when it is within [`RENORMALIZE_TOLERANCE`] of one.
    Renormalize,
}

/// A validated collector instance: `t` copies of each of `k` out of `n` coupons.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Problem {
    n: usize,
    k: usize,
    t: usize,
    dist: DrawingDistribution,
}

impl Problem {
    pub fn new(n: usize, k: usize, t: usize, dist: DrawingDistribution) -> Result<Self> {
        validate_problem(n, k, t, dist, Normalization::Strict)
    }

    pub fn uniform(n: usize, k: usize, t: usize) -> Result<Self> {
        Self::new(n, k, t, DrawingDistribution::uniform(n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn dist(&self) -> &DrawingDistribution {
        &self.dist
    }

    /// Largest number of tracked draws before absorption: `kt + (n-k)(t-1)`.
    pub fn max_tracked_draws(&self) -> usize {
        self.k * self.t + (self.n - self.k) * (self.t - 1)
    }

    /// Same instance with a different distribution over the same coupons.
    pub fn with_dist(&self, dist: DrawingDistribution) -> Result<Self> {
        Self::new(self.n, self.k, self.t, dist)
    }
}

pub fn validate_problem(
    n: usize,
    k: usize,
    t: usize,
    dist: DrawingDistribution,
    normalization: Normalization,
) -> Result<Problem> {
    if n < 1 || k < 1 || k > n || t < 1 {
        return Err(CcpError::BadBounds { n, k, t });
    }
    if dist.len() != n {
        return Err(CcpError::DimensionMismatch {
            expected: n,
            got: dist.len(),
        });
    }
    let dist = match dist {
        DrawingDistribution::Explicit(p) => {
            if let Some((index, &value)) = p.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
                return Err(CcpError::NonPositiveProbability { index, value });
            }
            let sum: f64 = p.iter().sum();
            let dev = (sum - 1.0).abs();
            if dev <= NORMALIZATION_TOLERANCE {
                DrawingDistribution::Explicit(p)
            } else if normalization == Normalization::Renormalize && dev <= RENORMALIZE_TOLERANCE {
                DrawingDistribution::Explicit(p.into_iter().map(|x| x / sum).collect())
            } else {
                return Err(CcpError::NotNormalized { sum });
            }
        }
        uniform => uniform,
    };
    Ok(Problem { n, k, t, dist })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_instance_is_valid() {
        let p = Problem::new(3, 2, 2, DrawingDistribution::explicit(vec![0.2, 0.3, 0.5])).unwrap();
        assert_eq!((p.n(), p.k(), p.t()), (3, 2, 2));
        assert_eq!(p.dist().probabilities(), vec![0.2, 0.3, 0.5]);
        assert_eq!(p.max_tracked_draws(), 5);
    }

    #[test]
    fn minimal_instance() {
        assert!(Problem::uniform(1, 1, 1).is_ok());
    }

    #[test]
    fn unnormalized_is_rejected() {
        let err = Problem::new(3, 2, 2, DrawingDistribution::explicit(vec![0.2, 0.3, 0.4])).unwrap_err();
        assert!(matches!(err, CcpError::NotNormalized { .. }));
    }

    #[test]
    fn bounds() {
        for (n, k, t) in [(3, 5, 1), (3, 0, 1), (3, 2, 0), (0, 0, 1)] {
            let err = Problem::uniform(n, k, t).unwrap_err();
            assert!(matches!(err, CcpError::BadBounds { .. }), "{n} {k} {t}");
        }
    }

    #[test]
    fn dimension_mismatch() {
        let err = Problem::new(4, 2, 1, DrawingDistribution::explicit(vec![0.5, 0.5])).unwrap_err();
        assert_eq!(err, CcpError::DimensionMismatch { expected: 4, got: 2 });
        let err = Problem::new(4, 2, 1, DrawingDistribution::uniform(3)).unwrap_err();
        assert_eq!(err, CcpError::DimensionMismatch { expected: 4, got: 3 });
    }

    #[test]
    fn zero_and_nan_probabilities_rejected() {
        let err = Problem::new(2, 1, 1, DrawingDistribution::explicit(vec![1.0, 0.0])).unwrap_err();
        assert!(matches!(err, CcpError::NonPositiveProbability { index: 1, .. }));
        let err = Problem::new(2, 1, 1, DrawingDistribution::explicit(vec![f64::NAN, 1.0])).unwrap_err();
        assert!(matches!(err, CcpError::NonPositiveProbability { index: 0, .. }));
    }

    #[test]
    fn renormalize_within_window_only() {
        let dist = DrawingDistribution::explicit(vec![0.3333, 0.3333, 0.3333]);
        let p = validate_problem(3, 3, 1, dist.clone(), Normalization::Renormalize).unwrap();
        let sum: f64 = p.dist().probabilities().iter().sum();
        assert!((sum - 1.0).abs() < 1e-15);
        assert!(validate_problem(3, 3, 1, dist, Normalization::Strict).is_err());

        let far = DrawingDistribution::explicit(vec![0.2, 0.3, 0.4]);
        let err = validate_problem(3, 2, 1, far, Normalization::Renormalize).unwrap_err();
        assert!(matches!(err, CcpError::NotNormalized { .. }));
    }
}
