use serde::Serialize;

use crate::error::{CcpError, Result};

/// Per-coupon drawing probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DrawingDistribution {
    /// Every coupon is drawn with probability `1/n`.
    Uniform { n: usize },
    /// Explicit probabilities `p_1..p_n`, kept at full input precision.
    Explicit(Vec<f64>),
}

impl DrawingDistribution {
    pub fn uniform(n: usize) -> Self {
        DrawingDistribution::Uniform { n }
    }

    pub fn explicit(p: impl Into<Vec<f64>>) -> Self {
        DrawingDistribution::Explicit(p.into())
    }

    /// Two halves of the coupons: the first `n/2` coupons share a total mass of
    /// `first_mass`, the remaining coupons share `1 - first_mass`.
    pub fn two_groups(n: usize, first_mass: f64) -> Result<Self> {
        if n < 2 {
            return Err(CcpError::InvalidInput(
                "two-group distribution needs at least two coupons".into(),
            ));
        }
        if !(first_mass > 0.0 && first_mass < 1.0) {
            return Err(CcpError::InvalidInput(format!(
                "group mass {first_mass} must lie strictly between 0 and 1"
            )));
        }
        let first = n / 2;
        let second = n - first;
        let q1 = first_mass / first as f64;
        let q2 = (1.0 - first_mass) / second as f64;
        let mut p = vec![q1; first];
        p.extend(std::iter::repeat_n(q2, second));
        Ok(DrawingDistribution::Explicit(p))
    }

    /// Probabilities proportional to `1, 2, .., n`: every coupon distinct.
    pub fn linear(n: usize) -> Self {
        let total = (n * (n + 1) / 2) as f64;
        DrawingDistribution::Explicit((1..=n).map(|i| i as f64 / total).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            DrawingDistribution::Uniform { n } => *n,
            DrawingDistribution::Explicit(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn prob(&self, i: usize) -> f64 {
        match self {
            DrawingDistribution::Uniform { n } => 1.0 / *n as f64,
            DrawingDistribution::Explicit(p) => p[i],
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.prob(i)).collect()
    }

    /// True for the uniform variant and for explicit vectors whose entries are all equal.
    pub fn is_uniform(&self) -> bool {
        match self {
            DrawingDistribution::Uniform { .. } => true,
            DrawingDistribution::Explicit(p) => p.windows(2).all(|w| w[0] == w[1]),
        }
    }
}
