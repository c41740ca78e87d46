//! Error-compensated floating point accumulation.

use std::ops::AddAssign;

/// Running sum that carries the rounding error of every addition
/// (Knuth's branch-free two-sum) and folds it back in on read.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    err: f64,
}

impl CompensatedSum {
    pub const ZERO: Self = Self { sum: 0.0, err: 0.0 };

    #[inline]
    pub fn add(&mut self, x: f64) {
        let s = self.sum + x;
        let bp = s - self.sum;
        self.err += (self.sum - (s - bp)) + (x - bp);
        self.sum = s;
    }

    /// Merge another partial sum, keeping both error terms.
    #[inline]
    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.err += other.err;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.err
    }
}

impl AddAssign<f64> for CompensatedSum {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        self.add(rhs);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::ZERO;
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_sum() {
        let xs = [1.0, 1e100, 1.0, -1e100];
        let naive: f64 = xs.iter().sum();
        let comp: CompensatedSum = xs.iter().copied().collect();
        assert_eq!(naive, 0.0);
        assert_eq!(comp.value(), 2.0);
    }

    #[test]
    fn tenths_sum_exactly() {
        let comp: CompensatedSum = std::iter::repeat_n(0.1, 10).collect();
        assert_eq!(comp.value(), 1.0);
    }

    #[test]
    fn merge_matches_sequential() {
        let mut a: CompensatedSum = (1..500).map(|i| 1.0 / i as f64).collect();
        let b: CompensatedSum = (500..1000).map(|i| 1.0 / i as f64).collect();
        a.merge(&b);
        let all: CompensatedSum = (1..1000).map(|i| 1.0 / i as f64).collect();
        assert!((a.value() - all.value()).abs() < 1e-15);
    }
}
