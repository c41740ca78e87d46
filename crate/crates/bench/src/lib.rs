//! Instances shared by the benchmarks.

use ccp_core::{DrawingDistribution, Problem};

/// Uniform drawing, full collection.
pub fn uniform(n: usize, t: usize) -> Problem {
    Problem::uniform(n, n, t).expect("valid instance")
}

/// Two equal halves holding `mass` and `1 - mass`, full collection.
pub fn two_groups(n: usize, t: usize, mass: f64) -> Problem {
    let dist = DrawingDistribution::two_groups(n, mass).expect("valid split");
    Problem::new(n, n, t, dist).expect("valid instance")
}

/// Probabilities proportional to `1..=n`, so every coupon is distinct.
pub fn linear(n: usize, k: usize, t: usize) -> Problem {
    Problem::new(n, k, t, DrawingDistribution::linear(n)).expect("valid instance")
}
