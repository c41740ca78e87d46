//! Exact moments of the general coupon collector's problem.
//!
//! `n` coupon types are drawn independently with probabilities `p`; the
//! process stops once `k` distinct coupons have each been drawn `t` times.
//! The [`solver`] computes `E[X]` and `Var[X]` of the number of draws exactly,
//! by dynamic programming over a layered Markov chain of tracked draws.
//! [`counting`] predicts the size of that chain, [`oracles`] supply reference
//! values and [`montecarlo`] simulates the process.

// `!(x > 0.0)` style tests are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod counting;
pub mod error;
pub mod io;
pub mod model;
pub mod montecarlo;
pub mod oracles;
pub mod solver;
pub mod summation;

pub use counting::{count_ba, count_dpsa, count_uda, dpsa_bounds, ChainSize, DpsaBounds};
pub use error::{CcpError, Result};
pub use model::{group_decompose, validate_problem, DrawingDistribution, GroupDecomposition, Normalization, Problem};
pub use montecarlo::{compare, simulate, ComparisonReport, SimResult};
pub use oracles::{brute_force_linear_solve, geometric_stage_moments, harmonic_expectation, OracleResult};
pub use solver::{solve, solve_ba, solve_dpsa, solve_uda, solve_with, Engine, EngineChoice, SolveOptions, SolveResult};
