//! Seeded simulation of the drawing process and comparison with exact moments.
//!
//! Trial `i` draws from its own ChaCha8 stream: the generator is seeded with
//! `seed` and switched to stream `i`. A trial's outcome therefore depends only
//! on `(seed, i)`, and the summary statistics are exact integer sums, so the
//! result does not depend on how trials are spread over threads.

mod sampler;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CcpError, Result};
use crate::model::Problem;
use crate::solver::{solve_with, EngineChoice, SolveOptions, SolveResult};

pub use sampler::{Sampler, SamplerKind, ALIAS_THRESHOLD};

/// Name and version of the trial stream scheme.
pub const GENERATOR: &str = "chacha8-stream/1";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub iterations: u64,
    pub seed: u64,
    pub mean: f64,
    pub sample_variance: f64,
    pub std_error: f64,
    pub min: u64,
    pub max: u64,
    pub generator: &'static str,
    pub sampler: SamplerKind,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
}

impl SimResult {
    /// Equality of everything except wall time.
    pub fn same_values(&self, other: &SimResult) -> bool {
        SimResult {
            wall_time: 0.0,
            ..self.clone()
        } == SimResult {
            wall_time: 0.0,
            ..other.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub exact: SolveResult,
    pub sim: SimResult,
    /// `|mean - E[X]|`.
    pub abs_error: f64,
    /// `|mean - E[X]| / E[X]`.
    pub rel_error: f64,
    /// `(mean - E[X]) / std_error`; absent when the sample has no spread.
    pub z_score: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct Totals {
    sum: u128,
    sum_sq: u128,
    min: u64,
    max: u64,
}

impl Totals {
    const EMPTY: Totals = Totals {
        sum: 0,
        sum_sq: 0,
        min: u64::MAX,
        max: 0,
    };

    fn push(&mut self, x: u64) {
        self.sum += x as u128;
        self.sum_sq += (x as u128) * (x as u128);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    fn merge(self, o: Totals) -> Totals {
        Totals {
            sum: self.sum + o.sum,
            sum_sq: self.sum_sq + o.sum_sq,
            min: self.min.min(o.min),
            max: self.max.max(o.max),
        }
    }
}

/// Draws until `k` coupons hold `t` copies; returns the number of draws.
fn run_trial(rng: &mut ChaCha8Rng, sampler: &Sampler, counts: &mut [u32], k: usize, t: u32) -> u64 {
    counts.fill(0);
    let mut complete = 0;
    let mut draws = 0u64;
    loop {
        let i = sampler.sample(rng);
        draws += 1;
        counts[i] += 1;
        if counts[i] == t {
            complete += 1;
            if complete == k {
                return draws;
            }
        }
    }
}

fn run_range(problem: &Problem, sampler: &Sampler, seed: u64, trials: std::ops::Range<u64>) -> Totals {
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0u32; problem.n()];
    let mut totals = Totals::EMPTY;
    for i in trials {
        let mut rng = base.clone();
        rng.set_stream(i);
        totals.push(run_trial(
            &mut rng,
            sampler,
            &mut counts,
            problem.k(),
            problem.t() as u32,
        ));
    }
    totals
}

pub fn simulate(problem: &Problem, iterations: u64, seed: u64) -> Result<SimResult> {
    simulate_with(problem, iterations, seed, 1)
}

/// [`simulate`] over `threads` workers; the result is the same for any count.
pub fn simulate_with(problem: &Problem, iterations: u64, seed: u64, threads: usize) -> Result<SimResult> {
    if iterations < 1 {
        return Err(CcpError::InvalidInput("iterations must be at least 1".into()));
    }
    let started = Instant::now();
    let sampler = Sampler::new(&problem.dist().probabilities());
    let totals = if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CcpError::Numerical(format!("thread pool: {e}")))?;
        let chunk = iterations.div_ceil(threads as u64 * 8).max(1);
        let starts: Vec<u64> = (0..iterations).step_by(chunk as usize).collect();
        pool.install(|| {
            starts
                .par_iter()
                .map(|&s| run_range(problem, &sampler, seed, s..(s + chunk).min(iterations)))
                .reduce(|| Totals::EMPTY, Totals::merge)
        })
    } else {
        run_range(problem, &sampler, seed, 0..iterations)
    };

    let n = iterations as u128;
    let mean = totals.sum as f64 / iterations as f64;
    let sample_variance = if iterations > 1 {
        // exact numerator: n * sum(x^2) - (sum x)^2
        let num = n * totals.sum_sq - totals.sum * totals.sum;
        num as f64 / (n * (n - 1)) as f64
    } else {
        0.0
    };
    Ok(SimResult {
        iterations,
        seed,
        mean,
        sample_variance,
        std_error: (sample_variance / iterations as f64).sqrt(),
        min: totals.min,
        max: totals.max,
        generator: GENERATOR,
        sampler: sampler.kind(),
        wall_time: started.elapsed().as_secs_f64(),
    })
}

/// Exact moments next to a simulation of the same instance.
pub fn compare(problem: &Problem, choice: EngineChoice, iterations: u64, seed: u64) -> Result<ComparisonReport> {
    compare_with(problem, choice, iterations, seed, &SolveOptions::default())
}

pub fn compare_with(
    problem: &Problem,
    choice: EngineChoice,
    iterations: u64,
    seed: u64,
    options: &SolveOptions,
) -> Result<ComparisonReport> {
    let exact = solve_with(problem, choice, options)?;
    let sim = simulate_with(problem, iterations, seed, options.threads)?;
    Ok(report(exact, sim))
}

/// Assembles a report from results computed elsewhere.
pub fn report(exact: SolveResult, sim: SimResult) -> ComparisonReport {
    let diff = sim.mean - exact.expectation;
    let z = diff / sim.std_error;
    ComparisonReport {
        abs_error: diff.abs(),
        rel_error: diff.abs() / exact.expectation,
        z_score: z.is_finite().then_some(z),
        exact,
        sim,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DrawingDistribution;

    #[test]
    fn single_coupon_is_deterministic() {
        let p = Problem::new(1, 1, 3, DrawingDistribution::explicit(vec![1.0])).unwrap();
        let r = simulate(&p, 100, 12345).unwrap();
        assert_eq!((r.mean, r.sample_variance, r.min, r.max), (3.0, 0.0, 3, 3));
        let c = compare(&p, EngineChoice::Auto, 100, 1).unwrap();
        assert_eq!(c.abs_error, 0.0);
        assert_eq!(c.z_score, None);
    }

    #[test]
    fn two_uniform_coupons() {
        let r = simulate(&Problem::uniform(2, 2, 1).unwrap(), 100_000, 42).unwrap();
        assert!((2.96..=3.04).contains(&r.mean), "{}", r.mean);
        assert!((r.std_error - (r.sample_variance / 1e5).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn example_instance_z_score() {
        let p = Problem::new(3, 2, 2, DrawingDistribution::explicit(vec![0.2, 0.3, 0.5])).unwrap();
        let c = compare(&p, EngineChoice::Ba, 100_000, 2024).unwrap();
        assert!(c.z_score.unwrap().abs() < 5.0, "{:?}", c.z_score);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let p = Problem::uniform(8, 6, 2).unwrap();
        let one = simulate(&p, 5_000, 99).unwrap();
        let three = simulate_with(&p, 5_000, 99, 3).unwrap();
        assert!(one.same_values(&three));
        assert!(one.same_values(&simulate(&p, 5_000, 99).unwrap()));
    }

    #[test]
    fn draws_never_below_kt() {
        let p = Problem::uniform(5, 3, 3).unwrap();
        let r = simulate(&p, 2_000, 5).unwrap();
        assert!(r.min >= 9);
    }

    #[test]
    fn rejects_zero_iterations() {
        assert!(simulate(&Problem::uniform(2, 2, 1).unwrap(), 0, 1).is_err());
    }

    #[test]
    fn alias_sampler_for_many_coupons() {
        let r = simulate(&Problem::uniform(80, 10, 1).unwrap(), 10, 3).unwrap();
        assert_eq!(r.sampler, SamplerKind::Alias);
    }
}
