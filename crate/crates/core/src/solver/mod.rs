//! Exact expectation and second moment of the collection time.
//!
//! All three engines run the same layered dynamic program: layer `b` holds the
//! states reached after `b` tracked draws, each carrying its reach probability
//! and probability-weighted draw moments ([`StateMoments`]). Terminal states
//! (those with `k` complete coupons) are folded into running totals as soon as
//! they appear, so only two layers are ever alive.
//!
//! The engines differ only in how states are represented: one full count
//! vector per state (BA), a single count-of-counts vector under a uniform
//! distribution (UDA), or one count-of-counts vector per group of equally
//! likely coupons (DPSA).

mod indexed;
mod levels;
mod moments;
pub mod reference;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_bigint::BigUint;
use serde::Serialize;

use crate::counting;
use crate::error::{CcpError, Result};
use crate::model::{group_decompose, Problem};

pub use moments::{accumulate_successor, MomentsSum, StateMoments};

/// Default bound on the number of states an engine may expand.
pub const DEFAULT_STATE_CAP: u64 = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Engine {
    #[serde(rename = "BA")]
    Ba,
    #[serde(rename = "UDA")]
    Uda,
    #[serde(rename = "DPSA")]
    Dpsa,
}

impl Engine {
    pub fn representation(self) -> Representation {
        match self {
            Engine::Ba => Representation::Full,
            Engine::Uda => Representation::Multiplicity,
            Engine::Dpsa => Representation::Grouped,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Engine::Ba => "BA",
            Engine::Uda => "UDA",
            Engine::Dpsa => "DPSA",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EngineChoice {
    #[default]
    Auto,
    Ba,
    Uda,
    Dpsa,
}

impl FromStr for EngineChoice {
    type Err = CcpError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(EngineChoice::Auto),
            "ba" => Ok(EngineChoice::Ba),
            "uda" => Ok(EngineChoice::Uda),
            "dpsa" => Ok(EngineChoice::Dpsa),
            other => Err(CcpError::InvalidInput(format!("unknown engine '{other}'"))),
        }
    }
}

/// State representation used by the layered program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    Full,
    Multiplicity,
    Grouped,
}

impl Representation {
    pub fn engine(self) -> Engine {
        match self {
            Representation::Full => Engine::Ba,
            Representation::Multiplicity => Engine::Uda,
            Representation::Grouped => Engine::Dpsa,
        }
    }
}

/// Which implementation of the layered program to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Kernel {
    /// Dense layers indexed by per-group ranks; predecessors are pulled.
    #[default]
    Indexed,
    /// Hash-keyed layers built by pushing each state's successor list.
    Hashed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolveOptions {
    pub state_cap: u64,
    /// Worker threads for the indexed kernel. Results do not depend on it.
    pub threads: usize,
    pub kernel: Kernel,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            state_cap: DEFAULT_STATE_CAP,
            threads: 1,
            kernel: Kernel::Indexed,
        }
    }
}

/// Per-layer bookkeeping, kept for conservation checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerStats {
    pub layer: usize,
    pub live_states: u64,
    pub terminal_states: u64,
    /// Reach probability still in flight after this layer.
    pub live_mass: f64,
    /// Reach probability absorbed at this layer or earlier.
    pub absorbed_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Diagnostics {
    /// `E[X^2] - E[X]^2` before clamping at zero.
    pub variance_raw: f64,
    /// Largest `|live + absorbed - 1|` over all layers.
    pub max_conservation_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveResult {
    pub expectation: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub engine: Engine,
    pub states_expanded: u64,
    pub edges_traversed: u64,
    pub layers: usize,
    pub terminal_mass: f64,
    #[serde(rename = "wall_time_s")]
    pub wall_time: f64,
    pub diagnostics: Diagnostics,
    #[serde(skip)]
    pub layer_stats: Vec<LayerStats>,
}

impl SolveResult {
    /// True when the numeric outputs and telemetry counters are identical
    /// (wall time excluded).
    pub fn same_values(&self, other: &SolveResult) -> bool {
        self.expectation.to_bits() == other.expectation.to_bits()
            && self.second_moment.to_bits() == other.second_moment.to_bits()
            && self.variance.to_bits() == other.variance.to_bits()
            && self.terminal_mass.to_bits() == other.terminal_mass.to_bits()
            && self.states_expanded == other.states_expanded
            && self.edges_traversed == other.edges_traversed
            && self.layers == other.layers
    }
}

/// Counters shared by both kernels.
#[derive(Debug, Default)]
pub(crate) struct Tally {
    pub states_expanded: u64,
    pub edges: u64,
    pub layers: usize,
    pub terminal: MomentsSum,
    pub max_conservation_error: f64,
    pub layer_stats: Vec<LayerStats>,
}

impl Tally {
    pub fn check_cap(&self, cap: u64) -> Result<()> {
        if self.states_expanded > cap {
            return Err(CcpError::Overflow { cap, predicted: None });
        }
        Ok(())
    }

    pub fn close_layer(&mut self, layer: usize, live_states: u64, terminal_states: u64, live_mass: f64) {
        let absorbed = self.terminal.value().p;
        let err = (live_mass + absorbed - 1.0).abs();
        self.max_conservation_error = self.max_conservation_error.max(err);
        self.layer_stats.push(LayerStats {
            layer,
            live_states,
            terminal_states,
            live_mass,
            absorbed_mass: absorbed,
        });
        if layer > 0 {
            self.layers = layer;
        }
    }

    pub fn finish(self, engine: Engine, started: Instant) -> SolveResult {
        let totals = self.terminal.value();
        // the absorbed mass is 1 up to rounding of the input; conditioning on
        // it keeps degenerate instances exact
        let (e, e2) = (totals.u1 / totals.p, totals.u2 / totals.p);
        let raw = e2 - e * e;
        SolveResult {
            expectation: e,
            second_moment: e2,
            variance: raw.max(0.0),
            engine,
            states_expanded: self.states_expanded,
            edges_traversed: self.edges,
            layers: self.layers,
            terminal_mass: totals.p,
            wall_time: started.elapsed().as_secs_f64(),
            diagnostics: Diagnostics {
                variance_raw: raw,
                max_conservation_error: self.max_conservation_error,
            },
            layer_stats: self.layer_stats,
        }
    }
}

/// Closed-form chain size for the engine, where one is known.
pub fn predicted_states(problem: &Problem, engine: Engine) -> Option<BigUint> {
    let (n, k, t) = (problem.n() as u64, problem.k() as u64, problem.t() as u64);
    match engine {
        Engine::Ba => counting::count_ba(n, k, t).ok().map(|c| c.vertices),
        Engine::Uda => counting::count_uda(n, k, t).ok().map(|c| c.vertices),
        Engine::Dpsa if k == n => {
            let sizes = group_decompose(problem.dist()).sizes();
            counting::count_dpsa(&sizes, t).ok().map(|c| c.vertices)
        }
        Engine::Dpsa => None,
    }
}

/// Layered program over the given representation.
pub fn run_layered_dp(
    problem: &Problem,
    representation: Representation,
    options: &SolveOptions,
) -> Result<SolveResult> {
    if representation == Representation::Multiplicity && !problem.dist().is_uniform() {
        return Err(CcpError::NotUniform);
    }
    if let Some(predicted) = predicted_states(problem, representation.engine()) {
        if predicted > BigUint::from(options.state_cap) {
            return Err(CcpError::Overflow {
                cap: options.state_cap,
                predicted: Some(predicted),
            });
        }
    }
    match options.kernel {
        Kernel::Indexed => indexed::run(problem, representation, options),
        Kernel::Hashed => reference::run_hashed(problem, representation, options).map(|r| r.result),
    }
}

pub fn solve_ba(problem: &Problem) -> Result<SolveResult> {
    run_layered_dp(problem, Representation::Full, &SolveOptions::default())
}

pub fn solve_uda(problem: &Problem) -> Result<SolveResult> {
    run_layered_dp(problem, Representation::Multiplicity, &SolveOptions::default())
}

pub fn solve_dpsa(problem: &Problem) -> Result<SolveResult> {
    run_layered_dp(problem, Representation::Grouped, &SolveOptions::default())
}

/// Engine the front door would run for this instance.
pub fn select_engine(problem: &Problem, choice: EngineChoice) -> Result<Engine> {
    match choice {
        EngineChoice::Auto => {
            if problem.dist().is_uniform() {
                Ok(Engine::Uda)
            } else if group_decompose(problem.dist()).len() < problem.n() {
                Ok(Engine::Dpsa)
            } else {
                Ok(Engine::Ba)
            }
        }
        EngineChoice::Ba => Ok(Engine::Ba),
        EngineChoice::Dpsa => Ok(Engine::Dpsa),
        EngineChoice::Uda if problem.dist().is_uniform() => Ok(Engine::Uda),
        EngineChoice::Uda => Err(CcpError::EngineMismatch {
            requested: "UDA".into(),
            reason: "drawing distribution is not uniform".into(),
        }),
    }
}

pub fn solve(problem: &Problem, choice: EngineChoice) -> Result<SolveResult> {
    solve_with(problem, choice, &SolveOptions::default())
}

pub fn solve_with(problem: &Problem, choice: EngineChoice, options: &SolveOptions) -> Result<SolveResult> {
    let engine = select_engine(problem, choice)?;
    run_layered_dp(problem, engine.representation(), options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DrawingDistribution;

    fn explicit(p: &[f64]) -> DrawingDistribution {
        DrawingDistribution::explicit(p.to_vec())
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
    }

    fn all_kernels(problem: &Problem, repr: Representation) -> Vec<SolveResult> {
        [Kernel::Indexed, Kernel::Hashed]
            .into_iter()
            .map(|kernel| {
                run_layered_dp(
                    problem,
                    repr,
                    &SolveOptions {
                        kernel,
                        ..Default::default()
                    },
                )
                .unwrap()
            })
            .collect()
    }

    #[test]
    fn trivial_instances() {
        // (n, k, t, E, Var); E and Var of the t=1 cases from independent geometric stages
        let cases = [
            (1, 1, 1, 1.0, 0.0),
            (2, 2, 1, 3.0, 2.0),
            (1, 1, 2, 2.0, 0.0),
            (3, 3, 1, 5.5, 6.75),
            (2, 1, 1, 1.0, 0.0),
        ];
        for (n, k, t, e, var) in cases {
            let problem = Problem::uniform(n, k, t).unwrap();
            for repr in [
                Representation::Full,
                Representation::Multiplicity,
                Representation::Grouped,
            ] {
                for r in all_kernels(&problem, repr) {
                    assert!(
                        close(r.expectation, e, 1e-12),
                        "{n} {k} {t} {repr:?}: {}",
                        r.expectation
                    );
                    assert!((r.variance - var).abs() < 1e-12, "{n} {k} {t} {repr:?}: {}", r.variance);
                    assert!((r.terminal_mass - 1.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn ba_counts_on_example_instance() {
        let problem = Problem::new(3, 2, 2, explicit(&[0.2, 0.3, 0.5])).unwrap();
        for r in all_kernels(&problem, Representation::Full) {
            assert_eq!((r.states_expanded, r.edges_traversed, r.layers), (26, 48, 5));
        }
    }

    #[test]
    fn kernels_agree_on_values_and_counts() {
        let dist = explicit(&[0.1, 0.25, 0.1, 0.3, 0.25]);
        for k in 1..=5 {
            for t in 1..=3 {
                let problem = Problem::new(5, k, t, dist.clone()).unwrap();
                for repr in [Representation::Full, Representation::Grouped] {
                    let rs = all_kernels(&problem, repr);
                    assert!(close(rs[0].expectation, rs[1].expectation, 1e-12));
                    assert!(close(rs[0].second_moment, rs[1].second_moment, 1e-12));
                    assert_eq!(rs[0].states_expanded, rs[1].states_expanded);
                    assert_eq!(rs[0].edges_traversed, rs[1].edges_traversed);
                    assert_eq!(rs[0].layers, rs[1].layers);
                }
            }
        }
    }

    #[test]
    fn layer_count_bound() {
        for (n, k, t) in [(4, 2, 3), (5, 5, 2), (6, 1, 1), (3, 3, 4)] {
            let problem = Problem::uniform(n, k, t).unwrap();
            let r = solve_uda(&problem).unwrap();
            assert_eq!(r.layers, problem.max_tracked_draws());
            assert_eq!(r.layer_stats.len(), r.layers + 1);
        }
    }

    #[test]
    fn auto_policy() {
        let uniform = Problem::uniform(10, 10, 1).unwrap();
        assert_eq!(select_engine(&uniform, EngineChoice::Auto).unwrap(), Engine::Uda);
        let two = Problem::new(4, 4, 1, explicit(&[0.35, 0.35, 0.15, 0.15])).unwrap();
        assert_eq!(select_engine(&two, EngineChoice::Auto).unwrap(), Engine::Dpsa);
        let distinct = Problem::new(3, 2, 2, explicit(&[0.2, 0.3, 0.5])).unwrap();
        assert_eq!(select_engine(&distinct, EngineChoice::Auto).unwrap(), Engine::Ba);
        assert!(matches!(
            select_engine(&distinct, EngineChoice::Uda),
            Err(CcpError::EngineMismatch { .. })
        ));
        assert_eq!(solve(&two, EngineChoice::Auto).unwrap().engine, Engine::Dpsa);
    }

    #[test]
    fn uda_rejects_non_uniform() {
        let problem = Problem::new(3, 2, 2, explicit(&[0.2, 0.3, 0.5])).unwrap();
        assert_eq!(solve_uda(&problem).unwrap_err(), CcpError::NotUniform);
        let equal = Problem::new(2, 2, 1, explicit(&[0.5, 0.5])).unwrap();
        assert!(close(solve_uda(&equal).unwrap().expectation, 3.0, 1e-15));
    }

    #[test]
    fn state_cap_uses_prediction_and_observation() {
        let problem = Problem::uniform(12, 12, 2).unwrap();
        let opts = SolveOptions {
            state_cap: 1000,
            ..Default::default()
        };
        match run_layered_dp(&problem, Representation::Full, &opts) {
            Err(CcpError::Overflow {
                cap: 1000,
                predicted: Some(p),
            }) => {
                assert_eq!(p, BigUint::from(3u64).pow(12))
            }
            other => panic!("{other:?}"),
        }
        // no closed form for grouped chains with k < n: the kernel notices on its own
        let dist = DrawingDistribution::two_groups(12, 0.3).unwrap();
        let problem = Problem::new(12, 6, 2, dist).unwrap();
        let opts = SolveOptions {
            state_cap: 50,
            ..Default::default()
        };
        assert!(matches!(
            run_layered_dp(&problem, Representation::Grouped, &opts),
            Err(CcpError::Overflow { predicted: None, .. })
        ));
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let dist = DrawingDistribution::two_groups(10, 0.3).unwrap();
        let problem = Problem::new(10, 8, 3, dist).unwrap();
        let one = run_layered_dp(&problem, Representation::Grouped, &SolveOptions::default()).unwrap();
        let four = run_layered_dp(
            &problem,
            Representation::Grouped,
            &SolveOptions {
                threads: 4,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(one.same_values(&four));
    }

    #[test]
    fn variance_clamped_but_raw_kept() {
        let r = solve_uda(&Problem::uniform(1, 1, 3).unwrap()).unwrap();
        assert_eq!(r.variance, 0.0);
        assert!(r.diagnostics.variance_raw.abs() < 1e-12);
    }
}
