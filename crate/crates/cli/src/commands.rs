use std::io::Write;

use serde::Serialize;

use ccp_core::io::load_probabilities;
use ccp_core::montecarlo::{self, compare_with, simulate_with};
use ccp_core::solver::select_engine;
use ccp_core::{
    count_ba, count_dpsa, count_uda, dpsa_bounds, group_decompose, solve_with, validate_problem, CcpError, ChainSize,
    DpsaBounds, DrawingDistribution, EngineChoice, Normalization, Problem, SolveOptions,
};

use crate::args::{
    BenchArgs, Command, CompareArgs, CountArgs, EngineArgs, Family, Format, Instance, SimulateArgs, SolveArgs,
};
use crate::report::{write_csv, write_json, Failure};

/// Output schema name; bumped whenever a key is added, removed or reordered.
pub const SCHEMA: &str = "ccp-exact/1";

pub fn command_name(command: &Command) -> &'static str {
    match command {
        Command::Solve(_) => "solve",
        Command::Count(_) => "count",
        Command::Simulate(_) => "simulate",
        Command::Compare(_) => "compare",
        Command::Bench(_) => "bench",
    }
}

pub fn run(command: &Command, out: &mut impl Write) -> Result<(), Failure> {
    match command {
        Command::Solve(a) => solve(a, out),
        Command::Count(a) => count(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Compare(a) => compare(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn problem(inst: &Instance) -> Result<Problem, CcpError> {
    let dist = match &inst.dist.probs {
        Some(source) => DrawingDistribution::explicit(load_probabilities(source)?),
        None => DrawingDistribution::uniform(inst.n),
    };
    let normalization = if inst.renormalize {
        Normalization::Renormalize
    } else {
        Normalization::Strict
    };
    validate_problem(inst.n, inst.k, inst.t, dist, normalization)
}

fn options(e: &EngineArgs) -> SolveOptions {
    SolveOptions {
        state_cap: e.state_cap,
        threads: e.threads as usize,
        ..SolveOptions::default()
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: &'static str,
    command: &'static str,
    n: usize,
    k: usize,
    t: usize,
    #[serde(flatten)]
    body: &'a T,
}

fn envelope<'a, T: Serialize>(command: &'static str, p: &Problem, body: &'a T) -> Envelope<'a, T> {
    Envelope {
        schema: SCHEMA,
        command,
        n: p.n(),
        k: p.k(),
        t: p.t(),
        body,
    }
}

fn solve(a: &SolveArgs, out: &mut impl Write) -> Result<(), Failure> {
    let p = problem(&a.instance)?;
    let r = solve_with(&p, a.engine.engine.into(), &options(&a.engine))?;
    match a.output {
        Format::Json => write_json(out, &envelope("solve", &p, &r)),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                k: usize,
                t: usize,
                engine: &'static str,
                states: u64,
                edges: u64,
                layers: usize,
                expectation: f64,
                second_moment: f64,
                variance: f64,
                terminal_mass: f64,
                wall_time_s: f64,
            }
            write_csv(
                out,
                [Row {
                    n: p.n(),
                    k: p.k(),
                    t: p.t(),
                    engine: r.engine.name(),
                    states: r.states_expanded,
                    edges: r.edges_traversed,
                    layers: r.layers,
                    expectation: r.expectation,
                    second_moment: r.second_moment,
                    variance: r.variance,
                    terminal_mass: r.terminal_mass,
                    wall_time_s: r.wall_time,
                }],
            )
        }
    }
}

#[derive(Serialize)]
struct CountReport {
    groups: usize,
    ba: ChainSize,
    /// Only for uniform drawing.
    uda: Option<ChainSize>,
    /// Only for `k = n`.
    dpsa: Option<ChainSize>,
    dpsa_bounds: Option<DpsaBounds>,
}

fn count(a: &CountArgs, out: &mut impl Write) -> Result<(), Failure> {
    let p = problem(&a.instance)?;
    let (n, k, t) = (p.n() as u64, p.k() as u64, p.t() as u64);
    let groups = group_decompose(p.dist());
    let full = k == n;
    let report = CountReport {
        groups: groups.len(),
        ba: count_ba(n, k, t)?,
        uda: p.dist().is_uniform().then(|| count_uda(n, k, t)).transpose()?,
        dpsa: full.then(|| count_dpsa(&groups.sizes(), t)).transpose()?,
        dpsa_bounds: full.then(|| dpsa_bounds(n, groups.len() as u64, t)).transpose()?,
    };
    match a.output {
        Format::Json => write_json(out, &envelope("count", &p, &report)),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                engine: &'static str,
                vertices: String,
                edges: String,
            }
            let exact = [
                ("BA", Some(&report.ba)),
                ("UDA", report.uda.as_ref()),
                ("DPSA", report.dpsa.as_ref()),
            ];
            let mut rows: Vec<Row> = exact
                .into_iter()
                .filter_map(|(engine, c)| {
                    c.map(|c| Row {
                        engine,
                        vertices: c.vertices.to_string(),
                        edges: c.edges.to_string(),
                    })
                })
                .collect();
            if let Some(b) = &report.dpsa_bounds {
                rows.push(Row {
                    engine: "DPSA-bound",
                    vertices: b.vertices.to_string(),
                    edges: b.edges.to_string(),
                });
            }
            write_csv(out, rows)
        }
    }
}

fn simulate(a: &SimulateArgs, out: &mut impl Write) -> Result<(), Failure> {
    let p = problem(&a.instance)?;
    let r = simulate_with(&p, a.sim.iterations, a.sim.seed, a.threads as usize)?;
    match a.output {
        Format::Json => write_json(out, &envelope("simulate", &p, &r)),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                k: usize,
                t: usize,
                iterations: u64,
                seed: u64,
                mean: f64,
                sample_variance: f64,
                std_error: f64,
                min: u64,
                max: u64,
                generator: &'static str,
                sampler: montecarlo::SamplerKind,
                wall_time_s: f64,
            }
            write_csv(
                out,
                [Row {
                    n: p.n(),
                    k: p.k(),
                    t: p.t(),
                    iterations: r.iterations,
                    seed: r.seed,
                    mean: r.mean,
                    sample_variance: r.sample_variance,
                    std_error: r.std_error,
                    min: r.min,
                    max: r.max,
                    generator: r.generator,
                    sampler: r.sampler,
                    wall_time_s: r.wall_time,
                }],
            )
        }
    }
}

fn compare(a: &CompareArgs, out: &mut impl Write) -> Result<(), Failure> {
    let p = problem(&a.instance)?;
    let r = compare_with(
        &p,
        a.engine.engine.into(),
        a.sim.iterations,
        a.sim.seed,
        &options(&a.engine),
    )?;
    match a.output {
        Format::Json => write_json(out, &envelope("compare", &p, &r)),
        Format::Csv => {
            #[derive(Serialize)]
            struct Row {
                n: usize,
                k: usize,
                t: usize,
                engine: &'static str,
                expectation: f64,
                variance: f64,
                iterations: u64,
                seed: u64,
                mean: f64,
                std_error: f64,
                abs_error: f64,
                rel_error: f64,
                z_score: Option<f64>,
            }
            write_csv(
                out,
                [Row {
                    n: p.n(),
                    k: p.k(),
                    t: p.t(),
                    engine: r.exact.engine.name(),
                    expectation: r.exact.expectation,
                    variance: r.exact.variance,
                    iterations: r.sim.iterations,
                    seed: r.sim.seed,
                    mean: r.sim.mean,
                    std_error: r.sim.std_error,
                    abs_error: r.abs_error,
                    rel_error: r.rel_error,
                    z_score: r.z_score,
                }],
            )
        }
    }
}

#[derive(Debug, Serialize)]
struct BenchRow {
    n: usize,
    k: usize,
    t: usize,
    engine: &'static str,
    states: u64,
    edges: u64,
    expectation: f64,
    variance: f64,
    wall_time_s: f64,
    mc_iters: Option<u64>,
    mc_mean: Option<f64>,
    mc_rel_error: Option<f64>,
    mc_time_s: Option<f64>,
}

fn bench(a: &BenchArgs, out: &mut impl Write) -> Result<(), Failure> {
    if a.sweep.is_empty() || a.sweep.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Failure::Usage("--sweep values must be strictly increasing".into()));
    }
    let choice: EngineChoice = a.engine.engine.into();
    let opts = options(&a.engine);
    let mut rows = Vec::new();
    for &n in &a.sweep {
        let dist = match a.family {
            Family::Uniform => DrawingDistribution::uniform(n),
            Family::TwoGroups(mass) => DrawingDistribution::two_groups(n, mass)?,
        };
        let p = Problem::new(n, a.k.unwrap_or(n), a.t, dist)?;
        let engine = select_engine(&p, choice)?;
        let mut times = Vec::with_capacity(a.reps as usize);
        let mut exact = None;
        for _ in 0..a.reps {
            let r = solve_with(&p, choice, &opts)?;
            times.push(r.wall_time);
            exact = Some(r);
        }
        let exact = exact.expect("at least one repetition");
        let row = |wall_time_s| BenchRow {
            n,
            k: p.k(),
            t: p.t(),
            engine: engine.name(),
            states: exact.states_expanded,
            edges: exact.edges_traversed,
            expectation: exact.expectation,
            variance: exact.variance,
            wall_time_s,
            mc_iters: None,
            mc_mean: None,
            mc_rel_error: None,
            mc_time_s: None,
        };
        let exact_time = median(&mut times);
        eprintln!("n={n}: {} states, {exact_time:.3}s", exact.states_expanded);
        rows.push(row(exact_time));
        for &iters in &a.mc_iters {
            let mut times = Vec::with_capacity(a.reps as usize);
            let mut sim = None;
            for _ in 0..a.reps {
                let s = simulate_with(&p, iters, a.seed, opts.threads)?;
                times.push(s.wall_time);
                sim = Some(s);
            }
            let sim = sim.expect("at least one repetition");
            let mc_time = median(&mut times);
            eprintln!("n={n}: {iters} trials, {mc_time:.3}s");
            rows.push(BenchRow {
                mc_iters: Some(iters),
                mc_mean: Some(sim.mean),
                mc_rel_error: Some((sim.mean - exact.expectation).abs() / exact.expectation),
                mc_time_s: Some(mc_time),
                ..row(exact_time)
            });
        }
    }
    match a.output {
        Format::Csv => write_csv(out, rows),
        Format::Json => {
            #[derive(Serialize)]
            struct Sweep<'a> {
                schema: &'static str,
                command: &'static str,
                rows: &'a [BenchRow],
            }
            write_json(
                out,
                &Sweep {
                    schema: SCHEMA,
                    command: "bench",
                    rows: &rows,
                },
            )
        }
    }
}

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        (xs[m - 1] + xs[m]) / 2.0
    }
}
