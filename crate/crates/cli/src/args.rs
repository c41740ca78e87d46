use clap::{Args, Parser, Subcommand, ValueEnum};

use ccp_core::solver::DEFAULT_STATE_CAP;
use ccp_core::EngineChoice;

#[derive(Debug, Parser)]
#[command(
    name = "ccp",
    version,
    about = "Exact moments of the general coupon collector's problem"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact expectation, second moment and variance.
    Solve(SolveArgs),
    /// Closed-form chain sizes for every engine that has one.
    Count(CountArgs),
    /// Monte Carlo estimate of the expectation.
    Simulate(SimulateArgs),
    /// Exact moments next to a simulation of the same instance.
    Compare(CompareArgs),
    /// Timing sweep over n, written as CSV.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Instance {
    /// Number of coupon types.
    #[arg(long)]
    pub n: usize,
    /// Number of coupon types to complete.
    #[arg(long)]
    pub k: usize,
    /// Copies needed per completed coupon.
    #[arg(long)]
    pub t: usize,
    #[command(flatten)]
    pub dist: DistSource,
    /// Divide explicit probabilities by their sum when it is within 1e-3 of one.
    #[arg(long)]
    pub renormalize: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct DistSource {
    /// Every coupon equally likely.
    #[arg(long)]
    pub uniform: bool,
    /// Probability file (JSON array or whitespace-separated) or inline comma-separated list.
    #[arg(long, value_name = "FILE|LIST")]
    pub probs: Option<String>,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value_t = EngineArg::Auto)]
    pub engine: EngineArg,
    /// Largest number of states an engine may expand.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    pub state_cap: u64,
    /// Worker threads; results do not depend on this.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub iterations: u64,
    /// Decimal or 0x-prefixed hexadecimal.
    #[arg(long, default_value = "0xC0FFEE", value_parser = parse_seed)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub output: Format,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub output: Format,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub threads: u64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub output: Format,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub instance: Instance,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub output: Format,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Strictly increasing coupon counts.
    #[arg(long, value_delimiter = ',', default_value = "50,100,150,200,250,300")]
    pub sweep: Vec<usize>,
    /// Coupons to complete; defaults to n at every sweep point.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub t: usize,
    /// `uniform`, or `two-groups:MASS` with the first half of the coupons sharing MASS.
    #[arg(long, default_value = "uniform", value_parser = parse_family)]
    pub family: Family,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Simulation sizes; each adds one row per sweep point.
    #[arg(long, value_delimiter = ',')]
    pub mc_iters: Vec<u64>,
    #[arg(long, default_value = "0xC0FFEE", value_parser = parse_seed)]
    pub seed: u64,
    /// Timed repetitions per row; the median is reported.
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub output: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EngineArg {
    Auto,
    Ba,
    Uda,
    Dpsa,
}

impl From<EngineArg> for EngineChoice {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Auto => EngineChoice::Auto,
            EngineArg::Ba => EngineChoice::Ba,
            EngineArg::Uda => EngineChoice::Uda,
            EngineArg::Dpsa => EngineChoice::Dpsa,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    Uniform,
    TwoGroups(f64),
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

fn parse_family(s: &str) -> Result<Family, String> {
    if s == "uniform" {
        return Ok(Family::Uniform);
    }
    let mass = s
        .strip_prefix("two-groups:")
        .ok_or_else(|| format!("unknown family '{s}' (expected uniform or two-groups:MASS)"))?;
    let mass: f64 = mass.parse().map_err(|_| format!("invalid group mass '{mass}'"))?;
    if !(mass > 0.0 && mass < 1.0) {
        return Err(format!("group mass {mass} must lie strictly between 0 and 1"));
    }
    Ok(Family::TwoGroups(mass))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds() {
        assert_eq!(parse_seed("0xC0FFEE"), Ok(0xC0FFEE));
        assert_eq!(parse_seed("12"), Ok(12));
        assert!(parse_seed("0xZZ").is_err());
    }

    #[test]
    fn families() {
        assert_eq!(parse_family("uniform"), Ok(Family::Uniform));
        assert_eq!(parse_family("two-groups:0.3"), Ok(Family::TwoGroups(0.3)));
        assert!(parse_family("two-groups:1.5").is_err());
        assert!(parse_family("zipf").is_err());
    }

    #[test]
    fn command_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
