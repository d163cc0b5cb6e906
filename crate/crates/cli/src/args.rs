use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Parser)]
#[command(
    name = "zenolink",
    version,
    about = "Simulate and optimize counterfactual quantum communication over nested Zeno interferometers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form success probabilities and costs for one (M, N) cell.
    Analyze(AnalyzeArgs),
    /// Exact distribution plus a seeded Monte Carlo ensemble.
    Simulate(SimulateArgs),
    /// Grid search for the cheapest (M, N) at a target success probability.
    Optimize(OptimizeArgs),
    /// Sweep over N at fixed M, or over the source prior q.
    Sweep(SweepArgs),
    /// Channel and time budget for sending a bit string.
    Plan(PlanArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file (atomically) instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn cycles() -> clap::builder::RangedU64ValueParser<u64> {
    clap::value_parser!(u64).range(1..)
}

fn probability(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(format!("{v} is outside [0, 1]"))
    }
}

fn target(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v > 0.0 && v < 1.0 {
        Ok(v)
    } else {
        Err(format!("{v} is outside (0, 1)"))
    }
}

fn round_trip(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(format!("{v} must be finite and non-negative"))
    }
}

fn finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("{v} is not finite"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedArg {
    Fixed(u64),
    Random,
}

fn seed(s: &str) -> Result<SeedArg, String> {
    if s == "random" {
        return Ok(SeedArg::Random);
    }
    s.parse()
        .map(SeedArg::Fixed)
        .map_err(|_| format!("'{s}' is neither an unsigned integer nor 'random'"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Semi,
    Nested,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VariantArg {
    Original,
    Modified,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BitArg {
    #[value(name = "0")]
    Zero,
    #[value(name = "1")]
    One,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    N,
    Q,
}

#[derive(Debug, Clone, Args)]
pub struct AnalyzeArgs {
    /// Outer cycles.
    #[arg(long = "m", value_parser = cycles())]
    pub m: u64,
    /// Inner cycles.
    #[arg(long = "n", value_parser = cycles())]
    pub n: u64,
    /// Source prior Pr[b = 0].
    #[arg(long = "q", value_parser = probability)]
    pub q: f64,
    /// Target end-to-end success probability; enables x and zeta.
    #[arg(long = "p", value_parser = target)]
    pub p: Option<f64>,
    /// Round-trip time in seconds.
    #[arg(long = "tc", value_parser = round_trip)]
    pub tc: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "nested")]
    pub kind: KindArg,
    /// Outer cycles (nested only).
    #[arg(long = "m", value_parser = cycles())]
    pub m: Option<u64>,
    #[arg(long = "n", value_parser = cycles())]
    pub n: u64,
    #[arg(long, value_enum)]
    pub bit: BitArg,
    /// Nested only; defaults to original.
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long, value_parser = cycles(), default_value_t = 100_000)]
    pub trials: u64,
    /// Master seed, or `random` to draw one from the OS.
    #[arg(long, value_parser = seed)]
    pub seed: Option<SeedArg>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct OptimizeArgs {
    #[arg(long = "q", value_parser = probability)]
    pub q: f64,
    #[arg(long = "p", value_parser = target)]
    pub p: f64,
    #[arg(long = "m-max", value_parser = cycles(), default_value_t = zenolink_core::optimizer::DEFAULT_GRID_MAX)]
    pub m_max: u64,
    #[arg(long = "n-max", value_parser = cycles(), default_value_t = zenolink_core::optimizer::DEFAULT_GRID_MAX)]
    pub n_max: u64,
    #[arg(long = "tc", value_parser = round_trip)]
    pub tc: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub axis: Axis,
    #[arg(long, value_parser = finite)]
    pub from: f64,
    #[arg(long, value_parser = finite)]
    pub to: f64,
    /// Step between points; defaults to 1 for the N axis.
    #[arg(long, value_parser = finite)]
    pub step: Option<f64>,
    /// Source prior (N axis).
    #[arg(long = "q", value_parser = probability)]
    pub q: Option<f64>,
    /// Outer cycles (N axis).
    #[arg(long = "m", value_parser = cycles())]
    pub m: Option<u64>,
    /// Target success probability (q axis).
    #[arg(long = "p", value_parser = target)]
    pub p: Option<f64>,
    #[arg(long = "m-max", value_parser = cycles(), default_value_t = zenolink_core::optimizer::DEFAULT_GRID_MAX)]
    pub m_max: u64,
    #[arg(long = "n-max", value_parser = cycles(), default_value_t = zenolink_core::optimizer::DEFAULT_GRID_MAX)]
    pub n_max: u64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct PlanArgs {
    /// Bits to send, e.g. 0110.
    #[arg(long)]
    pub bits: String,
    /// Per-bit target success probability.
    #[arg(long = "p", value_parser = target)]
    pub p: f64,
    #[arg(long = "m", value_parser = cycles())]
    pub m: u64,
    #[arg(long = "n", value_parser = cycles())]
    pub n: u64,
    /// Round-trip time in seconds; times are in units of it when omitted.
    #[arg(long = "tc", value_parser = round_trip)]
    pub tc: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}
