//! Library behind the `zenolink` binary: argument handling, dispatch and
//! the readers for every output format.

pub mod args;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use clap::error::ErrorKind;
use clap::Parser;
use zenolink_core::{
    derived_resources, optimize, plan_bitstring, run_ensemble, sweep_n, sweep_q, AnalyticPoint,
    Bit, Error, GridSpec, ProtocolParams, Reach, Variant,
};

use crate::args::{
    AnalyzeArgs, Axis, BitArg, Cli, Command, Format, KindArg, OptimizeArgs, OutputArgs, PlanArgs,
    SeedArg, SimulateArgs, SweepArgs, VariantArg, DEFAULT_SEED,
};
use crate::report::{simulate_rows, to_csv, to_json, OptimizeReport, OptimizeRow};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

pub const THREADS_ENV: &str = "ZENOLINK_THREADS";

const MAX_SWEEP_POINTS: u64 = 1_000_000;

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Infeasible(String),
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Infeasible(_) => EXIT_INFEASIBLE,
            Failure::Usage(_) | Failure::Runtime(_) => EXIT_USAGE,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Usage(msg) => write!(f, "error: {msg}"),
            Failure::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Failure::Runtime(e) => write!(f, "error: {e:#}"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

fn flag_for(name: &str) -> &str {
    match name {
        "M" => "--m",
        "N" => "--n",
        "q" => "--q",
        "P" | "P_per_bit" => "--p",
        "T_c" => "--tc",
        "trials" => "--trials",
        "M_max" => "--m-max",
        "N_max" => "--n-max",
        other => other,
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::EmptyFeasibleSet | Error::Infeasible { .. } => {
                Failure::Infeasible(e.to_string())
            }
            Error::InvalidParameter { name, reason } => {
                Failure::Usage(format!("{}: {reason}", flag_for(name)))
            }
            other => Failure::Runtime(other.into()),
        }
    }
}

/// Bytes to emit plus an optional infeasibility diagnostic that turns the
/// exit code into 2 after the output has been written.
struct Rendered {
    bytes: Vec<u8>,
    unreachable: Option<String>,
}

impl From<Vec<u8>> for Rendered {
    fn from(bytes: Vec<u8>) -> Self {
        Self {
            bytes,
            unreachable: None,
        }
    }
}

/// Parses `argv`, runs the subcommand and returns the process exit code.
pub fn run<I, S>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{}", e.render());
                    return EXIT_OK;
                }
                _ => EXIT_USAGE,
            };
            let _ = write!(stderr, "{}", e.render());
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(None) => EXIT_OK,
        Ok(Some(diagnostic)) => {
            let _ = writeln!(stderr, "unreachable: {diagnostic}");
            EXIT_INFEASIBLE
        }
        Err(f) => {
            let _ = writeln!(stderr, "{f}");
            f.exit_code()
        }
    }
}

fn thread_cap() -> Result<Option<usize>, Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(Some(n)),
        _ => Err(Failure::Usage(format!(
            "{THREADS_ENV}: '{raw}' is not a positive integer"
        ))),
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<Option<String>, Failure> {
    let output = match &cli.command {
        Command::Analyze(a) => &a.output,
        Command::Simulate(a) => &a.output,
        Command::Optimize(a) => &a.output,
        Command::Sweep(a) => &a.output,
        Command::Plan(a) => &a.output,
    }
    .clone();
    let work = move || match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Optimize(a) => optimize_cmd(&a),
        Command::Sweep(a) => sweep(&a),
        Command::Plan(a) => plan(&a),
    };
    let rendered = match thread_cap()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building thread pool")?
            .install(work)?,
        None => work()?,
    };
    emit(&output, &rendered.bytes, stdout)?;
    Ok(rendered.unreachable)
}

fn emit(output: &OutputArgs, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    match &output.out {
        Some(path) => write_atomic(path, bytes)
            .with_context(|| format!("writing {}", path.display()))
            .map_err(Failure::Runtime),
        None => stdout
            .write_all(bytes)
            .and_then(|()| stdout.flush())
            .context("writing stdout")
            .map_err(Failure::Runtime),
    }
}

/// Writes to a temporary file beside `path`, then renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path)?;
    Ok(())
}

fn render<T: serde::Serialize, R: serde::Serialize>(
    format: Format,
    command: &str,
    json: &T,
    rows: &[R],
) -> Result<Vec<u8>, Failure> {
    match format {
        Format::Json => to_json(command, json)
            .context("encoding JSON")
            .map_err(Failure::Runtime),
        Format::Csv => to_csv(rows)
            .context("encoding CSV")
            .map_err(Failure::Runtime),
    }
}

fn bit(b: BitArg) -> Bit {
    match b {
        BitArg::Zero => Bit::Zero,
        BitArg::One => Bit::One,
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<Rendered, Failure> {
    let point = AnalyticPoint::evaluate(a.m, a.n, a.q, a.p, a.tc)?;
    let bytes = render(
        a.output.format.unwrap_or(Format::Csv),
        "analyze",
        &point,
        std::slice::from_ref(&point),
    )?;
    let unreachable = (point.zeta == Some(Reach::Unreachable)).then(|| {
        format!(
            "M={} N={} q={} cannot reach P={} (lambda0={}, lambda1={})",
            a.m,
            a.n,
            a.q,
            a.p.unwrap_or_default(),
            point.lambda0,
            point.lambda1
        )
    });
    Ok(Rendered { bytes, unreachable })
}

fn simulate(a: &SimulateArgs) -> Result<Rendered, Failure> {
    let params = match a.kind {
        KindArg::Semi => {
            if a.m.is_some() {
                return Err(Failure::Usage("--m: applies only to --kind nested".into()));
            }
            if a.variant.is_some() {
                return Err(Failure::Usage(
                    "--variant: applies only to --kind nested".into(),
                ));
            }
            ProtocolParams::semi(a.n, bit(a.bit))?
        }
        KindArg::Nested => {
            let m =
                a.m.ok_or_else(|| Failure::Usage("--m: required for --kind nested".into()))?;
            let variant = match a.variant.unwrap_or(VariantArg::Original) {
                VariantArg::Original => Variant::Original,
                VariantArg::Modified => Variant::Modified,
            };
            ProtocolParams::nested(m, a.n, bit(a.bit), variant)?
        }
    };
    let seed = match a.seed.unwrap_or(SeedArg::Fixed(DEFAULT_SEED)) {
        SeedArg::Fixed(s) => s,
        SeedArg::Random => rand::random(),
    };
    let stats = run_ensemble::<f64>(params, a.trials, seed)?;
    Ok(render(
        a.output.format.unwrap_or(Format::Json),
        "simulate",
        &stats,
        &simulate_rows(&stats),
    )?
    .into())
}

fn optimize_cmd(a: &OptimizeArgs) -> Result<Rendered, Failure> {
    let spec = GridSpec::new(a.m_max, a.n_max, a.q, a.p)?;
    let result = optimize(&spec)?;
    let t_min = match a.tc {
        Some(t_c) => Some(derived_resources(result.zeta_min, a.p, t_c)?.t_min),
        None => None,
    };
    let report = OptimizeReport {
        result,
        t_c: a.tc,
        t_min,
    };
    let row = OptimizeRow::from(&report);
    Ok(render(
        a.output.format.unwrap_or(Format::Json),
        "optimize",
        &report,
        &[row],
    )?
    .into())
}

fn sweep_points(a: &SweepArgs, step: f64) -> Result<u64, Failure> {
    if step <= 0.0 {
        return Err(Failure::Usage(format!("--step: {step} must be positive")));
    }
    if a.to < a.from {
        return Err(Failure::Usage(format!(
            "--to: {} is below --from {}",
            a.to, a.from
        )));
    }
    let span = ((a.to - a.from) / step + 1e-9).floor();
    if span + 1.0 > MAX_SWEEP_POINTS as f64 {
        return Err(Failure::Usage(format!(
            "--step: range holds more than {MAX_SWEEP_POINTS} points"
        )));
    }
    Ok(span as u64 + 1)
}

fn whole(flag: &str, v: f64) -> Result<u64, Failure> {
    if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as u64)
    } else {
        Err(Failure::Usage(format!(
            "{flag}: {v} is not a positive integer"
        )))
    }
}

fn sweep(a: &SweepArgs) -> Result<Rendered, Failure> {
    let format = a.output.format.unwrap_or(Format::Csv);
    match a.axis {
        Axis::N => {
            if a.p.is_some() {
                return Err(Failure::Usage("--p: applies only to --axis q".into()));
            }
            let q =
                a.q.ok_or_else(|| Failure::Usage("--q: required for --axis n".into()))?;
            let m =
                a.m.ok_or_else(|| Failure::Usage("--m: required for --axis n".into()))?;
            let from = whole("--from", a.from)?;
            let to = whole("--to", a.to)?;
            let step = whole("--step", a.step.unwrap_or(1.0))?;
            sweep_points(a, step as f64)?;
            let rows: Vec<_> = sweep_n(q, m, from..=to)?
                .into_iter()
                .step_by(step as usize)
                .collect();
            Ok(render(format, "sweep", &rows, &rows)?.into())
        }
        Axis::Q => {
            if a.q.is_some() || a.m.is_some() {
                return Err(Failure::Usage("--q/--m: apply only to --axis n".into()));
            }
            let p =
                a.p.ok_or_else(|| Failure::Usage("--p: required for --axis q".into()))?;
            let step = a
                .step
                .ok_or_else(|| Failure::Usage("--step: required for --axis q".into()))?;
            for (flag, v) in [("--from", a.from), ("--to", a.to)] {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Failure::Usage(format!("{flag}: {v} is outside [0, 1]")));
                }
            }
            let count = sweep_points(a, step)?;
            let grid: Vec<f64> = (0..count)
                .map(|i| ((a.from + i as f64 * step) * 1e12).round() / 1e12)
                .map(|q| q.clamp(0.0, 1.0))
                .collect();
            let rows = sweep_q(p, &grid, a.m_max, a.n_max)?;
            Ok(render(format, "sweep", &rows, &rows)?.into())
        }
    }
}

/// Parses a string of `0` and `1` characters.
pub fn parse_bits(s: &str) -> Result<Vec<Bit>, Failure> {
    if s.is_empty() {
        return Err(Failure::Usage("--bits: must not be empty".into()));
    }
    s.chars()
        .map(|c| match c {
            '0' => Ok(Bit::Zero),
            '1' => Ok(Bit::One),
            other => Err(Failure::Usage(format!("--bits: '{other}' is not 0 or 1"))),
        })
        .collect()
}

fn plan(a: &PlanArgs) -> Result<Rendered, Failure> {
    let bits = parse_bits(&a.bits)?;
    let schedule = plan_bitstring(&bits, a.p, a.m, a.n, a.tc.unwrap_or(1.0))?;
    Ok(render(
        a.output.format.unwrap_or(Format::Json),
        "plan",
        &schedule,
        &schedule.bits,
    )?
    .into())
}
