use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use noonamp_core::channel::{amplify_noon, AmplifierParams, CutoffPolicy, ModeConfig};
use noonamp_core::fock::{ModeCutoffs, NoonSpec};
use noonamp_core::gaussian::{threshold_asymmetric, threshold_symmetric, SqueezingSpec, Threshold};
use noonamp_core::husimi::{q_evaluate, QGrid};
use noonamp_core::sweep::{run_sweep, write_comparison_csv, write_rows, Family, G2Range, MethodChoice, OutputFormat, SweepConfig};
use noonamp_core::tolerances::TAIL_TOL;
use noonamp_core::verify::{verify, VerifyConfig};
use noonamp_core::Error;

#[derive(Parser)]
#[command(name = "noonamp", version, about = "Entanglement of NOON states through phase-insensitive amplifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Log-negativity along a gain grid.
    Sweep(SweepArgs),
    /// Husimi Q function of an amplified NOON state on a square grid.
    Qfunc(QfuncArgs),
    /// Run the invariant battery; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Gaussian separability gains for given squeezing and noise.
    Thresholds(ThresholdArgs),
}

#[derive(Args)]
struct CutoffArgs {
    /// `auto` or explicit per-mode cutoffs `A,B`.
    #[arg(long, default_value = "auto", value_parser = parse_cutoff)]
    cutoff: CutoffChoice,
    /// Truncated probability allowed per mode when `--cutoff auto`.
    #[arg(long, default_value_t = TAIL_TOL)]
    tail_tol: f64,
}

#[derive(Clone, Copy, Debug)]
enum CutoffChoice {
    Auto,
    Fixed(usize, usize),
}

fn parse_cutoff(s: &str) -> Result<CutoffChoice, String> {
    if s == "auto" {
        return Ok(CutoffChoice::Auto);
    }
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `auto` or `A,B`, got {s:?}"))?;
    let num = |p: &str| p.trim().parse::<usize>().map_err(|e| format!("bad cutoff {p:?}: {e}"));
    Ok(CutoffChoice::Fixed(num(a)?, num(b)?))
}

impl CutoffArgs {
    fn policy(&self) -> Result<CutoffPolicy, Error> {
        Ok(match self.cutoff {
            CutoffChoice::Auto => CutoffPolicy::Auto { tail_tol: self.tail_tol },
            CutoffChoice::Fixed(a, b) => CutoffPolicy::Fixed(ModeCutoffs::new(a, b)?),
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Schema {
    /// Every column of the sweep table.
    Full,
    /// `state_family, r, eta, g_squared, log_negativity` only.
    Comparison,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, default_value = "noon_symmetric", value_parser = parse_with::<Family>)]
    family: Family,
    /// NOON photon numbers, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "2,4,6")]
    n: Vec<usize>,
    /// Squeezing parameter for the Gaussian families.
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// Gain grid `start:stop:step`, inclusive.
    #[arg(long, default_value = "1:3:0.05", value_parser = parse_with::<G2Range>)]
    g2: G2Range,
    #[command(flatten)]
    cutoff: CutoffArgs,
    #[arg(long, default_value = "block", value_parser = parse_with::<MethodChoice>)]
    method: MethodChoice,
    /// Also evolve the master equation and report its trace distance.
    #[arg(long)]
    oracle_check: bool,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv", value_parser = parse_with::<OutputFormat>)]
    format: OutputFormat,
    #[arg(long, value_enum, default_value_t = Schema::Full)]
    schema: Schema,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Symmetric,
    AsymmetricAOnly,
}

#[derive(Args)]
struct QfuncArgs {
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 1.5)]
    g2: f64,
    #[arg(long, value_enum, default_value_t = Mode::Symmetric)]
    mode: Mode,
    /// Grid covers `[-w, w]²` in each phase-space plane; shrunk to the cutoff guard if needed.
    #[arg(long)]
    half_width: Option<f64>,
    /// Samples per axis.
    #[arg(long, default_value_t = 9)]
    points: usize,
    #[command(flatten)]
    cutoff: CutoffArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    cutoff: CutoffArgs,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long, default_value_t = 0.5)]
    r: f64,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
}

fn parse_with<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

enum Failure {
    Core(Error),
    Invariant,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Core(e.into())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Sweep(args) => sweep(args),
        Command::Qfunc(args) => qfunc(args),
        Command::Verify(args) => run_verify(args),
        Command::Thresholds(args) => thresholds(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Invariant) => ExitCode::from(1),
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}

/// Renders into memory first so a failed run never leaves a partial file.
fn emit(out: Option<&Path>, render: impl FnOnce(&mut Vec<u8>) -> Result<(), Error>) -> Result<(), Failure> {
    let mut buf = Vec::new();
    render(&mut buf)?;
    match out {
        None => io::stdout().lock().write_all(&buf)?,
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
            tmp.write_all(&buf)?;
            tmp.persist(path).map_err(|e| e.error)?;
            log::info!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn sweep(args: SweepArgs) -> Result<(), Failure> {
    let config = SweepConfig {
        family: args.family,
        n_values: args.n,
        r: args.r,
        eta: args.eta,
        g2: args.g2,
        cutoff: args.cutoff.policy()?,
        method: args.method,
        oracle_check: args.oracle_check,
    };
    let rows = run_sweep(&config)?;
    emit(args.out.as_deref(), |buf| match args.schema {
        Schema::Full => write_rows(buf, &rows, args.format),
        Schema::Comparison => write_comparison_csv(buf, &rows),
    })
}

fn qfunc(args: QfuncArgs) -> Result<(), Failure> {
    let mode = match args.mode {
        Mode::Symmetric => ModeConfig::Symmetric,
        Mode::AsymmetricAOnly => ModeConfig::AsymmetricAOnly,
    };
    let state = amplify_noon(NoonSpec::new(args.n)?, AmplifierParams::ideal(args.g2, mode)?, args.cutoff.policy()?)?;
    let c = state.cutoffs();
    let guard = |cutoff: usize| (cutoff as f64 / 8.0).sqrt();
    let width = args.half_width.unwrap_or(3.0).min(guard(c.a()));
    let alpha = QGrid::square(width, args.points).alpha;
    let beta = QGrid::square(args.half_width.unwrap_or(3.0).min(guard(c.b())), args.points).alpha;
    let grid = q_evaluate(&state, &QGrid::new(alpha, beta))?;
    emit(args.out.as_deref(), |buf| grid.write_csv(buf))
}

fn run_verify(args: VerifyArgs) -> Result<(), Failure> {
    let config = VerifyConfig { cutoff: args.cutoff.policy()?, ..VerifyConfig::default() };
    let report = verify(&config);
    let mut stdout = io::stdout().lock();
    serde_json::to_writer_pretty(&mut stdout, &report).map_err(Error::from)?;
    writeln!(stdout)?;
    for failed in report.failed() {
        eprintln!("check failed: {} ({})", failed.name, failed.detail);
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Invariant)
    }
}

fn thresholds(args: ThresholdArgs) -> Result<(), Failure> {
    let spec = SqueezingSpec::new(args.r)?;
    let symmetric = threshold_symmetric(spec, args.eta)?;
    let asymmetric = match threshold_asymmetric(args.eta)? {
        Threshold::Finite(v) => serde_json::json!(v),
        Threshold::Unbounded => serde_json::json!("unbounded"),
    };
    let value = serde_json::json!({
        "r": args.r,
        "eta": args.eta,
        "symmetric": symmetric,
        "asymmetric": asymmetric,
    });
    println!("{}", serde_json::to_string_pretty(&value).map_err(Error::from)?);
    Ok(())
}
