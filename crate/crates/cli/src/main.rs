//! Command-line front end for the s3curl toolkit: curl spectra on the
//! 3-sphere, harmonic evaluation, norm scans, zero searches, bilinear
//! recoupling reports, and a self-check battery over the exact kernels.
//!
//! Exit codes: `0` success, `2` usage or malformed input, `3` a mathematical
//! self-check failed (calibration drift, a contradiction between a sampled
//! quantity and its structural prediction, or a missing zero).

mod commands;
mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Failure;

/// Environment variable capping the worker-thread count of parallel searches.
const THREADS_ENV: &str = "S3CURL_THREADS";

#[derive(Parser)]
#[command(
    name = "s3curl",
    version,
    about = "Curl eigenmodes on the 3-sphere: spectra, harmonics, norms, zeros"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the curl spectrum for one spin up to a left-label cutoff.
    Spectrum(SpectrumArgs),
    /// Evaluate one basis mode at a point of the group manifold.
    Eval(EvalArgs),
    /// Sample the pointwise squared norm of a field at Haar-random points.
    #[command(name = "norm-scan")]
    NormScan(NormScanArgs),
    /// Search an antipodally odd field for a zero.
    Zeros(ZerosArgs),
    /// Recouple the pointwise products of the modes supporting a field.
    Recouple(RecoupleArgs),
    /// Run the invariant self-check suites and report per-check results.
    Verify(VerifyArgs),
}

/// Report format and destination, shared by every subcommand.
#[derive(Args, Clone)]
struct OutputOpts {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report to a file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SpectrumArgs {
    /// Doubled field spin `2j` (`2` selects the vector field).
    #[arg(long = "spin", value_name = "2J", default_value_t = 2, value_parser = parse_twice_nonneg)]
    two_spin: i32,
    /// Doubled left-label cutoff `2L_max`.
    #[arg(long = "lmax", value_name = "2L", default_value_t = 4, value_parser = parse_twice_nonneg)]
    two_lmax: i32,
    /// Sphere radius (must be positive).
    #[arg(long, default_value_t = 2.0, value_parser = parse_positive_real)]
    radius: f64,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct EvalArgs {
    /// Doubled field spin `2j`.
    #[arg(long = "spin", value_name = "2J", default_value_t = 2, value_parser = parse_twice_nonneg)]
    two_spin: i32,
    /// Doubled left label `2L`.
    #[arg(long = "l", value_name = "2L", value_parser = parse_twice_nonneg)]
    two_l: i32,
    /// Doubled total label `2J`.
    #[arg(long = "j", value_name = "2J", value_parser = parse_twice_nonneg)]
    two_j: i32,
    /// Doubled spectator projection `2N`.
    #[arg(long = "n", value_name = "2N", default_value_t = 0, allow_negative_numbers = true)]
    two_n: i32,
    /// Doubled total projection `2M`.
    #[arg(long = "m", value_name = "2M", default_value_t = 0, allow_negative_numbers = true)]
    two_m: i32,
    /// Sphere radius (must be positive).
    #[arg(long, default_value_t = 2.0, value_parser = parse_positive_real)]
    radius: f64,
    /// Evaluation point as quaternion components `w,x,y,z` (normalised).
    #[arg(long, value_parser = parse_point, conflicts_with = "euler", allow_hyphen_values = true)]
    point: Option<Quat>,
    /// Evaluation point as Euler angles `alpha,beta,gamma`.
    #[arg(long, value_parser = parse_euler, allow_hyphen_values = true)]
    euler: Option<Angles>,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct NormScanArgs {
    /// Field description file (JSON expansion schema).
    #[arg(long, value_name = "FILE")]
    field: PathBuf,
    /// Number of Haar-random sample points (at least 2).
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Generator seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Spread tolerance for the constant-norm classification.
    #[arg(long, default_value_t = 1e-9, value_parser = parse_positive_real)]
    tol: f64,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct ZerosArgs {
    /// Field description file (JSON expansion schema).
    #[arg(long, value_name = "FILE")]
    field: PathBuf,
    /// Generator seed for the multistart search.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct RecoupleArgs {
    /// Field description file (JSON expansion schema).
    #[arg(long, value_name = "FILE")]
    field: PathBuf,
    /// Relative drift tolerance for the calibration constants.
    #[arg(long, default_value_t = 1e-9, value_parser = parse_positive_real)]
    tol: f64,
    /// Generator seed for the calibration sample points.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct VerifyArgs {
    /// Tolerance for floating-point checks (must be positive).
    #[arg(long, default_value_t = 1e-9, value_parser = parse_positive_real)]
    tol: f64,
    /// Generator seed for the sampled checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Quadrature grid `AxBxC` for the orthonormality checks.
    #[arg(long, default_value = "8x8x16", value_parser = parse_grid)]
    grid: Grid,
    /// Run only the named suites (repeatable); defaults to every suite.
    #[arg(long, value_name = "NAME")]
    suite: Vec<String>,
    #[command(flatten)]
    output: OutputOpts,
}

/// A unit quaternion given on the command line.
#[derive(Clone, Copy)]
struct Quat([f64; 4]);

/// An Euler-angle triple given on the command line.
#[derive(Clone, Copy)]
struct Angles([f64; 3]);

/// Quadrature dimensions `(n_alpha, n_beta, n_gamma)`.
#[derive(Clone, Copy)]
struct Grid(usize, usize, usize);

fn parse_twice_nonneg(s: &str) -> Result<i32, String> {
    let v: i32 = s
        .trim()
        .parse()
        .map_err(|_| format!("expected a doubled (integer) label, got {s:?}"))?;
    if v < 0 {
        return Err(format!("doubled label must be non-negative, got {v}"));
    }
    Ok(v)
}

fn parse_positive_real(s: &str) -> Result<f64, String> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| format!("expected a real number, got {s:?}"))?;
    if !v.is_finite() || v <= 0.0 {
        return Err(format!("value must be finite and positive, got {s}"));
    }
    Ok(v)
}

fn parse_reals<const N: usize>(s: &str, what: &str) -> Result<[f64; N], String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != N {
        return Err(format!("expected {N} comma-separated values for {what}, got {s:?}"));
    }
    let mut out = [0.0; N];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse::<f64>()
            .map_err(|_| format!("cannot parse {part:?} in {what} as a real number"))?;
        if !slot.is_finite() {
            return Err(format!("{what} components must be finite, got {part}"));
        }
    }
    Ok(out)
}

fn parse_point(s: &str) -> Result<Quat, String> {
    let c = parse_reals::<4>(s, "the quaternion point")?;
    let norm = (c[0] * c[0] + c[1] * c[1] + c[2] * c[2] + c[3] * c[3]).sqrt();
    if norm < 1e-12 {
        return Err("the quaternion point must be nonzero".into());
    }
    Ok(Quat(c))
}

fn parse_euler(s: &str) -> Result<Angles, String> {
    Ok(Angles(parse_reals::<3>(s, "the Euler angles")?))
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split('x').collect();
    if parts.len() != 3 {
        return Err(format!("expected a grid of the form AxBxC, got {s:?}"));
    }
    let mut dims = [0usize; 3];
    for (slot, part) in dims.iter_mut().zip(&parts) {
        *slot = part
            .trim()
            .parse()
            .map_err(|_| format!("cannot parse grid dimension {part:?}"))?;
        if *slot < 2 {
            return Err(format!("grid dimensions must be at least 2, got {part}"));
        }
    }
    Ok(Grid(dims[0], dims[1], dims[2]))
}

fn init_threads() -> Result<(), Failure> {
    let raw = match std::env::var(THREADS_ENV) {
        Ok(raw) => raw,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(Failure::Usage(format!("cannot read {THREADS_ENV}: {e}"))),
    };
    let threads: usize = match raw.trim().parse() {
        Ok(n) if n >= 1 => n,
        _ => {
            return Err(Failure::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {raw:?}"
            )))
        }
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Usage(format!("cannot configure the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    match cli.command {
        Command::Spectrum(args) => commands::spectrum(args),
        Command::Eval(args) => commands::eval(args),
        Command::NormScan(args) => commands::norm_scan(args),
        Command::Zeros(args) => commands::zeros(args),
        Command::Recouple(args) => commands::recouple(args),
        Command::Verify(args) => verify::run(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => failure.exit(),
    }
}
