//! Command-line front end.
//!
//! Exit codes: 0 success, 2 invalid usage or parameters, 3 I/O failure,
//! 4 malformed input data, 5 decomposition rejected, 6 solver failure.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rofdd_core::solvers::{reference_minimum, SolverParams, REFERENCE_ITERATIONS};
use rofdd_core::{Error, Image, PNorm};

use crate::driver::{denoise, pnorm_name, DenoiseConfig, SolverKind};
use crate::exec::{auto_workers, PoolExecutor};
use crate::metrics::psnr;
use crate::noise::add_gaussian_noise;
use crate::pgm::{read_pgm, write_pgm, PgmError};
use crate::trace::write_trace_csv;

#[derive(Debug, Parser)]
#[command(name = "rofdd", version, about = "Total-variation denoising with domain decomposition")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Add seeded Gaussian noise to a PGM image. The noise itself is not
    /// clamped, but the 8-bit output clamps to [0, 1]; the number of clamped
    /// pixels is printed.
    AddNoise(AddNoiseArgs),
    /// Denoise a PGM image.
    Denoise(DenoiseArgs),
    /// Print the PSNR of an image against a reference, in dB.
    Psnr(PsnrArgs),
    /// Denoise with a timed per-iteration trace and relative energy gaps.
    Benchmark(BenchmarkArgs),
    /// Compute and cache the reference minimum energy of an image.
    ReferenceEnergy(ReferenceArgs),
}

#[derive(Debug, Args)]
pub struct AddNoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub mean: f64,
    #[arg(long, default_value_t = 0.05)]
    pub variance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverArg {
    Fista,
    AccelPd,
    PrimalDdm,
    PdualDdm,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::Fista => Self::Fista,
            SolverArg::AccelPd => Self::AccelPd,
            SolverArg::PrimalDdm => Self::PrimalDdm,
            SolverArg::PdualDdm => Self::PdualDdm,
        }
    }
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value_t = SolverArg::PrimalDdm)]
    pub solver: SolverArg,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    /// Subdomain grid as ROWSxCOLS.
    #[arg(long, default_value = "1x1", value_parser = parse_nsub)]
    pub nsub: (usize, usize),
    /// Pointwise norm of the dual constraint: 1 (anisotropic) or 2 (isotropic).
    #[arg(long, default_value = "1", value_parser = parse_pnorm)]
    pub pnorm: PNorm,
    #[arg(long, default_value_t = 1e-3)]
    pub outer_tol: f64,
    /// Subdomain tolerance; also the tolerance of the full-domain solvers.
    /// Defaults to 1e-5 (1e-8 for `benchmark`).
    #[arg(long)]
    pub inner_tol: Option<f64>,
    #[arg(long)]
    pub max_outer: Option<usize>,
    #[arg(long)]
    pub max_inner: Option<usize>,
    /// Worker threads for subdomain solves: a positive integer or `auto`.
    #[arg(long, env = "ROFDD_WORKERS", default_value = "auto", value_parser = parse_workers)]
    pub workers: usize,
}

impl SolverArgs {
    fn config(&self, default_inner_tol: f64) -> DenoiseConfig {
        DenoiseConfig {
            solver: self.solver.into(),
            alpha: self.alpha,
            nsub: self.nsub,
            pnorm: self.pnorm,
            outer_tol: self.outer_tol,
            inner_tol: self.inner_tol.unwrap_or(default_inner_tol),
            max_outer: self.max_outer,
            max_inner: self.max_inner,
        }
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write a per-iteration CSV trace (without timings).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Clean image; when given the PSNR of the result is printed.
    #[arg(long)]
    pub original: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PsnrArgs {
    pub image: PathBuf,
    pub reference: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub max_val: f64,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub trace: PathBuf,
    /// Reference energy cache; defaults to `<input>.ref`, computed when
    /// missing or stale.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub original: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReferenceArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value_t = 10.0)]
    pub alpha: f64,
    #[arg(long, default_value = "1", value_parser = parse_pnorm)]
    pub pnorm: PNorm,
    #[arg(long, default_value_t = REFERENCE_ITERATIONS)]
    pub iterations: usize,
    /// Cache file; defaults to `<input>.ref`.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_nsub(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got {s:?}"))?;
    let r: usize = r.trim().parse().map_err(|e| format!("rows: {e}"))?;
    let c: usize = c.trim().parse().map_err(|e| format!("cols: {e}"))?;
    if r == 0 || c == 0 {
        return Err("subdomain counts must be positive".into());
    }
    Ok((r, c))
}

fn parse_pnorm(s: &str) -> Result<PNorm, String> {
    match s {
        "1" => Ok(PNorm::One),
        "2" => Ok(PNorm::Two),
        _ => Err(format!("pnorm must be 1 or 2, got {s:?}")),
    }
}

fn parse_workers(s: &str) -> Result<usize, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(auto_workers());
    }
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("workers must be a positive integer or `auto`, got {s:?}")),
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {reason}", path.display())]
    Format { path: PathBuf, reason: String },
    #[error("decomposition rejected: {0}")]
    Decomposition(Error),
    #[error("solver failed: {0}")]
    Solver(Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Io { .. } => 3,
            Self::Format { .. } => 4,
            Self::Decomposition(_) => 5,
            Self::Solver(_) => 6,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::SubdomainTooSmall { .. } => Self::Decomposition(e),
            Error::NonFinite { .. } | Error::NonConforming { .. } => Self::Solver(e),
            Error::InvalidParameter { .. }
            | Error::InvalidDims { .. }
            | Error::DimensionMismatch { .. }
            | Error::InvalidEdge { .. } => Self::Usage(e.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn read_image(path: &Path) -> Result<Image, CliError> {
    let bytes = std::fs::read(path).map_err(io_err(path))?;
    read_pgm(&bytes).map_err(|e: PgmError| CliError::Format {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(io_err(path))
}

fn same_dims(a: &Image, b: &Image, path: &Path) -> Result<(), CliError> {
    if a.dims() != b.dims() {
        let (x, y) = (a.dims(), b.dims());
        return Err(CliError::Format {
            path: path.to_path_buf(),
            reason: format!("image is {}x{}, expected {}x{}", y.rows, y.cols, x.rows, x.cols),
        });
    }
    Ok(())
}

/// Format a PSNR value; infinity prints as `inf`.
pub fn format_db(v: f64) -> String {
    if v.is_infinite() {
        "inf".into()
    } else {
        format!("{v:.6}")
    }
}

fn out_line(out: &mut dyn Write, line: String) -> Result<(), CliError> {
    writeln!(out, "{line}").map_err(io_err(Path::new("<stdout>")))
}

/// Execute one command, writing results to `out`.
pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::AddNoise(a) => add_noise(a, out),
        Command::Denoise(a) => denoise_cmd(a, out),
        Command::Psnr(a) => {
            let u = read_image(&a.image)?;
            let r = read_image(&a.reference)?;
            same_dims(&u, &r, &a.reference)?;
            if !(a.max_val > 0.0 && a.max_val.is_finite()) {
                return Err(CliError::Usage(format!("max-val must be positive, got {}", a.max_val)));
            }
            out_line(out, format_db(psnr(&u, &r, a.max_val)))
        }
        Command::Benchmark(a) => benchmark(a, out),
        Command::ReferenceEnergy(a) => {
            let f = read_image(&a.input)?;
            let cache = a.output.clone().unwrap_or_else(|| default_cache(&a.input));
            let key = CacheKey::new(&a.input, a.alpha, a.pnorm, a.iterations)?;
            let e = compute_reference(&f, &key)?;
            write_file(&cache, key.render(e).as_bytes())?;
            out_line(out, format!("{e:.16e}"))
        }
    }
}

fn add_noise(a: AddNoiseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let f = read_image(&a.input)?;
    if !a.mean.is_finite() {
        return Err(CliError::Usage("mean must be finite".into()));
    }
    let noisy = add_gaussian_noise(&f, a.mean, a.variance, a.seed).map_err(|e| CliError::Usage(e.to_string()))?;
    write_file(&a.output, &write_pgm(&noisy))?;
    let clamped = noisy.values().iter().filter(|v| !(0.0..=1.0).contains(*v)).count();
    out_line(out, format!("clamped_pixels={clamped}"))?;
    out_line(out, format!("psnr={}", format_db(psnr(&noisy, &f, 1.0))))
}

fn executor(workers: usize) -> Result<PoolExecutor, CliError> {
    PoolExecutor::new(workers).map_err(|e| CliError::Usage(format!("cannot start {workers} workers: {e}")))
}

fn denoise_cmd(a: DenoiseArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let f = read_image(&a.input)?;
    let original = a.original.as_deref().map(read_image).transpose()?;
    if let (Some(o), Some(p)) = (&original, &a.original) {
        same_dims(&f, o, p)?;
    }
    let config = a.solver.config(1e-5);
    let exec = executor(a.solver.workers)?;
    let result = denoise(&f, &config, &exec)?;
    write_file(&a.output, &write_pgm(&result.report.primal))?;
    if let Some(path) = &a.trace {
        let header = header("denoise", &a.input, &config);
        write_file(path, &write_trace_csv(&result.records(None, false), &header))?;
    }
    summary(out, &result.report, None)?;
    if let Some(o) = &original {
        out_line(out, format!("psnr={}", format_db(psnr(&result.report.primal, o, 1.0))))?;
    }
    Ok(())
}

fn header(command: &str, input: &Path, config: &DenoiseConfig) -> Vec<(String, String)> {
    let mut h = vec![
        ("command".to_string(), command.to_string()),
        ("input".to_string(), input.display().to_string()),
    ];
    h.extend(config.describe());
    h
}

fn summary(out: &mut dyn Write, r: &rofdd_core::SolveReport, clock: Option<(f64, f64)>) -> Result<(), CliError> {
    out_line(out, format!("iterations={}", r.iterations))?;
    out_line(out, format!("stop={:?}", r.stop_reason).to_lowercase())?;
    out_line(out, format!("max_inner_iters={}", r.max_inner_iterations))?;
    if let Some(e) = r.trace.last() {
        out_line(out, format!("primal_energy={:.16e}", e.primal_energy))?;
    }
    if let Some((w, v)) = clock {
        out_line(out, format!("wall_clock_seconds={w:.6}"))?;
        out_line(out, format!("virtual_wall_clock_seconds={v:.6}"))?;
    }
    Ok(())
}

fn benchmark(a: BenchmarkArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let f = read_image(&a.input)?;
    let original = a.original.as_deref().map(read_image).transpose()?;
    if let (Some(o), Some(p)) = (&original, &a.original) {
        same_dims(&f, o, p)?;
    }
    let config = a.solver.config(1e-8);
    let exec = executor(a.solver.workers)?;
    let cache = a.reference.clone().unwrap_or_else(|| default_cache(&a.input));
    let key = CacheKey::new(&a.input, config.alpha, config.pnorm, REFERENCE_ITERATIONS)?;
    let reference = match read_cache(&cache, &key) {
        Some(e) => e,
        None => {
            let e = compute_reference(&f, &key)?;
            write_file(&cache, key.render(e).as_bytes())?;
            e
        }
    };
    let result = denoise(&f, &config, &exec)?;
    let mut h = header("benchmark", &a.input, &config);
    h.push(("reference_energy".into(), format!("{reference:.16e}")));
    write_file(&a.trace, &write_trace_csv(&result.records(Some(reference), true), &h))?;
    if let Some(path) = &a.output {
        write_file(path, &write_pgm(&result.report.primal))?;
    }
    let last = result.clocks.last().copied().unwrap_or_default();
    summary(out, &result.report, Some((last.wall, last.virtual_wall)))?;
    out_line(out, format!("reference_energy={reference:.16e}"))?;
    if let Some(o) = &original {
        out_line(out, format!("psnr={}", format_db(psnr(&result.report.primal, o, 1.0))))?;
    }
    Ok(())
}

fn default_cache(input: &Path) -> PathBuf {
    let mut s = input.as_os_str().to_owned();
    s.push(".ref");
    PathBuf::from(s)
}

/// Identifies a cached reference energy: the input bytes and the parameters
/// that produced it.
#[derive(Debug, Clone, PartialEq)]
struct CacheKey {
    checksum: u64,
    alpha: f64,
    pnorm: PNorm,
    iterations: usize,
}

impl CacheKey {
    fn new(input: &Path, alpha: f64, pnorm: PNorm, iterations: usize) -> Result<Self, CliError> {
        let bytes = std::fs::read(input).map_err(io_err(input))?;
        Ok(Self {
            checksum: fnv1a(&bytes),
            alpha,
            pnorm,
            iterations,
        })
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        vec![
            ("input_fnv1a", format!("{:016x}", self.checksum)),
            ("alpha", self.alpha.to_string()),
            ("pnorm", pnorm_name(self.pnorm).to_string()),
            ("iterations", self.iterations.to_string()),
        ]
    }

    fn render(&self, energy: f64) -> String {
        let mut s = String::new();
        for (k, v) in self.fields() {
            s.push_str(&format!("{k}={v}\n"));
        }
        s.push_str(&format!("energy={energy:.16e}\n"));
        s
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// The cached energy if the file exists and matches `key`.
fn read_cache(path: &Path, key: &CacheKey) -> Option<f64> {
    let text = std::fs::read_to_string(path).ok()?;
    let pairs: Vec<(&str, &str)> = text.lines().filter_map(|l| l.split_once('=')).collect();
    let get = |k: &str| pairs.iter().find(|(a, _)| *a == k).map(|(_, v)| *v);
    for (k, v) in key.fields() {
        if get(k)? != v {
            return None;
        }
    }
    get("energy")?.parse().ok()
}

fn compute_reference(f: &Image, key: &CacheKey) -> Result<f64, CliError> {
    if key.iterations == 0 {
        return Err(CliError::Usage("iterations must be positive".into()));
    }
    let mut params = SolverParams::accel_pd(key.alpha).with_max_iter(key.iterations);
    params.pnorm = key.pnorm;
    Ok(reference_minimum(f, &params)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flag_parsers() {
        assert_eq!(parse_nsub("4x2"), Ok((4, 2)));
        assert!(parse_nsub("0x2").is_err());
        assert!(parse_nsub("4").is_err());
        assert_eq!(parse_pnorm("2"), Ok(PNorm::Two));
        assert!(parse_pnorm("3").is_err());
        assert_eq!(parse_workers("3"), Ok(3));
        assert!(parse_workers("0").is_err());
        assert!(parse_workers("auto").unwrap() >= 1);
    }

    #[test]
    fn defaults_match_the_protocol() {
        let cli = Cli::try_parse_from(["rofdd", "denoise", "--input", "a", "--output", "b", "--workers", "1"]).unwrap();
        let Command::Denoise(a) = cli.command else { panic!() };
        let c = a.solver.config(1e-5);
        assert_eq!((c.alpha, c.nsub, c.pnorm, c.outer_tol, c.inner_tol), (10.0, (1, 1), PNorm::One, 1e-3, 1e-5));
        let cli = Cli::try_parse_from(["rofdd", "add-noise", "--input", "a", "--output", "b"]).unwrap();
        let Command::AddNoise(n) = cli.command else { panic!() };
        assert_eq!((n.mean, n.variance), (0.0, 0.05));
    }

    #[test]
    fn error_classes() {
        let e: CliError = Error::SubdomainTooSmall { index: 0, rows: 1, cols: 4 }.into();
        assert_eq!(e.exit_code(), 5);
        let e: CliError = Error::NonFinite { context: "x" }.into();
        assert_eq!(e.exit_code(), 6);
        let e: CliError = Error::InvalidParameter { name: "alpha", reason: "bad".into() }.into();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let input = dir.path().join("f.pgm");
        std::fs::write(&input, b"P5\n1 1\n255\n\x10").unwrap();
        let key = CacheKey::new(&input, 10.0, PNorm::One, 100).unwrap();
        let cache = default_cache(&input);
        assert!(cache.to_string_lossy().ends_with("f.pgm.ref"));
        std::fs::write(&cache, key.render(1.0 / 3.0)).unwrap();
        assert_eq!(read_cache(&cache, &key), Some(1.0 / 3.0));
        let other = CacheKey { alpha: 5.0, ..key.clone() };
        assert_eq!(read_cache(&cache, &other), None);
    }
}
