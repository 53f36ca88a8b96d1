//! `bridge-transforms`: run identity verifications, sample paths, transform
//! stored paths and export plot data.
//!
//! Exit codes: 0 success, 1 a verification failed (reports are still
//! written), 2 usage or configuration error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use bridge_transforms::csv_io::{read_column, read_path, write_path, write_path3};
use bridge_transforms::identities::{Functional, LocalTimeMethod};
use bridge_transforms::occupation::occupation_band;
use bridge_transforms::params::{default_band_eps, Grid};
use bridge_transforms::rng::derive_seed;
use bridge_transforms::samplers::{sample_bessel3, sample_bm, sample_bm3, sample_bridge, sample_meander};
use bridge_transforms::stats::{effective_n, ks_pvalue, ks_two_sample, Ecdf};
use bridge_transforms::suite::verify;
use bridge_transforms::transforms::{abs_path, l_transform, pitman, prefix_max, suffix_min};
use bridge_transforms::{IdentityCase, IdentityId, RunParams, VerificationReport};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

const THREADS_ENV: &str = "BRIDGE_TRANSFORMS_THREADS";

#[derive(Parser)]
#[command(name = "bridge-transforms", version, about = "Monte Carlo checks of Pitman and Lévy type path identities")]
struct Cli {
    /// Worker threads (overrides BRIDGE_TRANSFORMS_THREADS). Never changes results.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run identity cases and write verification reports.
    Verify(VerifyArgs),
    /// Sample one path and write it as CSV.
    Sample(SampleArgs),
    /// Apply a path transform to a stored path.
    Transform(TransformArgs),
    /// KS distance of band local time of β^0 against M^0_t over grid sizes.
    CalibrateLocaltime(CalibrateArgs),
    /// Sorted (value, ECDF) pairs of one CSV column.
    Ecdf(EcdfArgs),
    /// Print the identity catalog.
    ListIdentities,
}

#[derive(clap::Args)]
struct VerifyArgs {
    /// Identity ids, comma separated, or `all`.
    #[arg(long, default_value = "all")]
    identity: String,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, default_value_t = 2048)]
    steps: usize,
    #[arg(long, default_value_t = 20_000)]
    replicates: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Family-wise level per identity (Bonferroni over its KS tests).
    #[arg(long, default_value_t = 0.01)]
    alpha: f64,
    /// Local-time band half-width [default: sqrt(t/steps)].
    #[arg(long)]
    band_eps: Option<f64>,
    #[arg(long, default_value_t = 256)]
    trunc_factor: u32,
    /// Functional battery override, comma separated (`first_max` or `f3`).
    #[arg(long)]
    functionals: Option<String>,
    #[arg(long, value_enum, default_value_t = LocalTime::Exact)]
    local_time: LocalTime,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum LocalTime {
    Exact,
    Band,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Process {
    Bm,
    Bridge,
    Bm3,
    Bessel3,
    Meander,
}

#[derive(clap::Args)]
struct SampleArgs {
    #[arg(long, value_enum)]
    process: Process,
    /// Bridge / meander endpoint.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    x: f64,
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    #[arg(long, default_value_t = 2048)]
    steps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Op {
    Pitman,
    L,
    Abs,
    PrefixMax,
    SuffixMin,
    BandLocaltime,
}

#[derive(clap::Args)]
struct TransformArgs {
    #[arg(long, value_enum)]
    op: Op,
    /// Terminal value for `l` [default: the path's own terminal value].
    #[arg(long, allow_negative_numbers = true)]
    y: Option<f64>,
    /// Band half-width for `band-localtime` [default: sqrt(t/segments)].
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct CalibrateArgs {
    #[arg(long, default_value_t = 1.0)]
    t: f64,
    /// Grid sizes, comma separated.
    #[arg(long, default_value = "1024,4096,16384")]
    steps_list: String,
    /// `sqrt` (sqrt(t/steps)), `<c>*sqrt`, or a fixed width.
    #[arg(long, default_value = "sqrt")]
    eps_rule: String,
    #[arg(long, default_value_t = 20_000)]
    replicates: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(clap::Args)]
struct EcdfArgs {
    /// `file.csv[:column]`; the column defaults to `value`.
    #[arg(long = "in")]
    input: String,
    #[arg(long)]
    out: PathBuf,
}

/// Configuration or I/O problem: exit 2.
#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Result<T> = std::result::Result<T, UsageError>;

fn fail<T>(msg: impl Into<String>) -> Result<T> {
    Err(UsageError(msg.into()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code().clamp(0, 255) as u8);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn thread_count(flag: Option<usize>) -> Result<Option<usize>> {
    let n = match (flag, std::env::var(THREADS_ENV)) {
        (Some(n), _) => n,
        (None, Ok(s)) => s.trim().parse().map_err(|_| UsageError(format!("{THREADS_ENV}={s:?} is not a count")))?,
        (None, Err(_)) => return Ok(None),
    };
    if n == 0 {
        return fail("thread count must be positive");
    }
    Ok(Some(n))
}

/// Runs the command; `Ok(false)` means a verification failed.
fn run(cli: Cli) -> Result<bool> {
    let pool = {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(n) = thread_count(cli.threads)? {
            b = b.num_threads(n);
        }
        b.build()?
    };
    pool.install(|| match cli.command {
        Command::Verify(a) => cmd_verify(a),
        Command::Sample(a) => cmd_sample(a).map(|_| true),
        Command::Transform(a) => cmd_transform(a).map(|_| true),
        Command::CalibrateLocaltime(a) => cmd_calibrate(a).map(|_| true),
        Command::Ecdf(a) => cmd_ecdf(a).map(|_| true),
        Command::ListIdentities => {
            for id in IdentityId::ALL {
                println!("{:<20} {}", id.as_str(), id.anchor());
            }
            Ok(true)
        }
    })
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| UsageError(format!("{}: {e}", path.display())))
}

fn open(path: &str) -> Result<File> {
    File::open(path).map_err(|e| UsageError(format!("{path}: {e}")))
}

fn parse_list<T: std::str::FromStr<Err = String>>(s: &str) -> Result<Vec<T>> {
    let items: Vec<T> =
        s.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::parse).collect::<std::result::Result<_, _>>()?;
    if items.is_empty() {
        return fail(format!("empty list {s:?}"));
    }
    Ok(items)
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    if !(a.alpha > 0.0 && a.alpha < 1.0) {
        return fail(format!("alpha must lie in (0, 1), got {}", a.alpha));
    }
    let ids: Vec<IdentityId> = if a.identity == "all" { IdentityId::ALL.to_vec() } else { parse_list(&a.identity)? };
    let params = RunParams {
        t: a.t,
        x: a.x,
        n_steps: a.steps,
        replicates: a.replicates,
        seed: a.seed,
        band_eps: a.band_eps.unwrap_or_else(|| default_band_eps(a.t, a.steps)),
        trunc_factor: a.trunc_factor,
    };
    params.validate()?;
    let functionals: Option<Vec<Functional>> = a.functionals.as_deref().map(parse_list).transpose()?;
    let mut reports = Vec::with_capacity(ids.len());
    for id in ids {
        let mut case = IdentityCase::new(id, params);
        if let Some(f) = &functionals {
            case.functionals = f.clone();
        }
        case.local_time = match a.local_time {
            LocalTime::Exact => LocalTimeMethod::Exact,
            LocalTime::Band => LocalTimeMethod::Band,
        };
        let r = verify(&case, a.alpha).map_err(|e| UsageError(format!("{id}: {e}")))?;
        eprintln!("{id}: {} ({:.1} s)", if r.overall_pass { "pass" } else { "FAIL" }, r.elapsed_seconds);
        reports.push(r);
    }
    let all_pass = reports.iter().all(|r| r.overall_pass);
    match &a.out {
        Some(path) => write_reports(&reports, a.format, create(path)?)?,
        None => write_reports(&reports, a.format, io::stdout().lock())?,
    }
    Ok(all_pass)
}

/// JSON: one report object for a single identity, an array otherwise.
/// CSV: one row per test with the parameters repeated.
fn write_reports(reports: &[VerificationReport], format: Format, mut w: impl Write) -> Result<()> {
    match format {
        Format::Json => {
            if let [r] = reports {
                serde_json::to_writer_pretty(&mut w, r)?;
            } else {
                serde_json::to_writer_pretty(&mut w, reports)?;
            }
            writeln!(w)?;
        }
        Format::Csv => {
            let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(&mut w);
            out.write_record([
                "identity",
                "t",
                "x",
                "n_steps",
                "replicates",
                "seed",
                "band_eps",
                "trunc_factor",
                "alpha",
                "test",
                "kind",
                "statistic",
                "p_value",
                "n_left",
                "n_right",
                "pass",
                "note",
                "overall_pass",
            ])?;
            for r in reports {
                let p = &r.params;
                for t in &r.tests {
                    let kind = serde_json::to_value(t.kind)?;
                    out.write_record([
                        r.identity.clone(),
                        p.t.to_string(),
                        p.x.to_string(),
                        p.n_steps.to_string(),
                        p.replicates.to_string(),
                        p.seed.to_string(),
                        p.band_eps.to_string(),
                        p.trunc_factor.to_string(),
                        r.alpha.to_string(),
                        t.name.clone(),
                        kind.as_str().unwrap_or_default().to_owned(),
                        t.statistic.to_string(),
                        t.p_value.to_string(),
                        t.n_left.to_string(),
                        t.n_right.to_string(),
                        t.pass.to_string(),
                        t.note.clone(),
                        r.overall_pass.to_string(),
                    ])?;
                }
            }
            out.flush()?;
        }
    }
    w.flush()?;
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> Result<()> {
    let grid = Grid::new(a.t, a.steps)?;
    if !a.x.is_finite() {
        return fail("x must be finite");
    }
    let out = create(&a.out)?;
    match a.process {
        Process::Bm => write_path(&sample_bm(&grid, a.seed), out)?,
        Process::Bridge => write_path(&sample_bridge(a.x, &grid, a.seed), out)?,
        Process::Bm3 => write_path3(&sample_bm3(&grid, a.seed), out)?,
        Process::Bessel3 => write_path(&sample_bessel3(&grid, a.seed), out)?,
        Process::Meander => write_path(&sample_meander(a.x, &grid, a.seed), out)?,
    }
    Ok(())
}

fn cmd_transform(a: TransformArgs) -> Result<()> {
    let p = read_path(open(&a.input.to_string_lossy())?)?;
    let q = match a.op {
        Op::Pitman => pitman(&p),
        Op::L => l_transform(&p, a.y.unwrap_or(p.terminal()))?,
        Op::Abs => abs_path(&p),
        Op::PrefixMax => prefix_max(&p),
        Op::SuffixMin => suffix_min(&p),
        Op::BandLocaltime => {
            let eps = a.eps.unwrap_or_else(|| default_band_eps(p.horizon(), p.len() - 1));
            occupation_band(&p, eps)?
        }
    };
    write_path(&q, create(&a.out)?)?;
    Ok(())
}

/// Band half-width as a function of the grid size.
#[derive(Debug, Clone, Copy, PartialEq)]
enum EpsRule {
    /// `c·sqrt(t/steps)`
    Sqrt(f64),
    Fixed(f64),
}

impl EpsRule {
    fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let rule = if s == "sqrt" {
            EpsRule::Sqrt(1.0)
        } else if let Some(c) = s.strip_suffix("*sqrt") {
            EpsRule::Sqrt(c.trim().parse().map_err(|_| UsageError(format!("bad eps rule {s:?}")))?)
        } else {
            EpsRule::Fixed(
                s.parse().map_err(|_| UsageError(format!("bad eps rule {s:?} (sqrt, <c>*sqrt or a number)")))?,
            )
        };
        match rule {
            EpsRule::Sqrt(v) | EpsRule::Fixed(v) if v > 0.0 && v.is_finite() => Ok(rule),
            _ => fail(format!("eps rule {s:?} must give a positive width")),
        }
    }

    fn eps(self, t: f64, steps: usize) -> f64 {
        match self {
            EpsRule::Sqrt(c) => c * default_band_eps(t, steps),
            EpsRule::Fixed(e) => e,
        }
    }
}

fn cmd_calibrate(a: CalibrateArgs) -> Result<()> {
    let steps_list: Vec<usize> =
        a.steps_list.split(',').map(|s| s.trim().parse::<usize>()).collect::<std::result::Result<_, _>>()?;
    let rule = EpsRule::parse(&a.eps_rule)?;
    if a.replicates == 0 {
        return fail("replicates must be positive");
    }
    let grids: Vec<Grid> = steps_list.iter().map(|&n| Grid::new(a.t, n)).collect::<std::result::Result<_, _>>()?;
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(create(&a.out)?);
    out.write_record(["t", "steps", "band_eps", "replicates", "ks_distance", "p_value"])?;
    let n = a.replicates as u64;
    for grid in grids {
        let eps = rule.eps(a.t, grid.steps());
        let base = derive_seed(a.seed, grid.steps() as u64);
        let lambdas: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| {
                occupation_band(&sample_bridge(0.0, &grid, derive_seed(derive_seed(base, 0), i)), eps)
                    .map(|l| l.terminal())
            })
            .collect::<std::result::Result<_, _>>()?;
        let meanders: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|i| sample_meander(0.0, &grid, derive_seed(derive_seed(base, 1), i)).terminal())
            .collect();
        let d = ks_two_sample(&lambdas, &meanders)?;
        let p = ks_pvalue(d, effective_n(lambdas.len(), meanders.len()));
        eprintln!("steps {}: eps {eps:.3e}, D {d:.4}", grid.steps());
        out.write_record([
            a.t.to_string(),
            grid.steps().to_string(),
            eps.to_string(),
            a.replicates.to_string(),
            d.to_string(),
            p.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

fn cmd_ecdf(a: EcdfArgs) -> Result<()> {
    // a trailing `:name` selects the column unless the whole string is a file
    let (file, column) = match a.input.rsplit_once(':') {
        Some((f, c)) if !std::path::Path::new(&a.input).exists() => (f, c),
        _ => (a.input.as_str(), "value"),
    };
    let ecdf = Ecdf::new(read_column(open(file)?, column)?)?;
    let mut out = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(create(&a.out)?);
    out.write_record(["value", "ecdf"])?;
    for (v, f) in ecdf.steps() {
        out.write_record([v.to_string(), f.to_string()])?;
    }
    out.flush()?;
    Ok(())
}
