//! Command-line front end: `g2`, `visibility`, `ch74`, `hbw` and `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 argument error,
//! 3 I/O error, 4 search failure.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::closed_form::{visibility, visibility_numeric, CorrelationSeries, HeavisideConvention};
use crate::emitter::{DetectorSetting, EmitterChain, PhysicalConstants, PolarizerSetting};
use crate::error::Error;
use crate::inequalities::Functional;
use crate::oracle::g2_oracle_unpolarized;
use crate::search::{search, InequalityResult, SearchConfig};
use crate::verify::{run_all, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_ARGS: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_SEARCH: i32 = 4;

pub const THREADS_ENV: &str = "PHOTON_BELL_THREADS";

const DOUBLED_NOTE: &str = "extremum_doubled = 2 * extremum; under that normalisation the \
two-emitter optimum reads sqrt(2)-1, the value usually quoted for this setup";

#[derive(Debug, Parser)]
#[command(
    name = "photon-bell",
    version,
    about = "Two-photon correlations and Bell-type inequality searches for emitter chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Second-order correlation, closed form next to the brute-force oracle.
    G2(G2Args),
    /// Fringe visibility N/(3N-4) against a numerical extremisation.
    Visibility(VisibilityArgs),
    /// Maximum of the CH74 functional S_N.
    Ch74(SearchArgs),
    /// Minimum of the homogeneous Bell-Wigner functional T_N.
    Hbw(SearchArgs),
    /// Randomised property suites.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct G2Args {
    #[arg(long)]
    pub n: usize,
    /// Sweep δ₁ over [0, 2π) with δ₂ = −δ₁.
    #[arg(long)]
    pub fig2: bool,
    #[arg(long, default_value_t = 256)]
    pub points: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub delta1: Option<f64>,
    /// Without this, δ₂ is swept over [0, 2π).
    #[arg(long, allow_hyphen_values = true)]
    pub delta2: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = FRAC_PI_4)]
    pub theta1: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = FRAC_PI_4)]
    pub theta2: f64,
    /// Remove the filter in front of detector 1.
    #[arg(long)]
    pub unpolarized1: bool,
    #[arg(long)]
    pub unpolarized2: bool,
    /// Read phases and angles in degrees.
    #[arg(long)]
    pub degrees: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VisibilityArgs {
    #[arg(long)]
    pub n_max: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Emitter count or inclusive range such as `2..10`.
    #[arg(long)]
    pub n: String,
    #[arg(long, default_value_t = 64)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub refine_tol: f64,
    #[arg(long, default_value_t = 16)]
    pub candidates: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Evaluate the step function as Θ(0) = 1 (should make verification fail).
    #[arg(long, hide = true)]
    pub tamper_heaviside: bool,
}

#[derive(Debug)]
enum Failure {
    Args(String),
    Io(String),
    Search(String),
    Verify,
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Args(_) => EXIT_ARGS,
            Failure::Io(_) => EXIT_IO,
            Failure::Search(_) => EXIT_SEARCH,
            Failure::Verify => EXIT_VERIFY,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) => Failure::Io(e.to_string()),
            Error::Search { .. } => Failure::Search(e.to_string()),
            _ => Failure::Args(e.to_string()),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct ResultTiming {
    pub n: usize,
    pub evaluations: u64,
    pub duration_ms: f64,
}

/// Written next to every output file as `<out>.manifest.json`.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub config: serde_json::Value,
    pub version: &'static str,
    pub timestamp_unix: u64,
    pub results: Vec<ResultTiming>,
    pub notes: Vec<String>,
}

struct Output {
    body: String,
    config: serde_json::Value,
    results: Vec<ResultTiming>,
    notes: Vec<String>,
}

/// 12 significant digits, scientific notation.
pub fn fmt_num(x: f64) -> String {
    format!("{x:.11e}")
}

/// Parse `"5"` or `"2..10"` (inclusive).
pub fn parse_n_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("invalid emitter count '{t}'"))
    };
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let v = parse(s)?;
            (v, v)
        }
    };
    if lo < 2 || lo > hi {
        return Err(format!(
            "emitter range must satisfy 2 <= lo <= hi, got '{s}'"
        ));
    }
    Ok((lo, hi))
}

/// Honour `PHOTON_BELL_THREADS` (0 or unset: all cores).
pub fn configure_threads() {
    if let Some(t) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        if t > 0 {
            // a second call finds the pool already built; that is fine
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global();
        }
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let command: Vec<String> = args
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ARGS } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, &command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Verify) => EXIT_VERIFY,
        Err(f) => {
            match &f {
                Failure::Args(m) | Failure::Io(m) | Failure::Search(m) => eprintln!("error: {m}"),
                Failure::Verify => {}
            }
            f.code()
        }
    }
}

fn dispatch(cmd: Command, command: &[String]) -> Result<(), Failure> {
    match cmd {
        Command::G2(a) => {
            let out = a.out.clone();
            emit(cmd_g2(&a)?, out.as_deref(), command)
        }
        Command::Visibility(a) => {
            let out = a.out.clone();
            emit(cmd_visibility(&a)?, out.as_deref(), command)
        }
        Command::Ch74(a) => {
            let out = a.out.clone();
            emit(cmd_search(&a, Functional::Ch74)?, out.as_deref(), command)
        }
        Command::Hbw(a) => {
            let out = a.out.clone();
            emit(cmd_search(&a, Functional::Hbw)?, out.as_deref(), command)
        }
        Command::Verify(a) => cmd_verify(&a),
    }
}

fn emit(output: Output, path: Option<&Path>, command: &[String]) -> Result<(), Failure> {
    let Some(path) = path else {
        let mut stdout = std::io::stdout().lock();
        return stdout
            .write_all(output.body.as_bytes())
            .map_err(|e| Failure::Io(e.to_string()));
    };
    std::fs::write(path, &output.body)
        .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
    let manifest = RunManifest {
        command: command.to_vec(),
        config: output.config,
        version: env!("CARGO_PKG_VERSION"),
        timestamp_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        results: output.results,
        notes: output.notes,
    };
    let mut manifest_path = path.as_os_str().to_owned();
    manifest_path.push(".manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Io(e.to_string()))?;
    std::fs::write(&manifest_path, json + "\n")
        .map_err(|e| Failure::Io(format!("cannot write manifest: {e}")))
}

fn cmd_g2(a: &G2Args) -> Result<Output, Failure> {
    let chain = EmitterChain::new(a.n)?;
    let unit = if a.degrees { TAU / 360.0 } else { 1.0 };
    let pol = |removed: bool, theta: f64| {
        if removed {
            PolarizerSetting::Removed
        } else {
            PolarizerSetting::angle(theta * unit)
        }
    };
    let (p1, p2) = (pol(a.unpolarized1, a.theta1), pol(a.unpolarized2, a.theta2));
    if a.points == 0 {
        return Err(Failure::Args("--points must be at least 1".into()));
    }

    let rows: Vec<(f64, f64)> = if a.fig2 {
        (0..a.points)
            .map(|i| {
                let d1 = i as f64 * TAU / a.points as f64;
                (d1, -d1)
            })
            .collect()
    } else {
        let d1 = a.delta1.unwrap_or(0.0) * unit;
        match a.delta2 {
            Some(d2) => vec![(d1, d2 * unit)],
            None => (0..a.points)
                .map(|i| (d1, d1 + i as f64 * TAU / a.points as f64))
                .collect(),
        }
    };

    let series = CorrelationSeries::new(&chain, &PhysicalConstants::default());
    let mut body = String::from("delta1,delta,g2_closed,g2_oracle,abs_diff\n");
    for (d1, d2) in rows {
        let closed = series.g2(&DetectorSetting::new(d1, p1), &DetectorSetting::new(d2, p2));
        let oracle = g2_oracle_unpolarized(&chain, d1, d2, p1, p2);
        let _ = writeln!(
            body,
            "{},{},{},{},{}",
            fmt_num(d1),
            fmt_num(d2 - d1),
            fmt_num(closed),
            fmt_num(oracle),
            fmt_num((closed - oracle).abs())
        );
    }
    Ok(Output {
        body,
        config: serde_json::json!({
            "n": a.n,
            "fig2": a.fig2,
            "points": a.points,
            "delta1": a.delta1,
            "delta2": a.delta2,
            "polarizer1": p1,
            "polarizer2": p2,
            "degrees": a.degrees,
        }),
        results: Vec::new(),
        notes: vec!["G2 values are absolute under E0 = 1 (arbitrary units otherwise)".into()],
    })
}

fn cmd_visibility(a: &VisibilityArgs) -> Result<Output, Failure> {
    if a.n_max < 2 {
        return Err(Failure::Args(format!(
            "--n-max must be at least 2, got {}",
            a.n_max
        )));
    }
    let mut body = String::from("n,visibility_formula,visibility_numeric\n");
    for n in 2..=a.n_max {
        let chain = EmitterChain::new(n)?;
        let _ = writeln!(
            body,
            "{n},{},{}",
            fmt_num(visibility(n)?),
            fmt_num(visibility_numeric(&chain))
        );
    }
    Ok(Output {
        body,
        config: serde_json::json!({ "n_max": a.n_max }),
        results: Vec::new(),
        notes: vec!["n = 1 omitted: a single emitter has no second-order correlation".into()],
    })
}

#[derive(Debug, Serialize)]
struct Record {
    n: usize,
    kind: Functional,
    extremum: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    extremum_doubled: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
    phases: [f64; 4],
    evaluations: u64,
    grid: usize,
    refine_tol: f64,
}

impl Record {
    fn from_result(r: &InequalityResult) -> Self {
        let ch74 = r.kind == Functional::Ch74;
        Record {
            n: r.n,
            kind: r.kind,
            extremum: r.extremum,
            extremum_doubled: ch74.then_some(2.0 * r.extremum),
            note: ch74.then_some(DOUBLED_NOTE),
            phases: *r.phases.as_array(),
            evaluations: r.evaluations,
            grid: r.config.grid_resolution,
            refine_tol: r.config.refine_tolerance,
        }
    }
}

fn cmd_search(a: &SearchArgs, kind: Functional) -> Result<Output, Failure> {
    let (lo, hi) = parse_n_range(&a.n).map_err(Failure::Args)?;
    let config = SearchConfig {
        grid_resolution: a.grid,
        refine_candidates: a.candidates,
        refine_tolerance: a.refine_tol,
        seed_candidates: Vec::new(),
    };
    config.validate()?;

    let timed: Vec<Result<(InequalityResult, f64), Failure>> = (lo..=hi)
        .into_par_iter()
        .map(|n| {
            let chain = EmitterChain::new(n)?;
            let start = Instant::now();
            let r = search(&chain, kind, &config)
                .map_err(|e| Failure::Search(format!("search failed for N={n}: {e}")))?;
            Ok((r, start.elapsed().as_secs_f64() * 1e3))
        })
        .collect();
    let timed = timed.into_iter().collect::<Result<Vec<_>, _>>()?;

    let records: Vec<Record> = timed.iter().map(|(r, _)| Record::from_result(r)).collect();
    let body = match a.format {
        Format::Json => {
            serde_json::to_string_pretty(&records).map_err(|e| Failure::Io(e.to_string()))? + "\n"
        }
        Format::Csv => {
            let mut s = String::from(
                "n,kind,extremum,extremum_doubled,phase1,phase2,phase3,phase4,evaluations,grid,refine_tol\n",
            );
            for r in &records {
                let doubled = r.extremum_doubled.map(fmt_num).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{},{},{},{},{}",
                    r.n,
                    r.kind,
                    fmt_num(r.extremum),
                    doubled,
                    fmt_num(r.phases[0]),
                    fmt_num(r.phases[1]),
                    fmt_num(r.phases[2]),
                    fmt_num(r.phases[3]),
                    r.evaluations,
                    r.grid,
                    fmt_num(r.refine_tol)
                );
            }
            s
        }
    };
    let mut notes = Vec::new();
    if kind == Functional::Ch74 {
        notes.push(DOUBLED_NOTE.to_string());
    }
    Ok(Output {
        body,
        config: serde_json::to_value(&config).map_err(|e| Failure::Io(e.to_string()))?,
        results: timed
            .iter()
            .map(|(r, ms)| ResultTiming {
                n: r.n,
                evaluations: r.evaluations,
                duration_ms: *ms,
            })
            .collect(),
        notes,
    })
}

fn cmd_verify(a: &VerifyArgs) -> Result<(), Failure> {
    if a.samples == 0 {
        return Err(Failure::Args("--samples must be at least 1".into()));
    }
    let opts = VerifyOptions {
        samples: a.samples,
        seed: a.seed,
        heaviside: if a.tamper_heaviside {
            HeavisideConvention::OneAtOrigin
        } else {
            HeavisideConvention::ZeroAtOrigin
        },
    };
    let reports = run_all(&opts);
    let mut all = true;
    for r in &reports {
        all &= r.passed;
        println!(
            "{} {}: {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    if all {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_n_range("2..10").unwrap(), (2, 10));
        assert_eq!(parse_n_range("2..=4").unwrap(), (2, 4));
        assert_eq!(parse_n_range("7").unwrap(), (7, 7));
        assert!(parse_n_range("1..3").is_err());
        assert!(parse_n_range("5..3").is_err());
        assert!(parse_n_range("x").is_err());
    }

    #[test]
    fn number_format_round_trips() {
        for x in [
            0.25,
            1.0 / 12.0,
            -0.2537570809895615,
            0.0,
            TAU,
            1e-300,
        ] {
            let s = fmt_num(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(fmt_num(back), s);
            if x != 0.0 {
                assert!(((back - x) / x).abs() < 5e-12, "{s}");
            }
        }
        assert_eq!(fmt_num(0.25), "2.50000000000e-1");
    }
}
