//! `cmc-index` command-line front end.
//!
//! Exit codes: 0 success, 1 mismatch or incomplete result, 2 usage error.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{self, AnalysisOptions, Check, SurfaceAnalysis};
use crate::catalog::{self, SurfaceSpec, CATALOG_ENV};
use crate::integrator::DEFAULT_TOL;
use crate::morse::snap_known;
use crate::potential::ConstantPotential;
use crate::spectrum::{
    eigenfunction_samples, find_spectrum_with, EigenfunctionSamples, EigenvalueRecord, ScanOptions,
    SpectralProblem, Spectrum, DEFAULT_GRID, DEFAULT_LAMBDA_MAX,
};
use crate::torus::{derive_params, Family};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "cmc-index",
    version,
    about = "Spectra and Morse indices of CMC tori of revolution"
)]
pub struct Cli {
    /// Catalog file (defaults to the built-in catalog).
    #[arg(long, global = true, env = CATALOG_ENV)]
    pub catalog: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nonpositive spectrum of a torus, or the spectrum of a constant potential.
    Spectrum {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Morse index, bucket counts and lower bound.
    Index(IndexArgs),
    /// Export eigenfunction samples as CSV.
    Eigenfunction {
        #[command(flatten)]
        source: Source,
        /// Spectral index (1-based).
        #[arg(long)]
        j: usize,
        #[arg(long, default_value_t = 1001)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Run the oracle suite.
    Validate,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = true)]
pub struct Source {
    /// Catalog surface name, e.g. U1.
    #[arg(long, conflicts_with_all = ["s", "constant"])]
    pub surface: Option<String>,
    #[arg(long, requires_all = ["t", "k", "w"], conflicts_with = "constant")]
    pub s: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "s")]
    pub t: Option<f64>,
    #[arg(long, requires = "s")]
    pub k: Option<u32>,
    #[arg(long, requires = "s")]
    pub w: Option<u32>,
    /// Required when s·t < 0.
    #[arg(long, requires = "s")]
    pub family: Option<Family>,
    /// Constant potential V ≡ c.
    #[arg(long, allow_hyphen_values = true, requires = "period")]
    pub constant: Option<f64>,
    #[arg(long, requires = "constant")]
    pub period: Option<f64>,
}

#[derive(Debug, Args, Clone, Copy)]
pub struct ScanArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_max: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: f64,
    /// Integrator tolerance per unit length.
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct IndexSelect {
    #[arg(long)]
    pub surface: Option<String>,
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct IndexArgs {
    #[command(flatten)]
    pub select: IndexSelect,
    /// Write the report(s) as JSON.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_GRID)]
    pub grid: f64,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_MISMATCH
        }
    }
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Constraint(_)
            | Error::InvalidArgument(_)
            | Error::Domain(_)
            | Error::Parse { .. } => Failure::Usage(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::Io {
            path: PathBuf::from("<stdout>"),
            source: e,
        })
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn load_catalog(cli: &Cli) -> CliResult<Vec<SurfaceSpec>> {
    Ok(match &cli.catalog {
        Some(p) => catalog::load_catalog(p)?,
        None => catalog::parse_catalog(catalog::DEFAULT_CATALOG, "<built-in catalog>")?,
    })
}

fn lookup<'a>(cat: &'a [SurfaceSpec], name: &str) -> CliResult<&'a SurfaceSpec> {
    catalog::find_surface(cat, name).ok_or_else(|| {
        let names: Vec<&str> = cat.iter().map(|s| s.name.as_str()).collect();
        Failure::Usage(format!(
            "unknown surface '{name}'; the catalog lists {}",
            names.join(", ")
        ))
    })
}

/// What the spectrum and eigenfunction commands operate on.
enum Target {
    Torus {
        label: String,
        params: crate::torus::TorusParams,
    },
    Constant {
        c: f64,
        a: f64,
    },
}

fn resolve(cli: &Cli, source: &Source) -> CliResult<Target> {
    if let Some(name) = &source.surface {
        let cat = load_catalog(cli)?;
        let spec = lookup(&cat, name)?;
        return Ok(Target::Torus {
            label: spec.name.clone(),
            params: spec.params()?,
        });
    }
    if let (Some(c), Some(a)) = (source.constant, source.period) {
        return Ok(Target::Constant { c, a });
    }
    match (source.s, source.t, source.k, source.w) {
        (Some(s), Some(t), Some(k), Some(w)) => Ok(Target::Torus {
            label: format!("s = {s}, t = {t}"),
            params: derive_params(s, t, k, w, None, source.family)?,
        }),
        _ => Err(Failure::Usage(
            "give --surface, or --s --t --k --w, or --constant --period".into(),
        )),
    }
}

fn problem_for(target: &Target, tol: f64) -> CliResult<SpectralProblem> {
    Ok(match target {
        Target::Torus { params, .. } => SpectralProblem::for_torus(params)?,
        Target::Constant { c, a } => {
            SpectralProblem::periodic(Arc::new(ConstantPotential(*c)), *a)?
        }
    }
    .with_tolerance(tol))
}

fn scan_options(
    problem: &SpectralProblem,
    target: &Target,
    scan: &ScanArgs,
    min_index: usize,
) -> ScanOptions {
    let default_max = match target {
        Target::Torus { .. } => DEFAULT_LAMBDA_MAX,
        Target::Constant { c, a } => {
            // Through the second double eigenvalue, or far enough for index j.
            let n = (min_index / 2).max(2) as f64;
            let top = (2.0 * PI * n / a).powi(2) - c;
            let gap = (2.0 * PI * (n + 1.0) / a).powi(2) - c - top;
            DEFAULT_LAMBDA_MAX.max(top + 0.5 * gap.min(1.0))
        }
    };
    let base = ScanOptions::default_for(problem);
    ScanOptions {
        lambda_min: scan.lambda_min.unwrap_or(base.lambda_min),
        lambda_max: scan.lambda_max.unwrap_or(default_max),
        grid: scan.grid,
        ..base
    }
}

/// Two decimals without trailing zeros; `-0` prints as `0`.
fn short(x: f64) -> String {
    let s = format!("{x:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn print_records(out: &mut dyn Write, records: &[EigenvalueRecord]) -> std::io::Result<()> {
    writeln!(
        out,
        "{:>4}  {:>18}  {:>6}  {:>4}  {:>5}",
        "j", "lambda", "parity", "mult", "nodes"
    )?;
    for r in records {
        writeln!(
            out,
            "{:>4}  {:>18.12}  {:>6}  {:>4}  {:>5}",
            r.index_j,
            r.lambda,
            r.parity.to_string(),
            r.multiplicity,
            r.node_count
        )?;
    }
    Ok(())
}

fn execute(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    match &cli.command {
        Command::Spectrum { source, scan } => cmd_spectrum(cli, source, scan, out),
        Command::Index(args) => cmd_index(cli, args, out),
        Command::Eigenfunction {
            source,
            j,
            samples,
            out: path,
            scan,
        } => cmd_eigenfunction(cli, source, *j, *samples, path, scan, out),
        Command::Validate => cmd_validate(cli, out),
    }
}

fn cmd_spectrum(
    cli: &Cli,
    source: &Source,
    scan: &ScanArgs,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let target = resolve(cli, source)?;
    let problem = problem_for(&target, scan.tol)?;
    let opts = scan_options(&problem, &target, scan, 0);
    let spectrum = find_spectrum_with(&problem, &opts)?;

    match &target {
        Target::Torus { label, params } => writeln!(
            out,
            "{label}: {} torus, k = {}, w = {}, period k·x0 = {:.6}",
            params.family,
            params.k,
            params.w,
            params.problem_length()
        )?,
        Target::Constant { c, a } => writeln!(out, "V = {c}, period {a}")?,
    }
    writeln!(
        out,
        "scan [{}, {}], grid {}, tol {:e}",
        opts.lambda_min, opts.lambda_max, opts.grid, scan.tol
    )?;
    print_records(out, &spectrum.records)?;
    for issue in &spectrum.issues {
        writeln!(out, "issue: {issue}")?;
    }

    let mut code = if spectrum.complete {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    };
    match &target {
        Target::Torus { .. } => {
            let shown = match snap_known(&spectrum, analysis::PIPELINE_SNAP_TOL) {
                Ok((snapped, _)) => snapped,
                Err(e) => {
                    writeln!(out, "warning: {e}")?;
                    code = EXIT_MISMATCH;
                    spectrum.clone()
                }
            };
            let values: Vec<String> = shown
                .nonpositive()
                .iter()
                .map(|r| short(r.lambda))
                .collect();
            writeln!(out, "nonpositive: {}", values.join(", "))?;
            writeln!(out, "{}", certification(&shown))?;
        }
        Target::Constant { .. } => {
            let values: Vec<String> = spectrum.records.iter().map(|r| short(r.lambda)).collect();
            writeln!(out, "eigenvalues: {}", values.join(", "))?;
        }
    }
    Ok(code)
}

fn certification(s: &Spectrum) -> String {
    if !s.certifies_nonpositive() {
        return "not certified: scan incomplete through 0".into();
    }
    match s.first_positive() {
        Some(l) => format!("certified: next eigenvalue {l:.6} > 0"),
        None => format!("certified: no eigenvalue in (0, {}]", s.lambda_ceiling),
    }
}

fn cmd_index(cli: &Cli, args: &IndexArgs, out: &mut dyn Write) -> CliResult<i32> {
    let cat = load_catalog(cli)?;
    let specs: Vec<SurfaceSpec> = match &args.select.surface {
        Some(name) => vec![lookup(&cat, name)?.clone()],
        None => cat.clone(),
    };
    let opts = AnalysisOptions {
        tol: args.tol,
        grid: args.grid,
        ..AnalysisOptions::default()
    };
    let results = analysis::analyze_catalog(&specs, &opts);

    writeln!(
        out,
        "{:<8} {:<10} {:>3} {:>3} {:>4} {:>3} {:>3} {:>3} {:>6} {:>4}  {:<14} status",
        "surface", "family", "k", "w", "Ind", "B1", "B2", "B3", "bound", "gap", "expected",
    )?;
    let mut matches = 0;
    let mut reports = Vec::new();
    for (spec, result) in specs.iter().zip(results) {
        match result {
            Ok(a) => {
                let ok = index_row(out, &a)?;
                matches += usize::from(ok);
                reports.push(a.report);
            }
            Err(e) => writeln!(out, "{:<8} error: {e}", spec.name)?,
        }
    }
    writeln!(out, "{matches}/{} match", specs.len())?;

    if let Some(path) = &args.out {
        if args.select.all {
            catalog::save_reports(&reports, path)?;
        } else if let Some(r) = reports.first() {
            catalog::save_report(r, path)?;
        }
    }
    Ok(if matches == specs.len() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    })
}

fn index_row(out: &mut dyn Write, a: &SurfaceAnalysis) -> std::io::Result<bool> {
    let r = &a.report;
    let cmp = a.compare();
    let ok = cmp.ind_matches && cmp.buckets_match;
    let [e1, e2, e3] = a.spec.expected_b;
    writeln!(
        out,
        "{:<8} {:<10} {:>3} {:>3} {:>4} {:>3} {:>3} {:>3} {:>6} {:>4}  {:<14} {}",
        r.surface,
        r.family.as_str(),
        r.k,
        r.w,
        r.ind,
        r.b1,
        r.b2,
        r.b3,
        r.lower_bound,
        r.bound_gap,
        format!("{} ({e1},{e2},{e3})", a.spec.expected_ind),
        if ok { "match" } else { "MISMATCH" }
    )?;
    Ok(ok)
}

#[allow(clippy::too_many_arguments)]
fn cmd_eigenfunction(
    cli: &Cli,
    source: &Source,
    j: usize,
    n_samples: usize,
    path: &Path,
    scan: &ScanArgs,
    out: &mut dyn Write,
) -> CliResult<i32> {
    if j == 0 {
        return Err(Failure::Usage("j is 1-based".into()));
    }
    if n_samples < 2 {
        return Err(Failure::Usage("need at least 2 samples".into()));
    }
    let target = resolve(cli, source)?;
    let problem = problem_for(&target, scan.tol)?;
    let opts = scan_options(&problem, &target, scan, j);
    let spectrum = find_spectrum_with(&problem, &opts)?;
    let record = spectrum.by_index(j).copied().ok_or_else(|| {
        Failure::Usage(format!(
            "j = {j} is outside the computed range: {} eigenvalues below {}",
            spectrum.count_below_floor + spectrum.len(),
            opts.lambda_max
        ))
    })?;
    let samples = eigenfunction_samples(&problem, &record, n_samples)?;
    write_eigenfunction_csv(&samples, path)?;
    writeln!(
        out,
        "j = {j}: lambda = {:.12}, parity {}, {} nodes; wrote {} samples to {}",
        record.lambda,
        record.parity,
        record.node_count,
        n_samples,
        path.display()
    )?;
    Ok(EXIT_OK)
}

/// CSV with header `x,f` (simple eigenvalue) or `x,f_even,f_odd` (double).
pub fn write_eigenfunction_csv(samples: &EigenfunctionSamples, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    let columns: Vec<&Vec<f64>> = samples.even.iter().chain(samples.odd.iter()).collect();
    let header = if columns.len() == 2 {
        "x,f_even,f_odd"
    } else {
        "x,f"
    };
    writeln!(w, "{header}").map_err(io)?;
    for (i, x) in samples.x.iter().enumerate() {
        write!(w, "{x}").map_err(io)?;
        for c in &columns {
            write!(w, ",{}", c[i]).map_err(io)?;
        }
        writeln!(w).map_err(io)?;
    }
    w.flush().map_err(io)
}

fn cmd_validate(cli: &Cli, out: &mut dyn Write) -> CliResult<i32> {
    let cat = load_catalog(cli)?;
    let checks = analysis::validation_suite(&cat);
    print_checks(out, &checks)?;
    let passed = checks.iter().filter(|c| c.pass).count();
    writeln!(out, "{passed}/{} checks passed", checks.len())?;
    Ok(if passed == checks.len() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    })
}

fn print_checks(out: &mut dyn Write, checks: &[Check]) -> std::io::Result<()> {
    writeln!(
        out,
        "{:<10} {:<56} {:>12} {:<16} result",
        "suite", "check", "value", "limit"
    )?;
    for c in checks {
        writeln!(
            out,
            "{:<10} {:<56} {:>12.3e} {:<16} {}",
            c.suite,
            c.name,
            c.value,
            c.limit,
            if c.pass { "PASS" } else { "FAIL" }
        )?;
    }
    Ok(())
}
