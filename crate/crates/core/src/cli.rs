//! Command-line front end.
//!
//! Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 2 | bad arguments or parameters |
//! | 3 | unreadable or degenerate input data |
//! | 4 | numeric failure |
//! | 5 | calibration cache missing, corrupt or incompatible |
//! | 6 | file system error |
//!
//! Failures print one line to standard error: `danco: error[<kind>]: <message>`.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    render_report, render_timings, run_bench, BenchPlan, EstimatorConfig, ReportFormat, DEFAULT_POINTS,
    DESK_INSTANCES, FULL_INSTANCES,
};
use crate::calibration::{build_calibration, load_calibration, save_calibration, CalibrationTable};
use crate::datasets::{generate, load_table, render_table, HeaderMode, Manifold, ManifoldSpec, TableOptions};
use crate::error::{DancoError, Result};
use crate::estimators::{
    estimate_cd, estimate_danco_with, estimate_mind_ml, estimate_mle_lb, CdOptions, DancoOptions,
    EstimateResult, Method,
};

#[derive(Debug, Parser)]
#[command(name = "danco", version, about = "Intrinsic dimension estimation")]
pub struct Cli {
    /// Print the effective configuration and extra diagnostics to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the intrinsic dimension of a delimited numeric table.
    Estimate(EstimateArgs),
    /// Build a calibration table and write it to disk.
    Calibrate(CalibrateArgs),
    /// Sample a synthetic dataset.
    Generate(GenerateArgs),
    /// Run estimators over synthetic datasets and print a results table.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    /// k = 10 (default).
    Synthetic,
    /// k = 5, for small noisy real-world samples.
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeaderArg {
    Detect,
    Present,
    Absent,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// Input table, one point per row.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, default_value = "danco")]
    pub method: String,
    /// Neighborhood size for danco and mind_ml [default: 10, or 5 with --preset real].
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 6)]
    pub k1: usize,
    #[arg(long, default_value_t = 20)]
    pub k2: usize,
    /// Largest candidate dimension [default: ambient dimension].
    #[arg(long)]
    pub max_dim: Option<usize>,
    /// Seed for the in-memory calibration.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub n_reps: usize,
    /// Calibration cache; loaded when present, otherwise built and written here.
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Preset::Synthetic)]
    pub preset: Preset,
    #[arg(long, value_enum, default_value_t = HeaderArg::Detect)]
    pub header: HeaderArg,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    #[arg(long)]
    pub max_dim: usize,
    /// Sample size; must match the data the table will be used with.
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub n: usize,
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub n_reps: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Benchmark label such as m9a or m13.
    #[arg(long, conflicts_with = "generator", required_unless_present = "generator")]
    pub dataset: Option<String>,
    /// Generator family (hypercube, ball, sphere, affine, gaussian, swiss_roll, helix, nonlinear).
    #[arg(long, requires = "d")]
    pub generator: Option<String>,
    /// Intrinsic dimension for --generator.
    #[arg(long)]
    pub d: Option<usize>,
    /// Ambient dimension for --generator [default: the generator's native size, d + 1 for hypercube].
    #[arg(long)]
    pub ambient: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_POINTS)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlanArg {
    /// Three datasets, two instances of 1000 points.
    Small,
    /// All generated datasets, 5 instances of 2500 points.
    Synthetic,
    /// All generated datasets, 20 instances of 2500 points.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Plain,
    Delimited,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value_t = PlanArg::Small)]
    pub plan: PlanArg,
    /// Restrict to these dataset labels (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub datasets: Option<Vec<String>>,
    /// Override the plan's instance count.
    #[arg(long)]
    pub instances: Option<usize>,
    /// Override the plan's points per instance.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
    pub format: FormatArg,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command, returning the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let rendered = e.to_string();
            let msg = rendered
                .lines()
                .next()
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let _ = writeln!(err, "danco: error[usage]: {msg}");
            return 2;
        }
    };
    match execute(&cli, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "danco: error[{}]: {}", e.kind(), one_line(&e.to_string()));
            e.exit_code()
        }
    }
}

fn one_line(s: &str) -> String {
    s.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn stdout_err(e: io::Error) -> DancoError {
    DancoError::io("<stdout>", e)
}

pub fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let verbose = cli.verbose > 0;
    match &cli.command {
        Command::Estimate(a) => cmd_estimate(a, verbose, out, err),
        Command::Calibrate(a) => cmd_calibrate(a, verbose, out, err),
        Command::Generate(a) => cmd_generate(a, verbose, out, err),
        Command::Bench(a) => cmd_bench(a, verbose, out, err),
    }
}

fn note(err: &mut dyn Write, line: impl AsRef<str>) {
    let _ = writeln!(err, "{}", line.as_ref());
}

fn obtain_calibration(
    a: &EstimateArgs,
    n: usize,
    k: usize,
    max_dim: usize,
    err: &mut dyn Write,
) -> Result<CalibrationTable> {
    match &a.calibration {
        Some(path) if path.exists() => {
            let table = load_calibration(path)?;
            table.check_compatible(n, k, max_dim)?;
            Ok(table)
        }
        Some(path) => {
            let table = build_calibration(max_dim, n, k, a.n_reps, a.seed)?;
            save_calibration(&table, path)?;
            note(err, format!("note: wrote calibration cache to {}", path.display()));
            Ok(table)
        }
        None => {
            note(
                err,
                format!(
                    "warning: no calibration cache given; building one in memory (N = {n}, k = {k}, d <= {max_dim})"
                ),
            );
            build_calibration(max_dim, n, k, a.n_reps, a.seed)
        }
    }
}

fn format_estimate(r: &EstimateResult) -> String {
    if r.method.is_integral() {
        format!("{}: d = {}", r.method, r.d_hat.round() as i64)
    } else {
        format!("{}: d = {:.2}", r.method, r.d_hat)
    }
}

pub fn cmd_estimate(a: &EstimateArgs, verbose: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let method: Method = a.method.parse()?;
    let header = match a.header {
        HeaderArg::Detect => HeaderMode::Detect,
        HeaderArg::Present => HeaderMode::Present,
        HeaderArg::Absent => HeaderMode::Absent,
    };
    let table = load_table(&a.input, &TableOptions { header })?;
    let data = table.matrix;
    let k = a.k.unwrap_or(match a.preset {
        Preset::Synthetic => 10,
        Preset::Real => 5,
    });
    let max_dim = a.max_dim.unwrap_or(data.ambient_dim());

    if verbose {
        note(
            err,
            format!(
                "# config: method={method} input={} n={} ambient={} k={k} k1={} k2={} max_dim={max_dim} seed={} n_reps={} calibration={} preset={:?}",
                a.input.display(),
                data.n_points(),
                data.ambient_dim(),
                a.k1,
                a.k2,
                a.seed,
                a.n_reps,
                a.calibration.as_deref().map_or("<memory>".into(), |p| p.display().to_string()),
                a.preset,
            ),
        );
    }

    let result = match method {
        Method::Danco => {
            let calib = obtain_calibration(a, data.n_points(), k, max_dim, err)?;
            estimate_danco_with(&data, k, max_dim, &calib, &DancoOptions::default())?
        }
        Method::MindMl => estimate_mind_ml(&data, k, max_dim)?,
        Method::Mle => estimate_mle_lb(&data, a.k1, a.k2)?,
        Method::Cd => estimate_cd(&data, &CdOptions::default())?,
    };

    for w in &result.warnings {
        note(err, format!("warning: {w}"));
    }
    writeln!(out, "{}", format_estimate(&result)).map_err(stdout_err)?;
    if verbose {
        for (name, v) in &result.diagnostics {
            note(err, format!("# {name} = {v:?}"));
        }
        if let Some(profile) = &result.kl_profile {
            note(err, "# d kl_norm kl_vm total");
            for t in profile {
                note(err, format!("# {} {:.6e} {:.6e} {:.6e}", t.d, t.kl_norm, t.kl_vm, t.total));
            }
        }
    }
    Ok(())
}

pub fn cmd_calibrate(a: &CalibrateArgs, verbose: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    if verbose {
        note(
            err,
            format!(
                "# config: max_dim={} n={} k={} seed={} n_reps={} out={}",
                a.max_dim,
                a.n,
                a.k,
                a.seed,
                a.n_reps,
                a.out.display()
            ),
        );
    }
    let table = build_calibration(a.max_dim, a.n, a.k, a.n_reps, a.seed)?;
    save_calibration(&table, &a.out)?;
    writeln!(
        out,
        "calibration: d = 1..{} (N = {}, k = {}) written to {}",
        table.max_dim(),
        table.n_points,
        table.k,
        a.out.display()
    )
    .map_err(stdout_err)
}

fn write_output(path: Option<&Path>, text: &str, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| DancoError::io(p, e)),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}

pub fn cmd_generate(a: &GenerateArgs, verbose: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let spec = match (&a.dataset, &a.generator) {
        (Some(label), _) => ManifoldSpec::named(label, a.n, a.seed)?,
        (None, Some(name)) => {
            let manifold: Manifold = name.parse()?;
            let d = a.d.ok_or_else(|| DancoError::param("--generator needs --d"))?;
            let ambient = a.ambient.unwrap_or(manifold.default_ambient(d));
            ManifoldSpec::new(manifold, d, ambient, a.n, a.seed)?
        }
        (None, None) => return Err(DancoError::param("one of --dataset or --generator is required")),
    };
    if verbose {
        note(
            err,
            format!(
                "# config: dataset={} generator={} d={} ambient={} n={} seed={}",
                spec.label, spec.manifold, spec.intrinsic_dim, spec.ambient_dim, spec.n_points, spec.seed
            ),
        );
    }
    let data = generate(&spec)?;
    write_output(a.out.as_deref(), &render_table(&data), out)?;
    if let Some(p) = &a.out {
        note(
            err,
            format!("{}: {} x {} written to {}", spec.label, data.n_points(), data.ambient_dim(), p.display()),
        );
    }
    Ok(())
}

pub fn cmd_bench(a: &BenchArgs, verbose: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let mut plan = match a.plan {
        PlanArg::Small => BenchPlan::small(a.seed)?,
        PlanArg::Synthetic => BenchPlan::synthetic(DESK_INSTANCES, DEFAULT_POINTS, a.seed)?,
        PlanArg::Full => BenchPlan::synthetic(FULL_INSTANCES, DEFAULT_POINTS, a.seed)?,
    };
    if let Some(labels) = &a.datasets {
        let n = plan.datasets[0].spec.n_points;
        let inst = plan.datasets[0].instances;
        let labels: Vec<&str> = labels.iter().map(String::as_str).collect();
        plan = BenchPlan::from_labels(&labels, inst, n, EstimatorConfig::synthetic_defaults(), a.seed)?;
    }
    for ds in &mut plan.datasets {
        if let Some(i) = a.instances {
            ds.instances = i;
        }
        if let Some(n) = a.n {
            ds.spec.n_points = n;
        }
    }
    plan.validate()?;
    if verbose {
        let labels: Vec<&str> = plan.datasets.iter().map(|d| d.spec.label.as_str()).collect();
        let ests: Vec<String> = plan.estimators.iter().map(|e| format!("{e:?}")).collect();
        note(
            err,
            format!(
                "# config: datasets={} instances={} n={} seed={} estimators=[{}]",
                labels.join(","),
                plan.datasets[0].instances,
                plan.datasets[0].spec.n_points,
                plan.seed,
                ests.join("; ")
            ),
        );
    }
    let report = run_bench(&plan)?;
    for (i, ds) in report.datasets.iter().enumerate() {
        for (e, est) in report.estimators.iter().enumerate() {
            for msg in &report.cell(i, e).errors {
                note(err, format!("warning: {} / {est}: {msg}", ds.label));
            }
        }
    }
    let format = match a.format {
        FormatArg::Plain => ReportFormat::Plain,
        FormatArg::Delimited => ReportFormat::Delimited,
    };
    write_output(a.out.as_deref(), &render_report(&report, format), out)?;
    if verbose {
        let _ = write!(err, "{}", render_timings(&report));
    }
    Ok(())
}
