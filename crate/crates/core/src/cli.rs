//! The `erhit` command line.
//!
//! Exit status: 0 on success, 1 when a computation fails (the error's name
//! goes to stderr), 2 for usage errors including missing input files.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::clt::{run_experiment, ExperimentConfig, Method, PRule, StatisticKind};
use crate::error::{Error, Result};
use crate::graph::sample_er_graph;
use crate::io::{read_graph, storage_paths, to_json_pretty, write_atomic, write_graph};
use crate::report::{diagnostics_report, eigenvectors_csv, hitting_report, spectrum_report, HitMethod, HitOptions};
use crate::spectral::decompose_graph;

#[derive(Debug, Parser)]
#[command(
    name = "erhit",
    version,
    about = "Hitting times of random walks on Erdős–Rényi graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample G(n, p) and store it as `<out>.csv` + `<out>.json`.
    Gen(GenArgs),
    /// Eigendecomposition of the normalized adjacency of a stored graph.
    Spectrum(SpectrumArgs),
    /// Mean target hitting time of a stored graph.
    Hit(HitArgs),
    /// Run a batch experiment from a JSON config.
    Clt(CltArgs),
    /// Gap, delocalization and negligibility diagnostics.
    Diag(DiagArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output prefix.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Stored graph prefix.
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Report path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write all eigenvectors as CSV (n^2 values).
    #[arg(long)]
    pub eigenvectors: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum MethodArg {
    Spectral,
    Solve,
    Mc,
}

impl From<MethodArg> for HitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Spectral => HitMethod::Spectral,
            MethodArg::Solve => HitMethod::Solve,
            MethodArg::Mc => HitMethod::Mc,
        }
    }
}

#[derive(Debug, Args)]
pub struct HitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub target: usize,
    #[arg(long, value_enum, default_value = "spectral")]
    pub method: MethodArg,
    /// Walks per start vertex (mc only).
    #[arg(long, default_value_t = 10_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    /// Seed for mc walks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Include the full hitting column in the report.
    #[arg(long)]
    pub column: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CltArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Report path; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Samples CSV path; defaults to the report path with a `.csv`
    /// extension.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagArgs {
    /// Single stored graph.
    #[arg(long = "in", conflicts_with_all = ["n_grid", "c", "seeds", "master_seed"])]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub target: usize,
    /// Edge probability for a series, or the scaling `p` for a single graph
    /// (defaults to the graph's own).
    #[arg(long, conflicts_with = "c")]
    pub p: Option<f64>,
    /// Use `p = c log(n) / n` for the series.
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long, value_delimiter = ',', required_unless_present = "input")]
    pub n_grid: Vec<usize>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub seeds: u64,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-graph series CSV (series mode only).
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

enum Failure {
    Usage(String),
    Domain(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e)
    }
}

fn require_file(path: &Path) -> std::result::Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("no such file: {}", path.display())))
    }
}

fn require_graph(prefix: &Path) -> std::result::Result<(), Failure> {
    let (csv, json) = storage_paths(prefix);
    require_file(&csv)?;
    require_file(&json)
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run_gen(a: &GenArgs) -> Result<()> {
    let g = sample_er_graph(a.n as usize, a.p, a.seed)?;
    write_graph(&g, &a.out)?;
    Ok(())
}

fn run_spectrum(a: &SpectrumArgs) -> Result<()> {
    let g = read_graph(&a.input)?;
    let dec = decompose_graph(&g)?;
    if let Some(path) = &a.eigenvectors {
        eprintln!("writing {} eigenvector entries to {}", g.n() * g.n(), path.display());
        write_atomic(path, eigenvectors_csv(&dec).as_bytes())?;
    }
    emit(a.out.as_deref(), &to_json_pretty(&spectrum_report(&g, &dec))?)
}

fn run_hit(a: &HitArgs) -> Result<()> {
    let g = read_graph(&a.input)?;
    let method = HitMethod::from(a.method);
    let dec = match method {
        HitMethod::Spectral => Some(decompose_graph(&g)?),
        _ => None,
    };
    let opts = HitOptions {
        target: a.target,
        method,
        include_column: a.column,
        trials: a.trials,
        seed: a.seed,
    };
    emit(
        a.out.as_deref(),
        &to_json_pretty(&hitting_report(&g, dec.as_ref(), &opts)?)?,
    )
}

fn samples_path(explicit: &Option<PathBuf>, out: &Option<PathBuf>) -> Option<PathBuf> {
    explicit
        .clone()
        .or_else(|| out.as_ref().map(|o| o.with_extension("csv")))
}

fn write_experiment(cfg: &ExperimentConfig, out: &Option<PathBuf>, samples: &Option<PathBuf>) -> Result<()> {
    let report = run_experiment(cfg)?;
    if let Some(path) = samples_path(samples, out) {
        write_atomic(&path, report.samples_csv().as_bytes())?;
    }
    emit(out.as_deref(), &to_json_pretty(&report)?)
}

fn run_clt(a: &CltArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: a.config.clone(),
        line: e.line(),
        msg: e.to_string(),
    })?;
    write_experiment(&cfg, &a.out, &a.samples)
}

fn run_diag(a: &DiagArgs) -> Result<()> {
    if let Some(input) = &a.input {
        let g = read_graph(input)?;
        let dec = decompose_graph(&g)?;
        let report = diagnostics_report(&g, &dec, a.target, a.p.unwrap_or(g.p()))?;
        return emit(a.out.as_deref(), &to_json_pretty(&report)?);
    }
    let p_rule = match (a.p, a.c) {
        (_, Some(c)) => PRule::LogScaled { c },
        (Some(p), None) => PRule::Constant { p },
        (None, None) => return Err(Error::InvalidConfig("series needs --p or --c".into())),
    };
    let cfg = ExperimentConfig {
        schema: crate::clt::CONFIG_SCHEMA,
        n_grid: a.n_grid.clone(),
        p_rule,
        target: a.target,
        replications: a.seeds as usize,
        master_seed: a.master_seed,
        method: Method::Spectral,
        statistics: vec![StatisticKind::Diagnostics],
        cross_check: false,
        workers: a.workers,
    };
    write_experiment(&cfg, &a.out, &a.samples)
}

fn execute(cmd: &Command) -> std::result::Result<(), Failure> {
    match cmd {
        Command::Gen(a) => run_gen(a)?,
        Command::Spectrum(a) => {
            require_graph(&a.input)?;
            run_spectrum(a)?
        }
        Command::Hit(a) => {
            require_graph(&a.input)?;
            run_hit(a)?
        }
        Command::Clt(a) => {
            require_file(&a.config)?;
            run_clt(a)?
        }
        Command::Diag(a) => {
            if let Some(input) = &a.input {
                require_graph(input)?;
            }
            run_diag(a)?
        }
    }
    Ok(())
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(Failure::Domain(e)) => {
            eprintln!("{}: {e}", e.name());
            1
        }
    }
}
