//! `chaoslim`: reproducible runs of the discrete-chaos toolkit.
//!
//! Exit codes: 0 success, 2 usage, 3 validation, 4 failed verdicts,
//! 5 runtime (I/O, numerical breakdown).

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "chaoslim", version, about = "Simulate and check limit theorems for discrete-chaos processes")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// JSON config file.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, value_name = "DIR", default_value = "chaoslim-out")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long, global = true, value_name = "U64")]
    pub seed: Option<u64>,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, value_name = "N", env = "CHAOSLIM_THREADS")]
    pub threads: Option<usize>,
    /// Time grid `t1,t2,...,1`; overrides the config grid.
    #[arg(long, global = true, value_name = "T1,T2,...")]
    pub grid: Option<String>,
    /// Path file format for `simulate`.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Bin,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate paths of every configured component on shared noise.
    Simulate,
    /// Autocovariances of one component, or cross-covariances of two.
    Acf(AcfArgs),
    /// Run a limit-theorem experiment and its verdict suite.
    Experiment,
    /// Variance table of a Hermite-process approximant.
    Hermite(HermiteArgs),
    /// Monte Carlo hypercontractivity check on finite-support kernels.
    Check(CheckArgs),
}

#[derive(Args, Debug, Default)]
pub struct AcfArgs {
    /// Chaos order of the first component.
    #[arg(long)]
    pub order: Option<usize>,
    /// Explicit coefficients `a_1,a_2,...`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "d")]
    pub values: Option<Vec<f64>>,
    /// Memory parameter of `a_i = i^(d-1)`.
    #[arg(long)]
    pub d: Option<f64>,
    /// Component label from `--config` instead of inline coefficients.
    #[arg(long, conflicts_with_all = ["values", "d"])]
    pub component: Option<String>,
    /// Second component for cross-covariances, by label.
    #[arg(long)]
    pub with: Option<String>,
    /// Order of an inline second component.
    #[arg(long)]
    pub with_order: Option<usize>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "with_d")]
    pub with_values: Option<Vec<f64>>,
    #[arg(long)]
    pub with_d: Option<f64>,
    /// Exact head length for regularly varying coefficients.
    #[arg(long, default_value_t = 4096)]
    pub truncation: usize,
    /// Lags `0..=max_lag`, or the top of the log grid.
    #[arg(long, default_value_t = 20)]
    pub max_lag: usize,
    /// Use this many log-spaced lags in `1..=max_lag` and add slope columns.
    #[arg(long)]
    pub log_lags: Option<usize>,
}

#[derive(Args, Debug)]
pub struct HermiteArgs {
    #[arg(long)]
    pub k: usize,
    #[arg(long)]
    pub d: f64,
    /// Approximation level `N`.
    #[arg(long, default_value_t = 1 << 16)]
    pub n: usize,
    /// Monte Carlo replications; 0 skips simulation.
    #[arg(long, default_value_t = 2000)]
    pub replications: usize,
    #[arg(long, default_value = "gaussian")]
    pub noise: String,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    /// Order of random kernels when no config is given.
    #[arg(long, default_value_t = 2)]
    pub k: usize,
    /// Band width of random kernels.
    #[arg(long, default_value_t = 8)]
    pub width: usize,
    /// Number of random kernels.
    #[arg(long, default_value_t = 1)]
    pub kernels: usize,
    #[arg(long, default_value_t = 20_000)]
    pub replications: usize,
    /// A noise name or `all`.
    #[arg(long, default_value = "all")]
    pub noise: String,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Lib(chaoslim::Error),
    Verdict(String),
}

impl From<chaoslim::Error> for CliError {
    fn from(e: chaoslim::Error) -> Self {
        CliError::Lib(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Lib(e.into())
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Lib(e) if e.is_validation() => 3,
            CliError::Verdict(_) => 4,
            CliError::Lib(_) => 5,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Verdict(m) => write!(f, "verdict failed: {m}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("chaoslim: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.global.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    }
    let g = &cli.global;
    match &cli.command {
        Command::Simulate => commands::simulate(g),
        Command::Acf(a) => commands::acf(g, a),
        Command::Experiment => commands::experiment(g),
        Command::Hermite(h) => commands::hermite(g, h),
        Command::Check(c) => commands::check(g, c),
    }
}
