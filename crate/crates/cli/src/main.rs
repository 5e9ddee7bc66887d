mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const THREADS_ENV: &str = "GSDU_THREADS";

/// Graph signal denoising and unrolled GNN propagation toolkit.
#[derive(Debug, Parser)]
#[command(name = "gsdu", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve a GSD problem on a graph signal.
    Denoise(DenoiseArgs),
    /// Check direct forward passes against their unrolled GD/ProxGD paths.
    Equiv(EquivArgs),
    /// Map a polynomial filter on L̂ to UGDGNN coefficients and verify it.
    Filter(FilterArgs),
    /// Train a UGDGNN node classifier.
    Train(TrainArgs),
    /// Train across depths and seeds; emit a K,mean_acc,std_acc table.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    Gd,
    Proxgd,
    ClosedForm,
}

#[derive(Debug, Args, Serialize)]
pub struct DenoiseArgs {
    /// Edge list, one `u v` pair per line.
    #[arg(long)]
    pub graph: PathBuf,
    /// Node features as CSV, one row per node.
    #[arg(long)]
    pub features: PathBuf,
    /// GsdSpec as JSON. Optional for closed-form when --gamma is given.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub solver: SolverKind,
    /// Teleport weight for the closed-form solve.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub iters: usize,
    /// Fixed stepsize; defaults to 1/Λ.
    #[arg(long)]
    pub stepsize: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub rel_tol: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct EquivArgs {
    /// sgc, appnp, jknet, gprgnn, gcn, gcnii, airgnn, ppnp, or all.
    #[arg(long, default_value = "all")]
    pub model: String,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FilterArgs {
    /// Comma-separated θ_0,…,θ_K.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, required = true)]
    pub theta: Vec<f64>,
    /// Graph for the verification run and the response CSV; a random graph otherwise.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Signal for the verification run; standard normal otherwise.
    #[arg(long)]
    pub features: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone, Serialize)]
pub struct TrainFlags {
    /// sbm, karate, or files:EDGES,FEATURES,LABELS.
    #[arg(long, default_value = "sbm")]
    pub dataset: String,
    /// Seed of the generated SBM graph and features.
    #[arg(long, default_value_t = 0)]
    pub data_seed: u64,
    #[arg(long, default_value_t = 0.005)]
    pub lr: f64,
    #[arg(long, default_value_t = 5e-4)]
    pub weight_decay: f64,
    #[arg(long, default_value_t = 500)]
    pub epochs: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short = 'k', default_value_t = 5)]
    pub k: usize,
    #[arg(long, default_value_t = 0.1)]
    pub alpha0: f64,
    #[arg(long, default_value_t = 100)]
    pub patience: usize,
    #[arg(long, default_value_t = 0.0)]
    pub feature_dropout: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub flags: TrainFlags,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub flags: TrainFlags,
    /// Depths to train; --k is ignored.
    #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5,6,7,8,9,10")]
    pub ks: Vec<usize>,
    #[arg(long, default_value_t = 10)]
    pub seeds: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error("{0}")]
    CheckFailed(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            Self::CheckFailed(_) => 1,
            Self::Input(_) => 2,
            Self::Numeric(_) => 3,
        }
    }
}

impl From<gsd_unroll::Error> for CliError {
    fn from(e: gsd_unroll::Error) -> Self {
        use gsd_unroll::Error as E;
        match e {
            E::SolverMismatch(_)
            | E::NoConvergence { .. }
            | E::NonInvertible(_)
            | E::NotExpressible(_)
            | E::TooLarge { .. }
            | E::StaleCache { .. }
            | E::Diverged { .. } => Self::Numeric(e.to_string()),
            _ => Self::Input(e.to_string()),
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Input(format!("{THREADS_ENV} must be a positive integer, got `{raw}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Input(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Denoise(a) => commands::denoise(&a),
        Command::Equiv(a) => commands::equiv(&a),
        Command::Filter(a) => commands::filter(&a),
        Command::Train(a) => commands::train(&a),
        Command::Sweep(a) => commands::sweep(&a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gsdu: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
