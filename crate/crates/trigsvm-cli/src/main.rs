//! `trigsvm` — batch command-line front door for the trigonometric-kernel
//! support-vector toolkit.
//!
//! Subcommands cover the full experimental workflow: synthetic data
//! generation, training, prediction, grid-search tuning, the compact/sparse
//! sigma heuristic, randomized positive-semidefiniteness audits, an SVR
//! demo, sigma sweeps, and a four-kernel comparison. Every command prints a
//! human-readable table plus a JSON report embedding its full resolved
//! configuration; artifacts on disk are byte-reproducible from that echo.
//! Exit codes: 0 success, 1 module error (single-line diagnostic on
//! stderr), 2 usage error.

mod commands;
mod report;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use trigsvm::KernelSpec;

#[derive(Parser)]
#[command(
    name = "trigsvm",
    version,
    about = "Support-vector toolkit around the kernel sin(pi / (2 + sigma * ||x - x'||^2))"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset CSV (concentric circles or noisy sine).
    Synth(SynthArgs),
    /// Fit a classifier on a CSV and save the model as JSON.
    Train(TrainArgs),
    /// Apply a saved model to a CSV and write predictions.
    Predict(PredictArgs),
    /// Cross-validated grid search over (C, sigma); writes a grid report.
    Tune(TuneArgs),
    /// Per-class distance statistics and the compact/sparse sigma sub-grid.
    Heuristic(HeuristicArgs),
    /// Randomized positive-semidefiniteness survey of a kernel family.
    Audit(AuditArgs),
    /// Train epsilon-SVR on the generated sine curve and write the curve CSV.
    SvrDemo(SvrDemoArgs),
    /// Sigma sweep at fixed C reporting #SV / #TrE / #TsE per sigma.
    Sweep(SweepArgs),
    /// Tune and evaluate the four reference kernels K1-K4 on one dataset.
    Compare(CompareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelName {
    Poly,
    Gaussian,
    Rbf,
    Sigmoid,
    Trig,
    Mixed,
}

/// Kernel-selection flags shared by every model-building subcommand.
#[derive(Args)]
struct KernelArgs {
    /// Kernel family.
    #[arg(long, value_enum, default_value_t = KernelName::Trig)]
    kernel: KernelName,
    /// Width: sigma for gaussian/trig/mixed, gamma for rbf.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Polynomial degree (poly kernel only).
    #[arg(long, default_value_t = 3)]
    p: u32,
    /// Mixture weight for mixed (beta*trig + (1-beta)*gaussian), or the
    /// slope for sigmoid.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Intercept for the sigmoid kernel.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
}

impl KernelArgs {
    fn spec(&self) -> KernelSpec {
        match self.kernel {
            KernelName::Poly => KernelSpec::Poly { p: self.p },
            KernelName::Gaussian => KernelSpec::Gaussian { sigma: self.sigma },
            KernelName::Rbf => KernelSpec::Rbf { gamma: self.sigma },
            KernelName::Sigmoid => KernelSpec::Sigmoid {
                alpha: self.alpha,
                beta: self.beta,
            },
            KernelName::Trig => KernelSpec::Trig { sigma: self.sigma },
            KernelName::Mixed => KernelSpec::Mixed {
                sigma: self.sigma,
                beta: self.beta,
            },
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SynthName {
    /// Two concentric circles, 2 features, balanced +1 / -1 classes.
    Circles,
    /// Noisy sin(x)*exp(-0.2x) regression curve on [0, 10].
    SvrSine,
}

#[derive(Args)]
struct SynthArgs {
    /// Which generator to run.
    #[arg(long, value_enum)]
    name: SynthName,
    /// Sample count.
    #[arg(long, default_value_t = 400)]
    n: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Gaussian noise scale (svr-sine only; 0 disables noise).
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    /// Training CSV (features plus a label column).
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Box penalty.
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Z-score features with training statistics before fitting; the
    /// statistics ride along inside the saved model.
    #[arg(long)]
    standardize: bool,
    /// Label column name; the last column when omitted.
    #[arg(long)]
    label_column: Option<String>,
    /// Output model JSON path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Input CSV with the same schema as the training data.
    #[arg(long)]
    data: PathBuf,
    /// Saved model JSON.
    #[arg(long)]
    model: PathBuf,
    /// Label column name; the last column when omitted.
    #[arg(long)]
    label_column: Option<String>,
    /// Output predictions CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct TuneArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Cross-validation fold count.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Explicit C grid; the full 16-value power-of-two grid when omitted.
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,
    /// Explicit sigma grid; the heuristic 8-value sub-grid (width kernels)
    /// or the --sigma placeholder (width-free kernels) when omitted.
    #[arg(long, value_delimiter = ',')]
    sigma_grid: Option<Vec<f64>>,
    /// Label column name; the last column when omitted.
    #[arg(long)]
    label_column: Option<String>,
    /// Grid report JSON path; a CSV twin lands next to it.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HeuristicArgs {
    #[arg(long)]
    data: PathBuf,
    /// Z-score features before measuring distances.
    #[arg(long)]
    standardize: bool,
    /// Label column name; the last column when omitted.
    #[arg(long)]
    label_column: Option<String>,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    kernel: KernelArgs,
    /// Random Gram matrices to draw.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Largest sample count per trial.
    #[arg(long, default_value_t = 15)]
    n_max: usize,
    /// Largest dimension per trial.
    #[arg(long, default_value_t = 4)]
    d_max: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Survey report JSON path; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SvrDemoArgs {
    /// Kernel family (demo default: mixed).
    #[arg(long, value_enum, default_value_t = KernelName::Mixed)]
    kernel: KernelName,
    /// Width: sigma for gaussian/trig/mixed, gamma for rbf.
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Polynomial degree (poly kernel only).
    #[arg(long, default_value_t = 3)]
    p: u32,
    /// Mixture weight for mixed (beta*trig + (1-beta)*gaussian), or the
    /// slope for sigmoid.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Intercept for the sigmoid kernel.
    #[arg(long, default_value_t = 0.0)]
    alpha: f64,
    /// Box penalty.
    #[arg(long = "C", default_value_t = 10.0)]
    c: f64,
    /// Tube half-width.
    #[arg(long, default_value_t = 0.1)]
    epsilon: f64,
    /// Curve sample count.
    #[arg(long, default_value_t = 200)]
    n: usize,
    /// Gaussian noise scale on the training targets.
    #[arg(long, default_value_t = 0.1)]
    noise: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output curve CSV (columns x, y_noisy, y_true, y_pred).
    #[arg(long)]
    out: PathBuf,
}

impl SvrDemoArgs {
    fn spec(&self) -> KernelSpec {
        KernelArgs {
            kernel: self.kernel,
            sigma: self.sigma,
            p: self.p,
            beta: self.beta,
            alpha: self.alpha,
        }
        .spec()
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    kernel: KernelArgs,
    /// Box penalty shared by every sigma.
    #[arg(long = "C", default_value_t = 1.0)]
    c: f64,
    /// Comma-separated sigma values, one table column each.
    #[arg(long, value_delimiter = ',', required = true)]
    sigmas: Vec<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Train share of the holdout split.
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// Label column name; the last column when omitted.
    #[arg(long)]
    label_column: Option<String>,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    data: PathBuf,
    /// Polynomial degree for K1.
    #[arg(long, default_value_t = 3)]
    p: u32,
    /// Mixture weight for K4.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Cross-validation fold count used while tuning each kernel.
    #[arg(long, default_value_t = 5)]
    folds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Train share of the holdout split.
    #[arg(long, default_value_t = 0.8)]
    train_fraction: f64,
    /// Label column name; the last column when omitted.
    #[arg(long)]
    label_column: Option<String>,
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Synth(args) => commands::synth(&args),
        Command::Train(args) => commands::train(&args),
        Command::Predict(args) => commands::predict(&args),
        Command::Tune(args) => commands::tune(&args),
        Command::Heuristic(args) => commands::heuristic(&args),
        Command::Audit(args) => commands::audit(&args),
        Command::SvrDemo(args) => commands::svr_demo(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Compare(args) => commands::compare(&args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
