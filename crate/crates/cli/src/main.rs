//! `szlab`: command-line driver for the experiments.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "szlab", version, about = "Functions of operators with non-smooth symbols: experiments")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// TOML configuration file for the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if absent.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Seed for random instances; overrides the config file (default 0).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, global = true, env = "SZLAB_THREADS", default_value_t = 0)]
    pub threads: usize,
    /// Overrides the quadrature tolerance where one applies.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Apply f to a Hermitian matrix read from a matrix file.
    HsApply(HsApplyArgs),
    /// Tabulate |ω| of the quasi-analytic extension against its majorant (CSV).
    QaExtension(QaArgs),
    /// Random sweeps of the quasi-commutator bounds and the PSD power inequality.
    BoundSweep(BoundArgs),
    /// Asymptotic coefficients W0, W1 and samples of the 𝔄 transform.
    Coeffs(CoeffsArgs),
    /// Two-term trace asymptotics for S_α.
    Szego,
    /// Trace asymptotics for the jump operators H_α or V_α.
    Jump,
    /// Growth of the cross terms in a Schatten quasi-norm.
    CrossGrowth,
    /// Helffer-Sjöstrand against the spectral calculus on random matrices.
    HsSuite,
}

#[derive(Args, Debug)]
pub struct HsApplyArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub f: String,
    /// Smoothness order of the extension.
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value = "eigen")]
    pub scheme: String,
    /// `hs` or `spectral`.
    #[arg(long, default_value = "hs")]
    pub method: String,
}

#[derive(Args, Debug)]
pub struct QaArgs {
    #[arg(long)]
    pub f: String,
    #[arg(long, default_value_t = 3)]
    pub order: usize,
    #[arg(long, default_value_t = 40)]
    pub nx: usize,
    #[arg(long, default_value_t = 12)]
    pub nv: usize,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    /// One of 2.4, 2.8, gest, bks, ps.
    #[arg(long)]
    pub theorem: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CoeffsArgs {
    #[arg(long)]
    pub g: String,
    #[arg(long, default_value = "one")]
    pub symbol: String,
    /// Points at which 𝔄(g; s) is sampled.
    #[arg(long, num_args = 1.., default_values_t = vec![1.0])]
    pub s: Vec<f64>,
    /// TOML file with `lambda` and `omega` domain tables.
    #[arg(long)]
    pub domains: Option<PathBuf>,
    #[arg(long, default_value_t = 1024)]
    pub mesh: usize,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("szlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
