//! `metachain`: stationary-point census, closed-form predictions and
//! transition-time experiments for the coupled bistable chain.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use metachain::landscape::SaddleKind;

/// Exit code for usage and domain errors.
pub const EXIT_USAGE: u8 = 2;
/// Exit code for statistical failures (censoring, failed checks).
pub const EXIT_STATISTICAL: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "metachain", version, about = "Metastable landscape of coupled bistable chains")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Output directory (created if missing).
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 2024)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Write the primary output as JSON.
    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,
    /// Write the primary output as CSV.
    #[arg(long, global = true)]
    pub csv: bool,
}

/// Coupling given either as γ̃ or as γ.
#[derive(Debug, Clone, Copy, Args)]
#[group(required = true, multiple = false)]
pub struct Coupling {
    /// Rescaled coupling γ̃ = γ/γ₁.
    #[arg(long = "gamma-tilde", allow_negative_numbers = true)]
    pub gamma_tilde: Option<f64>,
    /// Raw coupling γ.
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Find every stationary point and compare with the predicted count.
    Census {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        coupling: Coupling,
        /// Random Newton seeds per site.
        #[arg(long, default_value_t = 50)]
        seeds: usize,
    },
    /// Census over a γ̃ grid: branch amplitudes, V/N and indices.
    BifurcationScan {
        #[arg(long)]
        n: usize,
        /// Comma list or `lo:hi:count`.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
    },
    /// Large-N barrier per site h(γ̃) on a grid.
    Barrier {
        /// Comma list or `lo:hi:count`, within (0, 1].
        #[arg(long)]
        grid: String,
    },
    /// Predicted and Newton-refined saddle profile.
    Droplet {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        coupling: Coupling,
        #[arg(long, default_value = "A")]
        kind: SaddleKind,
        /// Winding number.
        #[arg(long, default_value_t = 1)]
        m: usize,
    },
    /// Transition times from I− to I+ over a σ grid, with an Arrhenius fit.
    Simulate {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        coupling: Coupling,
        /// Comma list or `lo:hi:count`.
        #[arg(long, default_value = "0.45,0.40,0.35,0.30")]
        sigma: String,
        #[arg(long, default_value_t = 200)]
        replicas: usize,
        /// Cutoff time per sample (default: 1e8 steps).
        #[arg(long)]
        t_max: Option<f64>,
        /// Hitting-ball radius.
        #[arg(long, default_value_t = metachain::sde::DEFAULT_RADIUS)]
        radius: f64,
        /// Grid shifts allowed when the smallest σ is censored too often.
        #[arg(long, default_value_t = 20)]
        max_shifts: usize,
    },
    /// Identity battery for the elliptic kernel.
    EllSelftest {
        #[arg(long, default_value_t = 50)]
        grid: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e.error);
            ExitCode::from(e.code)
        }
    }
}
