//! `canalband`: band structure of the shallow-canal limit problem.
//!
//! Exit status: 0 on success, 2 on invalid input, 3 on solver failure.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "canalband", version, about = "Floquet band structure of a periodic shallow canal with small holes")]
pub struct Cli {
    /// Run configuration (TOML; dotted keys allowed).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for Floquet sweeps; 0 picks automatically.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Only report errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum Command {
    /// Closed-form dispersion curves and their knots.
    Dispersion,
    /// Polarization matrix of the configured hole.
    Polarization,
    /// Leading-order gap at the (0, 4π²) knot.
    PredictGap,
    /// Spectrum at the single Floquet parameter `solver.eta`.
    Solve,
    /// Floquet sweep, band hulls, gaps and comparison with the prediction.
    Bands,
    /// Junction boundary layer and its constant c_Ξ.
    BoundaryLayer,
    /// Physical spectral parameter and wave number.
    Lift,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Dispersion => "dispersion",
            Command::Polarization => "polarization",
            Command::PredictGap => "predict-gap",
            Command::Solve => "solve",
            Command::Bands => "bands",
            Command::BoundaryLayer => "boundary-layer",
            Command::Lift => "lift",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { log::LevelFilter::Error } else { log::LevelFilter::Info };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("canalband {}: {e}", cli.command.name());
            ExitCode::from(e.exit_code())
        }
    }
}
