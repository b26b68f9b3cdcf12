use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use depletion_cli::config::{parse_config_with, Mode, Overrides};
use depletion_cli::run::run;

/// Depletion-interaction simulations, samplers and analysis.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    mode: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reflected SDE for spheres and bath particles.
    TwoType(Flags),
    /// Gradient SDE for spheres in the depletion energy.
    Depletion(Flags),
    /// Metropolis sampling of the equilibrium measure.
    SampleEquilibrium(Flags),
    /// Activity annealing towards a minimal-energy packing.
    AnnealPack(Flags),
    /// Histograms, energy traces and KS statistics of a snapshot file.
    Analyze(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Overrides `output_path` in the config.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "K")]
    replicas: Option<usize>,
    #[arg(long, value_name = "T")]
    threads: Option<usize>,
}

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mode, flags) = match cli.mode {
        Command::TwoType(f) => (Mode::TwoType, f),
        Command::Depletion(f) => (Mode::Depletion, f),
        Command::SampleEquilibrium(f) => (Mode::SampleEquilibrium, f),
        Command::AnnealPack(f) => (Mode::AnnealPack, f),
        Command::Analyze(f) => (Mode::Analyze, f),
    };
    let text = match std::fs::read_to_string(&flags.config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", flags.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let overrides = Overrides {
        mode: Some(mode),
        seed: flags.seed,
        output_path: flags.out,
        replicas: flags.replicas,
    };
    let cfg = match parse_config_with(&text, &overrides) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", flags.config.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if let Some(t) = flags.threads {
        if t == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(EXIT_CONFIG);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    for w in &cfg.warnings {
        eprintln!("warning: {w}");
    }
    match run(&cfg) {
        Ok(out) => {
            eprintln!("wrote {}", out.metadata_path.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_RUNTIME)
        }
    }
}
