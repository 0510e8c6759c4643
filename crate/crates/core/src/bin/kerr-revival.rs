use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kerr_revival::cli::{run, CliError, Command, Overrides};

/// Exact and semiclassical coherent-state propagation in the Kerr oscillator.
#[derive(Parser)]
#[command(name = "kerr-revival", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Autocorrelation <psi(0)|psi(t)> over a time range (CSV).
    Correlation(Flags),
    /// psi(q, t) on a position grid (CSV).
    Wavefunction(Flags),
    /// Exact Wigner function on a phase-space grid (long-format CSV).
    Wigner(Flags),
    /// Error report between --method and --against (JSON).
    Compare(Flags),
}

#[derive(clap::Args)]
struct Flags {
    /// JSON config file, or a previous output whose header holds one. Flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

fn execute(command: Command, flags: Flags) -> Result<(), CliError> {
    let overrides = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            Overrides::from_text(&text)?.merge(flags.overrides)
        }
        None => flags.overrides,
    };
    let (cfg, text) = run(command, &overrides)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, flags) = match cli.command {
        Cmd::Correlation(f) => (Command::Correlation, f),
        Cmd::Wavefunction(f) => (Command::Wavefunction, f),
        Cmd::Wigner(f) => (Command::Wigner, f),
        Cmd::Compare(f) => (Command::Compare, f),
    };
    match execute(command, flags) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kerr-revival: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
