use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use steklov_trace::commands;
use steklov_trace::config::Settings;
use steklov_trace::CliError;

/// Steklov spectra, trace-space expansions and compatibility checks.
#[derive(Debug, Parser)]
#[command(name = "steklov-trace", version)]
struct Cli {
    /// JSON file with default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Steklov spectrum (CSV j, sigma, multiplicity_group).
    Solve(Settings),
    /// Auxiliary spectrum for (ℓ, m).
    SolveAux(Settings),
    /// Expand boundary data in a Steklov basis.
    Expand(Settings),
    /// Extend coefficients to a field.
    Extend(Settings),
    /// Test a pair (g0, g1) along both routes.
    CheckPair {
        /// Use the zero pair.
        #[arg(long)]
        zero: bool,
        #[command(flatten)]
        settings: Settings,
    },
    /// Vertex log-integral condition on a polygon.
    CheckPolygon(Settings),
    /// Rotated-gradient Besov condition on a polygon.
    CheckGeymonat(Settings),
    /// Gagliardo, difference and spectral seminorms of a function on a circle.
    Oracle(Settings),
    /// Power-law fit of a spectrum.
    Weyl(Settings),
    /// Hadamard's sequence in L² and H^{1/2}.
    Hadamard(Settings),
    /// Run every acceptance criterion.
    Reproduce(Settings),
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let file = match &cli.config {
        Some(p) => Settings::load(p)?,
        None => Settings::default(),
    };
    let with = |s: Settings| s.with_defaults_from(&file);
    match cli.command {
        Command::Solve(s) => commands::solve(&with(s)),
        Command::SolveAux(s) => commands::solve_aux(&with(s)),
        Command::Expand(s) => commands::expand(&with(s)),
        Command::Extend(s) => commands::extend_cmd(&with(s)),
        Command::CheckPair { zero, settings } => commands::check_pair_cmd(&with(settings), zero),
        Command::CheckPolygon(s) => commands::check_polygon(&with(s)),
        Command::CheckGeymonat(s) => commands::check_geymonat(&with(s)),
        Command::Oracle(s) => commands::oracle(&with(s)),
        Command::Weyl(s) => commands::weyl(&with(s)),
        Command::Hadamard(s) => commands::hadamard(&with(s)),
        Command::Reproduce(s) => commands::reproduce(&with(s)),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("STEKLOV_TRACE_LOG", "error"))
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("steklov-trace: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
