use chainlab_cli::{emit_config, load_config, runner, CliError, Kind, Overrides};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Energy transport experiments on stochastically perturbed oscillator chains.
///
/// Exit status: 0 on success, 2 on invalid input, 3 on numerical failure.
#[derive(Parser)]
#[command(name = "chainlab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads, overriding the config.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Evolve one equilibrium trajectory and record conserved quantities.
    ChainRun,
    /// Current autocorrelation and Green-Kubo conductivity.
    GreenKubo,
    /// Phonon jump-process Monte Carlo and scaling exponent.
    PhononMc,
    /// Linear phonon transport equation.
    Transport,
    /// Fractional heat equation from a point mass.
    FracHeat,
    /// Euler system from smooth periodic data.
    Euler,
    /// Tabulate equilibrium thermodynamics.
    ThermoTable,
    /// Run the experiment named by `kind` in the config.
    Run,
    /// Validate the config and print it with defaults filled in.
    Check,
}

impl Command {
    fn kind(self) -> Option<Kind> {
        Some(match self {
            Command::ChainRun => Kind::ChainRun,
            Command::GreenKubo => Kind::GreenKubo,
            Command::PhononMc => Kind::PhononMc,
            Command::Transport => Kind::Transport,
            Command::FracHeat => Kind::FracHeat,
            Command::Euler => Kind::Euler,
            Command::ThermoTable => Kind::ThermoTable,
            Command::Run | Command::Check => return None,
        })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let text = match &cli.config {
        Some(p) => match std::fs::read_to_string(p) {
            Ok(t) => Some(t),
            Err(e) => {
                eprintln!("cannot read {}: {e}", p.display());
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.as_ref().map(|p| p.display().to_string()),
        workers: cli.workers,
    };
    let cfg = match load_config(text.as_deref(), cli.command.kind(), &overrides) {
        Ok(c) => c,
        Err(e) => return reject(&e, text.as_deref(), &overrides, cli.command),
    };
    if let Command::Check = cli.command {
        print!("{}", emit_config(&cfg));
        return ExitCode::SUCCESS;
    }
    let manifest = runner::run(&cfg);
    if let Some(e) = &manifest.error {
        eprintln!("{e}");
    }
    for w in &manifest.warnings {
        eprintln!("warning: {w}");
    }
    for (k, v) in &manifest.summary {
        println!("{k} = {v}");
    }
    ExitCode::from(manifest.exit_code() as u8)
}

fn reject(e: &CliError, text: Option<&str>, overrides: &Overrides, cmd: Command) -> ExitCode {
    eprintln!("{e}");
    if !matches!(cmd, Command::Check) {
        let dir = overrides.out.clone().unwrap_or_else(|| "out".into());
        runner::rejected(text.unwrap_or(""), e, Path::new(&dir));
    }
    ExitCode::from(e.exit_code() as u8)
}
