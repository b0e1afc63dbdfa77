mod commands;
mod config;
mod emit;
mod figures;

use anyhow::Result;
use clap::{Parser, Subcommand};
use config::{Flags, RunConfig};
use figures::FigureId;
use std::process::ExitCode;

/// Bad command-line or config input.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

#[derive(Parser)]
#[command(name = "blowup", version, about = "Self-similar blow-up profiles by phase-space shooting")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Critical exponents for (m, N, sigma)
    Exponents,
    /// Critical points with eigenvalues and types
    Points,
    /// One orbit of a shooting family
    Shoot,
    /// Oscillation counts and fates over a parameter grid
    Sweep,
    /// Connection to Q1 with a given number of minima
    Find,
    /// Dead-core connection from the Q5 family
    Deadcore,
    /// Pohozaev identity along a located profile
    Pohozaev,
    /// Non-existence verdict for sigma > 0
    Nonexist,
    /// Plot data for one of the figures
    Figure {
        #[arg(value_enum)]
        id: FigureId,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Exponents => "exponents",
            Command::Points => "points",
            Command::Shoot => "shoot",
            Command::Sweep => "sweep",
            Command::Find => "find",
            Command::Deadcore => "deadcore",
            Command::Pohozaev => "pohozaev",
            Command::Nonexist => "nonexist",
            Command::Figure { .. } => "figure",
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let config = RunConfig::resolve(cli.command.name(), &cli.flags)?;
    let docs = match cli.command {
        Command::Exponents => commands::exponents(&config)?,
        Command::Points => commands::points(&config)?,
        Command::Shoot => commands::shoot_cmd(&config)?,
        Command::Sweep => commands::sweep_cmd(&config)?,
        Command::Find => commands::find_cmd(&config)?,
        Command::Deadcore => commands::deadcore_cmd(&config)?,
        Command::Pohozaev => commands::pohozaev_cmd(&config)?,
        Command::Nonexist => commands::nonexist_cmd(&config)?,
        Command::Figure { id } => {
            let dir = figures::figure_cmd(id, &config)?;
            println!("{}", dir.join("manifest.json").display());
            return Ok(());
        }
    };
    emit::emit(&docs, &config)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<InvalidInput>().is_some() {
        return 2;
    }
    match err.downcast_ref::<blowup::Error>() {
        Some(e) if e.is_validation() => 2,
        Some(blowup::Error::NoBracket(_)) => 3,
        Some(_) => 4,
        None => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = std::env::var("BLOWUP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if threads > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
        }
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
