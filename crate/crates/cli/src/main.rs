//! `epiecon`: population generation, IO tables, single runs, scenario sweeps
//! and ABC calibration of the coupled epidemic-economic model.
//!
//! Exit codes: 0 success, 2 configuration error, 3 runtime failure.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Context;
use config::CliConfig;
use epiecon::Error;

#[derive(Parser)]
#[command(name = "epiecon", version, about = "Coupled agent-based epidemic and input-output economy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON configuration; the desk-scale world is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the world seed (gen-population, build-io), the run seed
    /// (simulate), the first sweep seed, or the calibration seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for runs that execute in parallel.
    #[arg(long, global = true, env = "EPIECON_WORKERS")]
    workers: Option<usize>,
    /// Print per-stage wall-clock timings to stderr.
    #[arg(long, global = true)]
    profile: bool,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Write the synthetic population.
    GenPopulation,
    /// Write the two-region input-output table.
    BuildIo,
    /// Run one scenario for each configured seed.
    Simulate,
    /// Run the closure × fear × start grid.
    Sweep,
    /// ABC rejection calibration.
    Calibrate,
}

fn exit_code(e: &Error) -> ExitCode {
    if e.is_config() {
        ExitCode::from(2)
    } else {
        ExitCode::from(3)
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::config("--workers", "must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Domain(e.to_string()))?;
    }
    let ctx = Context {
        config: CliConfig::load(cli.config.as_deref())?,
        seed: cli.seed,
        out: cli.out,
        profile: cli.profile,
    };
    match cli.command {
        Command::GenPopulation => commands::gen_population(&ctx),
        Command::BuildIo => commands::build_io(&ctx),
        Command::Simulate => commands::simulate(&ctx),
        Command::Sweep => commands::sweep(&ctx),
        Command::Calibrate => commands::calibrate(&ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
