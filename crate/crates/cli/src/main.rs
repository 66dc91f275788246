//! `nonlocal`: eigenvalues, certificates, dispersion relations, simulations and
//! spreading checks for nonlocal dispersal with drift.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use nonlocal_core::Error as CoreError;

use commands::{CertifyArgs, DispersionArgs, EigArgs, SimulateArgs, SpreadArgs, StationaryArgs, VerifyArgs};
use config::{Settings, UsageError};
use output::RunDir;

/// Environment variable naming the output root.
const OUT_ENV: &str = "NONLOCAL_OUT";

#[derive(Parser, Debug)]
#[command(name = "nonlocal", version, about = "Nonlocal dispersal operators with drift")]
struct Cli {
    /// Flat key = value file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root (default: $NONLOCAL_OUT, then ./out)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run directory under the output root (default: the subcommand name)
    #[arg(long, global = true)]
    run: Option<String>,
    /// Seed for randomized probes
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Principal eigenvalue of the discrete operator on (−l, l)
    Eig(EigArgs),
    /// Collatz–Wielandt lower bound from a piecewise-exponential test function
    Certify(CertifyArgs),
    /// Infinite-interval limit and spreading speeds
    Dispersion(DispersionArgs),
    /// Time integration on a window or on the drifted frame
    Simulate(SimulateArgs),
    /// Positive stationary state of the frame problem
    Stationary(StationaryArgs),
    /// Front speeds from an inline run or a snapshot CSV
    Speeds(SpreadArgs),
    /// Full spreading check with comparison probes
    Verify(VerifyArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eig(_) => "eig",
            Command::Certify(_) => "certify",
            Command::Dispersion(_) => "dispersion",
            Command::Simulate(_) => "simulate",
            Command::Stationary(_) => "stationary",
            Command::Speeds(_) => "speeds",
            Command::Verify(_) => "verify",
        }
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let cfg = Settings::load(cli.config.as_deref())?;
    let root = match cfg.opt("out", cli.out.clone())? {
        Some(p) => p,
        None => std::env::var_os(OUT_ENV).map_or_else(|| PathBuf::from("out"), PathBuf::from),
    };
    let name = cfg.get("run", cli.run.clone(), cli.cmd.name().to_string())?;
    let seed = cfg.get("seed", cli.seed, 0)?;
    let dir = RunDir::create(&root, &name)?;
    let outcome = match &cli.cmd {
        Command::Eig(a) => commands::eig(a, &cfg, &dir)?,
        Command::Certify(a) => commands::certify(a, &cfg, &dir)?,
        Command::Dispersion(a) => commands::dispersion(a, &cfg, &dir)?,
        Command::Simulate(a) => commands::simulate(a, &cfg, &dir)?,
        Command::Stationary(a) => commands::stationary(a, &cfg, &dir)?,
        Command::Speeds(a) => commands::speeds(a, &cfg, &dir)?,
        Command::Verify(a) => commands::verify(a, &cfg, seed, &dir)?,
    };
    let path = dir.write_summary(&outcome.summary)?;
    log::info!("wrote {}", path.display());
    print!("{}", outcome.summary.render());
    Ok(outcome.pass)
}

fn is_usage(e: &anyhow::Error) -> bool {
    e.downcast_ref::<UsageError>().is_some()
        || matches!(
            e.downcast_ref::<CoreError>(),
            Some(CoreError::UnknownFamily { .. } | CoreError::InvalidArgument(_))
        )
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_usage(&e) { 2 } else { 1 })
        }
    }
}
