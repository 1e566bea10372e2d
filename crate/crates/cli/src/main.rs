mod args;
mod commands;
mod config;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use args::{AuxCommand, Cli, Command};
use commands::Sink;
use config::RunConfig;

const EXIT_INVALID: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Check(_) => "check",
        Command::Aux(_) => "aux",
        Command::Exponents(_) => "exponents",
        Command::Scan(_) => "scan",
        Command::Simulate(_) => "simulate",
        Command::Sweep(_) => "sweep",
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var("BLOWUPLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("BLOWUPLAB_THREADS must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<()> {
    configure_threads()?;
    let cfg = RunConfig::load(cli.config.as_deref(), command_name(&cli.command))?;
    let mut sink = Sink::open(cli.out.as_deref(), cli.quiet)?;
    match &cli.command {
        Command::Check(a) => commands::check(a, &cfg, &mut sink),
        Command::Aux(AuxCommand::Dump(a)) => commands::aux_dump(a, &cfg, &mut sink),
        Command::Exponents(a) => commands::exponents(a, &cfg, &mut sink),
        Command::Scan(a) => commands::scan(a, &cfg, &mut sink),
        Command::Simulate(a) => commands::simulate(a, &cfg, &mut sink),
        Command::Sweep(a) => commands::sweep(a, &cfg, &mut sink),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let numerical = err
        .chain()
        .any(|e| e.downcast_ref::<blowuplab_core::Error>().is_some_and(|e| e.is_numerical()));
    if numerical {
        EXIT_NUMERICAL
    } else {
        EXIT_INVALID
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            if let Some(path) = &cli.out {
                let _ = std::fs::remove_file(path);
            }
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
