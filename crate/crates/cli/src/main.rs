mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use log::LevelFilter;

use crate::args::Cli;
use crate::config::CliConfig;

pub const BUILD_ID: &str = concat!(
    env!("CARGO_PKG_VERSION"),
    " (",
    env!("CARGO_PKG_NAME"),
    ", ",
    env!("SIRSNET_BUILD_PROFILE"),
    ")"
);

/// Marks an error as a usage error (exit code 2).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(String);

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let level = match cli.verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        2 => LevelFilter::Debug,
        _ => LevelFilter::Trace,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();

    let result = cli
        .config
        .as_deref()
        .map_or_else(|| Ok(CliConfig::default()), CliConfig::load)
        .and_then(|cfg| {
            let jobs = cli.jobs.map_or_else(sirsnet_core::available_jobs, |j| j as usize);
            commands::dispatch(cli.command, &cfg, jobs)
        });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<UsageError>() => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
