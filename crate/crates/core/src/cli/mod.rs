//! The `cwica` command line: `gen`, `train`, `eval` and `compare`.

pub mod args;
pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::Parser;

use crate::datagen::sha256_hex;
use crate::error::Error;
use args::{Cli, OUT_ROOT_ENV};
use config::ExperimentConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Output directory used when `--out` is absent: named after the command and
/// a hash of its config, so identical invocations land in the same place.
pub fn default_out_dir(cfg: &ExperimentConfig) -> crate::Result<PathBuf> {
    let root = std::env::var_os(OUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("runs"));
    let hash = sha256_hex(cfg.to_json()?.as_bytes());
    Ok(root.join(format!("{}-{}", cfg.command(), &hash[..12])))
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

fn resolve(cli: &Cli) -> Result<ExperimentConfig, Failure> {
    let cfg = match &cli.command.common().config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path).map_err(|e| match e {
                Error::Parse { .. } => Failure::Usage(e.to_string()),
                other => Failure::Runtime(other),
            })?;
            if cfg.command() != cli.command.name() {
                return Err(Failure::Usage(format!(
                    "{} holds a `{}` config, not `{}`",
                    path.display(),
                    cfg.command(),
                    cli.command.name()
                )));
            }
            cfg
        }
        None => cli.command.to_config(),
    };
    cfg.check().map_err(Failure::Usage)?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let cfg = resolve(cli)?;
    let common = cli.command.common();
    let out = match &common.out {
        Some(p) => p.clone(),
        None => default_out_dir(&cfg)?,
    };
    log::info!("{} -> {}", cfg.command(), out.display());
    commands::execute(&cfg, &out, common.jobs)?;
    Ok(())
}

/// Entry point of the binary; returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .init();
    match run(&cli) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}
