//! Command-line driver for `kuramoto-core`.
//!
//! `kuramoto <mode> [--preset NAME] [--config FILE] [--set KEY=VALUE ...] --out DIR`
//!
//! Exit status: 0 success, 1 configuration or I/O error, 2 numerical abort,
//! 3 time integration reached `t_max` without converging (outputs are still
//! written). `validate` checks an existing output directory and exits 0 or 1.

// Range checks are written as `!(x > y)` so that NaN fails them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod modes;
pub mod output;
pub mod presets;
pub mod validate;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::Parser;
use thiserror::Error;

use crate::config::Mode;
use crate::modes::Status;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_HORIZON: i32 = 3;

/// Environment variable supplying the default output directory.
pub const OUT_ENV: &str = "KURAMOTO_OUT";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical abort: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Finite,
    Kinetic,
    Roots,
    Kc,
    Classify,
    Sweep,
    /// Check the files in `--out` against the documented schemas.
    Validate,
}

impl Command {
    fn mode(self) -> Option<Mode> {
        Some(match self {
            Command::Finite => Mode::Finite,
            Command::Kinetic => Mode::Kinetic,
            Command::Roots => Mode::Roots,
            Command::Kc => Mode::Kc,
            Command::Classify => Mode::Classify,
            Command::Sweep => Mode::Sweep,
            Command::Validate => return None,
        })
    }
}

#[derive(Debug, Parser)]
#[command(name = "kuramoto", version, about = "Kuramoto oscillator simulations, sweeps and mean-field solves")]
pub struct Cli {
    pub command: Command,
    /// TOML config file, or a `manifest.json` from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in base configuration, applied before `--config`.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(presets::NAMES))]
    pub preset: Option<String>,
    /// Dotted override such as `sim.t_max=50`; repeatable, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output directory.
    #[arg(long, env = OUT_ENV)]
    pub out: PathBuf,
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let Some(mode) = cli.command.mode() else {
        return match validate::validate_dir(&cli.out) {
            Ok(files) => {
                println!("valid: {}", files.join(", "));
                EXIT_OK
            }
            Err(problems) => {
                for p in problems {
                    eprintln!("invalid: {p}");
                }
                EXIT_CONFIG
            }
        };
    };
    let result = config::resolve(cli.preset.as_deref(), cli.config.as_deref(), &cli.overrides, Some(mode))
        .and_then(|cfg| modes::execute(&cfg, &cli.out));
    match result {
        Ok(Status::Converged) => EXIT_OK,
        Ok(Status::HorizonReached) => {
            eprintln!("warning: reached t_max without meeting the stationarity test");
            EXIT_HORIZON
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
