// `!(x > 0.0)` style checks are there to reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

mod config;
mod error;
mod run;

use config::{Mode, Overrides, RunConfig};
use error::CliError;

/// Low-energy scattering parameters from the variable-phase equations.
#[derive(Debug, Parser)]
#[command(name = "calogero", version)]
struct Args {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Override `run.mode`.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// CSV destination (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use the Coulomb-modified pipeline (needs a `[coulomb]` section).
    #[arg(long)]
    enable_coulomb: bool,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    /// No summary on stderr.
    #[arg(long)]
    quiet: bool,
}

fn execute(args: &Args) -> Result<(), CliError> {
    let mut cfg = RunConfig::load(&args.config)?;
    cfg.apply(&Overrides {
        mode: args.mode,
        out: args.out.clone(),
        enable_coulomb: args.enable_coulomb,
        rtol: args.rtol,
        atol: args.atol,
    });
    let out = run::run(&cfg)?;
    match &cfg.run.out {
        Some(path) => std::fs::write(path, &out.csv)
            .map_err(|e| CliError::config("run.out", format!("cannot write {}: {e}", path.display())))?,
        None => std::io::stdout().write_all(&out.csv)?,
    }
    if !args.quiet {
        let _ = std::io::stderr().write_all(out.summary.as_bytes());
    }
    Ok(())
}

fn main() -> ExitCode {
    let args = Args::parse();
    match execute(&args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
