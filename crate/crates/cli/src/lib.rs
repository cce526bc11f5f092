//! Command-line surface of the laboratory: scenario configs, invariant
//! suites, reproducible runs with manifests, and CSV/JSON tables.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod suites;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::ScenarioConfig;
pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "leray",
    version,
    about = "Hardy and logarithmic Trudinger functionals on radial profiles"
)]
pub struct Cli {
    /// Scenario config (JSON); defaults apply to every missing field.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for profile suites and optimizer runs.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (0 = one per core).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Relative quadrature tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Run every invariant suite and write a pass/fail report.
    Verify {
        /// Re-evaluate a single failing case written by an earlier run.
        #[arg(long)]
        replay: Option<PathBuf>,
    },
    /// Tabulate the dimensional constants.
    Constants,
    /// Evaluate every functional on one profile.
    Functional,
    /// Maximize the Trudinger integral or minimize the Hardy ratio.
    Optimize,
    /// Truncated Trudinger partials along the ground-state blow-up family.
    Counterexample,
    /// Empirical scan of the undecided `beta` range.
    Gapscan,
    /// Cached cross-product sweep over the configured grid.
    Sweep,
}

impl Sub {
    fn command(&self) -> config::Command {
        match self {
            Sub::Verify { .. } => config::Command::Verify,
            Sub::Constants => config::Command::Constants,
            Sub::Functional => config::Command::Functional,
            Sub::Optimize => config::Command::Optimize,
            Sub::Counterexample => config::Command::Counterexample,
            Sub::Gapscan => config::Command::Gapscan,
            Sub::Sweep => config::Command::Sweep,
        }
    }
}

/// Loads the config file (if any) and applies the command-line overrides.
pub fn resolve_config(cli: &Cli) -> CliResult<ScenarioConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<ScenarioConfig>(&text)?
        }
        None => ScenarioConfig::default(),
    };
    cfg.command = cli.command.command();
    if let Some(out) = &cli.out {
        cfg.output_dir = out.display().to_string();
    }
    if let Some(seed) = cli.seed {
        cfg.suite.seed = seed;
        cfg.optimize.seeds = vec![seed];
        cfg.optimize.budget.seed = seed;
    }
    if let Some(t) = cli.threads {
        cfg.threads = t;
    }
    if let Some(tol) = cli.tol {
        cfg.quadrature.rel_tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> CliResult<commands::Outcome> {
    if let Sub::Verify { replay: Some(path) } = &cli.command {
        return commands::replay(path);
    }
    let cfg = resolve_config(cli)?;
    for w in cfg.warnings() {
        eprintln!("warning: {w}");
    }
    commands::execute(&cfg)
}

/// Parses arguments, runs the command, and returns the process exit code.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(&cli) {
        Ok(outcome) => {
            println!("{}", outcome.message.trim_end());
            if let Some(m) = &outcome.manifest {
                println!("manifest: {}", m.display());
            }
            outcome.exit_code
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
