mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sepsol::checks;
use sepsol::nlparams::ProblemParams;
use sepsol::odeint::IntegratorConfig;

use crate::error::{input, CliError};
use crate::output::Format;

#[derive(Parser)]
#[command(name = "sepsol", version, about = "Separable singular solutions of planar p-Laplace equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derived constants, reduced coefficients, regime and mode bounds.
    Params(commands::params::ParamsArgs),
    /// Integrate one phase-plane orbit, or shoot the homoclinic orbit.
    Orbit(commands::orbit::OrbitArgs),
    /// Period as a function of amplitude over a grid.
    PeriodScan(commands::scan::ScanArgs),
    /// Constant, sign-changing and positive solutions with verified profiles.
    SolveSet(commands::solve::SolveArgs),
    /// Existence test in a planar sector of opening θ.
    Sector(commands::sector::SectorArgs),
}

/// Exponents and potential coefficient.
#[derive(Args, Debug, Clone)]
pub struct ParamArgs {
    #[arg(short = 'p', allow_negative_numbers = true)]
    pub p: Option<f64>,
    #[arg(short = 'q', allow_negative_numbers = true)]
    pub q: Option<f64>,
    #[arg(short = 'c', default_value_t = 0.0, allow_negative_numbers = true)]
    pub c: f64,
}

impl ParamArgs {
    pub fn given(&self) -> bool {
        self.p.is_some() || self.q.is_some()
    }

    pub fn exponents(&self) -> Result<(f64, f64), CliError> {
        match (self.p, self.q) {
            (Some(p), Some(q)) => Ok((p, q)),
            _ => Err(CliError::Input("both -p and -q are required".into())),
        }
    }

    pub fn problem(&self) -> Result<ProblemParams, CliError> {
        let (p, q) = self.exponents()?;
        ProblemParams::new(p, q, self.c).map_err(input)
    }
}

/// Flags shared by every subcommand.
#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Relative tolerance of the ODE integrator.
    #[arg(long)]
    pub tol_rel: Option<f64>,
    /// Absolute tolerance of the ODE integrator.
    #[arg(long)]
    pub tol_abs: Option<f64>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write the main output here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Seed of the randomized checks.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run the acceptance checks covering this subcommand and report them on
    /// stderr.
    #[arg(long)]
    pub paper_check: bool,
    /// File of `key = value` integrator overrides.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

impl Common {
    pub fn integrator(&self) -> Result<IntegratorConfig, CliError> {
        config::integrator_config(self.config.as_deref(), self.tol_rel, self.tol_abs)
    }

    pub fn format_or(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

/// Runs the listed checks, printing one line each to stderr.
fn run_checks(ids: &[u8], seed: u64) -> Result<(), CliError> {
    let mut failed = Vec::new();
    for &id in ids {
        let outcome = checks::run(id, seed)?;
        eprintln!("{outcome}");
        if !outcome.passed {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Numeric(format!("acceptance checks failed: {failed:?}")))
    }
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let (common, check_ids, has_input): (Common, &[u8], bool) = match &cli.command {
        Command::Params(a) => (a.common.clone(), &[1, 2, 3], a.params.given()),
        Command::Orbit(a) => (a.common.clone(), &[4, 5, 11], a.params.given()),
        Command::PeriodScan(a) => (a.common.clone(), &[6, 7, 8], a.params.given()),
        Command::SolveSet(a) => (a.common.clone(), &[9], a.params.given()),
        Command::Sector(a) => (a.common.clone(), &[10], a.p.is_some() || a.q.is_some()),
    };
    if common.paper_check && !has_input {
        return run_checks(check_ids, common.seed);
    }
    match &cli.command {
        Command::Params(a) => commands::params::run(a)?,
        Command::Orbit(a) => commands::orbit::run(a)?,
        Command::PeriodScan(a) => commands::scan::run(a)?,
        Command::SolveSet(a) => commands::solve::run(a)?,
        Command::Sector(a) => commands::sector::run(a)?,
    }
    if common.paper_check {
        run_checks(check_ids, common.seed)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
