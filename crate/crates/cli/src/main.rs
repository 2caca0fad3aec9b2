//! `mws` — simulations, observability constants and verification for the
//! moving-wall Schrödinger equation.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;

/// Failure classes, one per exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file, ranges or missing files (exit 2).
    Config(String),
    /// A verification check failed (exit 1).
    Verify(String),
    /// The numerics broke down (exit 3).
    Solver(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Verify(_) => 1,
            CliError::Config(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Verify(m) => write!(f, "verification failed: {m}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
        }
    }
}

impl From<mws_core::Error> for CliError {
    fn from(e: mws_core::Error) -> Self {
        use mws_core::Error as E;
        match e {
            E::SingularSystem { .. }
            | E::NotHermitian(_)
            | E::NotPositiveDefinite
            | E::NonObservable { .. } => CliError::Solver(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Config(format!("i/o: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "mws", version, about, args_conflicts_with_subcommands = false)]
#[command(allow_negative_numbers = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Crank–Nicolson run: trace CSV, optional state dump, energy summary.
    Simulate,
    /// Neumann traces (exact series for linear walls, solver otherwise).
    Traces,
    /// Energy table and the identities it should satisfy.
    Energy,
    /// Boundary output against the admissibility constant.
    Admissibility,
    /// Observability constants for one (ε, τ, N) cell.
    Observability,
    /// Point-observation Gramian, with its kernel when there is one.
    PointObs,
    /// Lₚ point observation and the Hölder chain behind it.
    Lp,
    /// Gramian matrix and its generalized spectrum.
    Gramian,
    /// Steer to the configured target through the Gramian.
    Steer,
    /// Full invariant suite; exit 1 on any failed check.
    Verify,
    /// Observability constants over an (ε, τ, N) grid, in parallel.
    Sweep,
}

/// Every flag overrides the corresponding config-file field.
#[derive(Args, Debug, Default)]
struct Flags {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the effective configuration to this file before running.
    #[arg(long, global = true)]
    save_config: Option<PathBuf>,
    /// linear:ε | periodic:ε:ω | tabulated:file
    #[arg(long, global = true)]
    curve: Option<String>,
    /// mode:k | hat | parabola | random[:seed] | n,re,im CSV file
    #[arg(long, global = true)]
    spectrum: Option<String>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    /// Spatial intervals M.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Time steps K.
    #[arg(long, global = true)]
    steps: Option<usize>,
    /// Modes N.
    #[arg(long, global = true)]
    modes: Option<usize>,
    #[arg(long, global = true)]
    quadrature_points: Option<usize>,
    /// left | right | both | point:a
    #[arg(long, global = true)]
    obs: Option<String>,
    #[arg(long, global = true)]
    p: Option<f64>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Sweep worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Also write the binary state dump.
    #[arg(long, global = true)]
    dump: bool,
    /// Exit 2 when the growth window fails on (0, τ).
    #[arg(long, global = true)]
    check_window: bool,
    /// Sweep ε values, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    epsilons: Option<Vec<f64>>,
    /// Sweep τ values, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    taus: Option<Vec<f64>>,
    /// Sweep mode counts, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    modes_list: Option<Vec<usize>>,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! over {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { c.$field = v.clone(); })*
            };
        }
        over!(curve, spectrum, tau, grid, modes, obs, p, out, seed);
        if self.steps.is_some() {
            c.steps = self.steps;
        }
        if self.quadrature_points.is_some() {
            c.quadrature_points = self.quadrature_points;
        }
        c.dump |= self.dump;
        c.check_window |= self.check_window;
        if let Some(v) = &self.epsilons {
            c.sweep.epsilons = v.clone();
        }
        if let Some(v) = &self.taus {
            c.sweep.taus = v.clone();
        }
        if let Some(v) = &self.modes_list {
            c.sweep.modes = v.clone();
        }
        c.validate()?;
        Ok(c)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.flags.resolve()?;
    if let Some(path) = &cli.flags.save_config {
        std::fs::write(path, cfg.to_json())?;
    }
    log::info!("{:?} with curve {} tau {}", cli.command, cfg.curve, cfg.tau);
    let jobs = cli.flags.jobs;
    match cli.command {
        Command::Simulate => commands::simulate(&cfg),
        Command::Traces => commands::traces(&cfg),
        Command::Energy => commands::energy(&cfg),
        Command::Admissibility => commands::admissibility(&cfg),
        Command::Observability => commands::observability(&cfg),
        Command::PointObs => commands::point_obs(&cfg),
        Command::Lp => commands::lp(&cfg),
        Command::Gramian => commands::gramian(&cfg),
        Command::Steer => commands::steer(&cfg),
        Command::Verify => commands::verify(&cfg),
        Command::Sweep => commands::sweep(&cfg, jobs),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MWS_LOG", "error")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mws: {e}");
            ExitCode::from(e.code())
        }
    }
}
