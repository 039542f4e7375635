//! `pipeflow`: command-line driver for Navier-slip pipe cross-section runs.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pipeflow_cli::commands;
use pipeflow_cli::config::{self, Overrides, RunConfig, Settings};
use pipeflow_cli::error::CliError;

const ENV_HELP: &str = "Environment:\n  PIPEFLOW_THREADS  maximum number of worker threads for the parallel α loops (sweep, limit)\n\nExit status: 0 on success, 2 on configuration or input errors, 3 on numerical failure.";

#[derive(Parser)]
#[command(name = "pipeflow", version, about = "Navier-slip Poiseuille profiles on 2D pipe cross-sections", after_help = ENV_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct RunArgs {
    /// JSON run configuration (section, n_rings, n_sectors, level, alpha, order, out, tol)
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory, created if missing [default: .]
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Friction ratios: a comma list such as `0.1,1,4` (`inf` for no slip) or a range `min:max:count[:log|lin]`
    #[arg(long, value_name = "SPEC")]
    alpha: Option<String>,
    /// Number of series terms beyond the constant one [default: 8]
    #[arg(long, value_name = "N")]
    order: Option<usize>,
    /// Relative residual tolerance of the linear solver, within [1e-14, 1e-6] [default: 1e-10]
    #[arg(long, value_name = "FLOAT")]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the unit-flux profile at one α; writes solution.csv and solution.vtk
    Solve(RunArgs),
    /// Sweep α and fit the uniform gradient constant; writes sweep.csv
    Sweep(RunArgs),
    /// Expand the profile in powers of α; writes series.csv and series_vs_direct.csv
    Series(RunArgs),
    /// Compare Robin profiles with the no-slip limit; writes dirichlet_gap.csv
    Limit(RunArgs),
    /// Print the disk critical-flux threshold table
    CriticalFlux {
        /// Friction ratios for the table, as for the other commands
        #[arg(long, value_name = "SPEC")]
        alpha: Option<String>,
    },
    /// Classify a sampled energy curve `zeta,Y` against the growth dichotomy
    Growth {
        /// CSV file with header `zeta,Y`
        samples: PathBuf,
        /// Constant C of the majorant Y <= C (Y')^m
        #[arg(long = "c", short = 'C')]
        c: f64,
        /// Exponent m > 1 of the majorant
        #[arg(long)]
        m: f64,
        /// Threshold below which the inequality is not checked
        #[arg(long, default_value_t = 0.0)]
        tau1: f64,
    },
}

impl RunArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let config = match &self.config {
            Some(path) => config::load(path)?,
            None => RunConfig::default(),
        };
        let overrides =
            Overrides { out: self.out.clone(), alpha: self.alpha.clone(), order: self.order, tol: self.tol };
        Settings::resolve(config, &overrides)
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(text) = std::env::var("PIPEFLOW_THREADS") else {
        return Ok(());
    };
    let n: usize = text
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("PIPEFLOW_THREADS must be a positive integer, got `{text}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size thread pool: {e}")))
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    configure_threads()?;
    match cli.command {
        Command::Solve(args) => commands::solve(&args.settings()?, out),
        Command::Sweep(args) => commands::sweep(&args.settings()?, out),
        Command::Series(args) => commands::series(&args.settings()?, out),
        Command::Limit(args) => commands::limit(&args.settings()?, out),
        Command::CriticalFlux { alpha } => {
            let alphas = alpha.map(|a| config::parse_alpha(&a)).transpose()?;
            commands::critical_flux(alphas, out)
        }
        Command::Growth { samples, c, m, tau1 } => commands::growth(&samples, c, m, tau1, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let result = run(cli, &mut out).and_then(|_| out.flush().map_err(|e| CliError::io("<stdout>", e)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pipeflow: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
