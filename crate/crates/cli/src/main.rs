//! `bkm`: BKM scalar curvature of transverse-field Ising chains from the command line.

mod commands;
mod config;
mod output;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{PointSettings, ScanSettings, Settings};

#[derive(Debug, Parser)]
#[command(name = "bkm", version, about = "BKM scalar curvature of transverse-field Ising chains")]
struct Cli {
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Curvature report at a single point, as JSON.
    Point {
        #[command(flatten)]
        settings: Settings,
        #[command(flatten)]
        point: PointSettings,
    },
    /// R(T) over a log-spaced temperature grid, as CSV and optionally SVG.
    Curve {
        #[command(flatten)]
        settings: Settings,
    },
    /// Monotonicity verdicts over a range of transverse fields, as JSON.
    Scan {
        #[command(flatten)]
        settings: Settings,
        #[command(flatten)]
        scan: ScanSettings,
    },
    /// Run the acceptance checks and report PASS/FAIL for each.
    Validate {
        /// Tolerance for the finite-difference precision check.
        #[arg(long)]
        fd_tol: Option<f64>,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Degenerate(bkm_core::Error),
    Io(String),
    ValidationFailed(usize),
    Numerical(bkm_core::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::ValidationFailed(_) | CliError::Numerical(_) => 1,
            CliError::Config(_) => 2,
            CliError::Degenerate(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Degenerate(e) | CliError::Numerical(e) => e.kind(),
            CliError::Io(_) => "io",
            CliError::ValidationFailed(_) => "validation_failed",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Config(m) | CliError::Io(m) => m.clone(),
            CliError::Degenerate(e) | CliError::Numerical(e) => e.to_string(),
            CliError::ValidationFailed(n) => format!("{n} check(s) failed"),
        }
    }
}

impl From<bkm_core::Error> for CliError {
    fn from(e: bkm_core::Error) -> Self {
        use bkm_core::Error as E;
        match e {
            E::Config(m) => CliError::Config(m),
            E::Size { .. } | E::Boundary { .. } => CliError::Config(e.to_string()),
            E::DegenerateMetric { .. } => CliError::Degenerate(e),
            other => CliError::Numerical(other),
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(path) => config::load_file(path)?,
        None => config::FileConfig::default(),
    };
    match cli.command {
        Command::Point { settings, point } => commands::point(
            &settings.overlay(&file.settings),
            &point.overlay(&file.point),
        ),
        Command::Curve { settings } => commands::curve(&settings.overlay(&file.settings)),
        Command::Scan { settings, scan } => commands::scan(
            &settings.overlay(&file.settings),
            &scan.overlay(&file.scan),
        ),
        Command::Validate { fd_tol } => {
            let fd_tol = fd_tol.or(file.settings.fd_tol).unwrap_or(1e-5);
            let failures = validate::run(fd_tol, output::use_color());
            if failures == 0 {
                Ok(())
            } else {
                Err(CliError::ValidationFailed(failures))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let err = CliError::Config(e.to_string().lines().next().unwrap_or("").to_string());
            output::report_error(err.kind(), &err.message(), err.exit_code());
            return ExitCode::from(err.exit_code());
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            output::report_error(err.kind(), &err.message(), err.exit_code());
            ExitCode::from(err.exit_code())
        }
    }
}
