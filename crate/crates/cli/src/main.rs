use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use elapsed_neurons::analysis::ScanParam;
use elapsed_neurons::analytic::Family;
use elapsed_neurons_cli::commands::{self, ScanRequest};
use elapsed_neurons_cli::Result;

/// Age-structured neural population: simulation, periodic solutions, scans.
///
/// Exit status: 0 ok, 1 verification failed, 2 configuration or usage error,
/// 3 numerical failure, 4 no periodic solution. Parallel loops use at most
/// ELAPSED_NEURONS_THREADS workers when that variable is set.
#[derive(Parser)]
#[command(name = "elapsed-neurons", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    One,
    Two,
    Flat,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::One => Family::One,
            FamilyArg::Two => Family::Two,
            FamilyArg::Flat => Family::Flat,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ParamArg {
    #[value(name = "J")]
    J,
    #[value(name = "lambda")]
    Lambda,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file; writes <out>_trace.csv, snapshots and a report.
    Simulate {
        config: PathBuf,
        /// Output prefix (overrides `out` in the file).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build one periodic activity of the piecewise threshold and write one period.
    Analytic {
        family: FamilyArg,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value = "profile.csv")]
        out: PathBuf,
        /// Sample times for the residual check.
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Check mass and boundary residuals of a constructed activity (tolerance 1e-6).
    Verify {
        family: FamilyArg,
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Multiply the activity by this factor before checking.
        #[arg(long)]
        corrupt: Option<f64>,
    },
    /// Classify runs over a range of J or lambda and bracket the transition.
    Scan {
        config: PathBuf,
        #[arg(long)]
        param: ParamArg,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 0.0)]
        to: f64,
        #[arg(long, default_value_t = 1)]
        steps: usize,
        /// Explicit comma-separated values instead of a range.
        #[arg(long, value_delimiter = ',')]
        values: Option<Vec<f64>>,
        /// Target width of the transition bracket.
        #[arg(long, default_value_t = 0.05)]
        width: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot CSV columns against the first column as SVG.
    Plot {
        input: PathBuf,
        output: PathBuf,
        #[arg(long, value_delimiter = ',')]
        columns: Option<Vec<String>>,
    },
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Simulate { config, out } => {
            commands::simulate(&config, out.as_deref(), &mut stdout)
        }
        Command::Analytic {
            family,
            alpha,
            p,
            out,
            samples,
        } => commands::analytic(family.into(), alpha, p, &out, samples, &mut stdout),
        Command::Verify {
            family,
            alpha,
            p,
            samples,
            corrupt,
        } => commands::verify(family.into(), alpha, p, samples, corrupt, &mut stdout),
        Command::Scan {
            config,
            param,
            from,
            to,
            steps,
            values,
            width,
            out,
        } => {
            let request = ScanRequest {
                param: match param {
                    ParamArg::J => ScanParam::Connectivity,
                    ParamArg::Lambda => ScanParam::Lambda,
                },
                from,
                to,
                steps,
                values,
                width,
            };
            commands::scan(&config, &request, out.as_deref(), &mut stdout)
        }
        Command::Plot {
            input,
            output,
            columns,
        } => commands::plot(&input, &output, columns),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
