//! `xlindley` command-line front end.

mod commands;
mod dataset;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use xlindley::tables::{Format, Precision, DEFAULT_PRECISION};

use commands::{CoeffKind, EstimatorChoice, IntervalRequest, MomentKind, PredictorChoice, SimulateConfig};
use dataset::Dataset;
use report::Report;

#[derive(Parser)]
#[command(name = "xlindley", version, about = "Order statistics, linear estimation and prediction for the XLindley law")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Output {
    /// Output format.
    #[arg(long, default_value = "text")]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print shortest round-trip representations instead of 5 decimals.
    #[arg(long)]
    full_precision: bool,
}

#[derive(Args)]
struct Intervals {
    /// Confidence or prediction level; needs --quantile-table.
    #[arg(long)]
    level: Option<f64>,
    /// Persisted quantile table written by `simulate`.
    #[arg(long)]
    quantile_table: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Means, covariances or second moments of order statistics.
    Moments {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        psi: Vec<f64>,
        #[arg(long, value_enum, default_value = "means")]
        kind: MomentKind,
        #[command(flatten)]
        output: Output,
    },
    /// Estimator weights, variance factors and prediction constants.
    Coeffs {
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        /// Censoring count; every m up to n/2 - 1 when omitted.
        #[arg(long)]
        m: Option<usize>,
        /// Target rank for `--kind prediction`.
        #[arg(long)]
        q: Option<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        psi: Vec<f64>,
        #[arg(long, value_enum, default_value = "efficiency")]
        kind: CoeffKind,
        #[command(flatten)]
        output: Output,
    },
    /// BLUEs and BLIEs of location and scale from a censored sample.
    Estimate {
        /// Single-column CSV of the observed values.
        file: PathBuf,
        #[arg(long)]
        psi: f64,
        /// Sample size; observed count plus m when omitted.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[arg(long, value_enum, default_value = "both")]
        method: EstimatorChoice,
        #[command(flatten)]
        intervals: Intervals,
        #[command(flatten)]
        output: Output,
    },
    /// BLUP and BLIP of an unobserved order statistic.
    Predict {
        file: PathBuf,
        #[arg(long)]
        psi: f64,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        q: usize,
        #[arg(long, value_enum, default_value = "both")]
        method: PredictorChoice,
        #[command(flatten)]
        intervals: Intervals,
        #[command(flatten)]
        output: Output,
    },
    /// Correlation between the ordered data and expected order statistics.
    FitCheck {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        psi: Vec<f64>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 0)]
        m: usize,
        #[command(flatten)]
        output: Output,
    },
    /// Simulate pivotal quantiles and, optionally, an interval study.
    Simulate {
        /// JSON configuration.
        config: PathBuf,
        /// Directory for quantiles.csv, quantiles.json, study.json and study.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured replication count.
        #[arg(long)]
        reps: Option<usize>,
        /// Format of the summary printed to standard output.
        #[arg(long, default_value = "text")]
        format: Format,
    },
    /// Worked example on the bundled bearing fatigue data.
    Analyze {
        /// Use this file instead of the bundled data.
        #[arg(long)]
        data: Option<PathBuf>,
        #[arg(long, default_value_t = 4.0)]
        psi: f64,
        /// Shapes for the fit check.
        #[arg(long, value_delimiter = ',')]
        grid: Vec<f64>,
        #[command(flatten)]
        intervals: Intervals,
        #[command(flatten)]
        output: Output,
    },
}

fn input_label(path: &Path) -> String {
    path.display().to_string()
}

fn emit(report: &Report, output: &Output) -> Result<()> {
    let precision = if output.full_precision { Precision::Full } else { DEFAULT_PRECISION };
    let text = report.render(output.format, precision);
    match &output.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn intervals(args: &Intervals) -> Result<Option<IntervalRequest>> {
    IntervalRequest::from_args(args.level, args.quantile_table.as_deref())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Moments { n, psi, kind, output } => emit(&commands::moments(&n, &psi, kind)?, &output),
        Command::Coeffs { n, m, q, psi, kind, output } => emit(&commands::coeffs(&n, m, q, &psi, kind)?, &output),
        Command::Estimate { file, psi, n, m, method, intervals: iv, output } => {
            let data = Dataset::read(&file)?;
            let req = intervals(&iv)?;
            emit(&commands::estimate(&data, &input_label(&file), psi, n, m, method, req.as_ref())?, &output)
        }
        Command::Predict { file, psi, n, m, q, method, intervals: iv, output } => {
            let data = Dataset::read(&file)?;
            let req = intervals(&iv)?;
            emit(&commands::predict(&data, &input_label(&file), psi, n, m, q, method, req.as_ref())?, &output)
        }
        Command::FitCheck { file, psi, n, m, output } => {
            let data = Dataset::read(&file)?;
            emit(&commands::fit_check(&data, &input_label(&file), &psi, n, m)?, &output)
        }
        Command::Simulate { config, out, seed, reps, format } => {
            let mut cfg = SimulateConfig::read(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = reps {
                cfg.reps = r;
            }
            let report = commands::simulate(&cfg, &input_label(&config), &out)?;
            emit(&report, &Output { format, out: None, full_precision: false })
        }
        Command::Analyze { data, psi, grid, intervals: iv, output } => {
            let label = data.as_deref().map_or_else(|| "bundled:fatigue.csv".to_string(), input_label);
            let dataset = Dataset::load(data.as_deref())?;
            let req = intervals(&iv)?;
            emit(&commands::analyze(&dataset, &label, psi, &grid, req.as_ref())?, &output)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
