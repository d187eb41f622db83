use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};

use twosided_cli::{ExperimentConfig, Format, Report};

/// Runs two-sided market experiments from JSON configs.
///
/// Exit status: 0 on success, 2 when a claimed property (IR, budget balance,
/// DSIC, an exact inequality) fails, 1 on any error.
#[derive(Parser)]
#[command(name = "twosided", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Run(Common),
    /// Run an experiment once per value of a parameter and stack the rows.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary: k, n, m or trials.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<u64>,
    },
}

#[derive(Args)]
struct Common {
    /// Experiment config (JSON).
    config: PathBuf,
    /// Master seed; overrides the config and MASTER_SEED.
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<OutFormat>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

fn load(common: &Common) -> Result<(ExperimentConfig, Option<PathBuf>, Format)> {
    let mut config = ExperimentConfig::load(&common.config)?;
    config.apply_seed_env()?;
    if let Some(seed) = common.seed {
        config.set_seed(seed);
    }
    let out = common.out.clone().or_else(|| config.output.clone());
    let format = match common.format {
        Some(OutFormat::Json) => Format::Json,
        Some(OutFormat::Csv) => Format::Csv,
        None => config.format,
    };
    Ok((config, out, format))
}

fn execute(cli: Cli) -> Result<Report> {
    let (report, out, format) = match cli.command {
        Command::Run(common) => {
            let (config, out, format) = load(&common)?;
            (twosided_cli::run(&config)?, out, format)
        }
        Command::Sweep {
            common,
            param,
            values,
        } => {
            let (config, out, format) = load(&common)?;
            (twosided_cli::sweep(&config, &param, &values)?, out, format)
        }
    };
    report.save(out.as_deref(), format)?;
    Ok(report)
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(report) => {
            if let Some(msg) = &report.violation {
                eprintln!("property violation: {msg}");
            }
            ExitCode::from(twosided_cli::exit_code(&report))
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
