use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kappa_cli::commands::{self, OutputFormat, SimulateOverrides};
use kappa_cli::config::DEFAULT_SEED;
use kappa_cli::error::CliError;
use kappa_cli::ingest::InputFormat;
use kappa_core::simulation::DegeneratePolicy;
use kappa_core::Family;

#[derive(Parser)]
#[command(name = "kappa", version, about = "Chance-corrected agreement coefficients, unbiased estimates and their variances")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct DataArgs {
    /// Ratings file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = InputFormat::Matrix)]
    format: InputFormat,
    /// cohen, scott, krippendorff or fleiss.
    #[arg(long, default_value = "cohen")]
    family: Family,
    #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
    output: OutputFormat,
}

#[derive(Subcommand)]
enum Command {
    /// Point estimates and their unbiased versions.
    Estimate(DataArgs),
    /// Plug-in variances of the unbiased estimate with a Wald 95% interval.
    Variance {
        #[command(flatten)]
        data: DataArgs,
        /// Seed for the Fleiss bootstrap.
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Bootstrap resamples (Fleiss only).
        #[arg(long, default_value_t = 2000)]
        resamples: usize,
    },
    /// Monte-Carlo check of the variance approximations over a grid.
    Simulate {
        /// TOML grid config.
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// redraw or drop.
        #[arg(long)]
        policy: Option<DegeneratePolicy>,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        output: OutputFormat,
    },
    /// Coefficient value at which the unbiased shift is largest.
    Crossover {
        #[arg(long)]
        family: Family,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 2)]
        raters: u32,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        output: OutputFormat,
    },
    /// Exact check that the unbiased expected index has zero bias.
    Oracle {
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3])]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [2, 3, 5])]
        n: Vec<u64>,
        /// Random models per (K, n) cell.
        #[arg(long, default_value_t = 20)]
        models: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutputFormat::Table)]
        output: OutputFormat,
    },
}

fn run(command: Command) -> Result<String, CliError> {
    Ok(match command {
        Command::Estimate(d) => commands::estimate(&commands::load(&d.input, d.format)?, d.family)?.render(d.output),
        Command::Variance { data: d, seed, resamples } => {
            commands::variance(&commands::load(&d.input, d.format)?, d.family, seed, resamples)?.render(d.output)
        }
        Command::Simulate { config, seed, policy, replicates, output } => {
            commands::simulate(&config, &SimulateOverrides { seed, policy, replicates }, output)?
        }
        Command::Crossover { family, n, raters, output } => commands::crossover(family, n, raters)?.render(output),
        Command::Oracle { k, n, models, seed, output } => commands::oracle(&k, &n, models, seed)?.render(output),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
