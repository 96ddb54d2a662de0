mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jdlattice::validation::Suite;

use commands::TableOptions;
use config::{Epsilon, PriceArgs};

/// Jump-diffusion option pricing on a truncated bivariate lattice.
///
/// Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.
#[derive(Debug, Parser)]
#[command(name = "jdlattice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Price one contract
    Price(PriceArgs),
    /// Reproduce a benchmark table as CSV
    Table {
        /// Table number (1-4)
        #[arg(value_parser = clap::value_parser!(u8).range(1..=4))]
        table: u8,
        /// Restrict to one panel (letter)
        #[arg(long)]
        panel: Option<char>,
        /// Jump step scale in (0, 1]
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Truncation tolerance, 'auto' = 1/n
        #[arg(long, default_value = "auto", value_name = "auto|X")]
        epsilon: Epsilon,
        /// Skip the untruncated lattice column
        #[arg(long)]
        no_hs: bool,
        /// Omit timing columns (output is then byte-for-byte reproducible)
        #[arg(long)]
        no_timings: bool,
    },
    /// Run the invariant suites
    Validate {
        #[arg(long, default_value = "fast", value_name = "fast|full")]
        suite: Suite,
        /// Perturb the jump law without renormalising (negative control)
        #[arg(long)]
        corrupt_q: bool,
    },
}

fn usage_error(err: anyhow::Error) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Price(args) => {
            let cfg = match args.resolve() {
                Ok(cfg) => cfg,
                Err(e) => return usage_error(e),
            };
            match commands::price(&cfg) {
                Ok(res) => {
                    print!("{}", commands::render_price(&cfg, &res));
                    ExitCode::SUCCESS
                }
                Err(e) => usage_error(e),
            }
        }
        Command::Table { table, panel, c, epsilon, no_hs, no_timings } => {
            if !(c > 0.0 && c <= 1.0) {
                return usage_error(anyhow::anyhow!("c must be in (0, 1]"));
            }
            if let Epsilon::Value(e) = epsilon {
                if !(e > 0.0 && e.is_finite()) {
                    return usage_error(anyhow::anyhow!("epsilon must be positive"));
                }
            }
            let opts = TableOptions { c, epsilon, with_hs: !no_hs, timings: !no_timings };
            match commands::table_csv(table, panel, &opts) {
                Ok(csv) => {
                    print!("{csv}");
                    ExitCode::SUCCESS
                }
                Err(e) => usage_error(e),
            }
        }
        Command::Validate { suite, corrupt_q } => {
            let (report, text) = commands::validate(suite, corrupt_q);
            print!("{text}");
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
