//! `pbs`: quotes, implied-volatility sweeps and self-validation for the
//! perturbative Black-Scholes pricer.

mod error;
mod params;
mod sweep;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pbs_core::pricing::{quote, PbsQuote};

use crate::error::CliError;
use crate::params::{ParamArgs, Params};
use crate::sweep::{parse_sweep, SweepSpec};
use crate::validate::{ClosedForms, Level, FAILURE_BASE};

#[derive(Parser, Debug)]
#[command(name = "pbs", version, about = "Perturbative Black-Scholes quotes and implied-volatility curves")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Price one call and print the full decomposition.
    Quote {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Write implied-volatility curves over a strike grid as CSV.
    Sweep {
        #[command(flatten)]
        params: ParamArgs,
        /// Variable and values, e.g. mu=0,0.05,0.1.
        #[arg(long, value_name = "VAR=V1,V2,...", value_parser = parse_sweep, allow_hyphen_values = true)]
        sweep: Option<SweepSpec>,
        /// Output directory.
        #[arg(long, value_name = "PATH")]
        out: PathBuf,
        /// Also write a gnuplot script.
        #[arg(long)]
        plot: bool,
    },
    /// Check the closed forms against quadrature, finite differences and simulation.
    Validate {
        #[arg(long, value_enum, default_value_t = Level::Fast)]
        level: Level,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

const QUOTE_FIELDS: [&str; 12] = [
    "bs_premium",
    "bias_zero_drift",
    "bias_drift_corr",
    "bias_total",
    "variance_term",
    "mid",
    "bid",
    "ask",
    "half_spread",
    "spread",
    "bid_below_intrinsic",
    "mid_not_positive",
];

fn quote_values(q: &PbsQuote<f64>) -> [String; 12] {
    [
        q.bs_premium.to_string(),
        q.bias_zero_drift.to_string(),
        q.bias_drift_corr.to_string(),
        q.bias_total.to_string(),
        q.variance_term.to_string(),
        q.mid.to_string(),
        q.bid.to_string(),
        q.ask.to_string(),
        q.half_spread.to_string(),
        q.spread.to_string(),
        q.warnings.bid_below_intrinsic.to_string(),
        q.warnings.mid_not_positive.to_string(),
    ]
}

fn warn_large_perturbation(params: &Params) {
    if params.large_perturbation() {
        eprintln!(
            "warning: epsilon * |bias-coeff| / sigma = {:.3} exceeds 0.5; first-order corrections may be unreliable",
            params.epsilon * params.bias_coeff.abs() / params.sigma
        );
    }
}

fn cmd_quote(args: &ParamArgs, format: Format) -> Result<(), CliError> {
    let params = args.resolve()?;
    warn_large_perturbation(&params);
    let q = quote(&params.spec()?, &params.error_structure()?, &params.quote_config()?);
    match format {
        Format::Text => {
            println!("# pbs {} {}", env!("CARGO_PKG_VERSION"), params.echo());
            for (name, value) in QUOTE_FIELDS.iter().zip(quote_values(&q)) {
                println!("{name:<20} {value}");
            }
        }
        Format::Csv => {
            println!("# pbs {} {}", env!("CARGO_PKG_VERSION"), params.echo());
            println!("{}", QUOTE_FIELDS.join(","));
            println!("{}", quote_values(&q).join(","));
        }
    }
    if q.warnings.bid_below_intrinsic {
        eprintln!("warning: bid is below intrinsic value");
    }
    if q.warnings.mid_not_positive {
        eprintln!("warning: mid price is not positive");
    }
    Ok(())
}

fn cmd_sweep(args: &ParamArgs, sweep: Option<&SweepSpec>, out: &Path, plot: bool) -> Result<(), CliError> {
    let params = args.resolve()?;
    warn_large_perturbation(&params);
    let summaries = sweep::run(&params, sweep, out, plot)?;
    let width = summaries.iter().map(|s| s.label.len()).max().unwrap_or(0).max(5);
    println!("{:<width$} {:>10} {:>10} {:>10} {:>10} {:>6}  file", "curve", "argmin_K", "min_iv", "range", "depth", "no_bid");
    let fmt = |v: Option<f64>, p: usize| v.map_or_else(|| "-".to_string(), |x| format!("{x:.p$}"));
    for s in &summaries {
        println!(
            "{:<width$} {:>10} {:>10} {:>10} {:>10} {:>6}  {}",
            s.label,
            fmt(s.argmin_strike, 2),
            fmt(s.min_iv, 5),
            fmt(s.range, 5),
            fmt(s.depth, 5),
            s.absent_bids,
            s.file.display()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Quote { params, format } => cmd_quote(params, *format),
        Command::Sweep { params, sweep, out, plot } => cmd_sweep(params, sweep.as_ref(), out, *plot),
        Command::Validate { level, seed } => {
            let report = validate::run(*level, *seed, &ClosedForms::default());
            print!("{}", report.render());
            let mask = report.failure_mask();
            return if mask == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(FAILURE_BASE | mask)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
