use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use covar_lab::runner::{backtest_report, emit_report, gsib_report, run_pipeline, RunConfig};

#[derive(Parser)]
#[command(name = "covar-lab", version, about = "VaR / CoVaR estimation and evaluation for bank panels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the rolling-window estimation pipeline described by a TOML config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Negate all reported VaR and CoVaR values (display convention).
        #[arg(long)]
        flip_sign: bool,
    },
    /// Backtest the forecasts in a results directory produced by `run`.
    Backtest {
        #[arg(long)]
        results: PathBuf,
        /// Also emit summary and cross-bank average tables.
        #[arg(long)]
        summary: bool,
    },
    /// Score a GSIB indicator panel against delta-CoVaR target scores.
    Gsib {
        #[arg(long)]
        indicators: PathBuf,
        #[arg(long)]
        scores: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn run() -> Result<(), Box<dyn std::error::Error>> {
    match Cli::parse().command {
        Command::Run { config, flip_sign } => {
            let mut cfg = RunConfig::from_toml(&std::fs::read_to_string(&config)?)?;
            if flip_sign {
                cfg.flip_sign = true;
            }
            let out = run_pipeline(&cfg)?;
            println!("risk table:   {}", out.risk_csv.display());
            println!("returns:      {}", out.returns_csv.display());
            println!("manifest:     {}", out.manifest.display());
            println!("windows:      {} ({} failed)", out.n_windows, out.n_failed);
        }
        Command::Backtest { results, summary } => {
            let path = backtest_report(&results)?;
            println!("backtest:     {}", path.display());
            if summary {
                for p in emit_report(&results)? {
                    println!("report:       {}", p.display());
                }
            }
        }
        Command::Gsib { indicators, scores, out } => {
            for p in gsib_report(&indicators, &scores, &out)? {
                println!("report:       {}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
