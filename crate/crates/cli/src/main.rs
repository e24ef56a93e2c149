//! `excesslab`: exact and sampled block mutual information sweeps, decoder
//! checks and growth-rate fits.

mod commands;
mod config;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use commands::Series;
use config::{parse_list, Overrides, RunConfig};
use excesslab::analysis::Regressor;
use excesslab::ProcessKind;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "excesslab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Certified E(n) from the exact engine, written to exact.csv.
    Exact(Common),
    /// Sampled estimates over the (n, seed) grid, written to estimate.csv.
    Estimate(Common),
    /// Runs the invariant suite and writes verify.json; exits nonzero on any
    /// failed check.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Test hook: corrupt the future-side decoder.
        #[arg(long, hide = true)]
        inject_decoder_fault: bool,
    },
    /// Fits a series against a growth regressor, written to fit.json.
    Fit {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "exact")]
        series: Series,
        /// log, loglog, power, logpow:BETA or pow:BETA; defaults to the
        /// predicted class of the process.
        #[arg(long, value_parser = parse_regressor)]
        regressor: Option<Regressor>,
        /// Smallest block length included in the fit window.
        #[arg(long, default_value_t = 8)]
        min_n: usize,
    },
    /// Prints model constants and the predicted growth class.
    Info(Common),
}

/// Flags shared by every subcommand. Each overrides the matching field of
/// the JSON config; unset fields fall back to the config, then to the
/// defaults (hpm1, alpha 1.5, n 2,4,6,8, cutoff 1024, prune-eps 0, seed 1,
/// out excesslab-out).
#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    process: Option<ProcessKind>,
    #[arg(long)]
    alpha: Option<f64>,
    /// Block lengths, e.g. 1-8 or 4,8,12.
    #[arg(long, value_parser = parse_numbers)]
    n: Option<Numbers>,
    #[arg(long)]
    level_cutoff: Option<u64>,
    #[arg(long)]
    prune_eps: Option<f64>,
    /// Seeds, e.g. 1,2,3.
    #[arg(long, value_parser = parse_numbers)]
    seed: Option<Numbers>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(self) -> Result<RunConfig> {
        let flags = Overrides {
            process: self.process,
            alpha: self.alpha,
            block_lengths: self.n.map(|v| v.0.into_iter().map(|x| x as usize).collect()),
            level_cutoff: self.level_cutoff,
            prune_eps: self.prune_eps,
            seeds: self.seed.map(|v| v.0),
            output_dir: self.out,
        };
        RunConfig::load(self.config.as_deref(), flags)
    }
}

/// A parsed number list; a newtype so clap takes it as one value.
#[derive(Clone)]
struct Numbers(Vec<u64>);

fn parse_numbers(s: &str) -> std::result::Result<Numbers, String> {
    parse_list(s).map(Numbers)
}

fn parse_regressor(s: &str) -> std::result::Result<Regressor, String> {
    let beta = |b: &str| b.parse::<f64>().map_err(|_| format!("bad exponent '{b}'"));
    match s.split_once(':') {
        None => match s {
            "log" => Ok(Regressor::Log),
            "loglog" => Ok(Regressor::LogLog),
            "power" => Ok(Regressor::PowerLaw),
            _ => Err(format!("unknown regressor '{s}'")),
        },
        Some(("logpow", b)) => Ok(Regressor::LogPow(beta(b)?)),
        Some(("pow", b)) => Ok(Regressor::Power(beta(b)?)),
        Some(_) => Err(format!("unknown regressor '{s}'")),
    }
}

fn init_threads() -> Result<()> {
    if let Ok(v) = std::env::var("EXCESSLAB_THREADS") {
        let Ok(threads) = v.parse::<usize>() else {
            bail!("EXCESSLAB_THREADS must be a positive integer, got '{v}'");
        };
        if threads == 0 {
            bail!("EXCESSLAB_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new().num_threads(threads).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_threads()?;
    match cli.command {
        Command::Exact(c) => commands::cmd_exact(&c.config()?),
        Command::Estimate(c) => commands::cmd_estimate(&c.config()?),
        Command::Verify {
            common,
            inject_decoder_fault,
        } => commands::cmd_verify(&common.config()?, inject_decoder_fault),
        Command::Fit {
            common,
            series,
            regressor,
            min_n,
        } => commands::cmd_fit(&common.config()?, series, regressor, min_n),
        Command::Info(c) => commands::cmd_info(&c.config()?),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
