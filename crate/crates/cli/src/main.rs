//! `resource-kit`: indicators, embedding checks and verification suites from the command line.
//!
//! Exit codes: 0 on success, 1 when a verification fails, 2 on input errors.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use resource_kit::indicators::IndicatorKind;
use resource_kit::verify::Suite;
use resource_kit::OptimizerOptions;

#[derive(Parser, Debug)]
#[command(name = "resource-kit", version, about = "Alpha-affinity resource indicators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// A_α(ρ, σ) for each α.
    Affinity {
        #[arg(long, value_parser = existing_file)]
        rho: PathBuf,
        #[arg(long, value_parser = existing_file)]
        sigma: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Indicator bounds for every (label, k, α) combination.
    Indicator {
        #[arg(long, value_parser = existing_file)]
        state: PathBuf,
        /// C, Cfrak, S, Sfrak, E or Efrak.
        #[arg(long = "label", required = true, value_parser = parse_kind)]
        labels: Vec<IndicatorKind>,
        #[arg(long = "k", required = true)]
        ks: Vec<usize>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        optimizer: Optimizer,
    },
    /// Run a verification suite; CSV of every certificate plus a summary on stderr.
    Verify {
        #[arg(long, value_parser = parse_suite)]
        suite: Suite,
        #[arg(long, default_value_t = 500)]
        n_samples: usize,
        #[arg(long, hide = true)]
        corrupt_certificate: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Embedding reports: coherence bounds against correlation bounds of the embedded state.
    Embed {
        #[arg(long, value_parser = existing_file)]
        state: PathBuf,
        /// Coherence orders; defaults to 2..=d.
        #[arg(long = "k")]
        ks: Vec<usize>,
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        optimizer: Optimizer,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long = "alpha", value_parser = parse_alpha, default_values_t = [0.3, 0.5, 0.7])]
    alphas: Vec<f64>,
    #[arg(long, required = true)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args, Debug)]
struct Optimizer {
    #[arg(long, default_value_t = 32)]
    restarts: usize,
    #[arg(long, default_value_t = 2000)]
    max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Mixture components of the search families; defaults to the full dimension squared.
    #[arg(long)]
    components: Option<usize>,
}

impl Optimizer {
    fn options(&self, seed: u64) -> OptimizerOptions {
        OptimizerOptions {
            restarts: self.restarts,
            max_iter: self.max_iter,
            tol: self.tol,
            seed,
            components: self.components,
            init_witnesses: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

fn existing_file(s: &str) -> Result<PathBuf, String> {
    let p = PathBuf::from(s);
    if p.is_file() {
        Ok(p)
    } else {
        Err(format!("no such file: {s}"))
    }
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err(format!("alpha must lie in (0, 1), got {a}"))
    }
}

fn parse_kind(s: &str) -> Result<IndicatorKind, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
