//! `voxmark`: synthetic corpora, acoustic features, nested cross-validation,
//! attributions and group statistics from one binary.

mod commands;
mod config;
mod error;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Ctx;
use crate::error::{CliError, Result};

fn seed_value(s: &str) -> std::result::Result<u64, String> {
    let v: u64 = s.parse().map_err(|e| format!("{e}"))?;
    // TOML integers are signed 64-bit; larger seeds could not be echoed.
    if v > i64::MAX as u64 {
        return Err(format!("seed must be at most {}", i64::MAX));
    }
    Ok(v)
}

#[derive(Debug, Parser)]
#[command(name = "voxmark", version, about = "Voice-biomarker pipeline for detecting deficits in everyday functioning")]
struct Cli {
    /// Base seed; every random choice derives from it.
    #[arg(long, global = true, value_parser = seed_value)]
    seed: Option<u64>,
    /// Worker threads (0 = one per core). Outputs do not depend on it.
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// TOML file overriding analysis, cv, explain or synth settings.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Log progress (-v) or debug detail (-vv) to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract the acoustic feature table from a manifest.
    Extract(commands::extract::ExtractArgs),
    /// Nested cross-validation of one or more classifiers.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Partial correlations, ANCOVA effect sizes and figures.
    Stats(commands::stats::StatsArgs),
    /// Shapley attributions for an evaluation report.
    Explain(commands::explain::ExplainArgs),
    /// Generate a synthetic corpus.
    Synth(commands::synth::SynthArgs),
    /// Collect results from an output directory into a Markdown report.
    Report(commands::report::ReportArgs),
}

fn run(cli: Cli) -> Result<()> {
    let file = config::load(cli.config.as_deref())?;
    let seed = cli.seed.or(file.seed).unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build_global()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    let ctx = Ctx { seed, file };
    match cli.command {
        Command::Extract(a) => commands::extract::run(&ctx, &a),
        Command::Evaluate(a) => commands::evaluate::run(&ctx, &a),
        Command::Stats(a) => commands::stats::run(&ctx, &a),
        Command::Explain(a) => commands::explain::run(&ctx, &a),
        Command::Synth(a) => commands::synth::run(&ctx, &a),
        Command::Report(a) => commands::report::run(&ctx, &a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).format_timestamp(None).init();

    let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| run(cli)));
    let code = match outcome {
        Ok(Ok(())) => 0,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
        Err(_) => {
            eprintln!("error: internal failure");
            3
        }
    };
    ExitCode::from(code as u8)
}
