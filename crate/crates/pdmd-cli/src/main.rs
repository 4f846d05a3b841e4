//! `pdmd`: generate benchmark datasets, train parametric DMD models, forecast
//! untested parameters and future time instants, validate against truth
//! archives and run sensitivity studies. Outputs plot-ready CSV data.

mod args;
mod commands;
mod output;

use clap::Parser;

use args::{Cli, Command};

/// Exit codes: 0 success, 1 computational error, 2 usage/validation error.
enum CliError {
    Usage(anyhow::Error),
    Compute(anyhow::Error),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Compute(_) => 1,
        }
    }

    fn message(&self) -> &anyhow::Error {
        match self {
            CliError::Usage(e) | CliError::Compute(e) => e,
        }
    }
}

/// Input loading and flag validation problems.
fn usage(err: impl Into<anyhow::Error>) -> CliError {
    CliError::Usage(err.into())
}

/// Failures inside the numerics.
fn compute(err: impl Into<anyhow::Error>) -> CliError {
    CliError::Compute(err.into())
}

fn main() {
    // clap itself exits with code 2 on flag errors
    let cli = Cli::parse();
    configure_threads();
    if let Err(err) = run(cli) {
        eprintln!("error: {:#}", err.message());
        std::process::exit(err.code());
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| usage(anyhow::anyhow!("cannot read config {path:?}: {e}")))?;
            serde_json::from_str::<serde_json::Value>(&text)
                .map_err(|e| usage(anyhow::anyhow!("config {path:?} is not valid JSON: {e}")))?
        }
        None => serde_json::Value::Null,
    };
    let ctx = commands::Context { seed: cli.seed, quiet: cli.quiet, config };
    match cli.command {
        Command::Generate(args) => commands::generate::run(args, &ctx),
        Command::Train(args) => commands::train::run(args, &ctx),
        Command::Predict(args) => commands::predict::run(args, &ctx),
        Command::Validate(args) => commands::validate::run(args, &ctx),
        Command::Sensitivity(args) => commands::sensitivity::run(args, &ctx),
        Command::Info(args) => commands::info::run(args, &ctx),
    }
}

/// `PDMD_THREADS` caps internal parallelism; 0 or unset uses all cores. The
/// cap also flows to OpenBLAS unless the user pinned that separately.
fn configure_threads() {
    let Ok(value) = std::env::var("PDMD_THREADS") else {
        return;
    };
    let Ok(threads) = value.trim().parse::<usize>() else {
        eprintln!("warning: ignoring non-numeric PDMD_THREADS={value}");
        return;
    };
    if threads == 0 {
        return;
    }
    if std::env::var_os("OPENBLAS_NUM_THREADS").is_none() {
        // read once by the BLAS runtime at initialization, before any call
        unsafe { std::env::set_var("OPENBLAS_NUM_THREADS", threads.to_string()) };
    }
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
        eprintln!("warning: thread pool already initialized: {e}");
    }
}
