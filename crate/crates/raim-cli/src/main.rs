//! Command-line front end: simulate configured scenarios into report files,
//! or evaluate one measurement vector's posterior.

mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use raim::bayes::{run_message_passing, BayesError};
use raim::montecarlo::{self, McError};

#[derive(Parser)]
#[command(
    name = "raim",
    version,
    about = "Scalar-positioning integrity: exact Bayesian message passing versus solution separation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured scenario and write CSV reports plus a manifest.
    Run {
        /// TOML configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the report files.
        #[arg(long)]
        out: PathBuf,
        /// Master seed, overriding the configuration.
        #[arg(long)]
        seed: Option<u64>,
        /// Epoch count, overriding the configuration.
        #[arg(long)]
        epochs: Option<u64>,
        /// Comma-separated algorithm subset (bayes_fe, bayes_nfe, baseline).
        #[arg(long, value_delimiter = ',')]
        algs: Option<Vec<String>>,
    },
    /// Evaluate one measurement vector and print the posterior verdict.
    Posterior {
        /// TOML configuration file; must pin the bias mean to one value.
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated measurements, one per station.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        y: Vec<f64>,
    },
}

enum CliError {
    /// Bad invocation or configuration; exit code 2.
    Usage(String),
    /// The run itself failed; exit code 1.
    Runtime(String),
}

impl From<McError> for CliError {
    fn from(e: McError) -> Self {
        match e {
            McError::BadConfig(_) | McError::Model(_) => CliError::Usage(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn real_main() -> Result<(), CliError> {
    configure_threads()?;
    match Cli::parse().command {
        Command::Run {
            config,
            out,
            seed,
            epochs,
            algs,
        } => run(config, out, seed, epochs, algs),
        Command::Posterior { config, y } => posterior(config, &y),
    }
}

/// Honors RAIM_THREADS by sizing the global worker pool. Results do not
/// depend on the thread count; only wall time does.
fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("RAIM_THREADS") else {
        return Ok(());
    };
    let threads: usize =
        value.parse().ok().filter(|&n| n > 0).ok_or_else(|| {
            CliError::Usage(format!("RAIM_THREADS={value} is not a thread count"))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("cannot size the thread pool: {e}")))
}

fn run(
    config_path: PathBuf,
    out: PathBuf,
    seed: Option<u64>,
    epochs: Option<u64>,
    algs: Option<Vec<String>>,
) -> Result<(), CliError> {
    let file = config::load(&config_path).map_err(CliError::Usage)?;
    let algorithms = algs
        .map(|labels| {
            labels
                .iter()
                .map(|l| config::parse_algorithm(l))
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()
        .map_err(CliError::Usage)?;
    let overrides = config::Overrides {
        seed,
        epochs,
        algorithms,
    };
    let (run_config, warnings) = config::resolve_run(&file, &overrides).map_err(CliError::Usage)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let output = montecarlo::run(&run_config)?;
    let files = report::write_reports(&out, &run_config, &output).map_err(CliError::Runtime)?;
    println!("wrote {files} files to {}", out.display());
    Ok(())
}

fn posterior(config_path: PathBuf, y: &[f64]) -> Result<(), CliError> {
    let file = config::load(&config_path).map_err(CliError::Usage)?;
    let resolved = config::resolve_scenario(&file.scenario).map_err(CliError::Usage)?;
    for w in &resolved.warnings {
        eprintln!("warning: {w}");
    }
    if resolved.bias_mean_range.is_some() {
        return Err(CliError::Usage(
            "this configuration draws bias means per run; set a fixed bias_mean to evaluate \
             one posterior"
                .into(),
        ));
    }
    if y.is_empty() {
        return Err(CliError::Usage("no measurements given".into()));
    }
    let scenario = resolved.scenario;
    let sweep = run_message_passing(&scenario, y).map_err(|e| match e {
        BayesError::ArityMismatch { .. } | BayesError::Model(_) => CliError::Usage(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })?;
    let result = sweep
        .resolve(scenario.tir, scenario.theta_threshold)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    println!("stations {}", scenario.stations.len());
    println!("tir {}", scenario.tir);
    println!("theta_threshold {}", scenario.theta_threshold);
    println!("estimate {}", result.estimate);
    println!("pl {}", result.pl);
    let excluded = if result.excluded.is_empty() {
        "-".to_string()
    } else {
        result
            .excluded
            .iter()
            .map(usize::to_string)
            .collect::<Vec<_>>()
            .join(",")
    };
    println!("excluded {excluded}");
    for (i, p) in result.fault_posteriors.iter().enumerate() {
        println!("fault_posterior {i} {p}");
    }
    println!("components {}", result.posterior.len());
    for c in result.posterior.components() {
        println!("component {} {} {}", c.weight, c.mean, c.variance);
    }
    Ok(())
}
