//! Command-line front end: instance generation, single solves, the
//! comparison harness and the tracking simulation.
//!
//! Exit codes: 0 success, 1 usage error, 2 input error, 3 when the bench
//! had to skip exhaustive runs on oversized instances (the CSV is still
//! written).

pub mod algos;
pub mod bench;
pub mod format;
pub mod simulate;
pub mod solve;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use swarm_assign_core::graph::{self, random_instance};
use swarm_assign_core::greedy::check_order;
use swarm_assign_core::{Error, LocalConfig};
use thiserror::Error;

use crate::algos::{Algo, Params};
use crate::bench::BenchConfig;

/// Environment variable capping the worker threads of `bench`.
pub const THREADS_ENV: &str = "SWARM_ASSIGN_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    SizeGuard(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::SizeGuard(_) => 3,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "swarm-assign", version, about = "Motion-primitive and target assignment for robot teams")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random instance (two primitives per robot, unit weights).
    Gen {
        #[arg(long)]
        robots: usize,
        #[arg(long)]
        targets: usize,
        /// Mean number of primitives observing each target.
        #[arg(long)]
        target_degree: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one algorithm on an instance file.
    Solve {
        #[arg(long, value_enum)]
        algo: Algo,
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        /// Greedy decision order as comma-separated robot ids.
        #[arg(long, value_delimiter = ',')]
        order: Option<Vec<usize>>,
        /// Seed for the random baseline, or for a random greedy order.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value_t = OutputFormat::Text)]
        format: OutputFormat,
        file: PathBuf,
    },
    /// Compare algorithms over random instances and write a CSV.
    Bench {
        #[arg(long, value_delimiter = ',', required = true)]
        robots: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        targets: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        degrees: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, value_delimiter = ',', value_enum, default_value = "local,greedy,random")]
        algos: Vec<Algo>,
        #[arg(long, default_value_t = 2)]
        h: usize,
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: PathBuf,
    },
    /// Run the tracking simulation.
    Simulate {
        /// JSON simulation config.
        #[arg(long)]
        config: PathBuf,
        /// Per-step metrics output.
        #[arg(long)]
        csv: PathBuf,
        /// Per-entity trajectory output.
        #[arg(long)]
        trace: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Input(format!("{}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    f(&mut w).map_err(io)?;
    w.flush().map_err(io)
}

fn local_config(h: usize, epsilon: f64) -> Result<LocalConfig, CliError> {
    LocalConfig::new(h, epsilon).map_err(|e| CliError::Usage(e.to_string()))
}

/// Caps rayon's global pool when the environment asks for it.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {v:?}")))?;
    // A second call in one process keeps the first pool, which is harmless.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen { robots, targets, target_degree, seed, out } => {
            let g = random_instance(robots, targets, target_degree, seed).map_err(|e| CliError::Usage(e.to_string()))?;
            write_file(&out, |w| w.write_all(graph::serialize(&g).as_bytes()))
        }
        Command::Solve { algo, h, epsilon, order, seed, format, file } => {
            let local = local_config(h, epsilon)?;
            let g = graph::parse(&read(&file)?).map_err(|e| CliError::Input(format!("{}: {e}", file.display())))?;
            if let Some(o) = &order {
                check_order(o, g.n_robots()).map_err(|e| CliError::Usage(e.to_string()))?;
            }
            let report = algos::run(&g, algo, &Params { local, order, seed }).map_err(|e| match e {
                Error::TooLarge { .. } => CliError::SizeGuard(e.to_string()),
                e => CliError::Input(format!("{}: {e}", file.display())),
            })?;
            let text = match format {
                OutputFormat::Text => solve::text(&report),
                OutputFormat::Csv => solve::csv(&report),
            };
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes()).map_err(|e| CliError::Input(e.to_string()))
        }
        Command::Bench { robots, targets, degrees, trials, algos, h, epsilon, seed, csv } => {
            let cfg = BenchConfig { robots, targets, degrees, trials, algos, local: local_config(h, epsilon)?, seed };
            cfg.validate()?;
            configure_threads()?;
            let cells = bench::run_cells(&cfg)?;
            let mut skipped = 0;
            write_file(&csv, |w| {
                skipped = bench::write_csv(w, &cfg, &cells)?;
                Ok(())
            })?;
            if skipped > 0 {
                return Err(CliError::SizeGuard(format!(
                    "{skipped} exhaustive runs skipped: instances exceed {} selections",
                    swarm_assign_core::oracle::SIZE_LIMIT
                )));
            }
            Ok(())
        }
        Command::Simulate { config, csv, trace } => {
            let cfg = simulate::parse_config(&read(&config)?)
                .map_err(|e| CliError::Input(format!("{}: {e}", config.display())))?;
            let records = swarm_assign_core::simtrack::run(&cfg).map_err(|e| CliError::Input(e.to_string()))?;
            write_file(&trace, |w| simulate::write_trace(w, &records))?;
            write_file(&csv, |w| simulate::write_metrics(w, &records))
        }
    }
}
