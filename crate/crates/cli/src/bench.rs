//! `bench`: the random-instance comparison harness.
//!
//! Every (setting, trial) cell draws one instance from its own derived seed
//! and runs each requested algorithm on it. Cells run in parallel; rows are
//! emitted in (setting, trial, algorithm) order regardless of scheduling,
//! followed by one summary row per (setting, algorithm).

use std::io::Write;

use rayon::prelude::*;
use swarm_assign_core::graph::random_instance;
use swarm_assign_core::oracle::SIZE_LIMIT;
use swarm_assign_core::rng::{derive_seed, stream};
use swarm_assign_core::LocalConfig;

use crate::algos::{self, Algo, Params};
use crate::format::float;
use crate::CliError;

pub const CSV_HEADER: &str = "# swarm-assign bench v1";
pub const COLUMNS: [&str; 15] = [
    "setting_id",
    "n_robots",
    "n_targets",
    "degree",
    "trial",
    "algo",
    "coverage",
    "objective",
    "rounds",
    "seed",
    "messages",
    "bytes",
    "coverage_min",
    "coverage_max",
    "n",
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub robots: Vec<usize>,
    pub targets: Vec<usize>,
    pub degrees: Vec<f64>,
    pub trials: usize,
    pub algos: Vec<Algo>,
    pub local: LocalConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    pub id: usize,
    pub n_robots: usize,
    pub n_targets: usize,
    pub degree: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Done { coverage: usize, objective: Option<f64>, rounds: Option<(usize, usize, usize)> },
    Skipped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub setting: Setting,
    pub trial: usize,
    pub seed: u64,
    pub results: Vec<(Algo, Outcome)>,
}

impl BenchConfig {
    pub fn settings(&self) -> Vec<Setting> {
        let mut out = Vec::new();
        for &n_robots in &self.robots {
            for &n_targets in &self.targets {
                for &degree in &self.degrees {
                    out.push(Setting { id: out.len(), n_robots, n_targets, degree });
                }
            }
        }
        out
    }

    /// Rejects settings the generator cannot realise before any work starts.
    pub fn validate(&self) -> Result<(), CliError> {
        if self.trials < 1 {
            return Err(CliError::Usage("--trials must be at least 1".into()));
        }
        if self.algos.is_empty() {
            return Err(CliError::Usage("--algos must name at least one algorithm".into()));
        }
        let mut bad = Vec::new();
        for s in self.settings() {
            if let Err(e) = random_instance(s.n_robots, s.n_targets, s.degree, 0) {
                bad.push(format!("setting {} ({} robots, {} targets, degree {}): {e}", s.id, s.n_robots, s.n_targets, s.degree));
            }
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(CliError::Usage(bad.join("; ")))
        }
    }
}

pub fn instance_seed(seed: u64, setting: usize, trial: usize) -> u64 {
    derive_seed(seed, &[stream::INSTANCE, setting as u64, trial as u64])
}

fn run_cell(cfg: &BenchConfig, setting: Setting, trial: usize) -> Result<Cell, CliError> {
    let seed = instance_seed(cfg.seed, setting.id, trial);
    let g = random_instance(setting.n_robots, setting.n_targets, setting.degree, seed)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let params = Params { local: cfg.local, order: None, seed: Some(seed) };
    let mut results = Vec::with_capacity(cfg.algos.len());
    for &algo in &cfg.algos {
        if algo.is_exhaustive() && g.selection_count() > SIZE_LIMIT {
            results.push((algo, Outcome::Skipped));
            continue;
        }
        // The greedy runs in ascending order; the seed only drives the baseline.
        let params = if algo == Algo::Greedy { Params { seed: None, ..params.clone() } } else { params.clone() };
        let r = algos::run(&g, algo, &params)
            .map_err(|e| CliError::Input(format!("setting {} trial {trial} {algo}: {e}", setting.id)))?;
        results.push((
            algo,
            Outcome::Done {
                coverage: r.coverage,
                objective: r.objective(),
                rounds: r.rounds.map(|l| (l.rounds, l.messages, l.bytes)),
            },
        ));
    }
    Ok(Cell { setting, trial, seed, results })
}

/// Runs every cell; the result is in (setting, trial) order.
pub fn run_cells(cfg: &BenchConfig) -> Result<Vec<Cell>, CliError> {
    let jobs: Vec<(Setting, usize)> =
        cfg.settings().into_iter().flat_map(|s| (0..cfg.trials).map(move |t| (s, t))).collect();
    jobs.into_par_iter().map(|(s, t)| run_cell(cfg, s, t)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub setting: Setting,
    pub algo: Algo,
    pub n: usize,
    pub coverage_mean: f64,
    pub coverage_min: usize,
    pub coverage_max: usize,
    pub objective_mean: Option<f64>,
    pub rounds_mean: Option<(f64, f64, f64)>,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

pub fn summarize(cfg: &BenchConfig, cells: &[Cell]) -> Vec<Summary> {
    let mut out = Vec::new();
    for setting in cfg.settings() {
        for (k, &algo) in cfg.algos.iter().enumerate() {
            let done: Vec<_> = cells
                .iter()
                .filter(|c| c.setting.id == setting.id)
                .filter_map(|c| match &c.results[k].1 {
                    Outcome::Done { coverage, objective, rounds } => Some((*coverage, *objective, *rounds)),
                    Outcome::Skipped => None,
                })
                .collect();
            let n = done.len();
            let objective_mean = if n > 0 && done.iter().all(|d| d.1.is_some()) {
                Some(mean(done.iter().map(|d| d.1.unwrap())))
            } else {
                None
            };
            let rounds_mean = if n > 0 && done.iter().all(|d| d.2.is_some()) {
                let r = |f: fn((usize, usize, usize)) -> usize| mean(done.iter().map(|d| f(d.2.unwrap()) as f64));
                Some((r(|t| t.0), r(|t| t.1), r(|t| t.2)))
            } else {
                None
            };
            out.push(Summary {
                setting,
                algo,
                n,
                coverage_mean: if n > 0 { mean(done.iter().map(|d| d.0 as f64)) } else { f64::NAN },
                coverage_min: done.iter().map(|d| d.0).min().unwrap_or(0),
                coverage_max: done.iter().map(|d| d.0).max().unwrap_or(0),
                objective_mean,
                rounds_mean,
            });
        }
    }
    out
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

/// Writes the CSV and returns the number of skipped runs.
pub fn write_csv(out: impl Write, cfg: &BenchConfig, cells: &[Cell]) -> std::io::Result<usize> {
    let mut out = out;
    writeln!(out, "{CSV_HEADER}")?;
    let mut w = ::csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    let mut skipped = 0;
    for c in cells {
        let s = c.setting;
        for (algo, outcome) in &c.results {
            let head = [s.id.to_string(), s.n_robots.to_string(), s.n_targets.to_string(), float(s.degree), c.trial.to_string(), algo.to_string()];
            let tail: [String; 6] = match outcome {
                Outcome::Done { coverage, objective, rounds } => [
                    coverage.to_string(),
                    opt(*objective, float),
                    opt(*rounds, |r| r.0.to_string()),
                    c.seed.to_string(),
                    opt(*rounds, |r| r.1.to_string()),
                    opt(*rounds, |r| r.2.to_string()),
                ],
                Outcome::Skipped => {
                    skipped += 1;
                    ["skipped".into(), "skipped".into(), String::new(), c.seed.to_string(), String::new(), String::new()]
                }
            };
            let blank = [String::new(), String::new(), String::new()];
            w.write_record(head.iter().chain(&tail).chain(&blank))?;
        }
    }
    for m in summarize(cfg, cells) {
        let s = m.setting;
        let coverage = if m.n > 0 { float(m.coverage_mean) } else { "skipped".to_string() };
        let (cmin, cmax) = if m.n > 0 { (m.coverage_min.to_string(), m.coverage_max.to_string()) } else { Default::default() };
        w.write_record([
            s.id.to_string(),
            s.n_robots.to_string(),
            s.n_targets.to_string(),
            float(s.degree),
            "summary".to_string(),
            m.algo.to_string(),
            coverage,
            opt(m.objective_mean, float),
            opt(m.rounds_mean, |r| float(r.0)),
            String::new(),
            opt(m.rounds_mean, |r| float(r.1)),
            opt(m.rounds_mean, |r| float(r.2)),
            cmin,
            cmax,
            m.n.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(skipped)
}
