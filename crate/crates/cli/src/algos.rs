//! One entry point per algorithm, returning a uniform report.

use std::fmt;

use clap::ValueEnum;
use swarm_assign_core::graph::{best_responsibility, coverage_count, objective_bottleneck, objective_wta};
use swarm_assign_core::greedy::{ascending_order, random_order};
use swarm_assign_core::local::round_solution;
use swarm_assign_core::netsim::protocols::{run_greedy, run_local};
use swarm_assign_core::oracle::{brute_force_bottleneck, brute_force_wta, lp_opt, random_baseline};
use swarm_assign_core::{Adjacency, Assignment, FractionalSolution, LocalConfig, PrimitiveId, Result, RobotId, TripartiteGraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, ValueEnum)]
pub enum Algo {
    Local,
    Greedy,
    BfBottleneck,
    BfWta,
    Lp,
    Random,
}

impl Algo {
    pub fn name(self) -> &'static str {
        match self {
            Algo::Local => "local",
            Algo::Greedy => "greedy",
            Algo::BfBottleneck => "bf-bottleneck",
            Algo::BfWta => "bf-wta",
            Algo::Lp => "lp",
            Algo::Random => "random",
        }
    }

    pub fn is_exhaustive(self) -> bool {
        matches!(self, Algo::BfBottleneck | Algo::BfWta)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Params {
    pub local: LocalConfig,
    /// Greedy decision order; ascending ids when absent.
    pub order: Option<Vec<RobotId>>,
    /// Seed for the random baseline, and for a random greedy order when no
    /// explicit order is given.
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rounds {
    pub rounds: usize,
    pub messages: usize,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub algo: Algo,
    /// Selected primitive per robot.
    pub selection: Vec<PrimitiveId>,
    pub x: Vec<f64>,
    /// Fractional solution and its bottleneck value (local and lp).
    pub fractional: Option<(Vec<f64>, f64)>,
    /// Bottleneck value of the binary selection; `None` without targets.
    pub bottleneck: Option<f64>,
    /// Winner-takes-all value of the selection with best responsibilities.
    pub wta: f64,
    pub coverage: usize,
    /// Communication cost; `None` for centralised baselines.
    pub rounds: Option<Rounds>,
}

impl Report {
    fn from_assignment(g: &TripartiteGraph, algo: Algo, a: Assignment) -> Self {
        let selection = a.selection(g).into_iter().map(|p| p.expect("one primitive per robot")).collect();
        let y = best_responsibility(g, &a.x);
        Report {
            algo,
            selection,
            bottleneck: objective_bottleneck(g, &a.x).ok(),
            wta: objective_wta(g, &a.x, &y),
            coverage: coverage_count(g, &a.x),
            x: a.x,
            fractional: None,
            rounds: None,
        }
    }

    /// The value each algorithm optimises: bottleneck for local, lp,
    /// bf-bottleneck and random (fractional for lp), winner-takes-all for
    /// greedy and bf-wta.
    pub fn objective(&self) -> Option<f64> {
        match self.algo {
            Algo::Greedy | Algo::BfWta => Some(self.wta),
            Algo::Lp => self.fractional.as_ref().map(|(_, w)| *w),
            Algo::Local | Algo::BfBottleneck | Algo::Random => self.bottleneck,
        }
    }
}

pub fn run(g: &TripartiteGraph, algo: Algo, params: &Params) -> Result<Report> {
    let none = Adjacency::new(g.n_robots());
    match algo {
        Algo::Local => {
            let (frac, _, log) = run_local(g, &none, &params.local)?;
            let a = round_solution(g, &frac);
            let mut r = Report::from_assignment(g, algo, a);
            r.rounds = Some(Rounds { rounds: log.rounds, messages: log.messages, bytes: log.bytes });
            r.fractional = Some((frac.x, frac.w));
            Ok(r)
        }
        Algo::Greedy => {
            let order = match (&params.order, params.seed) {
                (Some(o), _) => o.clone(),
                (None, Some(seed)) => random_order(g.n_robots(), seed),
                (None, None) => ascending_order(g.n_robots()),
            };
            let (a, log) = run_greedy(g, &none, &order)?;
            let mut r = Report::from_assignment(g, algo, a);
            r.rounds = Some(Rounds { rounds: log.rounds, messages: log.messages, bytes: log.bytes });
            Ok(r)
        }
        Algo::BfBottleneck => {
            let (a, _) = brute_force_bottleneck(g)?;
            Ok(Report::from_assignment(g, algo, a))
        }
        Algo::BfWta => {
            let (x, _, _) = brute_force_wta(g)?;
            let selection: Vec<PrimitiveId> =
                (0..g.n_robots()).map(|r| *g.primitives_of(r).iter().find(|&&p| x[p] == 1.0).expect("selected")).collect();
            Ok(Report::from_assignment(g, algo, Assignment::from_selection(g, &selection)))
        }
        Algo::Lp => {
            let (x, w) = lp_opt(g)?;
            let frac = FractionalSolution { x, w, rounds_used: 0 };
            let mut r = Report::from_assignment(g, algo, round_solution(g, &frac));
            r.fractional = Some((frac.x, w));
            Ok(r)
        }
        Algo::Random => Ok(Report::from_assignment(g, algo, random_baseline(g, params.seed.unwrap_or(0)))),
    }
}
