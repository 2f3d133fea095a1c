//! Bounded-horizon local algorithm for the LP relaxation of the bottleneck
//! (max-min) assignment problem, and the rounding that turns its output
//! into one primitive per robot.
//!
//! Each robot looks only at its radius-`(h + 1)` neighbourhood in the robot
//! communication graph. Within that ball it solves
//!
//! ```text
//! maximize w
//!   s.t.  sum_m x_m^i <= 1                for robots i within h hops
//!         sum_{i,m} c_{i,m}^j x_m^i >= w   for interior targets j
//!         x >= 0
//! ```
//!
//! where a target is interior when every robot observing it is within `h`
//! hops. Targets on the boundary of the ball are dropped. Among optimal
//! solutions a second LP keeps each primitive near its uniform share unless
//! moving mass buys twice as much interior coverage; neighbours that each
//! count on the other to cover a shared target are the main failure mode
//! of independent local solves, and staying spread limits it. Primitives of
//! one robot with identical interior edge sets are indistinguishable to the
//! LP and share their mass evenly.
//!
//! The robot keeps the values of its own primitives. Mass on a primitive
//! that is dominated by another of its primitives (sees no target better,
//! some target worse) moves to the dominating one, which cannot lower any
//! target's coverage. Finally values are rescaled to sum to one (uniform if
//! all are zero).
//!
//! With `h = 0` a robot does not communicate: it solves the LP over its own
//! primitives and every target they see, counting only its own coverage.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{self, best_responsibility, Assignment, TripartiteGraph};
use crate::lp::{self, LinearProgram, Relation};
use crate::model::{self, MotionPrimitive, WorldState};
use crate::netsim::Adjacency;
use crate::{PrimitiveId, RobotId, TargetId, TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalConfig {
    /// Locality horizon (number of layers).
    pub h: usize,
    /// Optimality tolerance of each local LP, relative to its value.
    pub epsilon: f64,
}

impl LocalConfig {
    pub fn new(h: usize, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
        }
        Ok(LocalConfig { h, epsilon })
    }

    /// Synchronous rounds charged: `h + 1` to gather the ball and one to
    /// agree on target ownership.
    pub fn rounds(&self) -> usize {
        self.h + 2
    }
}

impl Default for LocalConfig {
    fn default() -> Self {
        LocalConfig { h: 2, epsilon: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionalSolution {
    pub x: Vec<f64>,
    /// Bottleneck value of `x` over the whole graph (0 without targets).
    pub w: f64,
    pub rounds_used: usize,
}

/// A robot's primitives and their sensing edges; the unit of information
/// exchanged while gathering a neighbourhood.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotRecord {
    pub robot: RobotId,
    pub primitives: Vec<PrimitiveRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveRecord {
    pub id: PrimitiveId,
    /// Sorted by target id.
    pub edges: Vec<(TargetId, f64)>,
}

pub fn robot_record(g: &TripartiteGraph, r: RobotId) -> RobotRecord {
    RobotRecord {
        robot: r,
        primitives: g
            .primitives_of(r)
            .iter()
            .map(|&p| PrimitiveRecord { id: p, edges: g.primitive_edges(p).to_vec() })
            .collect(),
    }
}

/// Everything one robot knows: the records of robots in its ball, keyed by
/// robot id, with their hop distance.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalView {
    pub center: RobotId,
    pub members: BTreeMap<RobotId, (usize, RobotRecord)>,
}

/// Breadth-first ball of the given radius, read directly off the graph.
pub fn view_from_graph(g: &TripartiteGraph, adj: &Adjacency, center: RobotId, radius: usize) -> LocalView {
    let members = adj
        .distances_within(center, radius)
        .into_iter()
        .map(|(r, d)| (r, (d, robot_record(g, r))))
        .collect();
    LocalView { center, members }
}

/// The LP a robot solves, keyed so identical local problems can be shared.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct ProblemKey {
    robots: Vec<RobotId>,
    targets: Vec<TargetId>,
    own_only: Option<RobotId>,
}

struct LocalProblem {
    key: ProblemKey,
    /// Variable classes: (robot, members), in robot then primitive order.
    classes: Vec<(RobotId, Vec<PrimitiveId>)>,
    /// Per covering target, `(class index, weight)` terms.
    rows: Vec<(TargetId, Vec<(usize, f64)>)>,
}

fn build_problem(view: &LocalView, h: usize) -> LocalProblem {
    let within = |d: usize| if h == 0 { d == 0 } else { d <= h };
    let inside: Vec<&RobotRecord> = view
        .members
        .values()
        .filter(|(d, _)| within(*d))
        .map(|(_, rec)| rec)
        .collect();

    let targets: BTreeSet<TargetId> = if h == 0 {
        inside.iter().flat_map(|rec| rec.primitives.iter().flat_map(|p| p.edges.iter().map(|e| e.0))).collect()
    } else {
        let mut far_seen = BTreeSet::new();
        let mut near_seen = BTreeSet::new();
        for (d, rec) in view.members.values() {
            let set = if within(*d) { &mut near_seen } else { &mut far_seen };
            set.extend(rec.primitives.iter().flat_map(|p| p.edges.iter().map(|e| e.0)));
        }
        near_seen.difference(&far_seen).copied().collect()
    };

    let mut classes: Vec<(RobotId, Vec<PrimitiveId>)> = Vec::new();
    let mut terms: BTreeMap<TargetId, Vec<(usize, f64)>> = targets.iter().map(|&t| (t, Vec::new())).collect();
    for rec in &inside {
        let mut seen: Vec<(Vec<(TargetId, u64)>, usize)> = Vec::new();
        for p in &rec.primitives {
            let signature: Vec<(TargetId, u64)> = p
                .edges
                .iter()
                .filter(|(t, _)| targets.contains(t))
                .map(|&(t, c)| (t, c.to_bits()))
                .collect();
            if let Some((_, k)) = seen.iter().find(|(s, _)| *s == signature) {
                classes[*k].1.push(p.id);
                continue;
            }
            let k = classes.len();
            classes.push((rec.robot, vec![p.id]));
            for &(t, bits) in &signature {
                terms.get_mut(&t).expect("target in row set").push((k, f64::from_bits(bits)));
            }
            seen.push((signature, k));
        }
    }

    LocalProblem {
        key: ProblemKey {
            robots: inside.iter().map(|r| r.robot).collect(),
            targets: targets.into_iter().collect(),
            own_only: (h == 0).then_some(view.center),
        },
        classes,
        rows: terms.into_iter().collect(),
    }
}

/// Weight of interior coverage against staying at the uniform share in the
/// second-stage objective.
const COVERAGE_WEIGHT: f64 = 0.5;

/// Per-primitive values of a solved local problem (before normalisation).
type LocalValues = HashMap<PrimitiveId, f64>;

fn solve_problem(problem: &LocalProblem, epsilon: f64) -> Result<LocalValues> {
    let nc = problem.classes.len();
    let mut values = LocalValues::new();
    if problem.rows.is_empty() {
        return Ok(values);
    }

    let robots: Vec<RobotId> = problem.classes.iter().map(|c| c.0).collect::<BTreeSet<_>>().into_iter().collect();
    let packing = |lp: &mut LinearProgram, width: usize| {
        for &r in &robots {
            let mut row = vec![0.0; width];
            for (k, (owner, _)) in problem.classes.iter().enumerate() {
                if *owner == r {
                    row[k] = 1.0;
                }
            }
            lp.push(row, Relation::Le, 1.0);
        }
    };

    // Stage 1: maximise the bottleneck w (last variable).
    let mut stage1 = LinearProgram::new(nc + 1);
    stage1.objective[nc] = 1.0;
    packing(&mut stage1, nc + 1);
    for (_, terms) in &problem.rows {
        let mut row = vec![0.0; nc + 1];
        for &(k, c) in terms {
            row[k] -= c;
        }
        row[nc] = 1.0;
        stage1.push(row, Relation::Le, 0.0);
    }
    let s1 = stage1.solve()?;
    let w_star = s1.objective;
    let gap_tol = (epsilon * w_star).max(TOLERANCE);
    lp::certify(&stage1, &s1, gap_tol)?;

    // Stage 2: among bottleneck-optimal points, keep every class close to
    // its uniform share, trading a unit of share for two units of coverage.
    // Variables: class values, then the part of each value up to its share.
    let floor = w_star * (1.0 - 1e-9);
    let width = 2 * nc;
    let mut degree: BTreeMap<RobotId, usize> = BTreeMap::new();
    for (owner, members) in &problem.classes {
        *degree.entry(*owner).or_default() += members.len();
    }
    let mut stage2 = LinearProgram::new(width);
    for (_, terms) in &problem.rows {
        for &(k, c) in terms {
            stage2.objective[k] += COVERAGE_WEIGHT * c;
        }
    }
    packing(&mut stage2, width);
    for (_, terms) in &problem.rows {
        let mut row = vec![0.0; width];
        for &(k, c) in terms {
            row[k] += c;
        }
        stage2.push(row, Relation::Ge, floor);
    }
    for (k, (owner, members)) in problem.classes.iter().enumerate() {
        stage2.objective[nc + k] = 1.0;
        let mut row = vec![0.0; width];
        row[nc + k] = 1.0;
        row[k] = -1.0;
        stage2.push(row, Relation::Le, 0.0);
        let mut row = vec![0.0; width];
        row[nc + k] = 1.0;
        stage2.push(row, Relation::Le, members.len() as f64 / degree[owner] as f64);
    }
    let class_values = match stage2.solve() {
        Ok(s2) if lp::certify(&stage2, &s2, 1e-7).is_ok() => s2.x[..nc].to_vec(),
        _ => s1.x[..nc].to_vec(),
    };

    for ((_, members), &v) in problem.classes.iter().zip(&class_values) {
        let share = v / members.len() as f64;
        for &p in members {
            values.insert(p, share);
        }
    }
    Ok(values)
}

/// `b` sees every target `a` sees at least as well, and something better.
fn dominates(b: &PrimitiveRecord, a: &PrimitiveRecord) -> bool {
    let weight = |p: &PrimitiveRecord, t: TargetId| p.edges.iter().find(|e| e.0 == t).map_or(0.0, |e| e.1);
    a.edges.iter().all(|&(t, c)| weight(b, t) >= c)
        && b.edges.iter().any(|&(t, c)| c > weight(a, t))
}

/// Moves the mass of every dominated primitive evenly onto the undominated
/// primitives that dominate it. No target's coverage can decrease.
fn lift_dominated(rec: &RobotRecord, xs: &mut [f64]) {
    let prims = &rec.primitives;
    let n = prims.len();
    let dominated: Vec<bool> = (0..n).map(|a| (0..n).any(|b| dominates(&prims[b], &prims[a]))).collect();
    let mut out = xs.to_vec();
    for a in 0..n {
        if !dominated[a] || xs[a] == 0.0 {
            continue;
        }
        let tops: Vec<usize> = (0..n).filter(|&b| !dominated[b] && dominates(&prims[b], &prims[a])).collect();
        out[a] -= xs[a];
        for &b in &tops {
            out[b] += xs[a] / tops.len() as f64;
        }
    }
    xs.copy_from_slice(&out);
}

/// Rescales one robot's values to sum to one; all-zero becomes uniform.
fn normalize(values: &mut [f64]) {
    let s: f64 = values.iter().sum();
    if s <= 1e-12 {
        let u = 1.0 / values.len() as f64;
        values.iter_mut().for_each(|v| *v = u);
    } else {
        values.iter_mut().for_each(|v| *v /= s);
    }
    graph::fit_packing(values);
}

/// Fractional values of the centre robot's primitives, in primitive order.
pub fn solve_view(view: &LocalView, cfg: &LocalConfig) -> Result<Vec<(PrimitiveId, f64)>> {
    let problem = build_problem(view, cfg.h);
    let values = solve_problem(&problem, cfg.epsilon)?;
    Ok(center_values(view, &values))
}

fn center_values(view: &LocalView, values: &LocalValues) -> Vec<(PrimitiveId, f64)> {
    let (_, rec) = &view.members[&view.center];
    let mut xs: Vec<f64> = rec.primitives.iter().map(|p| values.get(&p.id).copied().unwrap_or(0.0)).collect();
    lift_dominated(rec, &mut xs);
    normalize(&mut xs);
    rec.primitives.iter().map(|p| p.id).zip(xs).collect()
}

/// Runs the local algorithm for every robot over the graph's own
/// shared-target adjacency.
pub fn local_solve(g: &TripartiteGraph, cfg: &LocalConfig) -> Result<FractionalSolution> {
    local_solve_with_adjacency(g, &Adjacency::new(g.n_robots()), cfg)
}

/// As [`local_solve`], with extra communication links (for example
/// geometric radio range) merged into the shared-target adjacency.
pub fn local_solve_with_adjacency(
    g: &TripartiteGraph,
    extra: &Adjacency,
    cfg: &LocalConfig,
) -> Result<FractionalSolution> {
    let adj = g.robot_adjacency().union(extra);
    let mut cache: HashMap<ProblemKey, Arc<LocalValues>> = HashMap::new();
    let mut x = vec![0.0; g.n_primitives()];
    for r in 0..g.n_robots() {
        let view = view_from_graph(g, &adj, r, cfg.h + 1);
        let problem = build_problem(&view, cfg.h);
        let values = match cache.get(&problem.key) {
            Some(v) => Arc::clone(v),
            None => {
                let v = Arc::new(solve_problem(&problem, cfg.epsilon)?);
                cache.insert(problem.key.clone(), Arc::clone(&v));
                v
            }
        };
        for (p, v) in center_values(&view, &values) {
            x[p] = v;
        }
    }
    let w = if g.n_targets() == 0 { 0.0 } else { graph::objective_bottleneck(g, &x)? };
    Ok(FractionalSolution { x, w, rounds_used: cfg.rounds() })
}

/// Per robot, the primitive with the largest fractional value (lowest id on
/// ties) is selected. `y` gives each target to its best selected observer.
pub fn round_solution(g: &TripartiteGraph, frac: &FractionalSolution) -> Assignment {
    let selection: Vec<PrimitiveId> = (0..g.n_robots())
        .map(|r| {
            let ps = g.primitives_of(r);
            let mut best = ps[0];
            for &p in &ps[1..] {
                if frac.x[p] > frac.x[best] {
                    best = p;
                }
            }
            best
        })
        .collect();
    let mut a = Assignment::from_selection(g, &selection);
    a.y = best_responsibility(g, &a.x);
    a
}

/// `delta_R (1 + eps) (1 + 1/h) (1 - 1/delta_T)`.
pub fn approximation_bound(delta_r: usize, delta_t: usize, h: usize, epsilon: f64) -> Result<f64> {
    if delta_r < 2 || delta_t < 2 {
        return Err(Error::DegenerateDegree { delta_r, delta_t });
    }
    if h < 1 {
        return Err(Error::InvalidConfig("approximation bound needs h >= 1".into()));
    }
    if !(epsilon > 0.0) {
        return Err(Error::InvalidConfig(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok(delta_r as f64 * (1.0 + epsilon) * (1.0 + 1.0 / h as f64) * (1.0 - 1.0 / delta_t as f64))
}

/// A graph whose robots each hold at most two primitives, obtained by
/// splitting robots with more.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitGraph {
    pub graph: TripartiteGraph,
    /// Packing bound of each (virtual) robot.
    pub bounds: Vec<f64>,
    /// Original robot of each virtual robot.
    pub origin: Vec<RobotId>,
}

impl SplitGraph {
    /// Primitive ids are preserved, so `x` carries over unchanged; this
    /// checks the virtual packing bounds.
    pub fn is_feasible(&self, x: &[f64]) -> bool {
        (0..self.graph.n_robots()).all(|v| {
            let s: f64 = self.graph.primitives_of(v).iter().map(|&p| x[p]).sum();
            s <= self.bounds[v] + TOLERANCE
        }) && x.iter().all(|&v| v >= -TOLERANCE)
    }
}

/// Splits every robot with `d > 2` primitives into `ceil(d / 2)` virtual
/// robots holding consecutive pairs, each bounded by `1 / ceil(d / 2)`.
pub fn split_graph(g: &TripartiteGraph) -> SplitGraph {
    let mut primitive_robot = vec![0; g.n_primitives()];
    let mut bounds = Vec::new();
    let mut origin = Vec::new();
    for r in 0..g.n_robots() {
        let ps = g.primitives_of(r);
        if ps.len() <= 2 {
            for &p in ps {
                primitive_robot[p] = bounds.len();
            }
            bounds.push(1.0);
            origin.push(r);
            continue;
        }
        let parts = ps.len().div_ceil(2);
        for pair in ps.chunks(2) {
            for &p in pair {
                primitive_robot[p] = bounds.len();
            }
            bounds.push(1.0 / parts as f64);
            origin.push(r);
        }
    }
    let graph = TripartiteGraph::new(bounds.len(), primitive_robot, g.n_targets(), g.edges().to_vec())
        .expect("split of a valid graph is valid");
    SplitGraph { graph, bounds, origin }
}

/// Owner of every observable target: the lowest-id robot with an observing
/// primitive. Targets nobody observes are absent.
pub fn realize_targets(world: &WorldState, primitives: &[MotionPrimitive]) -> BTreeMap<TargetId, RobotId> {
    let mut owners = BTreeMap::new();
    for t in &world.targets {
        if let Some(r) = primitives
            .iter()
            .filter(|p| model::observable(p, t, &world.sensing))
            .map(|p| p.robot_id)
            .min()
        {
            owners.insert(t.id, r);
        }
    }
    owners
}

/// Graph form of [`realize_targets`].
pub fn target_owners(g: &TripartiteGraph) -> Vec<Option<RobotId>> {
    (0..g.n_targets()).map(|t| g.observers(t).first().copied()).collect()
}
