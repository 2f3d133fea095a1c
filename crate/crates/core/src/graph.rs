//! The robot / motion-primitive / target graph that every solver consumes.
//!
//! Robots own their primitives through implicit unit-weight edges; sensing
//! edges join a primitive to each target it observes with a weight `c >= 0`
//! (higher is better). Ids of each node kind are contiguous from zero.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{self, MotionPrimitive, WeightScheme, WorldState};
use crate::netsim::Adjacency;
use crate::rng::{self, stream};
use crate::{PrimitiveId, RobotId, TargetId, TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingEdge {
    pub primitive: PrimitiveId,
    pub target: TargetId,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TripartiteGraph {
    n_robots: usize,
    n_targets: usize,
    primitive_robot: Vec<RobotId>,
    /// Sorted by `(primitive, target)`.
    edges: Vec<SensingEdge>,
    robot_primitives: Vec<Vec<PrimitiveId>>,
    by_primitive: Vec<Vec<(TargetId, f64)>>,
    by_target: Vec<Vec<(PrimitiveId, f64)>>,
}

impl TripartiteGraph {
    /// Validates and indexes a graph. Every robot needs at least one
    /// primitive; sensing edges must be unique per `(primitive, target)`
    /// with finite non-negative weights.
    pub fn new(
        n_robots: usize,
        primitive_robot: Vec<RobotId>,
        n_targets: usize,
        mut edges: Vec<SensingEdge>,
    ) -> Result<Self> {
        let mut robot_primitives = vec![Vec::new(); n_robots];
        for (p, &r) in primitive_robot.iter().enumerate() {
            if r >= n_robots {
                return Err(Error::InvalidGraph(format!("primitive {p} belongs to unknown robot {r}")));
            }
            robot_primitives[r].push(p);
        }
        if let Some(r) = robot_primitives.iter().position(Vec::is_empty) {
            return Err(Error::InvalidGraph(format!("robot {r} has no primitives")));
        }
        edges.sort_by_key(|e| (e.primitive, e.target));
        let mut by_primitive = vec![Vec::new(); primitive_robot.len()];
        let mut by_target = vec![Vec::new(); n_targets];
        for (k, e) in edges.iter().enumerate() {
            if e.primitive >= primitive_robot.len() {
                return Err(Error::InvalidGraph(format!("edge references unknown primitive {}", e.primitive)));
            }
            if e.target >= n_targets {
                return Err(Error::InvalidGraph(format!("edge references unknown target {}", e.target)));
            }
            if !(e.weight.is_finite() && e.weight >= 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has invalid weight {}",
                    e.primitive, e.target, e.weight
                )));
            }
            if k > 0 && edges[k - 1].primitive == e.primitive && edges[k - 1].target == e.target {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.primitive, e.target
                )));
            }
            by_primitive[e.primitive].push((e.target, e.weight));
            by_target[e.target].push((e.primitive, e.weight));
        }
        Ok(TripartiteGraph {
            n_robots,
            n_targets,
            primitive_robot,
            edges,
            robot_primitives,
            by_primitive,
            by_target,
        })
    }

    pub fn empty() -> Self {
        TripartiteGraph::new(0, Vec::new(), 0, Vec::new()).expect("empty graph is valid")
    }

    pub fn n_robots(&self) -> usize {
        self.n_robots
    }

    pub fn n_primitives(&self) -> usize {
        self.primitive_robot.len()
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    pub fn edges(&self) -> &[SensingEdge] {
        &self.edges
    }

    pub fn robot_of(&self, p: PrimitiveId) -> RobotId {
        self.primitive_robot[p]
    }

    pub fn primitives_of(&self, r: RobotId) -> &[PrimitiveId] {
        &self.robot_primitives[r]
    }

    pub fn primitive_edges(&self, p: PrimitiveId) -> &[(TargetId, f64)] {
        &self.by_primitive[p]
    }

    pub fn target_edges(&self, t: TargetId) -> &[(PrimitiveId, f64)] {
        &self.by_target[t]
    }

    /// Number of enumerable one-primitive-per-robot selections.
    pub fn selection_count(&self) -> u128 {
        self.robot_primitives
            .iter()
            .try_fold(1u128, |acc, ps| acc.checked_mul(ps.len() as u128))
            .unwrap_or(u128::MAX)
    }

    /// Robots observing the target, ascending and deduplicated.
    pub fn observers(&self, t: TargetId) -> Vec<RobotId> {
        let set: BTreeSet<RobotId> = self.by_target[t].iter().map(|&(p, _)| self.robot_of(p)).collect();
        set.into_iter().collect()
    }

    /// Robots are adjacent iff some of their primitives observe a common
    /// target.
    pub fn robot_adjacency(&self) -> Adjacency {
        let mut adj = Adjacency::new(self.n_robots);
        for t in 0..self.n_targets {
            let obs = self.observers(t);
            for (k, &a) in obs.iter().enumerate() {
                for &b in &obs[k + 1..] {
                    adj.add_edge(a, b);
                }
            }
        }
        adj
    }

    /// Sub-graph induced by a set of robots: their primitives and every
    /// target they observe, renumbered in ascending order of the original
    /// ids.
    pub fn restrict_to_robots(&self, robots: &[RobotId]) -> (TripartiteGraph, SubgraphMap) {
        let robot_set: BTreeSet<RobotId> = robots.iter().copied().collect();
        let robots: Vec<RobotId> = robot_set.iter().copied().collect();
        let primitives: Vec<PrimitiveId> = (0..self.n_primitives())
            .filter(|&p| robot_set.contains(&self.robot_of(p)))
            .collect();
        let targets: Vec<TargetId> = primitives
            .iter()
            .flat_map(|&p| self.by_primitive[p].iter().map(|&(t, _)| t))
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index = |v: &[usize], id: usize| v.binary_search(&id).expect("id in sub-graph");
        let primitive_robot = primitives.iter().map(|&p| index(&robots, self.robot_of(p))).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| robot_set.contains(&self.robot_of(e.primitive)))
            .map(|e| SensingEdge {
                primitive: index(&primitives, e.primitive),
                target: index(&targets, e.target),
                weight: e.weight,
            })
            .collect();
        let sub = TripartiteGraph::new(robots.len(), primitive_robot, targets.len(), edges)
            .expect("restriction of a valid graph is valid");
        (sub, SubgraphMap { robots, primitives, targets })
    }
}

/// Original ids of the nodes of a restricted graph, indexed by new id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgraphMap {
    pub robots: Vec<RobotId>,
    pub primitives: Vec<PrimitiveId>,
    pub targets: Vec<TargetId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegreeStats {
    pub delta_r: usize,
    pub delta_t: usize,
}

pub fn degrees(g: &TripartiteGraph) -> DegreeStats {
    DegreeStats {
        delta_r: g.robot_primitives.iter().map(Vec::len).max().unwrap_or(0),
        delta_t: g.by_target.iter().map(Vec::len).max().unwrap_or(0),
    }
}

/// Primitive selection variables `x` and robot-target responsibilities `y`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Assignment {
    pub x: Vec<f64>,
    pub y: BTreeSet<(RobotId, TargetId)>,
}

impl Assignment {
    /// Binary `x` selecting one primitive per robot; `y` left empty.
    pub fn from_selection(g: &TripartiteGraph, selection: &[PrimitiveId]) -> Self {
        let mut x = vec![0.0; g.n_primitives()];
        for &p in selection {
            x[p] = 1.0;
        }
        Assignment { x, y: BTreeSet::new() }
    }

    /// Selected primitive per robot for a binary `x`.
    pub fn selection(&self, g: &TripartiteGraph) -> Vec<Option<PrimitiveId>> {
        (0..g.n_robots())
            .map(|r| g.primitives_of(r).iter().copied().find(|&p| self.x[p] > 0.5))
            .collect()
    }

    pub fn is_binary(&self) -> bool {
        self.x.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Packing constraints on both variable families.
    pub fn validate(&self, g: &TripartiteGraph) -> Result<()> {
        if self.x.len() != g.n_primitives() {
            return Err(Error::Infeasible(format!(
                "x has {} entries for {} primitives",
                self.x.len(),
                g.n_primitives()
            )));
        }
        if let Some(p) = self.x.iter().position(|&v| !(v >= -TOLERANCE && v <= 1.0 + TOLERANCE)) {
            return Err(Error::Infeasible(format!("x[{p}] = {} outside [0, 1]", self.x[p])));
        }
        for r in 0..g.n_robots() {
            let s: f64 = g.primitives_of(r).iter().map(|&p| self.x[p]).sum();
            if s > 1.0 + TOLERANCE {
                return Err(Error::Infeasible(format!("robot {r} selects total {s} > 1")));
            }
        }
        let mut owners = vec![0usize; g.n_targets()];
        for &(r, t) in &self.y {
            if r >= g.n_robots() || t >= g.n_targets() {
                return Err(Error::Infeasible(format!("y pair ({r}, {t}) out of range")));
            }
            owners[t] += 1;
            if owners[t] > 1 {
                return Err(Error::Infeasible(format!("target {t} assigned to more than one robot")));
            }
        }
        Ok(())
    }
}

/// Scales one robot's values down until their floating-point sum is at
/// most one. Values already summing to at most one are untouched.
pub fn fit_packing(values: &mut [f64]) {
    let s: f64 = values.iter().sum();
    if s > 1.0 {
        values.iter_mut().for_each(|v| *v /= s);
    }
    while values.iter().sum::<f64>() > 1.0 {
        values.iter_mut().for_each(|v| *v *= 1.0 - f64::EPSILON);
    }
}

/// Per-target coverage `sum_i sum_m c x`.
pub fn target_coverage(g: &TripartiteGraph, x: &[f64]) -> Vec<f64> {
    (0..g.n_targets())
        .map(|t| g.target_edges(t).iter().map(|&(p, c)| c * x[p]).sum())
        .collect()
}

/// Minimum per-target coverage. Undefined on graphs without targets.
pub fn objective_bottleneck(g: &TripartiteGraph, x: &[f64]) -> Result<f64> {
    if g.n_targets() == 0 {
        return Err(Error::Undefined("bottleneck objective over zero targets".into()));
    }
    Ok(target_coverage(g, x).into_iter().fold(f64::INFINITY, f64::min))
}

/// Quality of robot `r` on target `t` under `x`.
pub fn robot_quality(g: &TripartiteGraph, x: &[f64], r: RobotId, t: TargetId) -> f64 {
    g.target_edges(t)
        .iter()
        .filter(|&&(p, _)| g.robot_of(p) == r)
        .map(|&(p, c)| c * x[p])
        .sum()
}

pub fn objective_wta(g: &TripartiteGraph, x: &[f64], y: &BTreeSet<(RobotId, TargetId)>) -> f64 {
    y.iter().map(|&(r, t)| robot_quality(g, x, r, t)).sum()
}

/// Responsibilities maximising the winner-takes-all objective for a fixed
/// `x`: each target goes to its best robot (lowest id on ties), and only
/// when that robot's quality is positive.
pub fn best_responsibility(g: &TripartiteGraph, x: &[f64]) -> BTreeSet<(RobotId, TargetId)> {
    let mut y = BTreeSet::new();
    for t in 0..g.n_targets() {
        let mut best: Option<(RobotId, f64)> = None;
        for r in g.observers(t) {
            let q = robot_quality(g, x, r, t);
            if q > 0.0 && best.is_none_or(|(_, b)| q > b) {
                best = Some((r, q));
            }
        }
        if let Some((r, _)) = best {
            y.insert((r, t));
        }
    }
    y
}

/// Targets with at least one selected, positively weighted observer.
pub fn coverage_count(g: &TripartiteGraph, x: &[f64]) -> usize {
    (0..g.n_targets())
        .filter(|&t| g.target_edges(t).iter().any(|&(p, c)| c > 0.0 && x[p] > 0.5))
        .count()
}

/// Sensing edges from every primitive to every observable target of the
/// world. The targets of `world` are used as given; pass predicted states.
pub fn build_graph(
    world: &WorldState,
    primitives: &[MotionPrimitive],
    scheme: WeightScheme,
) -> Result<TripartiteGraph> {
    let mut edges = Vec::new();
    for p in primitives {
        for t in &world.targets {
            let c = model::weight(p, t, &world.sensing, scheme);
            if model::observable(p, t, &world.sensing) && c > 0.0 {
                edges.push(SensingEdge { primitive: p.id, target: t.id, weight: c });
            }
        }
    }
    let primitive_robot = primitives.iter().map(|p| p.robot_id).collect();
    TripartiteGraph::new(world.robots.len(), primitive_robot, world.targets.len(), edges)
}

struct DisjointSets(Vec<usize>);

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets((0..n).collect())
    }

    fn find(&mut self, mut a: usize) -> usize {
        while self.0[a] != a {
            self.0[a] = self.0[self.0[a]];
            a = self.0[a];
        }
        a
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
}

/// Random comparison instance: every robot gets two primitives; each
/// primitive then each target receives one random sensing edge; stray
/// components are joined to the component of robot 0; finally uniformly
/// random new edges are added until the mean target degree reaches
/// `target_degree`. All weights are 1.
pub fn random_instance(
    n_robots: usize,
    n_targets: usize,
    target_degree: f64,
    seed: u64,
) -> Result<TripartiteGraph> {
    if n_robots < 1 || n_targets < 1 {
        return Err(Error::InvalidConfig("need at least one robot and one target".into()));
    }
    let n_prims = 2 * n_robots;
    if !(target_degree >= 1.0) || target_degree > n_prims as f64 {
        return Err(Error::InvalidConfig(format!(
            "target degree {target_degree} must lie in [1, {n_prims}] (the number of primitives)"
        )));
    }
    let mut rng = rng::stream_rng(seed, &[stream::INSTANCE]);
    let primitive_robot: Vec<RobotId> = (0..n_prims).map(|p| p / 2).collect();
    let mut present: BTreeSet<(PrimitiveId, TargetId)> = BTreeSet::new();

    for p in 0..n_prims {
        present.insert((p, rng.gen_range(0..n_targets)));
    }
    for t in 0..n_targets {
        let linked = (0..n_prims).filter(|&p| present.contains(&(p, t))).count();
        if linked == n_prims {
            continue;
        }
        loop {
            let p = rng.gen_range(0..n_prims);
            if present.insert((p, t)) {
                break;
            }
        }
    }

    // Nodes: robots, then primitives, then targets.
    let prim_node = |p: usize| n_robots + p;
    let target_node = |t: usize| n_robots + n_prims + t;
    let mut sets = DisjointSets::new(n_robots + n_prims + n_targets);
    for p in 0..n_prims {
        sets.union(primitive_robot[p], prim_node(p));
    }
    for &(p, t) in &present {
        sets.union(prim_node(p), target_node(t));
    }
    let main = sets.find(0);
    let main_targets: Vec<TargetId> =
        (0..n_targets).filter(|&t| sets.find(target_node(t)) == main).collect();
    let mut joined = BTreeSet::new();
    for p in 0..n_prims {
        let root = sets.find(prim_node(p));
        if root != main && joined.insert(root) {
            let t = main_targets[rng.gen_range(0..main_targets.len())];
            present.insert((p, t));
        }
    }

    while (present.len() as f64) / (n_targets as f64) < target_degree {
        let pair = (rng.gen_range(0..n_prims), rng.gen_range(0..n_targets));
        present.insert(pair);
    }

    let edges = present
        .into_iter()
        .map(|(primitive, target)| SensingEdge { primitive, target, weight: 1.0 })
        .collect();
    TripartiteGraph::new(n_robots, primitive_robot, n_targets, edges)
}

/// A small hand-built instance shaped like the three-robot, six-primitive,
/// three-target example used to illustrate the local algorithm.
///
/// Robot 0 is symmetric: both of its primitives see only target 1. Robots
/// 1 and 2 mirror each other: one primitive sees a private target plus the
/// shared target 1, the other only the private target.
///
/// ```text
/// r0: p0 -> t1        p1 -> t1
/// r1: p2 -> t0, t1    p3 -> t0
/// r2: p4 -> t2        p5 -> t1, t2
/// ```
pub fn fig3_like() -> TripartiteGraph {
    let e = |primitive, target| SensingEdge { primitive, target, weight: 1.0 };
    TripartiteGraph::new(
        3,
        vec![0, 0, 1, 1, 2, 2],
        3,
        vec![e(0, 1), e(1, 1), e(2, 0), e(2, 1), e(3, 0), e(4, 2), e(5, 1), e(5, 2)],
    )
    .expect("fig3-like instance is valid")
}

#[derive(Serialize, Deserialize)]
struct IdRecord {
    id: usize,
}

#[derive(Serialize, Deserialize)]
struct PrimitiveRecord {
    id: usize,
    robot: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    robots: Vec<IdRecord>,
    primitives: Vec<PrimitiveRecord>,
    targets: Vec<IdRecord>,
    edges: Vec<SensingEdge>,
}

pub fn serialize(g: &TripartiteGraph) -> String {
    let file = InstanceFile {
        robots: (0..g.n_robots()).map(|id| IdRecord { id }).collect(),
        primitives: (0..g.n_primitives())
            .map(|id| PrimitiveRecord { id, robot: g.robot_of(id) })
            .collect(),
        targets: (0..g.n_targets()).map(|id| IdRecord { id }).collect(),
        edges: g.edges.clone(),
    };
    let mut text = serde_json::to_string_pretty(&file).expect("instance serializes");
    text.push('\n');
    text
}

/// Checks that the ids of a record list are a permutation of `0..n`.
fn contiguous_ids(kind: &str, ids: impl Iterator<Item = usize>, n: usize) -> Result<Vec<usize>> {
    let mut position = vec![None; n];
    for (k, id) in ids.enumerate() {
        if id >= n {
            return Err(Error::Parse(format!("{kind}[{k}]: id {id} outside 0..{n}")));
        }
        if let Some(prev) = position[id] {
            return Err(Error::Parse(format!("{kind}[{k}]: id {id} duplicates {kind}[{prev}]")));
        }
        position[id] = Some(k);
    }
    Ok(position.into_iter().map(|p| p.expect("all ids present")).collect())
}

pub fn parse(text: &str) -> Result<TripartiteGraph> {
    let file: InstanceFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let n_robots = file.robots.len();
    let n_prims = file.primitives.len();
    let n_targets = file.targets.len();
    contiguous_ids("robots", file.robots.iter().map(|r| r.id), n_robots)?;
    contiguous_ids("targets", file.targets.iter().map(|t| t.id), n_targets)?;
    let order = contiguous_ids("primitives", file.primitives.iter().map(|p| p.id), n_prims)?;
    let mut primitive_robot = Vec::with_capacity(n_prims);
    for k in order {
        let rec = &file.primitives[k];
        if rec.robot >= n_robots {
            return Err(Error::Parse(format!(
                "primitives[{k}]: primitive {} references unknown robot {}",
                rec.id, rec.robot
            )));
        }
        primitive_robot.push(rec.robot);
    }
    let mut seen = BTreeSet::new();
    for (k, e) in file.edges.iter().enumerate() {
        if e.primitive >= n_prims {
            return Err(Error::Parse(format!("edges[{k}]: unknown primitive {}", e.primitive)));
        }
        if e.target >= n_targets {
            return Err(Error::Parse(format!("edges[{k}]: unknown target {}", e.target)));
        }
        if !(e.weight.is_finite() && e.weight >= 0.0) {
            return Err(Error::Parse(format!("edges[{k}]: invalid weight {}", e.weight)));
        }
        if !seen.insert((e.primitive, e.target)) {
            return Err(Error::Parse(format!(
                "edges[{k}]: duplicate edge ({}, {})",
                e.primitive, e.target
            )));
        }
    }
    TripartiteGraph::new(n_robots, primitive_robot, n_targets, file.edges)
        .map_err(|e| Error::Parse(e.to_string()))
}
