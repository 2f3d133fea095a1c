//! The local and greedy algorithms as message-passing protocols.
//!
//! Nodes are robots. The communication graph is the shared-target
//! adjacency of the instance, optionally merged with radio links.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{decode, encode, run_protocol, Adjacency, Flood, Message, NodeId, Protocol, RoundContext, RoundLog, Transition};
use crate::error::{Error, Result};
use crate::graph::{self, Assignment, TripartiteGraph};
use crate::greedy::{check_order, greedy_choice};
use crate::local::{robot_record, solve_view, FractionalSolution, LocalConfig, LocalView, RobotRecord};
use crate::{PrimitiveId, RobotId, TargetId};

pub struct LocalProtocol {
    pub cfg: LocalConfig,
}

pub struct LocalState {
    flood: Flood<RobotRecord>,
    /// Targets this robot realises (lowest-id observer).
    owned: Vec<TargetId>,
    result: Option<Result<Vec<(PrimitiveId, f64)>>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalOutput {
    pub x: Vec<(PrimitiveId, f64)>,
    pub owned: Vec<TargetId>,
}

fn observed_targets(rec: &RobotRecord) -> BTreeSet<TargetId> {
    rec.primitives.iter().flat_map(|p| p.edges.iter().map(|e| e.0)).collect()
}

impl Protocol for LocalProtocol {
    type Input = RobotRecord;
    type State = LocalState;
    type Output = Result<LocalOutput>;

    fn round_bound(&self) -> usize {
        self.cfg.rounds()
    }

    fn init(&self, node: NodeId, neighbors: &[NodeId], input: &RobotRecord) -> LocalState {
        LocalState { flood: Flood::new(node, neighbors, input), owned: Vec::new(), result: None }
    }

    fn step(&self, ctx: &RoundContext<'_>, state: &mut LocalState, inbox: &[Message]) -> Result<Transition> {
        let gather = self.cfg.h + 1;
        if ctx.round <= gather + 1 {
            state.flood.absorb(ctx.round, inbox)?;
        }
        if ctx.round <= gather {
            return Ok(Transition::Continue(state.flood.forward(ctx)));
        }
        let own = observed_targets(&state.flood.known[&ctx.node].1.input);
        if ctx.round == gather + 1 {
            let claims: Vec<TargetId> = own.into_iter().collect();
            return Ok(Transition::Continue(ctx.broadcast(encode(&claims))));
        }

        let mut owner: BTreeMap<TargetId, NodeId> = own.iter().map(|&t| (t, ctx.node)).collect();
        for msg in inbox {
            let claims: Vec<TargetId> = decode(msg)?;
            for t in claims {
                if let Some(o) = owner.get_mut(&t) {
                    *o = (*o).min(msg.src);
                }
            }
        }
        state.owned = owner.into_iter().filter(|&(_, o)| o == ctx.node).map(|(t, _)| t).collect();
        let view = LocalView {
            center: ctx.node,
            members: state.flood.known.iter().map(|(&v, (d, rec))| (v, (*d, rec.input.clone()))).collect(),
        };
        state.result = Some(solve_view(&view, &self.cfg));
        Ok(Transition::Halt)
    }

    fn output(&self, node: NodeId, state: LocalState) -> Result<LocalOutput> {
        let x = state
            .result
            .ok_or_else(|| Error::ProtocolViolation(format!("node {node} halted before solving")))??;
        Ok(LocalOutput { x, owned: state.owned })
    }
}

/// Runs the local algorithm as a protocol over the shared-target adjacency
/// merged with `extra`.
pub fn run_local(
    g: &TripartiteGraph,
    extra: &Adjacency,
    cfg: &LocalConfig,
) -> Result<(FractionalSolution, Vec<Vec<TargetId>>, RoundLog)> {
    let adj = g.robot_adjacency().union(extra);
    let inputs: Vec<RobotRecord> = (0..g.n_robots()).map(|r| robot_record(g, r)).collect();
    let (outputs, log) = run_protocol(&adj, &inputs, &LocalProtocol { cfg: *cfg })?;
    let mut x = vec![0.0; g.n_primitives()];
    let mut owned = Vec::with_capacity(outputs.len());
    for out in outputs {
        let out = out?;
        for (p, v) in out.x {
            x[p] = v;
        }
        owned.push(out.owned);
    }
    let w = if g.n_targets() == 0 { 0.0 } else { graph::objective_bottleneck(g, &x)? };
    Ok((FractionalSolution { x, w, rounds_used: log.rounds }, owned, log))
}

pub struct GreedyProtocol {
    pub n_robots: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GreedyInput {
    pub record: RobotRecord,
    /// Position of this robot in the decision order.
    pub position: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Selection {
    robot: RobotId,
    edges: Vec<(TargetId, f64)>,
}

pub struct GreedyState {
    input: GreedyInput,
    /// Current quality of each target this robot observes.
    w: BTreeMap<TargetId, f64>,
    /// Best (quality, robot) among selected observers of each own target.
    best: BTreeMap<TargetId, (f64, RobotId)>,
    chosen: Option<PrimitiveId>,
}

impl GreedyState {
    fn absorb(&mut self, inbox: &[Message]) -> Result<()> {
        for msg in inbox {
            let sel: Selection = decode(msg)?;
            self.record(&sel);
        }
        Ok(())
    }

    fn record(&mut self, sel: &Selection) {
        for &(t, c) in &sel.edges {
            if let Some(w) = self.w.get_mut(&t) {
                *w = w.max(c);
            }
            if let Some(b) = self.best.get_mut(&t) {
                if c > b.0 || (c == b.0 && c > 0.0 && sel.robot < b.1) {
                    *b = (c, sel.robot);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreedyOutput {
    pub primitive: PrimitiveId,
    /// Targets this robot is responsible for.
    pub targets: Vec<TargetId>,
}

impl Protocol for GreedyProtocol {
    type Input = GreedyInput;
    type State = GreedyState;
    type Output = Result<GreedyOutput>;

    fn round_bound(&self) -> usize {
        self.n_robots
    }

    fn init(&self, _node: NodeId, _neighbors: &[NodeId], input: &GreedyInput) -> GreedyState {
        let own = observed_targets(&input.record);
        GreedyState {
            input: input.clone(),
            w: own.iter().map(|&t| (t, 0.0)).collect(),
            best: own.iter().map(|&t| (t, (0.0, usize::MAX))).collect(),
            chosen: None,
        }
    }

    fn step(&self, ctx: &RoundContext<'_>, state: &mut GreedyState, inbox: &[Message]) -> Result<Transition> {
        state.absorb(inbox)?;
        if ctx.round > self.n_robots {
            return Ok(Transition::Halt);
        }
        if ctx.round != state.input.position + 1 {
            return Ok(Transition::Continue(Vec::new()));
        }
        let w = &state.w;
        let prims = &state.input.record.primitives;
        let p = greedy_choice(prims.iter().map(|p| (p.id, p.edges.as_slice())), |t| w[&t])
            .ok_or_else(|| Error::InvalidGraph(format!("robot {} has no primitives", ctx.node)))?;
        let sel = Selection {
            robot: ctx.node,
            edges: prims.iter().find(|q| q.id == p).expect("chosen primitive is own").edges.clone(),
        };
        state.record(&sel);
        state.chosen = Some(p);
        Ok(Transition::Continue(ctx.broadcast(encode(&sel))))
    }

    fn output(&self, node: NodeId, state: GreedyState) -> Result<GreedyOutput> {
        let primitive = state
            .chosen
            .ok_or_else(|| Error::ProtocolViolation(format!("node {node} never chose a primitive")))?;
        let targets = state.best.into_iter().filter(|&(_, (q, r))| q > 0.0 && r == node).map(|(t, _)| t).collect();
        Ok(GreedyOutput { primitive, targets })
    }
}

/// Runs the sequential greedy as a protocol: the robot at position `i` of
/// `order` decides in round `i + 1`.
pub fn run_greedy(g: &TripartiteGraph, extra: &Adjacency, order: &[RobotId]) -> Result<(Assignment, RoundLog)> {
    check_order(order, g.n_robots())?;
    let adj = g.robot_adjacency().union(extra);
    let mut position = vec![0; g.n_robots()];
    for (i, &r) in order.iter().enumerate() {
        position[r] = i;
    }
    let inputs: Vec<GreedyInput> =
        (0..g.n_robots()).map(|r| GreedyInput { record: robot_record(g, r), position: position[r] }).collect();
    let (outputs, log) = run_protocol(&adj, &inputs, &GreedyProtocol { n_robots: g.n_robots() })?;
    let mut selection = Vec::with_capacity(outputs.len());
    let mut y = BTreeSet::new();
    for (r, out) in outputs.into_iter().enumerate() {
        let out = out?;
        selection.push(out.primitive);
        y.extend(out.targets.into_iter().map(|t| (r, t)));
    }
    let mut a = Assignment::from_selection(g, &selection);
    a.y = y;
    Ok((a, log))
}
