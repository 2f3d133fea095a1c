//! Lock-step synchronous message passing over an undirected graph.
//!
//! In round `r` every running node reads the messages sent to it in round
//! `r - 1`, updates its state, and either sends (possibly nothing) or
//! halts. A node's round count is the last round in which it did not halt;
//! the run's count is the maximum over nodes.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod protocols;

pub type NodeId = usize;

/// Symmetric, irreflexive adjacency with sorted neighbour lists.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Adjacency {
    neighbors: Vec<Vec<NodeId>>,
}

impl Adjacency {
    pub fn new(n: usize) -> Self {
        Adjacency { neighbors: vec![Vec::new(); n] }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let mut adj = Adjacency::new(n);
        for (a, b) in edges {
            adj.add_edge(a, b);
        }
        adj
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Self loops are ignored.
    pub fn add_edge(&mut self, a: NodeId, b: NodeId) {
        if a == b {
            return;
        }
        for (u, v) in [(a, b), (b, a)] {
            let list = &mut self.neighbors[u];
            if let Err(pos) = list.binary_search(&v) {
                list.insert(pos, v);
            }
        }
    }

    pub fn contains(&self, a: NodeId, b: NodeId) -> bool {
        self.neighbors[a].binary_search(&b).is_ok()
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.neighbors[v]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edge union of two adjacencies over the same node set.
    pub fn union(&self, other: &Adjacency) -> Adjacency {
        let mut out = self.clone();
        if out.len() < other.len() {
            out.neighbors.resize(other.len(), Vec::new());
        }
        for (a, list) in other.neighbors.iter().enumerate() {
            for &b in list {
                out.add_edge(a, b);
            }
        }
        out
    }

    /// Breadth-first hop distances from `src`, limited to `radius`.
    pub fn distances_within(&self, src: NodeId, radius: usize) -> BTreeMap<NodeId, usize> {
        let mut dist = BTreeMap::from([(src, 0)]);
        let mut queue = VecDeque::from([src]);
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            if d == radius {
                continue;
            }
            for &u in &self.neighbors[v] {
                if let std::collections::btree_map::Entry::Vacant(e) = dist.entry(u) {
                    e.insert(d + 1);
                    queue.push_back(u);
                }
            }
        }
        dist
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for v in 0..self.len() {
            if seen[v] {
                continue;
            }
            let mut comp: Vec<NodeId> = self.distances_within(v, usize::MAX).into_keys().collect();
            comp.sort_unstable();
            for &u in &comp {
                seen[u] = true;
            }
            out.push(comp);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Message {
    pub src: NodeId,
    pub dst: NodeId,
    pub round: usize,
    pub payload: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outgoing {
    pub dst: NodeId,
    pub payload: Vec<u8>,
}

pub enum Transition {
    /// Stay in this round, sending the given messages.
    Continue(Vec<Outgoing>),
    /// Stop without using this round.
    Halt,
}

pub struct RoundContext<'a> {
    pub node: NodeId,
    pub round: usize,
    pub neighbors: &'a [NodeId],
}

impl RoundContext<'_> {
    pub fn broadcast(&self, payload: Vec<u8>) -> Vec<Outgoing> {
        self.neighbors.iter().map(|&dst| Outgoing { dst, payload: payload.clone() }).collect()
    }
}

/// Per-node transition function of a synchronous protocol.
pub trait Protocol {
    type Input;
    type State;
    type Output;

    /// Largest round in which a node may still continue.
    fn round_bound(&self) -> usize;

    fn init(&self, node: NodeId, neighbors: &[NodeId], input: &Self::Input) -> Self::State;

    fn step(&self, ctx: &RoundContext<'_>, state: &mut Self::State, inbox: &[Message]) -> Result<Transition>;

    fn output(&self, node: NodeId, state: Self::State) -> Self::Output;
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ComponentLog {
    pub nodes: Vec<NodeId>,
    pub rounds: usize,
    pub messages: usize,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RoundLog {
    pub rounds: usize,
    pub messages: usize,
    pub bytes: usize,
    pub per_component: Vec<ComponentLog>,
}

pub fn run_protocol<P: Protocol>(
    adjacency: &Adjacency,
    inputs: &[P::Input],
    protocol: &P,
) -> Result<(Vec<P::Output>, RoundLog)> {
    let n = adjacency.len();
    if inputs.len() != n {
        return Err(Error::InvalidConfig(format!("{} inputs for {n} nodes", inputs.len())));
    }
    let mut states: Vec<Option<P::State>> = (0..n)
        .map(|v| Some(protocol.init(v, adjacency.neighbors(v), &inputs[v])))
        .collect();
    let mut running = vec![true; n];
    let mut used = vec![0usize; n];
    let mut sent = vec![(0usize, 0usize); n];
    let mut pending: Vec<Vec<Message>> = vec![Vec::new(); n];
    let mut round = 1;

    while running.iter().any(|&r| r) {
        let mut next: Vec<Vec<Message>> = vec![Vec::new(); n];
        for v in 0..n {
            let inbox = std::mem::take(&mut pending[v]);
            if !running[v] {
                continue;
            }
            let ctx = RoundContext { node: v, round, neighbors: adjacency.neighbors(v) };
            let state = states[v].as_mut().expect("running node has state");
            match protocol.step(&ctx, state, &inbox)? {
                Transition::Halt => running[v] = false,
                Transition::Continue(out) => {
                    if round > protocol.round_bound() {
                        return Err(Error::Divergence { bound: protocol.round_bound() });
                    }
                    used[v] = round;
                    for msg in out {
                        if !adjacency.contains(v, msg.dst) {
                            return Err(Error::ProtocolViolation(format!(
                                "node {v} sent to non-neighbour {} in round {round}",
                                msg.dst
                            )));
                        }
                        sent[v].0 += 1;
                        sent[v].1 += msg.payload.len();
                        next[msg.dst].push(Message { src: v, dst: msg.dst, round, payload: msg.payload });
                    }
                }
            }
        }
        pending = next;
        round += 1;
    }

    let per_component: Vec<ComponentLog> = adjacency
        .components()
        .into_iter()
        .map(|nodes| ComponentLog {
            rounds: nodes.iter().map(|&v| used[v]).max().unwrap_or(0),
            messages: nodes.iter().map(|&v| sent[v].0).sum(),
            bytes: nodes.iter().map(|&v| sent[v].1).sum(),
            nodes,
        })
        .collect();
    let log = RoundLog {
        rounds: used.iter().copied().max().unwrap_or(0),
        messages: sent.iter().map(|s| s.0).sum(),
        bytes: sent.iter().map(|s| s.1).sum(),
        per_component,
    };
    let outputs = states
        .into_iter()
        .enumerate()
        .map(|(v, s)| protocol.output(v, s.expect("state present")))
        .collect();
    Ok((outputs, log))
}

pub(crate) fn encode<T: Serialize>(value: &T) -> Vec<u8> {
    serde_json::to_vec(value).expect("protocol payload serializes")
}

pub(crate) fn decode<T: DeserializeOwned>(msg: &Message) -> Result<T> {
    serde_json::from_slice(&msg.payload).map_err(|e| {
        Error::ProtocolViolation(format!("undecodable payload from node {}: {e}", msg.src))
    })
}

/// One node's knowledge after gathering: inputs of every node within the
/// radius, their hop distance, and the edges among them.
#[derive(Debug, Clone, PartialEq)]
pub struct BallView<I> {
    pub center: NodeId,
    pub nodes: BTreeMap<NodeId, (usize, I)>,
    pub edges: BTreeSet<(NodeId, NodeId)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub(crate) struct BallRecord<I> {
    pub node: NodeId,
    pub neighbors: Vec<NodeId>,
    pub input: I,
}

/// Flooding state shared by protocols that start by gathering a ball.
pub(crate) struct Flood<I> {
    pub known: BTreeMap<NodeId, (usize, BallRecord<I>)>,
    pub fresh: Vec<NodeId>,
}

impl<I: Clone + Serialize + DeserializeOwned> Flood<I> {
    pub fn new(node: NodeId, neighbors: &[NodeId], input: &I) -> Self {
        let rec = BallRecord { node, neighbors: neighbors.to_vec(), input: input.clone() };
        Flood { known: BTreeMap::from([(node, (0, rec))]), fresh: vec![node] }
    }

    /// Absorbs records arriving in `round`; they lie `round - 1` hops away.
    pub fn absorb(&mut self, round: usize, inbox: &[Message]) -> Result<()> {
        for msg in inbox {
            let records: Vec<BallRecord<I>> = decode(msg)?;
            for rec in records {
                if !self.known.contains_key(&rec.node) {
                    self.fresh.push(rec.node);
                    self.known.insert(rec.node, (round - 1, rec));
                }
            }
        }
        Ok(())
    }

    /// Forwards everything learned since the last send.
    pub fn forward(&mut self, ctx: &RoundContext<'_>) -> Vec<Outgoing> {
        let fresh = std::mem::take(&mut self.fresh);
        if fresh.is_empty() {
            return Vec::new();
        }
        let records: Vec<&BallRecord<I>> = fresh.iter().map(|v| &self.known[v].1).collect();
        ctx.broadcast(encode(&records))
    }

    pub fn into_view(self, center: NodeId) -> BallView<I> {
        let edges = self
            .known
            .values()
            .flat_map(|(_, rec)| {
                rec.neighbors
                    .iter()
                    .filter(|u| self.known.contains_key(u))
                    .map(move |&u| (rec.node.min(u), rec.node.max(u)))
            })
            .collect();
        let nodes = self.known.into_iter().map(|(v, (d, rec))| (v, (d, rec.input))).collect();
        BallView { center, nodes, edges }
    }
}

struct Gather<I> {
    radius: usize,
    _input: std::marker::PhantomData<I>,
}

impl<I: Clone + Serialize + DeserializeOwned> Protocol for Gather<I> {
    type Input = I;
    type State = Flood<I>;
    type Output = BallView<I>;

    fn round_bound(&self) -> usize {
        self.radius
    }

    fn init(&self, node: NodeId, neighbors: &[NodeId], input: &I) -> Flood<I> {
        Flood::new(node, neighbors, input)
    }

    fn step(&self, ctx: &RoundContext<'_>, state: &mut Flood<I>, inbox: &[Message]) -> Result<Transition> {
        state.absorb(ctx.round, inbox)?;
        if ctx.round > self.radius {
            return Ok(Transition::Halt);
        }
        Ok(Transition::Continue(state.forward(ctx)))
    }

    fn output(&self, node: NodeId, state: Flood<I>) -> BallView<I> {
        state.into_view(node)
    }
}

/// Gathers every node's radius-`k` neighbourhood in exactly `k` rounds.
pub fn gather_ball<I: Clone + Serialize + DeserializeOwned>(
    adjacency: &Adjacency,
    inputs: &[I],
    k: usize,
) -> Result<(Vec<BallView<I>>, RoundLog)> {
    run_protocol(adjacency, inputs, &Gather { radius: k, _input: std::marker::PhantomData })
}
