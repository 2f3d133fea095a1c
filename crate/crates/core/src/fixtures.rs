//! Small hand-traceable instances shared by unit tests.

use crate::graph::{SensingEdge, TripartiteGraph};

pub fn edge(primitive: usize, target: usize, weight: f64) -> SensingEdge {
    SensingEdge { primitive, target, weight }
}

/// Two robots with unit weights:
/// r0: p0 -> {t0, t1}, p1 -> {t0}; r1: p2 -> {t1}, p3 -> {t2}.
pub fn two_robot_trace() -> TripartiteGraph {
    TripartiteGraph::new(
        2,
        vec![0, 0, 1, 1],
        3,
        vec![edge(0, 0, 1.0), edge(0, 1, 1.0), edge(1, 0, 1.0), edge(2, 1, 1.0), edge(3, 2, 1.0)],
    )
    .unwrap()
}

/// One robot with two primitives.
pub fn single_robot(edges: Vec<SensingEdge>, n_targets: usize) -> TripartiteGraph {
    TripartiteGraph::new(1, vec![0, 0], n_targets, edges).unwrap()
}
