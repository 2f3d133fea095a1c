//! Instance fixtures shared by the benchmarks.

use swarm_assign_core::graph::random_instance;
use swarm_assign_core::rng::derive_seed;
use swarm_assign_core::TripartiteGraph;

/// Robot counts swept by the scaling benchmarks.
pub const ROBOTS: [usize; 3] = [5, 10, 20];

/// A fixed random instance with `2.5 * n_robots` targets and mean target
/// degree 2, the middle of the comparison grid.
pub fn instance(n_robots: usize, seed: u64) -> TripartiteGraph {
    let n_targets = n_robots * 5 / 2;
    random_instance(n_robots, n_targets, 2.0, derive_seed(seed, &[n_robots as u64]))
        .expect("grid parameters are valid")
}

/// Small enough for the exhaustive oracles (2^8 selections).
pub fn small_instance(seed: u64) -> TripartiteGraph {
    random_instance(8, 12, 2.0, seed).expect("valid parameters")
}
