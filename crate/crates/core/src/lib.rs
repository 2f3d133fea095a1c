//! Simultaneous action and target assignment (SATA) for teams of robots
//! tracking multiple targets with limited sensing and communication.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: geometric world, motion primitives, sensing and
//!   communication predicates, edge weights.
//! * [`graph`]: the robot / primitive / target tripartite graph, the
//!   objectives evaluated on it, the JSON instance format and the random
//!   instance generator.
//! * [`lp`]: a dense two-phase simplex with a primal/dual certificate.
//! * [`local`]: the bounded-horizon local algorithm for the max-min
//!   (bottleneck) LP relaxation, plus rounding.
//! * [`greedy`]: sequential greedy for the winner-takes-all variant.
//! * [`oracle`]: exhaustive and LP optima, random baseline.
//! * [`netsim`]: synchronous round-based message passing, and the local
//!   and greedy algorithms expressed as protocols on top of it.
//! * [`simtrack`]: multi-step 2D tracking simulation.

#[cfg(test)]
mod fixtures;

pub mod error;
pub mod graph;
pub mod greedy;
pub mod local;
pub mod lp;
pub mod model;
pub mod netsim;
pub mod oracle;
pub mod rng;
pub mod simtrack;

pub use error::{Error, Result};
pub use graph::{Assignment, DegreeStats, SensingEdge, TripartiteGraph};
pub use local::{FractionalSolution, LocalConfig};
pub use model::{
    CommModel, MotionPrimitive, Point, PrimitiveConfig, RobotState, SensingModel, TargetState,
    WeightScheme, WorldState,
};
pub use netsim::{Adjacency, RoundLog};

pub type RobotId = usize;
pub type PrimitiveId = usize;
pub type TargetId = usize;

/// Absolute tolerance used for feasibility and objective comparisons.
pub const TOLERANCE: f64 = 1e-9;
