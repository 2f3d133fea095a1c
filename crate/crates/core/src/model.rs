//! Geometric world model: robots, targets, motion primitives, and the
//! sensing / communication predicates that turn them into a graph.
//!
//! Both sensing and communication use closed discs: a target at exactly
//! `rs` from a primitive endpoint is observable, and two robots at exactly
//! `rc` can talk.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::Adjacency;
use crate::rng::{self, stream};
use crate::{PrimitiveId, RobotId, TargetId};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn offset(self, dx: f64, dy: f64) -> Point {
        Point::new(self.x + dx, self.y + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotState {
    pub id: RobotId,
    pub position: Point,
    /// Radians.
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState {
    pub id: TargetId,
    pub position: Point,
    /// Metres per second.
    pub velocity: Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotionPrimitive {
    pub id: PrimitiveId,
    pub robot_id: RobotId,
    pub endpoint: Point,
    pub heading: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingModel {
    pub rs: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommModel {
    pub rc: f64,
}

impl SensingModel {
    pub fn new(rs: f64) -> Result<Self> {
        if rs.is_finite() && rs > 0.0 {
            Ok(SensingModel { rs })
        } else {
            Err(Error::InvalidConfig(format!("sensing radius must be positive, got {rs}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorldState {
    pub time_index: u64,
    pub robots: Vec<RobotState>,
    pub targets: Vec<TargetState>,
    pub sensing: SensingModel,
    pub comm: CommModel,
}

impl WorldState {
    pub fn new(
        time_index: u64,
        robots: Vec<RobotState>,
        targets: Vec<TargetState>,
        sensing: SensingModel,
        comm: CommModel,
    ) -> Result<Self> {
        let world = WorldState { time_index, robots, targets, sensing, comm };
        world.validate()?;
        Ok(world)
    }

    pub fn validate(&self) -> Result<()> {
        SensingModel::new(self.sensing.rs)?;
        if !(self.comm.rc > 2.0 * self.sensing.rs) {
            return Err(Error::InvalidConfig(format!(
                "communication radius {} must exceed twice the sensing radius {}",
                self.comm.rc, self.sensing.rs
            )));
        }
        if let Some((i, r)) = self.robots.iter().enumerate().find(|(i, r)| r.id != *i) {
            return Err(Error::InvalidConfig(format!("robot at index {i} has id {}", r.id)));
        }
        if let Some((i, t)) = self.targets.iter().enumerate().find(|(i, t)| t.id != *i) {
            return Err(Error::InvalidConfig(format!("target at index {i} has id {}", t.id)));
        }
        Ok(())
    }
}

/// Motion primitive generation: one stay-in-place primitive followed by
/// `count - 1` random endpoints within `max_step` metres and a heading cone
/// of `cone_half_angle` radians around the current heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveConfig {
    pub count: usize,
    pub max_step: f64,
    pub cone_half_angle: f64,
}

impl Default for PrimitiveConfig {
    fn default() -> Self {
        PrimitiveConfig { count: 2, max_step: 1.0, cone_half_angle: 30f64.to_radians() }
    }
}

impl PrimitiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.count < 1 {
            return Err(Error::InvalidConfig("primitive count must be at least 1".into()));
        }
        if !(self.max_step >= 0.0 && self.max_step.is_finite()) {
            return Err(Error::InvalidConfig(format!("invalid max_step {}", self.max_step)));
        }
        if !(self.cone_half_angle >= 0.0 && self.cone_half_angle.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "invalid cone_half_angle {}",
                self.cone_half_angle
            )));
        }
        Ok(())
    }
}

/// Primitives for a single robot, numbered `0..count` locally.
pub fn generate_primitives(
    robot: &RobotState,
    cfg: &PrimitiveConfig,
    seed: u64,
) -> Result<Vec<MotionPrimitive>> {
    cfg.validate()?;
    let mut rng = rng::stream_rng(seed, &[stream::PRIMITIVES, robot.id as u64]);
    let mut out = Vec::with_capacity(cfg.count);
    out.push(MotionPrimitive {
        id: 0,
        robot_id: robot.id,
        endpoint: robot.position,
        heading: robot.heading,
    });
    for id in 1..cfg.count {
        let dist = rng.gen_range(0.0..=cfg.max_step);
        let turn = rng.gen_range(-cfg.cone_half_angle..=cfg.cone_half_angle);
        let heading = robot.heading + turn;
        out.push(MotionPrimitive {
            id,
            robot_id: robot.id,
            endpoint: robot.position.offset(dist * heading.cos(), dist * heading.sin()),
            heading,
        });
    }
    Ok(out)
}

/// Primitives for every robot of the world, with globally contiguous ids
/// grouped by robot.
pub fn primitives_for_world(
    world: &WorldState,
    cfg: &PrimitiveConfig,
    seed: u64,
) -> Result<Vec<MotionPrimitive>> {
    let step_seed = rng::derive_seed(seed, &[world.time_index]);
    let mut all = Vec::with_capacity(world.robots.len() * cfg.count);
    for robot in &world.robots {
        for mut p in generate_primitives(robot, cfg, step_seed)? {
            p.id = all.len();
            all.push(p);
        }
    }
    Ok(all)
}

pub fn observable(p: &MotionPrimitive, t: &TargetState, s: &SensingModel) -> bool {
    p.endpoint.distance(t.position) <= s.rs
}

/// Constant-velocity prediction.
pub fn predict_targets(targets: &[TargetState], dt: f64) -> Vec<TargetState> {
    targets
        .iter()
        .map(|t| TargetState {
            position: t.position.offset(t.velocity.x * dt, t.velocity.y * dt),
            ..*t
        })
        .collect()
}

/// Robots within `rc` of each other (closed disc, no self loops).
pub fn comm_neighbors(world: &WorldState) -> Adjacency {
    let n = world.robots.len();
    let mut adj = Adjacency::new(n);
    for a in 0..n {
        for b in a + 1..n {
            if world.robots[a].position.distance(world.robots[b].position) <= world.comm.rc {
                adj.add_edge(a, b);
            }
        }
    }
    adj
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightScheme {
    /// 1 when observable, else 0.
    #[default]
    Unit,
    /// `1 - distance / rs` when observable, else 0.
    InverseDistance,
}

pub fn weight(p: &MotionPrimitive, t: &TargetState, s: &SensingModel, scheme: WeightScheme) -> f64 {
    if !observable(p, t, s) {
        return 0.0;
    }
    match scheme {
        WeightScheme::Unit => 1.0,
        WeightScheme::InverseDistance => (1.0 - p.endpoint.distance(t.position) / s.rs).max(0.0),
    }
}
