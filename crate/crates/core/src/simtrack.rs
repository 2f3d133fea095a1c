//! Multi-step 2D tracking simulation.
//!
//! Every step the robots generate motion primitives, predict the targets
//! one step ahead, build the assignment graph, run the configured
//! algorithm over the communication graph, and teleport to the endpoints
//! of their selected primitives. Targets then move according to their
//! motion model, drawn from a random stream that robot decisions never
//! touch.

use std::collections::BTreeMap;
use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{build_graph, coverage_count};
use crate::greedy::{ascending_order, random_order};
use crate::local::{realize_targets, round_solution, LocalConfig};
use crate::model::{
    comm_neighbors, predict_targets, primitives_for_world, CommModel, Point, PrimitiveConfig, RobotState,
    SensingModel, TargetState, WeightScheme, WorldState,
};
use crate::netsim::protocols::{run_greedy, run_local};
use crate::rng::{self, stream};
use crate::{PrimitiveId, RobotId, TargetId};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Arena {
    pub width: f64,
    pub height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TargetMotion {
    Static,
    /// Each step a uniform heading and a speed in `[0, max_speed]`;
    /// arena walls reflect.
    RandomWalk { max_speed: f64 },
    /// Cycles through `waypoints` random points, switching every
    /// `leg_steps` steps, moving at up to `speed`.
    Waypoint { speed: f64, waypoints: usize, leg_steps: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Algorithm {
    Local {
        h: usize,
        epsilon: f64,
    },
    /// Fixed decision order; `order` wins over `order_seed`, and ascending
    /// ids are used when neither is given.
    Greedy {
        #[serde(default)]
        order: Option<Vec<RobotId>>,
        #[serde(default)]
        order_seed: Option<u64>,
    },
}

fn default_primitives() -> PrimitiveConfig {
    PrimitiveConfig::default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_robots: usize,
    pub n_targets: usize,
    pub arena: Arena,
    pub steps: usize,
    pub dt: f64,
    pub rs: f64,
    pub rc: f64,
    #[serde(default = "default_primitives")]
    pub primitives: PrimitiveConfig,
    #[serde(default)]
    pub weight_scheme: WeightScheme,
    pub target_motion: TargetMotion,
    /// Targets with id below `round(mobile_fraction * n_targets)` move;
    /// the rest stay put.
    #[serde(default = "one")]
    pub mobile_fraction: f64,
    pub algorithm: Algorithm,
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn positive(v: f64) -> bool {
    v.is_finite() && v > 0.0
}

impl SimConfig {
    /// Checks every field and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut bad = Vec::new();
        if !positive(self.arena.width) {
            bad.push(format!("arena.width must be positive (got {})", self.arena.width));
        }
        if !positive(self.arena.height) {
            bad.push(format!("arena.height must be positive (got {})", self.arena.height));
        }
        if self.steps < 1 {
            bad.push("steps must be at least 1".to_string());
        }
        if !positive(self.dt) {
            bad.push(format!("dt must be positive (got {})", self.dt));
        }
        if !positive(self.rs) {
            bad.push(format!("rs must be positive (got {})", self.rs));
        }
        if !(self.rc > 2.0 * self.rs) {
            bad.push(format!("rc must exceed 2 * rs (got rc {} with rs {})", self.rc, self.rs));
        }
        if let Err(e) = self.primitives.validate() {
            bad.push(format!("primitives: {e}"));
        }
        if !(0.0..=1.0).contains(&self.mobile_fraction) {
            bad.push(format!("mobile_fraction must lie in [0, 1] (got {})", self.mobile_fraction));
        }
        match self.target_motion {
            TargetMotion::Static => {}
            TargetMotion::RandomWalk { max_speed } => {
                if !(max_speed >= 0.0 && max_speed.is_finite()) {
                    bad.push(format!("target_motion.max_speed must be non-negative (got {max_speed})"));
                }
            }
            TargetMotion::Waypoint { speed, waypoints, leg_steps } => {
                if !(speed >= 0.0 && speed.is_finite()) {
                    bad.push(format!("target_motion.speed must be non-negative (got {speed})"));
                }
                if waypoints < 1 {
                    bad.push("target_motion.waypoints must be at least 1".to_string());
                }
                if leg_steps < 1 {
                    bad.push("target_motion.leg_steps must be at least 1".to_string());
                }
            }
        }
        match &self.algorithm {
            Algorithm::Local { epsilon, .. } => {
                if !positive(*epsilon) {
                    bad.push(format!("algorithm.epsilon must be positive (got {epsilon})"));
                }
            }
            Algorithm::Greedy { order: Some(order), .. } => {
                if let Err(e) = crate::greedy::check_order(order, self.n_robots) {
                    bad.push(format!("algorithm.order: {e}"));
                }
            }
            Algorithm::Greedy { .. } => {}
        }
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(bad.join("; ")))
        }
    }

    fn mobile_count(&self) -> usize {
        (self.mobile_fraction * self.n_targets as f64).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub k: u64,
    /// Robot poses after executing the selected primitives.
    pub robots: Vec<RobotState>,
    /// Target states the step planned against (predicted one step ahead).
    pub targets: Vec<TargetState>,
    /// Selected primitive per robot, as an index into that robot's own
    /// primitives (0 is stay-in-place).
    pub selected: Vec<usize>,
    pub tracked: usize,
    pub owners: BTreeMap<TargetId, RobotId>,
    pub rounds: usize,
    pub messages: usize,
    pub bytes: usize,
}

/// Initial world: robots and targets placed uniformly in the arena.
pub fn initial_world(cfg: &SimConfig) -> Result<WorldState> {
    cfg.validate()?;
    let mut rng = rng::stream_rng(cfg.seed, &[stream::PLACEMENT]);
    let place = |rng: &mut rng::StreamRng| {
        Point::new(rng.gen_range(0.0..=cfg.arena.width), rng.gen_range(0.0..=cfg.arena.height))
    };
    let robots = (0..cfg.n_robots)
        .map(|id| {
            let position = place(&mut rng);
            RobotState { id, position, heading: rng.gen_range(0.0..TAU) }
        })
        .collect();
    let targets = (0..cfg.n_targets)
        .map(|id| TargetState { id, position: place(&mut rng), velocity: Point::default() })
        .collect();
    let mut world =
        WorldState::new(0, robots, targets, SensingModel::new(cfg.rs)?, CommModel { rc: cfg.rc })?;
    for t in &mut world.targets {
        t.velocity = target_velocity(cfg, t, 0);
    }
    Ok(world)
}

/// Velocity a target will move with during step `k`.
fn target_velocity(cfg: &SimConfig, t: &TargetState, k: u64) -> Point {
    if t.id >= cfg.mobile_count() {
        return Point::default();
    }
    match cfg.target_motion {
        TargetMotion::Static => Point::default(),
        TargetMotion::RandomWalk { max_speed } => {
            let mut rng = rng::stream_rng(cfg.seed, &[stream::TARGET_MOTION, k, t.id as u64]);
            let heading = rng.gen_range(0.0..TAU);
            let speed = rng.gen_range(0.0..=max_speed);
            Point::new(speed * heading.cos(), speed * heading.sin())
        }
        TargetMotion::Waypoint { speed, waypoints, leg_steps } => {
            let leg = (k / leg_steps as u64) % waypoints as u64;
            let mut rng = rng::stream_rng(cfg.seed, &[stream::TARGET_MOTION, t.id as u64, leg]);
            let goal = Point::new(rng.gen_range(0.0..=cfg.arena.width), rng.gen_range(0.0..=cfg.arena.height));
            let d = t.position.distance(goal);
            if d == 0.0 {
                return Point::default();
            }
            let v = speed.min(d / cfg.dt);
            Point::new(v * (goal.x - t.position.x) / d, v * (goal.y - t.position.y) / d)
        }
    }
}

/// Mirrors a coordinate back into `[0, hi]`.
fn reflect(mut p: f64, hi: f64) -> f64 {
    for _ in 0..4 {
        if p < 0.0 {
            p = -p;
        } else if p > hi {
            p = 2.0 * hi - p;
        } else {
            break;
        }
    }
    p.clamp(0.0, hi)
}

fn advance_targets(cfg: &SimConfig, targets: &mut [TargetState], next_k: u64) {
    for t in targets.iter_mut() {
        let x = reflect(t.position.x + t.velocity.x * cfg.dt, cfg.arena.width);
        let y = reflect(t.position.y + t.velocity.y * cfg.dt, cfg.arena.height);
        t.position = Point::new(x, y);
        t.velocity = target_velocity(cfg, t, next_k);
    }
}

/// One simulation step; returns the next world and what happened.
pub fn step(world: &WorldState, cfg: &SimConfig) -> Result<(WorldState, StepRecord)> {
    world.validate()?;
    let primitives = primitives_for_world(world, &cfg.primitives, cfg.seed)?;
    let predicted = WorldState { targets: predict_targets(&world.targets, cfg.dt), ..world.clone() };
    let g = build_graph(&predicted, &primitives, cfg.weight_scheme)?;
    let owners = realize_targets(&predicted, &primitives);
    let radio = comm_neighbors(world);

    let (x, log) = match &cfg.algorithm {
        Algorithm::Local { h, epsilon } => {
            let lc = LocalConfig::new(*h, *epsilon)?;
            let (frac, _, log) = run_local(&g, &radio, &lc)?;
            (round_solution(&g, &frac).x, log)
        }
        Algorithm::Greedy { order, order_seed } => {
            let n = world.robots.len();
            let order = match (order, order_seed) {
                (Some(o), _) => o.clone(),
                (None, Some(s)) => random_order(n, *s),
                (None, None) => ascending_order(n),
            };
            let (a, log) = run_greedy(&g, &radio, &order)?;
            (a.x, log)
        }
    };

    let mut next = world.clone();
    let mut selected = Vec::with_capacity(world.robots.len());
    for (r, robot) in next.robots.iter_mut().enumerate() {
        let local = g.primitives_of(r).iter().position(|&p| x[p] > 0.5).expect("one primitive selected per robot");
        let p: PrimitiveId = g.primitives_of(r)[local];
        robot.position = primitives[p].endpoint;
        robot.heading = primitives[p].heading;
        selected.push(local);
    }
    let record = StepRecord {
        k: world.time_index,
        robots: next.robots.clone(),
        targets: predicted.targets,
        selected,
        tracked: coverage_count(&g, &x),
        owners,
        rounds: log.rounds,
        messages: log.messages,
        bytes: log.bytes,
    };
    next.time_index += 1;
    advance_targets(cfg, &mut next.targets, next.time_index);
    Ok((next, record))
}

/// Runs `cfg.steps` steps from the seeded initial world.
pub fn run(cfg: &SimConfig) -> Result<Vec<StepRecord>> {
    let mut world = initial_world(cfg)?;
    let mut records = Vec::with_capacity(cfg.steps);
    for _ in 0..cfg.steps {
        let (next, rec) = step(&world, cfg)?;
        records.push(rec);
        world = next;
    }
    Ok(records)
}
