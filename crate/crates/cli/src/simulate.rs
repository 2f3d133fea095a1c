//! `simulate`: run the tracking simulation and write its trace and
//! per-step metrics.

use std::io::Write;

use swarm_assign_core::simtrack::{SimConfig, StepRecord};

use crate::format::float;

pub const TRACE_HEADER: &str = "# swarm-assign trace v1";
pub const TRACE_COLUMNS: [&str; 8] = ["k", "id", "kind", "x", "y", "selected_primitive", "tracked_count", "rounds"];
pub const METRICS_HEADER: &str = "# swarm-assign metrics v1";
pub const METRICS_COLUMNS: [&str; 6] = ["k", "tracked_count", "n_targets", "rounds", "messages", "bytes"];

pub fn parse_config(text: &str) -> Result<SimConfig, String> {
    let cfg: SimConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// One row per robot then one per target, each step in order. Robot rows
/// carry the pose after the step and the selected primitive (an index into
/// the robot's own primitives); target rows carry the state planned
/// against.
pub fn write_trace(out: impl Write, records: &[StepRecord]) -> std::io::Result<()> {
    let mut out = out;
    writeln!(out, "{TRACE_HEADER}")?;
    let mut w = ::csv::Writer::from_writer(out);
    w.write_record(TRACE_COLUMNS)?;
    for rec in records {
        let (k, tracked, rounds) = (rec.k.to_string(), rec.tracked.to_string(), rec.rounds.to_string());
        for (r, sel) in rec.robots.iter().zip(&rec.selected) {
            w.write_record([
                &k,
                &r.id.to_string(),
                "robot",
                &float(r.position.x),
                &float(r.position.y),
                &sel.to_string(),
                &tracked,
                &rounds,
            ])?;
        }
        for t in &rec.targets {
            w.write_record([&k, &t.id.to_string(), "target", &float(t.position.x), &float(t.position.y), "", &tracked, &rounds])?;
        }
    }
    w.flush()
}

pub fn write_metrics(out: impl Write, records: &[StepRecord]) -> std::io::Result<()> {
    let mut out = out;
    writeln!(out, "{METRICS_HEADER}")?;
    let mut w = ::csv::Writer::from_writer(out);
    w.write_record(METRICS_COLUMNS)?;
    for rec in records {
        w.write_record([
            rec.k.to_string(),
            rec.tracked.to_string(),
            rec.targets.len().to_string(),
            rec.rounds.to_string(),
            rec.messages.to_string(),
            rec.bytes.to_string(),
        ])?;
    }
    w.flush()
}
