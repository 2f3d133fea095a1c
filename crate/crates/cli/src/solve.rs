//! `solve`: run one algorithm on an instance file and report the result.

use crate::algos::Report;
use crate::format::{float, floats, ids};

pub const CSV_HEADER: &str = "# swarm-assign solve v1";
const COLUMNS: [&str; 8] =
    ["algo", "objective_bottleneck", "objective_wta", "coverage", "rounds", "selection", "x", "fractional"];

fn opt_float(v: Option<f64>) -> String {
    v.map(float).unwrap_or_default()
}

fn fields(r: &Report) -> [String; 8] {
    [
        r.algo.to_string(),
        opt_float(r.bottleneck),
        float(r.wta),
        r.coverage.to_string(),
        r.rounds.as_ref().map(|l| l.rounds.to_string()).unwrap_or_default(),
        ids(&r.selection),
        floats(&r.x),
        r.fractional.as_ref().map(|(x, _)| floats(x)).unwrap_or_default(),
    ]
}

pub fn text(r: &Report) -> String {
    let mut out = String::new();
    out.push_str(&format!("algo: {}\n", r.algo));
    if let Some((x, w)) = &r.fractional {
        out.push_str(&format!("fractional: {}\n", floats(x)));
        out.push_str(&format!("fractional_objective: {}\n", float(*w)));
    }
    out.push_str(&format!("selection: {}\n", ids(&r.selection)));
    out.push_str(&format!("x: {}\n", floats(&r.x)));
    let bottleneck = r.bottleneck.map(float).unwrap_or_else(|| "undefined".to_string());
    out.push_str(&format!("objective_bottleneck: {bottleneck}\n"));
    out.push_str(&format!("objective_wta: {}\n", float(r.wta)));
    out.push_str(&format!("coverage: {}\n", r.coverage));
    match &r.rounds {
        Some(l) => out.push_str(&format!("rounds: {}\nmessages: {}\nbytes: {}\n", l.rounds, l.messages, l.bytes)),
        None => out.push_str("rounds: n/a\n"),
    }
    out
}

pub fn csv(r: &Report) -> String {
    let mut buf = format!("{CSV_HEADER}\n").into_bytes();
    {
        let mut w = ::csv::Writer::from_writer(&mut buf);
        w.write_record(COLUMNS).expect("in-memory write");
        w.write_record(fields(r)).expect("in-memory write");
        w.flush().expect("in-memory write");
    }
    String::from_utf8(buf).expect("utf-8 output")
}
