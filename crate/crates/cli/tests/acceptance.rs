//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use swarm_assign_core::graph::{degrees, fig3_like, objective_bottleneck, objective_wta, random_instance};
use swarm_assign_core::greedy::{ascending_order, greedy_assign, random_order, tracking_quality};
use swarm_assign_core::local::{approximation_bound, local_solve, round_solution};
use swarm_assign_core::netsim::protocols::{run_greedy, run_local};
use swarm_assign_core::oracle::{brute_force_bottleneck, brute_force_wta, lp_opt, random_baseline};
use swarm_assign_core::rng::{derive_seed, stream_rng};
use swarm_assign_core::{Adjacency, LocalConfig, RobotId, SensingEdge, TripartiteGraph, TOLERANCE};

const BIN: &str = env!("CARGO_BIN_EXE_swarm-assign");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(failures: Vec<String>, summary: String) -> Outcome {
    if failures.is_empty() {
        Outcome { pass: true, detail: summary }
    } else {
        let shown: Vec<_> = failures.iter().take(5).cloned().collect();
        Outcome { pass: false, detail: format!("{summary}; {} failures: {}", failures.len(), shown.join(" | ")) }
    }
}

fn with_limit(o: Outcome, elapsed: Duration, limit: Option<Duration>) -> Outcome {
    let detail = format!("{} [{:.1}s]", o.detail, elapsed.as_secs_f64());
    match limit {
        Some(l) if elapsed > l => Outcome { pass: false, detail: format!("{detail} exceeds {}s", l.as_secs()) },
        _ => Outcome { pass: o.pass, detail },
    }
}

fn none(g: &TripartiteGraph) -> Adjacency {
    Adjacency::new(g.n_robots())
}

/// Packing checks with exact floating-point comparisons.
fn packing_violation(g: &TripartiteGraph, x: &[f64], y: &BTreeSet<(RobotId, usize)>) -> Option<String> {
    if let Some(p) = x.iter().position(|&v| !(v >= 0.0)) {
        return Some(format!("x[{p}] = {}", x[p]));
    }
    for r in 0..g.n_robots() {
        let s: f64 = g.primitives_of(r).iter().map(|&p| x[p]).sum();
        if s > 1.0 {
            return Some(format!("robot {r} sum {s:e}"));
        }
    }
    let mut per_target = BTreeMap::new();
    for &(_, t) in y {
        *per_target.entry(t).or_insert(0) += 1;
    }
    per_target.into_iter().find(|&(_, c)| c > 1).map(|(t, c)| format!("target {t} has {c} responsible robots"))
}

fn binary_one_per_robot(g: &TripartiteGraph, x: &[f64]) -> bool {
    x.iter().all(|&v| v == 0.0 || v == 1.0)
        && (0..g.n_robots()).all(|r| g.primitives_of(r).iter().filter(|&&p| x[p] == 1.0).count() == 1)
}

fn feasibility() -> Outcome {
    let mut failures = Vec::new();
    let cfg = LocalConfig::new(2, 0.1).unwrap();
    let mut exhaustive = 0;
    for k in 0..1000u64 {
        let mut rng = stream_rng(k, &[0xfea5]);
        let n = rng.gen_range(1..=20);
        let m = rng.gen_range(1..=30);
        let d = rng.gen_range(1.0..=(2 * n).min(4) as f64);
        let g = random_instance(n, m, d, k).unwrap();
        let mut check = |name: &str, x: &[f64], y: &BTreeSet<(RobotId, usize)>, integral: bool| {
            if let Some(v) = packing_violation(&g, x, y) {
                failures.push(format!("instance {k} {name}: {v}"));
            }
            if integral && !binary_one_per_robot(&g, x) {
                failures.push(format!("instance {k} {name}: not one primitive per robot"));
            }
        };
        let (frac, _, _) = run_local(&g, &none(&g), &cfg).unwrap();
        check("local fractional", &frac.x, &BTreeSet::new(), false);
        let a = round_solution(&g, &frac);
        check("local rounded", &a.x, &a.y, true);
        let (a, _) = run_greedy(&g, &none(&g), &ascending_order(n)).unwrap();
        check("greedy", &a.x, &a.y, true);
        let (x, _) = lp_opt(&g).unwrap();
        check("lp", &x, &BTreeSet::new(), false);
        let a = random_baseline(&g, k);
        check("random", &a.x, &a.y, true);
        if g.selection_count() <= 4096 {
            exhaustive += 1;
            let (a, _) = brute_force_bottleneck(&g).unwrap();
            check("bf-bottleneck", &a.x, &a.y, true);
            let (x, y, _) = brute_force_wta(&g).unwrap();
            check("bf-wta", &x, &y, true);
        }
    }
    outcome(failures, format!("1000 instances, exhaustive oracles on {exhaustive} of them"))
}

/// Up to 8 robots with 1 to 3 primitives each and weights in {0.1, ..., 1}.
fn weighted_instance(seed: u64) -> TripartiteGraph {
    let mut rng = stream_rng(seed, &[0x0e19]);
    let n = rng.gen_range(1..=8);
    let m = rng.gen_range(1..=8);
    let mut owners = Vec::new();
    for r in 0..n {
        for _ in 0..rng.gen_range(1..=3) {
            owners.push(r);
        }
    }
    let mut edges = Vec::new();
    for p in 0..owners.len() {
        for t in 0..m {
            if rng.gen_bool(0.35) {
                edges.push(SensingEdge { primitive: p, target: t, weight: rng.gen_range(1..=10) as f64 / 10.0 });
            }
        }
    }
    if edges.is_empty() {
        edges.push(SensingEdge { primitive: 0, target: 0, weight: 1.0 });
    }
    TripartiteGraph::new(n, owners, m, edges).unwrap()
}

fn weighted_corpus() -> Vec<TripartiteGraph> {
    (0..200).map(weighted_instance).collect()
}

/// Unit-weight instances with both degree bounds at least 2, in seed order.
fn ratio_corpus() -> Vec<TripartiteGraph> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < 200 {
        seed += 1;
        let n = 2 + (seed % 7) as usize;
        let m = 2 + (seed % 11) as usize;
        let d = [1.5, 2.0, 3.0][(seed % 3) as usize];
        let g = random_instance(n, m, d, seed).unwrap();
        let ds = degrees(&g);
        if ds.delta_r >= 2 && ds.delta_t >= 2 {
            out.push(g);
        }
    }
    out
}

fn greedy_half() -> Outcome {
    let mut failures = Vec::new();
    let mut runs = 0;
    for (k, g) in weighted_corpus().iter().enumerate() {
        let (_, _, v) = brute_force_wta(g).unwrap();
        for o in 0..10u64 {
            runs += 1;
            let order = random_order(g.n_robots(), derive_seed(k as u64, &[o]));
            let (a, _, _) = greedy_assign(g, &order).unwrap();
            let got = objective_wta(g, &a.x, &a.y);
            if got < v / 2.0 - TOLERANCE {
                failures.push(format!("instance {k} order {order:?}: {got} < {v}/2"));
            }
        }
    }
    let max_dr = weighted_corpus().iter().map(|g| degrees(g).delta_r).max().unwrap();
    outcome(failures, format!("{runs} greedy runs, max primitives per robot {max_dr}"))
}

fn quality_identity() -> Outcome {
    let mut failures = Vec::new();
    for (k, g) in weighted_corpus().iter().enumerate() {
        for o in 0..10u64 {
            let order = random_order(g.n_robots(), derive_seed(k as u64, &[o]));
            let (a, _, _) = greedy_assign(g, &order).unwrap();
            let (q, v) = (tracking_quality(g, &a.x), objective_wta(g, &a.x, &a.y));
            if (q - v).abs() > TOLERANCE {
                failures.push(format!("instance {k}: tracking quality {q} vs objective {v}"));
            }
        }
    }
    outcome(failures, "2000 greedy runs".into())
}

fn local_ratio() -> Outcome {
    let mut failures = Vec::new();
    let mut worst = f64::INFINITY;
    for (k, g) in ratio_corpus().iter().enumerate() {
        let ds = degrees(g);
        let (_, w_lp) = lp_opt(g).unwrap();
        for h in 1..=3 {
            let bound = approximation_bound(ds.delta_r, ds.delta_t, h, 0.1).unwrap();
            let w = local_solve(g, &LocalConfig::new(h, 0.1).unwrap()).unwrap().w;
            if w_lp > 0.0 {
                worst = worst.min(w * bound / w_lp);
            }
            if w < w_lp / bound - TOLERANCE {
                failures.push(format!("instance {k} h={h}: w {w} < {w_lp}/{bound}"));
            }
        }
    }
    outcome(failures, format!("200 instances x h in 1..=3, smallest w*bound/w_lp {worst:.3}"))
}

fn bits(xs: impl Iterator<Item = f64>) -> Vec<u64> {
    xs.map(f64::to_bits).collect()
}

fn locality() -> Outcome {
    let mut failures = Vec::new();
    let mut trials = 0u64;
    let mut seed = 0u64;
    let mut far_total = 0;
    while trials < 100 {
        seed += 1;
        let mut rng = stream_rng(seed, &[0x5e6e]);
        let h = 1 + (trials % 3) as usize;
        let n = rng.gen_range(12..=20);
        let m = rng.gen_range(15..=40);
        let g = random_instance(n, m, 1.5, seed).unwrap();
        let adj = g.robot_adjacency();
        let probe = rng.gen_range(0..n);
        let dist = adj.distances_within(probe, n);
        let far: Vec<RobotId> = (0..n).filter(|r| dist.get(r).is_none_or(|&d| d > h + 1)).collect();
        if far.is_empty() {
            continue;
        }
        trials += 1;
        far_total += far.len();
        // Targets no robot within h hops observes; far robots may be wired
        // to these (and to fresh targets) without entering the probe's ball.
        let seen_near: BTreeSet<usize> = (0..g.n_primitives())
            .filter(|&p| dist.get(&g.robot_of(p)).is_some_and(|&d| d <= h))
            .flat_map(|p| g.primitive_edges(p).iter().map(|&(t, _)| t))
            .collect();
        let m2 = m + 3;
        let allowed: Vec<usize> = (0..m2).filter(|t| !seen_near.contains(t)).collect();
        let far_set: BTreeSet<RobotId> = far.iter().copied().collect();
        let mut owners: Vec<RobotId> = (0..g.n_primitives()).map(|p| g.robot_of(p)).collect();
        let mut edges: Vec<SensingEdge> =
            g.edges().iter().filter(|e| !far_set.contains(&g.robot_of(e.primitive))).copied().collect();
        owners.extend([n, n]);
        for p in 0..owners.len() {
            if owners[p] == n || far_set.contains(&owners[p]) {
                for &t in &allowed {
                    if rng.gen_bool(0.2) {
                        edges.push(SensingEdge { primitive: p, target: t, weight: rng.gen_range(1..=10) as f64 / 10.0 });
                    }
                }
            }
        }
        let g2 = TripartiteGraph::new(n + 1, owners, m2, edges).unwrap();
        let cfg = LocalConfig::new(h, 0.1).unwrap();
        let before = local_solve(&g, &cfg).unwrap();
        let after = local_solve(&g2, &cfg).unwrap();
        let probe_ps = g.primitives_of(probe);
        if bits(probe_ps.iter().map(|&p| before.x[p])) != bits(probe_ps.iter().map(|&p| after.x[p])) {
            failures.push(format!("seed {seed} probe {probe} h={h}"));
        }
    }
    outcome(failures, format!("100 surgeries, {far_total} far robots rewired in total"))
}

fn component_independence() -> Outcome {
    let mut failures = Vec::new();
    let cfg = LocalConfig::new(2, 0.1).unwrap();
    for k in 0..50u64 {
        let mut rng = stream_rng(k, &[0xc0c0]);
        let parts: Vec<TripartiteGraph> = (0..rng.gen_range(2..=4))
            .map(|i| random_instance(rng.gen_range(1..=6), rng.gen_range(1..=8), 1.5, derive_seed(k, &[i])).unwrap())
            .collect();
        // Disjoint union, robots of each part contiguous.
        let (mut owners, mut edges, mut nr, mut np, mut nt) = (Vec::new(), Vec::new(), 0, 0, 0);
        for part in &parts {
            owners.extend((0..part.n_primitives()).map(|p| part.robot_of(p) + nr));
            edges.extend(part.edges().iter().map(|e| SensingEdge { primitive: e.primitive + np, target: e.target + nt, weight: e.weight }));
            (nr, np, nt) = (nr + part.n_robots(), np + part.n_primitives(), nt + part.n_targets());
        }
        let g = TripartiteGraph::new(nr, owners, nt, edges).unwrap();
        let order = random_order(nr, k);
        let whole_local = local_solve(&g, &cfg).unwrap().x;
        let (whole_proto, _, _) = run_local(&g, &none(&g), &cfg).unwrap();
        let (whole_greedy, _, _) = greedy_assign(&g, &order).unwrap();
        let (whole_greedy_proto, _) = run_greedy(&g, &none(&g), &order).unwrap();
        let comps = g.robot_adjacency().components();
        if comps.len() < parts.len() {
            failures.push(format!("instance {k}: only {} components", comps.len()));
        }
        let mut local_x = vec![f64::NAN; g.n_primitives()];
        let mut greedy_x = vec![f64::NAN; g.n_primitives()];
        for comp in &comps {
            let (sub, map) = g.restrict_to_robots(comp);
            let sub_order: Vec<RobotId> =
                order.iter().filter_map(|r| map.robots.binary_search(r).ok()).collect();
            let xs = local_solve(&sub, &cfg).unwrap().x;
            let (a, _, _) = greedy_assign(&sub, &sub_order).unwrap();
            for (i, &p) in map.primitives.iter().enumerate() {
                local_x[p] = xs[i];
                greedy_x[p] = a.x[i];
            }
        }
        let b = |xs: &[f64]| bits(xs.iter().copied());
        if b(&whole_local) != b(&local_x) || b(&whole_proto.x) != b(&local_x) {
            failures.push(format!("instance {k}: local differs"));
        }
        if b(&whole_greedy.x) != b(&greedy_x) || b(&whole_greedy_proto.x) != b(&greedy_x) {
            failures.push(format!("instance {k}: greedy differs"));
        }
    }
    outcome(failures, "50 disconnected instances, local and greedy, direct and as protocols".into())
}

fn round_accounting() -> Outcome {
    let mut failures = Vec::new();
    for k in 0..200u64 {
        let n = 1 + (k % 20) as usize;
        let g = random_instance(n, 1 + (k % 13) as usize, 1.0, k).unwrap();
        let (_, log) = run_greedy(&g, &none(&g), &random_order(n, k)).unwrap();
        if log.rounds != n {
            failures.push(format!("instance {k}: greedy {} rounds for {n} robots", log.rounds));
        }
        let h = (k % 4) as usize;
        let (frac, _, log) = run_local(&g, &none(&g), &LocalConfig::new(h, 0.1).unwrap()).unwrap();
        if log.rounds != h + 2 || frac.rounds_used != h + 2 {
            failures.push(format!("instance {k}: local {} rounds for h={h}", log.rounds));
        }
    }
    outcome(failures, "200 instances, h in 0..=3".into())
}

fn fig3_properties() -> Outcome {
    let g = fig3_like();
    let mut failures = Vec::new();
    let mut dominant: Vec<Option<(usize, f64)>> = vec![None; 3];
    let mut shown = Vec::new();
    for h in [2, 10, 30] {
        let x = local_solve(&g, &LocalConfig::new(h, 0.1).unwrap()).unwrap().x;
        shown.push(format!("h={h}: {:?}", x));
        for r in 0..3 {
            let s: f64 = g.primitives_of(r).iter().map(|&p| x[p]).sum();
            if (s - 1.0).abs() > TOLERANCE {
                failures.push(format!("h={h} robot {r} sums to {s}"));
            }
        }
        if (x[0] - 0.5).abs() > TOLERANCE || (x[1] - 0.5).abs() > TOLERANCE {
            failures.push(format!("h={h}: symmetric robot gets ({}, {})", x[0], x[1]));
        }
        for r in 1..3 {
            let ps = g.primitives_of(r);
            let p = if x[ps[1]] > x[ps[0]] { ps[1] } else { ps[0] };
            if let Some((q, v)) = dominant[r] {
                if q != p || x[p] < v {
                    failures.push(format!("h={h} robot {r}: dominant {p} at {} after {q} at {v}", x[p]));
                }
            }
            dominant[r] = Some((p, x[p]));
        }
    }
    outcome(failures, shown.join("; "))
}

fn run_bin(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn fig5_direction(dir: &Path) -> Outcome {
    let csv_path = dir.join("grid.csv");
    let out = run_bin(&[
        "bench", "--robots", "5,10,20", "--targets", "20,50", "--degrees", "2,4", "--trials", "100",
        "--algos", "local,greedy,random", "--h", "2", "--seed", "0", "--csv", csv_path.to_str().unwrap(),
    ]);
    if !out.status.success() {
        return outcome(vec![String::from_utf8_lossy(&out.stderr).into_owned()], "bench failed".into());
    }
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let mut means: BTreeMap<(usize, String), f64> = BTreeMap::new();
    for rec in reader.records() {
        let rec = rec.unwrap();
        if &rec[col("trial")] == "summary" {
            means.insert((rec[col("setting_id")].parse().unwrap(), rec[col("algo")].to_string()), rec[col("coverage")].parse().unwrap());
        }
    }
    let mut failures = Vec::new();
    let mut cells = Vec::new();
    for s in 0..12 {
        let get = |a: &str| means.get(&(s, a.to_string())).copied().unwrap_or(f64::NAN);
        let (l, g, r) = (get("local"), get("greedy"), get("random"));
        cells.push(format!("{l}/{g}/{r}"));
        if !(l > r) {
            failures.push(format!("setting {s}: local {l} <= random {r}"));
        }
        if !(g >= r) {
            failures.push(format!("setting {s}: greedy {g} < random {r}"));
        }
    }
    outcome(failures, format!("mean coverage local/greedy/random per setting: {}", cells.join(" ")))
}

fn oracle_dominance() -> Outcome {
    let mut failures = Vec::new();
    let corpus: Vec<TripartiteGraph> = weighted_corpus().into_iter().chain(ratio_corpus()).collect();
    for (k, g) in corpus.iter().enumerate() {
        let (_, w_lp) = lp_opt(g).unwrap();
        let (_, w_star) = brute_force_bottleneck(g).unwrap();
        if w_lp < w_star - TOLERANCE {
            failures.push(format!("instance {k}: lp {w_lp} < bf {w_star}"));
        }
        for h in 1..=3 {
            let frac = local_solve(g, &LocalConfig::new(h, 0.1).unwrap()).unwrap();
            let w = objective_bottleneck(g, &round_solution(g, &frac).x).unwrap();
            if w_star < w - TOLERANCE {
                failures.push(format!("instance {k} h={h}: bf {w_star} < local rounded {w}"));
            }
        }
        let (_, _, v) = brute_force_wta(g).unwrap();
        let (a, _, _) = greedy_assign(g, &ascending_order(g.n_robots())).unwrap();
        let got = objective_wta(g, &a.x, &a.y);
        if v < got - TOLERANCE {
            failures.push(format!("instance {k}: bf-wta {v} < greedy {got}"));
        }
    }
    outcome(failures, format!("{} brute-forceable instances", corpus.len()))
}

fn reproducibility(dir: &Path) -> Outcome {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/sim_default.json");
    let config = config.to_str().unwrap();
    let mut failures = Vec::new();
    let mut checked = 0;
    let mut twice = |name: &str, make: &dyn Fn(&Path) -> Vec<String>, files: &[&str]| {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let d = dir.join(format!("{name}-{run}"));
            std::fs::create_dir_all(&d).unwrap();
            let args = make(&d);
            let out = run_bin(&args.iter().map(String::as_str).collect::<Vec<_>>());
            let mut bytes = vec![out.stdout, vec![out.status.code().unwrap_or(-1) as u8]];
            for f in files {
                bytes.push(std::fs::read(d.join(f)).unwrap_or_default());
            }
            outputs.push(bytes);
        }
        checked += 1;
        if outputs[0] != outputs[1] {
            failures.push(format!("{name} differs between runs"));
        }
    };
    let p = |d: &Path, f: &str| d.join(f).to_str().unwrap().to_string();
    let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
    twice("gen", &|d| [s(&["gen", "--robots", "6", "--targets", "9", "--target-degree", "2", "--seed", "4", "--out"]), vec![p(d, "g.json")]].concat(), &["g.json"]);
    let instance = dir.join("gen-0/g.json");
    let instance = instance.to_str().unwrap().to_string();
    for algo in ["local", "greedy", "bf-bottleneck", "bf-wta", "lp", "random"] {
        for format in ["text", "csv"] {
            let inst = instance.clone();
            twice(&format!("solve-{algo}-{format}"), &move |_| s(&["solve", "--algo", algo, "--seed", "3", "--format", format, &inst]), &[]);
        }
    }
    twice(
        "bench",
        &|d| [s(&["bench", "--robots", "3,12", "--targets", "5", "--degrees", "2", "--trials", "3", "--algos", "local,greedy,bf-bottleneck,bf-wta,lp,random", "--seed", "9", "--csv"]), vec![p(d, "b.csv")]].concat(),
        &["b.csv"],
    );
    twice("simulate", &|d| [s(&["simulate", "--config", config, "--csv"]), vec![p(d, "m.csv"), "--trace".into(), p(d, "t.csv")]].concat(), &["m.csv", "t.csv"]);
    outcome(failures, format!("{checked} invocations run twice"))
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Option<u64>, Box<dyn Fn() -> Outcome>)> = vec![
        ("feasibility of every algorithm's output", Some(30), Box::new(feasibility)),
        ("greedy reaches half the exhaustive optimum", Some(120), Box::new(greedy_half)),
        ("greedy tracking quality equals its objective", None, Box::new(quality_identity)),
        ("local fractional value within the approximation bound", Some(120), Box::new(local_ratio)),
        ("locality under far surgery", None, Box::new(locality)),
        ("component independence", None, Box::new(component_independence)),
        ("round accounting", None, Box::new(round_accounting)),
        ("fig3-like fractional properties", None, Box::new(fig3_properties)),
        ("reduced-grid coverage direction", Some(300), Box::new(|| fig5_direction(dir.path()))),
        ("oracle dominance", None, Box::new(oracle_dominance)),
        ("CLI reproducibility", None, Box::new(|| reproducibility(dir.path()))),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = with_limit(f(), start.elapsed(), limit.map(Duration::from_secs));
        if !o.pass {
            failed += 1;
        }
        println!("criterion {:>2} {} {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all {} criteria passed", criteria.len());
}
