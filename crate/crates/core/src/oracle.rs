//! Exact baselines: exhaustive search over selections for the integer
//! objectives, the LP optimum of the relaxation, and the random baseline.

use std::collections::BTreeSet;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::{best_responsibility, fit_packing, objective_bottleneck, target_coverage, Assignment, TripartiteGraph};
use crate::greedy::tracking_quality;
use crate::lp::{self, LinearProgram, Relation};
use crate::rng::{self, stream};
use crate::{PrimitiveId, RobotId, TargetId, TOLERANCE};

/// Largest number of selections the exhaustive oracles will enumerate.
pub const SIZE_LIMIT: u128 = 1_000_000;

fn guard(g: &TripartiteGraph) -> Result<()> {
    let selections = g.selection_count();
    if selections > SIZE_LIMIT {
        return Err(Error::TooLarge { selections, limit: SIZE_LIMIT });
    }
    Ok(())
}

/// Visits every one-primitive-per-robot selection in lexicographic order of
/// local indices, robot 0 most significant. Keeps the first selection with
/// the strictly largest score.
fn enumerate_best(g: &TripartiteGraph, mut score: impl FnMut(&[f64]) -> f64) -> Result<(Vec<PrimitiveId>, f64)> {
    guard(g)?;
    let n = g.n_robots();
    let mut idx = vec![0usize; n];
    let mut x = vec![0.0; g.n_primitives()];
    for r in 0..n {
        x[g.primitives_of(r)[0]] = 1.0;
    }
    let current = |idx: &[usize]| -> Vec<PrimitiveId> { (0..n).map(|r| g.primitives_of(r)[idx[r]]).collect() };
    let mut best = (current(&idx), score(&x));
    loop {
        // Odometer increment from the least significant robot.
        let mut r = n;
        loop {
            if r == 0 {
                return Ok(best);
            }
            r -= 1;
            let ps = g.primitives_of(r);
            x[ps[idx[r]]] = 0.0;
            idx[r] = (idx[r] + 1) % ps.len();
            x[ps[idx[r]]] = 1.0;
            if idx[r] != 0 {
                break;
            }
        }
        let v = score(&x);
        if v > best.1 {
            best = (current(&idx), v);
        }
    }
}

/// Exact optimum of the max-min integer problem.
pub fn brute_force_bottleneck(g: &TripartiteGraph) -> Result<(Assignment, f64)> {
    if g.n_targets() == 0 {
        return Err(Error::Undefined("bottleneck objective over zero targets".into()));
    }
    let (sel, w) = enumerate_best(g, |x| objective_bottleneck(g, x).expect("targets present"))?;
    let mut a = Assignment::from_selection(g, &sel);
    a.y = best_responsibility(g, &a.x);
    Ok((a, w))
}

/// Exact optimum of the winner-takes-all problem. For a fixed selection the
/// best `y` credits each target to its best observer, so the value is the
/// tracking quality of the selection.
pub fn brute_force_wta(g: &TripartiteGraph) -> Result<(Vec<f64>, BTreeSet<(RobotId, TargetId)>, f64)> {
    let (sel, v) = enumerate_best(g, |x| tracking_quality(g, x))?;
    let a = Assignment::from_selection(g, &sel);
    let y = best_responsibility(g, &a.x);
    Ok((a.x, y, v))
}

/// Optimum of the LP relaxation, certified by a primal/dual pair.
pub fn lp_opt(g: &TripartiteGraph) -> Result<(Vec<f64>, f64)> {
    if g.n_targets() == 0 || g.edges().is_empty() {
        return Err(Error::Undefined("LP relaxation needs at least one target and one sensing edge".into()));
    }
    let n = g.n_primitives();
    let mut lp = LinearProgram::new(n + 1);
    lp.objective[n] = 1.0;
    for r in 0..g.n_robots() {
        let mut row = vec![0.0; n + 1];
        for &p in g.primitives_of(r) {
            row[p] = 1.0;
        }
        lp.push(row, Relation::Le, 1.0);
    }
    for t in 0..g.n_targets() {
        let mut row = vec![0.0; n + 1];
        for &(p, c) in g.target_edges(t) {
            row[p] = -c;
        }
        row[n] = 1.0;
        lp.push(row, Relation::Le, 0.0);
    }
    let sol = lp.solve()?;
    lp::certify(&lp, &sol, TOLERANCE)?;
    // The certificate allows 1e-9 slack; the returned point is made
    // exactly feasible so downstream packing checks need no tolerance.
    let mut x: Vec<f64> = sol.x[..n].iter().map(|&v| v.max(0.0)).collect();
    for r in 0..g.n_robots() {
        let ps = g.primitives_of(r);
        let mut vals: Vec<f64> = ps.iter().map(|&p| x[p]).collect();
        fit_packing(&mut vals);
        for (&p, v) in ps.iter().zip(vals) {
            x[p] = v;
        }
    }
    let w = target_coverage(g, &x).into_iter().fold(f64::INFINITY, f64::min);
    Ok((x, w))
}

/// Uniform independent primitive per robot.
pub fn random_baseline(g: &TripartiteGraph, seed: u64) -> Assignment {
    let mut rng = rng::stream_rng(seed, &[stream::BASELINE]);
    let selection: Vec<PrimitiveId> = (0..g.n_robots())
        .map(|r| {
            let ps = g.primitives_of(r);
            ps[rng.gen_range(0..ps.len())]
        })
        .collect();
    let mut a = Assignment::from_selection(g, &selection);
    a.y = best_responsibility(g, &a.x);
    a
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{edge, single_robot, two_robot_trace};
    use crate::graph::{coverage_count, fig3_like, objective_wta, random_instance};
    use proptest::prelude::*;

    #[test]
    fn bottleneck_single_robot() {
        let g = single_robot(vec![edge(0, 0, 1.0)], 1);
        let (a, w) = brute_force_bottleneck(&g).unwrap();
        assert_eq!(a.x, vec![1.0, 0.0]);
        assert_eq!(w, 1.0);
    }

    #[test]
    fn unobserved_target_forces_zero() {
        let g = TripartiteGraph::new(2, vec![0, 0, 1, 1], 3, vec![edge(0, 0, 1.0), edge(3, 1, 1.0)]).unwrap();
        let (a, w) = brute_force_bottleneck(&g).unwrap();
        assert_eq!(w, 0.0);
        // Every selection ties at zero, so the first one wins.
        assert_eq!(a.selection(&g), vec![Some(0), Some(2)]);
    }

    #[test]
    fn fig3_like_optimum_reevaluates() {
        let g = fig3_like();
        let (a, w) = brute_force_bottleneck(&g).unwrap();
        let sel = a.selection(&g);
        // Independent evaluation: scan the edge list for each target.
        let mut cover = vec![0.0; g.n_targets()];
        for e in g.edges() {
            if sel.contains(&Some(e.primitive)) {
                cover[e.target] += e.weight;
            }
        }
        let check = cover.iter().copied().fold(f64::INFINITY, f64::min);
        assert_eq!(w, check);
        assert_eq!(w, 1.0);
    }

    #[test]
    fn wta_cases() {
        let g = two_robot_trace();
        let (x, y, v) = brute_force_wta(&g).unwrap();
        assert_eq!(v, 3.0);
        assert_eq!(objective_wta(&g, &x, &y), 3.0);

        let g = TripartiteGraph::new(1, vec![0, 0, 0], 3, vec![edge(0, 0, 0.4), edge(1, 1, 0.3), edge(1, 2, 0.3), edge(2, 2, 0.1)])
            .unwrap();
        let (x, _, v) = brute_force_wta(&g).unwrap();
        assert_eq!(x, vec![0.0, 1.0, 0.0]);
        assert_eq!(v, 0.6);
    }

    #[test]
    fn size_guard() {
        let mut owners = Vec::new();
        for r in 0..21 {
            owners.extend([r, r]);
        }
        let g = TripartiteGraph::new(21, owners, 1, vec![edge(0, 0, 1.0)]).unwrap();
        assert!(matches!(brute_force_wta(&g), Err(Error::TooLarge { .. })));
        assert!(matches!(brute_force_bottleneck(&g), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn lp_forced_split() {
        let g = single_robot(vec![edge(0, 0, 1.0), edge(1, 1, 1.0)], 2);
        let (x, w) = lp_opt(&g).unwrap();
        assert!((w - 0.5).abs() < 1e-9);
        assert!((x[0] - 0.5).abs() < 1e-9 && (x[1] - 0.5).abs() < 1e-9);
    }

    #[test]
    fn lp_shared_target() {
        let g = single_robot(vec![edge(0, 0, 1.0), edge(1, 0, 1.0)], 1);
        let (_, w) = lp_opt(&g).unwrap();
        assert!((w - 1.0).abs() < 1e-9);
    }

    #[test]
    fn lp_rejects_degenerate() {
        assert!(lp_opt(&single_robot(vec![], 1)).is_err());
        assert!(lp_opt(&TripartiteGraph::new(1, vec![0], 0, vec![]).unwrap()).is_err());
    }

    #[test]
    fn baseline_cases() {
        let g = TripartiteGraph::new(2, vec![0, 1], 1, vec![edge(0, 0, 1.0)]).unwrap();
        assert_eq!(random_baseline(&g, 9).selection(&g), vec![Some(0), Some(1)]);
        let g = two_robot_trace();
        assert_eq!(random_baseline(&g, 42), random_baseline(&g, 42));
    }

    #[test]
    fn baseline_frequency_is_uniform() {
        let g = single_robot(vec![], 0);
        let hits = (0..10_000u64).filter(|&s| random_baseline(&g, s).x[0] == 1.0).count();
        let freq = hits as f64 / 10_000.0;
        assert!((freq - 0.5).abs() <= 0.02, "frequency {freq}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn dominance_chain(seed in any::<u64>(), n in 1usize..6, m in 1usize..8) {
            let g = random_instance(n, m, 1.5, seed).unwrap();
            let (a, w_star) = brute_force_bottleneck(&g).unwrap();
            let (_, w_lp) = lp_opt(&g).unwrap();
            prop_assert!(w_lp >= w_star - TOLERANCE);
            let (x_lp, _) = lp_opt(&g).unwrap();
            for r in 0..g.n_robots() {
                prop_assert!(g.primitives_of(r).iter().map(|&p| x_lp[p]).sum::<f64>() <= 1.0);
            }
            prop_assert_eq!(objective_bottleneck(&g, &a.x).unwrap(), w_star);

            let (x, y, v) = brute_force_wta(&g).unwrap();
            prop_assert_eq!(objective_wta(&g, &x, &y), v);
            // Unit weights: the optimum is the best coverage over selections.
            prop_assert_eq!(v, coverage_count(&g, &x) as f64);
            let r = random_baseline(&g, seed);
            prop_assert!(coverage_count(&g, &r.x) as f64 <= v);
        }
    }
}
