//! Sequential greedy for the winner-takes-all variant.
//!
//! Robots decide one after another in a fixed order. Each picks the
//! primitive maximising `w'(p) = sum_j max{w(t_j), c_{p,j}}`, where `w(t_j)`
//! is the best quality any earlier robot achieved on target `t_j`, then
//! raises `w` along the chosen primitive's edges. Each target is finally
//! credited to the robot whose selected primitive sees it best.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{best_responsibility, Assignment, TripartiteGraph};
use crate::rng::{self, stream};
use crate::{PrimitiveId, RobotId, TargetId};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityState {
    /// Current quality `w(t_j)` of every target.
    pub w_t: Vec<f64>,
    pub order: Vec<RobotId>,
}

/// Choice among one robot's primitives given current target qualities.
///
/// `w'(p)` differs between primitives only through the targets `p` sees,
/// so the comparison uses the gain `sum_{j in E(p)} max{w_j, c} - w_j`.
/// Ties go to the earliest candidate (lowest id when sorted).
pub fn greedy_choice<'a>(
    candidates: impl IntoIterator<Item = (PrimitiveId, &'a [(TargetId, f64)])>,
    w: impl Fn(TargetId) -> f64,
) -> Option<PrimitiveId> {
    let mut best: Option<(PrimitiveId, f64)> = None;
    for (p, edges) in candidates {
        let gain: f64 = edges.iter().map(|&(t, c)| w(t).max(c) - w(t)).sum();
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((p, gain));
        }
    }
    best.map(|(p, _)| p)
}

pub fn check_order(order: &[RobotId], n_robots: usize) -> Result<()> {
    let mut seen = vec![false; n_robots];
    for &r in order {
        if r >= n_robots || std::mem::replace(&mut seen[r], true) {
            return Err(Error::InvalidConfig(format!(
                "order {order:?} is not a permutation of 0..{n_robots}"
            )));
        }
    }
    if order.len() != n_robots {
        return Err(Error::InvalidConfig(format!(
            "order {order:?} is not a permutation of 0..{n_robots}"
        )));
    }
    Ok(())
}

pub fn ascending_order(n_robots: usize) -> Vec<RobotId> {
    (0..n_robots).collect()
}

pub fn random_order(n_robots: usize, seed: u64) -> Vec<RobotId> {
    let mut order = ascending_order(n_robots);
    order.shuffle(&mut rng::stream_rng(seed, &[stream::ORDERING]));
    order
}

/// Runs the greedy in the given order. Returns the assignment, the final
/// target qualities, and the number of rounds (one per robot).
pub fn greedy_assign(g: &TripartiteGraph, order: &[RobotId]) -> Result<(Assignment, QualityState, usize)> {
    check_order(order, g.n_robots())?;
    let mut w_t = vec![0.0; g.n_targets()];
    let mut selection = Vec::with_capacity(g.n_robots());
    for &r in order {
        let p = greedy_choice(g.primitives_of(r).iter().map(|&p| (p, g.primitive_edges(p))), |t| w_t[t])
            .expect("every robot has a primitive");
        for &(t, c) in g.primitive_edges(p) {
            w_t[t] = w_t[t].max(c);
        }
        selection.push(p);
    }
    let mut a = Assignment::from_selection(g, &selection);
    a.y = best_responsibility(g, &a.x);
    Ok((a, QualityState { w_t, order: order.to_vec() }, g.n_robots()))
}

/// `sum_j max{c_{p,j} | x_p = 1}`, zero for targets no selected primitive
/// sees.
pub fn tracking_quality(g: &TripartiteGraph, x: &[f64]) -> f64 {
    (0..g.n_targets())
        .map(|t| {
            g.target_edges(t)
                .iter()
                .filter(|&&(p, _)| x[p] == 1.0)
                .map(|&(_, c)| c)
                .fold(0.0, f64::max)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{edge, two_robot_trace};
    use crate::graph::{coverage_count, objective_wta, random_instance};
    use crate::oracle;
    use proptest::prelude::*;

    #[test]
    fn hand_traced_two_robot_instance() {
        let g = two_robot_trace();
        let (a, q, rounds) = greedy_assign(&g, &[0, 1]).unwrap();
        assert_eq!(a.selection(&g), vec![Some(0), Some(3)]);
        assert_eq!(coverage_count(&g, &a.x), 3);
        assert_eq!(a.y, [(0, 0), (0, 1), (1, 2)].into_iter().collect());
        assert_eq!(q.w_t, vec![1.0, 1.0, 1.0]);
        assert_eq!(rounds, 2);
        assert_eq!(tracking_quality(&g, &a.x), 3.0);
        assert_eq!(objective_wta(&g, &a.x, &a.y), 3.0);
        let (_, _, v) = oracle::brute_force_wta(&g).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn single_robot_matches_brute_force() {
        let g = TripartiteGraph::new(1, vec![0, 0, 0], 3, vec![edge(0, 0, 0.2), edge(1, 1, 0.5), edge(1, 2, 0.1), edge(2, 0, 0.55)])
            .unwrap();
        let (a, _, _) = greedy_assign(&g, &[0]).unwrap();
        let (_, _, v) = oracle::brute_force_wta(&g).unwrap();
        assert!((objective_wta(&g, &a.x, &a.y) - v).abs() < 1e-12);
        assert_eq!(a.selection(&g), vec![Some(1)]);
    }

    #[test]
    fn no_edges_gives_zero() {
        let g = TripartiteGraph::new(2, vec![0, 0, 1], 2, vec![]).unwrap();
        let (a, _, _) = greedy_assign(&g, &[1, 0]).unwrap();
        assert!(a.y.is_empty());
        assert_eq!(objective_wta(&g, &a.x, &a.y), 0.0);
        assert_eq!(a.selection(&g), vec![Some(0), Some(2)]);
    }

    #[test]
    fn rejects_non_permutations() {
        let g = two_robot_trace();
        assert!(greedy_assign(&g, &[0]).is_err());
        assert!(greedy_assign(&g, &[0, 0]).is_err());
        assert!(greedy_assign(&g, &[0, 2]).is_err());
        assert!(greedy_assign(&g, &[1, 0, 1]).is_err());
    }

    #[test]
    fn tracking_quality_cases() {
        let g = two_robot_trace();
        assert_eq!(tracking_quality(&g, &[0.0; 4]), 0.0);
        assert_eq!(tracking_quality(&g, &[0.0, 1.0, 1.0, 0.0]), 2.0);
    }

    #[test]
    fn random_orders_are_permutations() {
        for seed in 0..20 {
            let o = random_order(7, seed);
            check_order(&o, 7).unwrap();
            assert_eq!(o, random_order(7, seed));
        }
    }

    proptest! {
        #[test]
        fn feasible_and_identity_holds(seed in any::<u64>(), n in 1usize..9, m in 1usize..10, oseed in any::<u64>()) {
            let g = random_instance(n, m, 1.0 + (seed % 3) as f64 * 0.5, seed).unwrap();
            let order = random_order(n, oseed);
            let (a, q, rounds) = greedy_assign(&g, &order).unwrap();
            a.validate(&g).unwrap();
            prop_assert!(a.is_binary());
            prop_assert_eq!(rounds, n);
            prop_assert_eq!(tracking_quality(&g, &a.x), objective_wta(&g, &a.x, &a.y));
            prop_assert_eq!(q.w_t.iter().sum::<f64>(), tracking_quality(&g, &a.x));
        }
    }
}
