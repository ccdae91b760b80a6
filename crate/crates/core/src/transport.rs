//! Exact solver for the per-slot routing problem
//!
//! ```text
//! min Σ_i c_i·(Σ_j x_ij)   s.t.  Σ_i x_ij = λ_j,  Σ_j x_ij ≤ M_i,  x_ij = 0 where masked
//! ```
//!
//! Costs live on the data-center side only, so in the residual network a
//! path `j0 → i1 → j1 → i2 → … → ik` costs exactly `c_ik`: every
//! intermediate DC is entered and left once. Successive shortest paths
//! therefore reduce to "augment towards the cheapest reachable DC with spare
//! capacity", found by breadth-first search.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, check_nonneg, check_positive, Error, Result};
use crate::model::Decision;

#[derive(Debug, Clone, PartialEq)]
pub struct TransportInstance {
    pub unit_cost: Vec<f64>,
    pub capacity: Vec<f64>,
    pub demand: Vec<f64>,
    /// Row-major `N×J`.
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility {
    pub feasible: bool,
    /// Gateways whose demand cannot be met by the DCs they can reach
    /// (empty when feasible).
    pub witness: Vec<usize>,
    pub max_flow: f64,
}

impl TransportInstance {
    fn n(&self) -> usize {
        self.capacity.len()
    }

    fn j(&self) -> usize {
        self.demand.len()
    }

    fn validate(&self) -> Result<()> {
        let (n, j) = (self.n(), self.j());
        check_len("unit_cost", n, self.unit_cost.len())?;
        check_len("mask", n * j, self.mask.len())?;
        check_positive("capacity", &self.capacity)?;
        check_nonneg("demand", &self.demand)?;
        for (index, &value) in self.unit_cost.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::InvalidValue {
                    field: "unit_cost",
                    index,
                    value,
                });
            }
        }
        Ok(())
    }
}

struct Flow {
    x: Decision,
    unmet: Vec<f64>,
    /// Gateways reachable in the residual graph when augmentation stopped.
    stuck: Vec<usize>,
}

/// Successive shortest paths. `rank` lists DCs cheapest first.
fn augment_all(inst: &TransportInstance, rank: &[usize]) -> Flow {
    let (n, jn) = (inst.n(), inst.j());
    let scale = inst
        .demand
        .iter()
        .chain(inst.capacity.iter())
        .fold(1.0f64, |a, &b| a.max(b));
    let eps = 1e-12 * scale;

    let mut x = Decision::zeros(n, jn);
    let mut load = vec![0.0; n];
    let mut unmet: Vec<f64> = inst.demand.clone();
    for u in unmet.iter_mut() {
        if *u <= eps {
            *u = 0.0;
        }
    }

    // BFS state: parent of a DC is the gateway it was reached from; parent of
    // a gateway is the DC whose backward edge reached it (None for roots).
    let mut dc_parent = vec![usize::MAX; n];
    let mut gw_parent = vec![usize::MAX; jn];
    let mut gw_seen = vec![false; jn];
    let mut queue = VecDeque::new();

    loop {
        if unmet.iter().all(|&u| u == 0.0) {
            return Flow { x, unmet, stuck: Vec::new() };
        }
        dc_parent.iter_mut().for_each(|p| *p = usize::MAX);
        gw_parent.iter_mut().for_each(|p| *p = usize::MAX);
        gw_seen.iter_mut().for_each(|s| *s = false);
        queue.clear();
        for (j, &u) in unmet.iter().enumerate() {
            if u > 0.0 {
                gw_seen[j] = true;
                queue.push_back(j);
            }
        }
        while let Some(j) = queue.pop_front() {
            for i in 0..n {
                if !inst.mask[i * jn + j] || dc_parent[i] != usize::MAX {
                    continue;
                }
                dc_parent[i] = j;
                for j2 in 0..jn {
                    if !gw_seen[j2] && x.get(i, j2) > 0.0 {
                        gw_seen[j2] = true;
                        gw_parent[j2] = i;
                        queue.push_back(j2);
                    }
                }
            }
        }

        let target = rank
            .iter()
            .copied()
            .find(|&i| dc_parent[i] != usize::MAX && inst.capacity[i] - load[i] > eps);
        let Some(target) = target else {
            let stuck = (0..jn).filter(|&j| gw_seen[j]).collect();
            return Flow { x, unmet, stuck };
        };

        // Walk back to the root to find the bottleneck.
        let spare = inst.capacity[target] - load[target];
        let mut delta = spare;
        let mut i = target;
        let root = loop {
            let j = dc_parent[i];
            match gw_parent[j] {
                usize::MAX => break j,
                prev => {
                    delta = delta.min(x.get(prev, j));
                    i = prev;
                }
            }
        };
        delta = delta.min(unmet[root]);

        let mut i = target;
        loop {
            let j = dc_parent[i];
            let v = x.get(i, j) + delta;
            x.set(i, j, v);
            match gw_parent[j] {
                usize::MAX => break,
                prev => {
                    let back = x.get(prev, j) - delta;
                    x.set(prev, j, if back <= eps { 0.0 } else { back });
                    i = prev;
                }
            }
        }
        load[target] += delta;
        if inst.capacity[target] - load[target] <= eps {
            load[target] = inst.capacity[target];
        }
        unmet[root] -= delta;
        if unmet[root] <= eps {
            unmet[root] = 0.0;
        }
    }
}

fn cost_rank(inst: &TransportInstance) -> Vec<usize> {
    let mut rank: Vec<usize> = (0..inst.n()).collect();
    rank.sort_by(|&a, &b| inst.unit_cost[a].total_cmp(&inst.unit_cost[b]).then(a.cmp(&b)));
    rank
}

/// Minimum-cost routing. Ties between equally priced DCs go to the lowest
/// index.
pub fn solve(inst: &TransportInstance) -> Result<Decision> {
    inst.validate()?;
    let flow = augment_all(inst, &cost_rank(inst));
    if flow.stuck.is_empty() {
        Ok(flow.x)
    } else {
        Err(Error::Infeasible {
            slot: None,
            gateways: flow.stuck,
        })
    }
}

pub fn check_feasible(inst: &TransportInstance) -> Result<Feasibility> {
    inst.validate()?;
    let rank: Vec<usize> = (0..inst.n()).collect();
    let flow = augment_all(inst, &rank);
    let shipped: f64 = inst.demand.iter().sum::<f64>() - flow.unmet.iter().sum::<f64>();
    Ok(Feasibility {
        feasible: flow.stuck.is_empty(),
        witness: flow.stuck,
        max_flow: shipped,
    })
}

pub fn objective(inst: &TransportInstance, x: &Decision) -> f64 {
    (0..inst.n()).map(|i| inst.unit_cost[i] * x.dc_load(i)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn inst(cost: &[f64], cap: &[f64], dem: &[f64], mask: Option<&[bool]>) -> TransportInstance {
        TransportInstance {
            unit_cost: cost.to_vec(),
            capacity: cap.to_vec(),
            demand: dem.to_vec(),
            mask: mask.map(|m| m.to_vec()).unwrap_or_else(|| vec![true; cap.len() * dem.len()]),
        }
    }

    /// Optimal value via the polymatroid greedy: the set of feasible per-DC
    /// load vectors is `{ℓ ≥ 0 : Σ ℓ = Σ λ, ℓ(S) ≤ F(S)}` with
    /// `F(S) = min_G [λ(J∖G) + M(N(G) ∩ S)]`, and the minimum of a linear
    /// cost is found greedily in ascending cost order.
    fn cut_oracle(inst: &TransportInstance) -> Option<f64> {
        let (n, jn) = (inst.capacity.len(), inst.demand.len());
        let total: f64 = inst.demand.iter().sum();
        let f = |s: &[bool]| -> f64 {
            let mut best = f64::INFINITY;
            for g in 0u32..(1 << jn) {
                let mut v = 0.0;
                for j in 0..jn {
                    if g >> j & 1 == 0 {
                        v += inst.demand[j];
                    }
                }
                for i in 0..n {
                    let reach = (0..jn).any(|j| g >> j & 1 == 1 && inst.mask[i * jn + j]);
                    if reach && s[i] {
                        v += inst.capacity[i];
                    }
                }
                best = best.min(v);
            }
            best
        };
        let all = vec![true; n];
        if f(&all) < total * (1.0 - 1e-12) - 1e-12 {
            return None;
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| inst.unit_cost[a].total_cmp(&inst.unit_cost[b]));
        let mut s = vec![false; n];
        let (mut prev, mut obj) = (0.0, 0.0);
        for &i in &order {
            s[i] = true;
            let cur = f(&s);
            obj += inst.unit_cost[i] * (cur - prev);
            prev = cur;
        }
        Some(obj)
    }

    #[test]
    fn single_route() {
        let p = inst(&[7.0], &[1.0], &[0.5], None);
        let x = solve(&p).unwrap();
        assert_eq!(x.x, vec![0.5]);
        assert_eq!(objective(&p, &x), 3.5);
    }

    #[test]
    fn cheap_dc_fills_first() {
        let p = inst(&[1.0, 2.0], &[0.3, 1.0], &[0.5], None);
        let x = solve(&p).unwrap();
        assert!((x.get(0, 0) - 0.3).abs() < 1e-15 && (x.get(1, 0) - 0.2).abs() < 1e-15);
        assert!((objective(&p, &x) - 0.7).abs() < 1e-12);
        // exhaustive split check
        let best = (0..=300)
            .map(|k| {
                let a = k as f64 * 1e-3;
                a + 2.0 * (0.5 - a)
            })
            .fold(f64::INFINITY, f64::min);
        assert!((objective(&p, &x) - best).abs() < 1e-12);
    }

    #[test]
    fn masked_gateway_goes_to_reachable_dc() {
        let mask = [true, false, true, true];
        let p = inst(&[1.0, 5.0], &[1.0, 1.0], &[0.8, 0.4], Some(&mask));
        let x = solve(&p).unwrap();
        assert!((x.get(0, 0) - 0.8).abs() < 1e-12);
        assert!((x.get(1, 1) - 0.4).abs() < 1e-12);
        assert_eq!(x.get(0, 1), 0.0);
        assert!((objective(&p, &x) - 2.8).abs() < 1e-12);
        // grid oracle at 1e-3: x00 + x10 = 0.8, x11 = 0.4, x00 ≤ 1
        let best = (0..=800)
            .map(|k| {
                let a = k as f64 * 1e-3;
                a + 5.0 * (0.8 - a) + 5.0 * 0.4
            })
            .fold(f64::INFINITY, f64::min);
        assert!((objective(&p, &x) - best).abs() < 1e-9);
    }

    #[test]
    fn rerouting_through_backward_edges() {
        // Gateway 0 reaches both, gateway 1 only the cheap DC. Optimum moves
        // gateway 0 off the cheap DC to make room.
        let mask = [true, true, true, false];
        let p = inst(&[1.0, 3.0], &[1.0, 2.0], &[1.0, 0.6], Some(&mask));
        let x = solve(&p).unwrap();
        assert!((x.get(0, 1) - 0.6).abs() < 1e-12);
        assert!((x.get(0, 0) - 0.4).abs() < 1e-12);
        assert!((x.get(1, 0) - 0.6).abs() < 1e-12);
        assert!((objective(&p, &x) - cut_oracle(&p).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_lowest_index() {
        let p = inst(&[2.0, 2.0, 2.0], &[1.0, 1.0, 1.0], &[1.5], None);
        let x = solve(&p).unwrap();
        assert_eq!(x.dc_loads(), vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn zero_demand_gateway_untouched() {
        let p = inst(&[1.0], &[1.0], &[0.0, 0.5], None);
        let x = solve(&p).unwrap();
        assert_eq!(x.x, vec![0.0, 0.5]);
    }

    #[test]
    fn feasibility_examples() {
        let f = check_feasible(&inst(&[1.0], &[1.0], &[0.0, 0.0], None)).unwrap();
        assert!(f.feasible && f.witness.is_empty());

        let mask = [true, false];
        let f = check_feasible(&inst(&[1.0], &[1.0], &[0.2, 0.1], Some(&mask))).unwrap();
        assert!(!f.feasible);
        assert_eq!(f.witness, vec![1]);

        let p = inst(&[1.0, 1.0], &[0.5, 0.5], &[1.0, 1.0], None);
        let f = check_feasible(&p).unwrap();
        assert!(!f.feasible && (f.max_flow - 1.0).abs() < 1e-12);
        assert!(matches!(solve(&p), Err(Error::Infeasible { slot: None, .. })));
    }

    #[test]
    fn witness_is_a_hall_violator() {
        // Gateways 0 and 1 share DC 0 (cap 1); gateway 2 has DC 1 to itself.
        let mask = [true, true, false, false, false, true];
        let p = inst(&[1.0, 1.0], &[1.0, 5.0], &[0.7, 0.6, 1.0], Some(&mask));
        let f = check_feasible(&p).unwrap();
        assert!(!f.feasible);
        assert_eq!(f.witness, vec![0, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(solve(&inst(&[1.0], &[0.0], &[0.1], None)).is_err());
        assert!(solve(&inst(&[1.0], &[1.0], &[-0.1], None)).is_err());
        assert!(solve(&inst(&[f64::NAN], &[1.0], &[0.1], None)).is_err());
    }

    fn random_instance() -> impl Strategy<Value = TransportInstance> {
        (1usize..=5, 1usize..=5).prop_flat_map(|(n, j)| {
            (
                proptest::collection::vec(0u32..20, n),
                proptest::collection::vec(1u32..40, n),
                proptest::collection::vec(0u32..30, j),
                proptest::collection::vec(0u32..4, n * j),
            )
                .prop_map(move |(c, m, d, mask)| {
                    let mut mask: Vec<bool> = mask.into_iter().map(|v| v != 0).collect();
                    for jj in 0..j {
                        if !(0..n).any(|i| mask[i * j + jj]) {
                            mask[jj % n * j + jj] = true;
                        }
                    }
                    TransportInstance {
                        unit_cost: c.into_iter().map(|v| v as f64 / 4.0).collect(),
                        capacity: m.into_iter().map(|v| v as f64 / 8.0).collect(),
                        demand: d.into_iter().map(|v| v as f64 / 10.0).collect(),
                        mask,
                    }
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(400))]

        #[test]
        fn matches_cut_oracle(p in random_instance()) {
            match (solve(&p), cut_oracle(&p)) {
                (Ok(x), Some(opt)) => {
                    let obj = objective(&p, &x);
                    prop_assert!((obj - opt).abs() <= 1e-9 * opt.abs().max(1.0), "{obj} vs {opt}");
                }
                (Err(Error::Infeasible { gateways, .. }), None) => {
                    // Hall violation: witness demand exceeds reachable capacity.
                    let jn = p.demand.len();
                    let dem: f64 = gateways.iter().map(|&j| p.demand[j]).sum();
                    let cap: f64 = (0..p.capacity.len())
                        .filter(|&i| gateways.iter().any(|&j| p.mask[i * jn + j]))
                        .map(|i| p.capacity[i])
                        .sum();
                    prop_assert!(dem > cap);
                }
                (a, b) => prop_assert!(false, "solver {:?} vs oracle {:?}", a.map(|x| x.x), b),
            }
        }

        #[test]
        fn decisions_respect_constraints_and_certificate(p in random_instance()) {
            let Ok(x) = solve(&p) else { return Ok(()); };
            let (n, jn) = (p.capacity.len(), p.demand.len());
            for j in 0..jn {
                prop_assert!((x.gateway_total(j) - p.demand[j]).abs() <= 1e-9 * p.demand[j].max(1.0));
                // Threshold price: every used DC is no dearer than every unsaturated reachable DC.
                let used_max = (0..n).filter(|&i| x.get(i, j) > 0.0)
                    .map(|i| p.unit_cost[i]).fold(f64::NEG_INFINITY, f64::max);
                for i in 0..n {
                    if !p.mask[i * jn + j] {
                        prop_assert_eq!(x.get(i, j), 0.0);
                    } else if x.dc_load(i) < p.capacity[i] - 1e-9 {
                        prop_assert!(p.unit_cost[i] >= used_max);
                    }
                }
            }
            for i in 0..n {
                prop_assert!(x.dc_load(i) <= p.capacity[i] + 1e-9);
                for j in 0..jn { prop_assert!(x.get(i, j) >= 0.0); }
            }
        }

        #[test]
        fn feasibility_agrees_with_solve(p in random_instance()) {
            let f = check_feasible(&p).unwrap();
            prop_assert_eq!(f.feasible, solve(&p).is_ok());
            prop_assert_eq!(f.feasible, cut_oracle(&p).is_some());
        }
    }
}
