mod common;

use common::{skewed, tiny, TinyDc};
use eglb_core::online::{run, RunConfig};
use eglb_core::{baselines, metrics, EquitySpec, SlotModel};
use eglb_planner::{run_mpc, solve_offline, solve_window, OfflineOptions, WindowSpec};
use proptest::prelude::*;

fn tight() -> OfflineOptions {
    OfflineOptions {
        tol: 1e-9,
        max_iters: 400,
    }
}

/// Exhaustive search over single-gateway two-DC routings on a grid of
/// `res`, evaluating the averaged objective from first principles.
/// Returns the minimum and a Lipschitz slack for the grid spacing.
fn brute_force(loads: &[f64], dcs: &[Vec<TinyDc>], mu_c: f64, mu_w: f64, res: f64) -> (f64, f64) {
    let t_len = loads.len() as f64;
    let steps: Vec<usize> = loads.iter().map(|l| (l / res).round() as usize).collect();
    let per_mw = |d: &TinyDc| {
        (
            d.price * d.pue,
            d.carbon * d.pue,
            d.wue_direct + d.wue_indirect * d.pue,
        )
    };
    let mut best = f64::INFINITY;
    let mut lip = 0.0;
    for d in dcs {
        let (g0, c0, w0) = per_mw(&d[0]);
        let (g1, c1, w1) = per_mw(&d[1]);
        lip += ((g0 - g1).abs() + mu_c * c0.max(c1) + mu_w * w0.max(w1)) / t_len;
    }
    let feasible = |t: usize, k: usize| {
        let x0 = k as f64 * res;
        let x1 = loads[t] - x0;
        x0 <= 1.0 + 1e-12 && x1 <= 1.0 + 1e-12 && x1 >= -1e-12
    };
    for a in 0..=steps[0] {
        if !feasible(0, a) {
            continue;
        }
        for b in 0..=steps[1] {
            if !feasible(1, b) {
                continue;
            }
            let xs = [[a as f64 * res, loads[0] - a as f64 * res], [b as f64 * res, loads[1] - b as f64 * res]];
            let mut g = 0.0;
            let mut c = [0.0; 2];
            let mut w = [0.0; 2];
            for t in 0..2 {
                for i in 0..2 {
                    let (gi, ci, wi) = per_mw(&dcs[t][i]);
                    let x = xs[t][i].max(0.0);
                    g += gi * x;
                    c[i] += ci * x;
                    w[i] += wi * x;
                }
            }
            let v = g / t_len + mu_c * c[0].max(c[1]) / t_len + mu_w * w[0].max(w[1]) / t_len;
            best = best.min(v);
        }
    }
    (best, lip * res)
}

fn dc() -> impl Strategy<Value = TinyDc> {
    (20.0..80.0f64, 1.05..1.3f64, 0.1..0.8f64, 0.5..9.0f64, 1.0..2.5f64).prop_map(|(price, pue, carbon, wd, wi)| TinyDc {
        price,
        pue,
        carbon,
        wue_direct: wd,
        wue_indirect: wi,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn matches_exhaustive_search_on_two_slots(
        l0 in 20usize..190,
        l1 in 20usize..190,
        dcs in prop::collection::vec(prop::collection::vec(dc(), 2), 2),
        mu_c in prop::sample::select(vec![0.0, 50.0, 1500.0]),
        mu_w in prop::sample::select(vec![0.0, 5.0, 60.0]),
    ) {
        let res = 1e-3;
        let loads = [l0 as f64 * 1e-2, l1 as f64 * 1e-2];
        let trace = tiny(&loads, &dcs);
        let eq = EquitySpec::uniform(2, mu_c, mu_w);
        let sol = solve_offline(&trace, &eq, &tight()).unwrap();
        let (brute, slack) = brute_force(&loads, &dcs, mu_c, mu_w, res);
        prop_assert!(sol.objective <= brute + 1e-7 * brute.abs(), "{} > {}", sol.objective, brute);
        prop_assert!(brute <= sol.objective + slack + 1e-9, "{} vs {} slack {}", brute, sol.objective, slack);
    }
}

#[test]
fn zero_weights_reduce_to_energy_minimization() {
    let trace = skewed(5, 3, 48, 4);
    let eq = EquitySpec::uniform(5, 0.0, 0.0);
    let sol = solve_offline(&trace, &eq, &OfflineOptions::default()).unwrap();
    let (energy, _) = baselines::run_energy(&trace, &eq).unwrap();
    assert_eq!(sol.plans, energy.plans);
    assert_eq!(sol.gap_estimate, 0.0);
    assert!(sol.converged);
}

#[test]
fn bounds_bracket_the_objective() {
    for seed in 0..3 {
        let trace = skewed(4, 3, 60, seed);
        let eq = EquitySpec::uniform(4, 1500.0, 60.0);
        let sol = solve_offline(&trace, &eq, &OfflineOptions::default()).unwrap();
        assert!(sol.lower_bound <= sol.objective * (1.0 + 1e-9));
        assert!(sol.gap_estimate >= 0.0);
        assert!(sol.converged, "seed {seed}: gap {}", sol.gap_estimate);
        assert!(sol.gap_estimate <= 1e-4 * sol.objective.abs());
    }
}

#[test]
fn offline_dominates_online_and_baselines() {
    for (n, slots, seed) in [(2, 50, 1), (5, 100, 2), (10, 72, 3)] {
        let trace = skewed(n, 3, slots, seed);
        let eq = EquitySpec::uniform(n, 1500.0, 60.0);
        let sol = solve_offline(&trace, &eq, &OfflineOptions::default()).unwrap();
        let tol = sol.gap_estimate + 1e-9 * sol.objective.abs();
        let mut others = vec![
            baselines::run_energy(&trace, &eq).unwrap().1.objective,
            baselines::run_carbon(&trace, &eq).unwrap().1.objective,
            baselines::run_water(&trace, &eq).unwrap().1.objective,
        ];
        for eta in [1.7e-4, 0.5, 2.5] {
            others.push(run(&trace, &RunConfig::new(&trace, eq.clone(), eta)).unwrap().1.objective);
        }
        for v in others {
            assert!(sol.objective <= v + tol, "n={n}: offline {} vs {v}", sol.objective);
        }
    }
}

#[test]
fn full_window_mpc_is_the_offline_plan() {
    let trace = skewed(4, 3, 30, 7);
    let eq = EquitySpec::uniform(4, 1500.0, 60.0);
    let opts = OfflineOptions::default();
    let sol = solve_offline(&trace, &eq, &opts).unwrap();
    for window in [30, 45] {
        let (mpc, report) = run_mpc(&trace, &eq, window, &opts).unwrap();
        assert_eq!(mpc.plans, sol.plans);
        assert_eq!(report.objective, sol.objective);
    }
}

#[test]
fn single_slot_mpc_without_weights_is_energy_minimization() {
    let trace = skewed(4, 3, 24, 8);
    let eq = EquitySpec::uniform(4, 0.0, 0.0);
    let (mpc, _) = run_mpc(&trace, &eq, 1, &OfflineOptions::default()).unwrap();
    let (energy, _) = baselines::run_energy(&trace, &eq).unwrap();
    assert_eq!(mpc.plans, energy.plans);
}

#[test]
fn zero_window_is_rejected() {
    let trace = skewed(2, 1, 4, 0);
    let eq = EquitySpec::uniform(2, 1.0, 1.0);
    assert!(run_mpc(&trace, &eq, 0, &OfflineOptions::default()).is_err());
}

#[test]
fn carried_footprint_pushes_load_away() {
    // Two identical DCs; only the carried water differs.
    let same = TinyDc {
        price: 40.0,
        pue: 1.1,
        carbon: 0.3,
        wue_direct: 3.0,
        wue_indirect: 1.8,
    };
    let trace = tiny(&[1.0; 4], &vec![vec![same.clone(), same]; 4]);
    let eq = EquitySpec::uniform(2, 0.0, 60.0);
    let zeros = [0.0; 2];
    let skew = [20.0, 0.0];
    let solve = |carried: &[f64]| {
        solve_window(
            &trace,
            &eq,
            &WindowSpec {
                start: 0,
                end: 4,
                elapsed: 4,
                carried_carbon: &zeros,
                carried_water: carried,
            },
            &tight(),
            None,
        )
        .unwrap()
    };
    let dc0 = |plans: &[eglb_core::SlotPlan]| plans.iter().map(|p| p.routing.dc_load(0)).sum::<f64>();
    let base = solve(&zeros);
    let shifted = solve(&skew);
    assert!(dc0(&shifted.plans) < dc0(&base.plans) - 1.0, "{} vs {}", dc0(&shifted.plans), dc0(&base.plans));
}

#[test]
fn window_must_fit_the_trace() {
    let trace = skewed(2, 1, 4, 0);
    let eq = EquitySpec::uniform(2, 1.0, 1.0);
    let zeros = [0.0; 2];
    let spec = WindowSpec {
        start: 2,
        end: 6,
        elapsed: 2,
        carried_carbon: &zeros,
        carried_water: &zeros,
    };
    assert!(solve_window(&trace, &eq, &spec, &OfflineOptions::default(), None).is_err());
}

#[test]
fn mpc_sits_between_offline_and_online() {
    let trace = skewed(5, 3, 96, 11);
    let eq = EquitySpec::uniform(5, 1500.0, 60.0);
    let opts = OfflineOptions::default();
    let off = solve_offline(&trace, &eq, &opts).unwrap();
    let (_, mpc) = run_mpc(&trace, &eq, 24, &opts).unwrap();
    let (_, online) = run(&trace, &RunConfig::new(&trace, eq.clone(), 2.5)).unwrap();
    assert!(off.objective <= mpc.objective + off.gap_estimate);
    assert!(mpc.objective <= online.objective, "mpc {} online {}", mpc.objective, online.objective);
}

#[test]
fn reported_objective_matches_metrics() {
    let trace = skewed(3, 2, 20, 5);
    let eq = EquitySpec::uniform(3, 1500.0, 60.0);
    let sol = solve_offline(&trace, &eq, &OfflineOptions::default()).unwrap();
    assert_eq!(sol.objective, metrics::objective(&trace, &sol.plans, &eq).unwrap());
    assert_eq!(sol.plans.len(), trace.n_slots());
}
