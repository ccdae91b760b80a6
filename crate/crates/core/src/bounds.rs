//! Performance guarantee of the online algorithm and the dual-norm bound it
//! rests on, as runnable checks.
//!
//! With `κ_1 = 0` and step size `η`:
//!
//! ```text
//! ‖κ_{T+1}‖ ≤ η·sqrt(2T(B + M·D/η))
//! cost(online) ≤ cost(offline) + η·B·T + C·sqrt((2/T)(B + M·D/η))
//! ```
//!
//! where `B = (N/2)(max z̄_c² + max z̄_w²)`, `C = θ_m(μ_c + μ_w)`,
//! `D = θ_m(μ_c c_m + μ_w w_m)` and `M = max_i M_i`.
//!
//! `c_m` (resp. `w_m`) is the largest scaled per-MW footprint at full
//! capacity over the trace, `max_{t,i} ĉ_{t,i}(M_i)/M_i`. With proportional
//! energy this is the largest marginal footprint slope; with always-on
//! servers it also covers the static share, so `M·c_m` bounds every scaled
//! footprint.

use serde::{Deserialize, Serialize};

use crate::dmd::l2_norm;
use crate::error::{check_len, Result};
use crate::model::EquitySpec;
use crate::online::Schedule;
use crate::slot::SlotModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundConstants {
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub m: f64,
    pub theta_m: f64,
    pub c_m: f64,
    pub w_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub pass: bool,
    /// `rhs − lhs`; nonnegative exactly when the check passes.
    pub slack: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl BoundCheck {
    fn new(lhs: f64, rhs: f64) -> Self {
        BoundCheck {
            pass: lhs <= rhs,
            slack: rhs - lhs,
            lhs,
            rhs,
        }
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

pub fn constants<M: SlotModel + ?Sized>(
    model: &M,
    equity: &EquitySpec,
    zbar_carbon: &[f64],
    zbar_water: &[f64],
) -> Result<BoundConstants> {
    let fleet = model.fleet();
    let n = fleet.n_datacenters;
    equity.validate(n)?;
    check_len("zbar_carbon", n, zbar_carbon.len())?;
    check_len("zbar_water", n, zbar_water.len())?;

    let half_n = n as f64 / 2.0;
    let zc = max_of(zbar_carbon);
    let zw = max_of(zbar_water);
    let b = half_n * (zc * zc) + half_n * (zw * zw);
    let theta_m = max_of(&equity.theta_carbon).max(max_of(&equity.theta_water));
    let m = max_of(&fleet.capacity);

    let (mut c_m, mut w_m) = (0.0f64, 0.0f64);
    for t in 0..model.n_slots() {
        let (c, w) = model.peak_footprint(t);
        for i in 0..n {
            let per_mw = equity.scale(fleet, i) / fleet.capacity[i];
            c_m = c_m.max(c[i] * per_mw);
            w_m = w_m.max(w[i] * per_mw);
        }
    }
    Ok(BoundConstants {
        b,
        c: theta_m * (equity.mu_carbon + equity.mu_water),
        d: theta_m * (equity.mu_carbon * c_m + equity.mu_water * w_m),
        m,
        theta_m,
        c_m,
        w_m,
    })
}

/// `η·B·T + C·sqrt((2/T)(B + M·D/η))`.
pub fn theorem1_gap(k: &BoundConstants, eta: f64, slots: usize) -> f64 {
    let t = slots as f64;
    eta * k.b * t + k.c * libm::sqrt(2.0 / t * (k.b + k.m * k.d / eta))
}

pub fn check_theorem1(online_cost: f64, offline_cost: f64, k: &BoundConstants, eta: f64, slots: usize) -> BoundCheck {
    BoundCheck::new(online_cost, offline_cost + theorem1_gap(k, eta, slots))
}

/// `η·sqrt(2T(B + M·D/η))`.
pub fn dual_norm_bound(k: &BoundConstants, eta: f64, slots: usize) -> f64 {
    eta * libm::sqrt(2.0 * slots as f64 * (k.b + k.m * k.d / eta))
}

pub fn check_final_dual(kappa: &[f64], k: &BoundConstants, eta: f64, slots: usize) -> BoundCheck {
    BoundCheck::new(l2_norm(kappa), dual_norm_bound(k, eta, slots))
}

/// Checks the last multiplier of an online run.
pub fn check_dual_norm(schedule: &Schedule, k: &BoundConstants, eta: f64) -> BoundCheck {
    let slots = schedule.dual_trajectory.len().saturating_sub(1);
    let last = schedule.dual_trajectory.last().map(|v| v.as_slice()).unwrap_or(&[]);
    check_final_dual(last, k, eta, slots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EnergyModel, FleetSpec, SizingMode, SlotInput};
    use crate::online::{run, RunConfig};
    use crate::traces::Trace;
    use alloc::string::String;
    use alloc::vec;
    use alloc::vec::Vec;

    fn one_dc() -> Trace {
        let fleet = FleetSpec::fully_connected(
            vec![1.0],
            1,
            EnergyModel {
                static_energy: vec![0.0],
                dynamic_energy: vec![1.0],
                sizing_mode: SizingMode::PerfectRightSize,
            },
        );
        let s = SlotInput {
            t: 0,
            load: vec![0.5],
            price: vec![1.0],
            pue: vec![1.0],
            carbon_intensity: vec![2.0],
            wue_direct: vec![0.0],
            wue_indirect: vec![0.0],
        };
        Trace::new(fleet, vec![s], String::new()).unwrap()
    }

    #[test]
    fn b_for_single_dc() {
        let k = constants(&one_dc(), &EquitySpec::uniform(1, 1.0, 1.0), &[2.0], &[0.0]).unwrap();
        assert_eq!(k.b, 2.0);
        assert_eq!(k.c_m, 2.0);
        assert_eq!(k.m, 1.0);
    }

    #[test]
    fn zero_weights_zero_c_and_d() {
        let k = constants(&one_dc(), &EquitySpec::uniform(1, 0.0, 0.0), &[2.0], &[1.0]).unwrap();
        assert_eq!((k.c, k.d), (0.0, 0.0));
    }

    #[test]
    fn c_with_default_weights() {
        let k = constants(&one_dc(), &EquitySpec::uniform(1, 1500.0, 60.0), &[0.0], &[0.0]).unwrap();
        assert_eq!(k.c, 1560.0);
        assert_eq!(k.d, 1500.0 * 2.0);
    }

    #[test]
    fn static_energy_enters_peak_slope() {
        let mut tr = one_dc();
        tr.fleet.energy_model.sizing_mode = SizingMode::AlwaysOn;
        tr.fleet.energy_model.static_energy = vec![0.5];
        let k = constants(&tr, &EquitySpec::uniform(1, 1.0, 1.0), &[0.0], &[0.0]).unwrap();
        assert_eq!(k.c_m, 3.0);
    }

    #[test]
    fn theorem_check_controls() {
        let k = BoundConstants { b: 2.0, c: 3.0, d: 1.0, m: 1.0, theta_m: 1.0, c_m: 1.0, w_m: 0.0 };
        let gap = theorem1_gap(&k, 0.1, 100);
        let ok = check_theorem1(10.0, 10.0, &k, 0.1, 100);
        assert!(ok.pass);
        assert_eq!(ok.slack, gap);
        let bad = check_theorem1(10.0 + 2.0 * gap, 10.0, &k, 0.1, 100);
        assert!(!bad.pass && bad.slack < 0.0);
    }

    #[test]
    fn dual_norm_controls() {
        let k = BoundConstants { b: 2.0, c: 3.0, d: 1.0, m: 1.0, theta_m: 1.0, c_m: 1.0, w_m: 0.0 };
        let empty = Schedule { dual_trajectory: vec![vec![0.0, 0.0]], ..Schedule::default() };
        let c = check_dual_norm(&empty, &k, 0.5);
        assert!(c.pass && c.lhs == 0.0 && c.rhs == 0.0);

        let tr = one_dc();
        let eq = EquitySpec::uniform(1, 1.0, 1.0);
        let cfg = RunConfig::new(&tr, eq.clone(), 0.5);
        let (mut s, _) = run(&tr, &cfg).unwrap();
        let k = constants(&tr, &eq, &cfg.zbar_carbon, &cfg.zbar_water).unwrap();
        assert!(check_dual_norm(&s, &k, 0.5).pass);
        let big = 10.0 * dual_norm_bound(&k, 0.5, 1);
        *s.dual_trajectory.last_mut().unwrap() = vec![big, 0.0];
        assert!(!check_dual_norm(&s, &k, 0.5).pass);
    }

    #[test]
    fn bound_shrinks_with_tuned_eta() {
        // η = c/T keeps the gap bounded as T grows.
        let k = BoundConstants { b: 2.0, c: 3.0, d: 1.0, m: 1.0, theta_m: 1.0, c_m: 1.0, w_m: 0.0 };
        let gaps: Vec<f64> = [100usize, 1000, 10000].iter().map(|&t| theorem1_gap(&k, 1.0 / t as f64, t)).collect();
        assert!(gaps[2] <= gaps[0]);
    }
}
