//! Equity-oblivious comparison algorithms. Each decides every slot on its
//! own by minimizing a fixed linear per-slot cost.

use alloc::vec;

use crate::error::{Error, Result};
use crate::metrics::{self, RunReport};
use crate::model::{Decision, EquitySpec};
use crate::online::Schedule;
use crate::slot::{Prices, SlotModel, SlotPlan};
use crate::traces::Trace;

/// Minimizes `w_e·g_t + w_c·Σ c_i,t + w_w·Σ w_i,t` in every slot. `equity`
/// only affects the reported objective.
pub fn run_weighted<M: SlotModel + ?Sized>(
    model: &M,
    equity: &EquitySpec,
    w_energy: f64,
    w_carbon: f64,
    w_water: f64,
) -> Result<(Schedule, RunReport)> {
    for (field, v) in [("w_energy", w_energy), ("w_carbon", w_carbon), ("w_water", w_water)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::InvalidValue { field, index: 0, value: v });
        }
    }
    let n = model.n_datacenters();
    let pc = vec![w_carbon; n];
    let pw = vec![w_water; n];
    let prices = Prices {
        cost: w_energy,
        carbon: &pc,
        water: &pw,
    };
    let plans = (0..model.n_slots())
        .map(|t| model.solve(t, &prices))
        .collect::<Result<_>>()?;
    finish(model, equity, plans)
}

pub fn run_energy<M: SlotModel + ?Sized>(model: &M, equity: &EquitySpec) -> Result<(Schedule, RunReport)> {
    run_weighted(model, equity, 1.0, 0.0, 0.0)
}

pub fn run_carbon<M: SlotModel + ?Sized>(model: &M, equity: &EquitySpec) -> Result<(Schedule, RunReport)> {
    run_weighted(model, equity, 0.0, 1.0, 0.0)
}

pub fn run_water<M: SlotModel + ?Sized>(model: &M, equity: &EquitySpec) -> Result<(Schedule, RunReport)> {
    run_weighted(model, equity, 0.0, 0.0, 1.0)
}

/// Sends every gateway's load to its nearest data center.
pub fn run_nearest(trace: &Trace, equity: &EquitySpec) -> Result<(Schedule, RunReport)> {
    let f = &trace.fleet;
    let mut plans = alloc::vec::Vec::with_capacity(trace.len());
    for s in &trace.slots {
        let mut x = Decision::zeros(f.n_datacenters, f.n_gateways);
        for (j, &l) in s.load.iter().enumerate() {
            x.set(f.nearest_map[j], j, l);
        }
        for i in 0..f.n_datacenters {
            let load = x.dc_load(i);
            if load > f.capacity[i] + 1e-9 {
                return Err(Error::CapacityExceeded {
                    slot: s.t,
                    dc: i,
                    load,
                    capacity: f.capacity[i],
                });
            }
        }
        plans.push(SlotPlan::routing_only(x));
    }
    finish(trace, equity, plans)
}

fn finish<M: SlotModel + ?Sized>(
    model: &M,
    equity: &EquitySpec,
    plans: alloc::vec::Vec<SlotPlan>,
) -> Result<(Schedule, RunReport)> {
    let report = metrics::report(model, &plans, equity)?;
    Ok((Schedule::from_plans(plans), report))
}
