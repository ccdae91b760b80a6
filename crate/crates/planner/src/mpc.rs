//! Receding-horizon control: at every slot, plan the next `window` slots with
//! perfect foresight and commit only the first decision.
//!
//! Once a window reaches the end of the trace, its remaining decisions are
//! already optimal for every later window (same objective, same carried
//! footprints), so they are committed without re-solving.

use eglb_core::metrics::{self, RunReport};
use eglb_core::slot::{SlotModel, SlotPlan};
use eglb_core::{EquitySpec, Error, Result, Schedule};

use crate::offline::{solve_window, HorizonSolution, OfflineOptions, WindowSpec};

pub fn run_mpc<M: SlotModel + ?Sized>(
    model: &M,
    equity: &EquitySpec,
    window: usize,
    opts: &OfflineOptions,
) -> Result<(Schedule, RunReport)> {
    if window == 0 {
        return Err(Error::Config("MPC window must be at least one slot".into()));
    }
    let total = model.n_slots();
    let n = model.n_datacenters();
    let mut carried_c = vec![0.0; n];
    let mut carried_w = vec![0.0; n];
    let mut plans: Vec<SlotPlan> = Vec::with_capacity(total);
    let mut last: Option<(usize, HorizonSolution)> = None;
    for t in 0..total {
        let reuse = matches!(&last, Some((start, sol)) if start + sol.plans.len() == total);
        if !reuse {
            let end = (t + window).min(total);
            let warm = last.as_ref().map(|(start, sol)| sol.pool[t - start..].to_vec());
            let sol = solve_window(
                model,
                equity,
                &WindowSpec {
                    start: t,
                    end,
                    elapsed: t,
                    carried_carbon: &carried_c,
                    carried_water: &carried_w,
                },
                opts,
                warm.as_deref(),
            )?;
            last = Some((t, sol));
        }
        let (start, sol) = last.as_ref().expect("a window was solved");
        let plan = sol.plans[t - start].clone();
        let imp = model.impact(t, &plan);
        for i in 0..n {
            carried_c[i] += imp.carbon[i];
            carried_w[i] += imp.water[i];
        }
        plans.push(plan);
    }
    let report = metrics::report(model, &plans, equity)?;
    Ok((Schedule::from_plans(plans), report))
}
