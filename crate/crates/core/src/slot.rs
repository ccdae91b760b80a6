//! The per-slot primal step shared by all algorithms.
//!
//! A [`SlotModel`] turns a price vector into the cheapest feasible plan for
//! one slot and reports what a plan costs. The homogeneous fleet
//! ([`crate::Trace`]) and the multi-model extension ([`crate::hetero`]) both
//! implement it, so every scheduler works with either.

use alloc::vec::Vec;

use crate::error::Result;
use crate::model::{Decision, EquitySpec, FleetSpec};

/// Per-MW prices applied to the energy bill and to each DC's carbon and
/// water footprint.
#[derive(Debug, Clone, Copy)]
pub struct Prices<'a> {
    pub cost: f64,
    pub carbon: &'a [f64],
    pub water: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotPlan {
    pub routing: Decision,
    /// Load per (DC, model), row-major `N×L`, for multi-model fleets.
    pub models: Option<Vec<f64>>,
}

impl SlotPlan {
    pub fn routing_only(routing: Decision) -> Self {
        SlotPlan {
            routing,
            models: None,
        }
    }

    /// Convex combination `Σ_k w_k·plan_k`.
    pub fn blend(weights: &[f64], plans: &[&SlotPlan]) -> SlotPlan {
        let first = plans[0];
        let mut routing = Decision::zeros(first.routing.n_dc, first.routing.n_gw);
        let mut models = first.models.as_ref().map(|m| alloc::vec![0.0; m.len()]);
        for (&w, p) in weights.iter().zip(plans) {
            if w == 0.0 {
                continue;
            }
            for (a, b) in routing.x.iter_mut().zip(&p.routing.x) {
                *a += w * b;
            }
            if let (Some(acc), Some(src)) = (models.as_mut(), p.models.as_ref()) {
                for (a, b) in acc.iter_mut().zip(src) {
                    *a += w * b;
                }
            }
        }
        SlotPlan { routing, models }
    }
}

/// Realized cost and footprints of one slot (footprints unscaled).
#[derive(Debug, Clone, PartialEq)]
pub struct SlotImpact {
    /// USD.
    pub energy_cost: f64,
    /// USD-equivalent accuracy penalty; zero for single-model fleets.
    pub perf_cost: f64,
    /// ton per DC.
    pub carbon: Vec<f64>,
    /// m³ per DC.
    pub water: Vec<f64>,
}

impl SlotImpact {
    pub fn operating_cost(&self) -> f64 {
        self.energy_cost + self.perf_cost
    }
}

pub trait SlotModel {
    fn fleet(&self) -> &FleetSpec;

    fn n_slots(&self) -> usize;

    /// Cheapest plan for slot `t` under `prices`.
    fn solve(&self, t: usize, prices: &Prices) -> Result<SlotPlan>;

    fn impact(&self, t: usize, plan: &SlotPlan) -> SlotImpact;

    /// Largest carbon and water footprint each DC can produce in slot `t`.
    fn peak_footprint(&self, t: usize) -> (Vec<f64>, Vec<f64>);

    fn n_datacenters(&self) -> usize {
        self.fleet().n_datacenters
    }
}

/// Footprints multiplied by the per-DC equity scale.
pub fn scaled(fleet: &FleetSpec, equity: &EquitySpec, raw: &[f64]) -> Vec<f64> {
    raw.iter()
        .enumerate()
        .map(|(i, &v)| v * equity.scale(fleet, i))
        .collect()
}

/// Prices that charge `κ` per unit of scaled footprint.
pub fn dual_prices(fleet: &FleetSpec, equity: &EquitySpec, kappa: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = fleet.n_datacenters;
    (
        scaled(fleet, equity, &kappa[..n]),
        scaled(fleet, equity, &kappa[n..2 * n]),
    )
}

/// Per-DC maximum of the scaled peak footprint over the whole horizon.
pub fn peak_bounds<M: SlotModel + ?Sized>(model: &M, equity: &EquitySpec) -> (Vec<f64>, Vec<f64>) {
    let fleet = model.fleet();
    let n = fleet.n_datacenters;
    let mut zc = alloc::vec![0.0f64; n];
    let mut zw = alloc::vec![0.0f64; n];
    for t in 0..model.n_slots() {
        let (c, w) = model.peak_footprint(t);
        for i in 0..n {
            let s = equity.scale(fleet, i);
            zc[i] = zc[i].max(c[i] * s);
            zw[i] = zw[i].max(w[i] * s);
        }
    }
    (zc, zw)
}
