//! Evaluation metrics and the equity-aware objective
//!
//! ```text
//! (1/T) Σ_t g_t + μ_c·max_i θ_c,i·avg_t c_i,t + μ_w·max_i θ_w,i·avg_t w_i,t
//! ```
//!
//! Footprints entering the max terms are multiplied by the equity scale
//! (`1/M_i` when normalizing by capacity). "Average" across locations
//! divides totals by `N`.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EquitySpec, FleetSpec};
use crate::slot::{SlotImpact, SlotModel, SlotPlan};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FootprintStats {
    pub per_dc: Vec<f64>,
    pub total: f64,
    pub avg: f64,
    pub max: f64,
    /// 1 when every location has the same footprint (or all are zero).
    pub max_over_avg: f64,
}

impl FootprintStats {
    pub fn new(per_dc: Vec<f64>) -> Self {
        let total: f64 = per_dc.iter().sum();
        let avg = total / per_dc.len() as f64;
        let max = per_dc.iter().copied().fold(0.0f64, f64::max);
        let max_over_avg = if avg > 0.0 { max / avg } else { 1.0 };
        FootprintStats {
            per_dc,
            total,
            avg,
            max,
            max_over_avg,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n_slots: usize,
    pub n_datacenters: usize,
    pub energy_cost_per_slot: Vec<f64>,
    pub total_energy_cost: f64,
    /// Total divided by the number of locations.
    pub avg_energy_cost: f64,
    pub total_perf_cost: f64,
    pub carbon: FootprintStats,
    pub water: FootprintStats,
    pub objective: f64,
}

/// Objective value from per-slot impacts.
pub fn objective_from_impacts(fleet: &FleetSpec, equity: &EquitySpec, impacts: &[SlotImpact]) -> Result<f64> {
    if impacts.is_empty() {
        return Err(Error::Config("empty schedule".into()));
    }
    let n = fleet.n_datacenters;
    let t = impacts.len() as f64;
    let mut cost = 0.0;
    let mut carbon = vec![0.0; n];
    let mut water = vec![0.0; n];
    for imp in impacts {
        cost += imp.operating_cost();
        for i in 0..n {
            carbon[i] += imp.carbon[i];
            water[i] += imp.water[i];
        }
    }
    let mut top_c = 0.0f64;
    let mut top_w = 0.0f64;
    for i in 0..n {
        let s = equity.scale(fleet, i);
        top_c = top_c.max(equity.theta_carbon[i] * (carbon[i] / t * s));
        top_w = top_w.max(equity.theta_water[i] * (water[i] / t * s));
    }
    Ok(cost / t + equity.mu_carbon * top_c + equity.mu_water * top_w)
}

pub fn impacts<M: SlotModel + ?Sized>(model: &M, plans: &[SlotPlan]) -> Vec<SlotImpact> {
    plans.iter().enumerate().map(|(t, p)| model.impact(t, p)).collect()
}

pub fn objective<M: SlotModel + ?Sized>(model: &M, plans: &[SlotPlan], equity: &EquitySpec) -> Result<f64> {
    objective_from_impacts(model.fleet(), equity, &impacts(model, plans))
}

pub fn report_from_impacts(fleet: &FleetSpec, equity: &EquitySpec, impacts: &[SlotImpact]) -> Result<RunReport> {
    let objective = objective_from_impacts(fleet, equity, impacts)?;
    let n = fleet.n_datacenters;
    let mut carbon = vec![0.0; n];
    let mut water = vec![0.0; n];
    let mut per_slot = Vec::with_capacity(impacts.len());
    let mut perf = 0.0;
    for imp in impacts {
        per_slot.push(imp.energy_cost);
        perf += imp.perf_cost;
        for i in 0..n {
            carbon[i] += imp.carbon[i];
            water[i] += imp.water[i];
        }
    }
    let total: f64 = per_slot.iter().sum();
    Ok(RunReport {
        n_slots: impacts.len(),
        n_datacenters: n,
        energy_cost_per_slot: per_slot,
        total_energy_cost: total,
        avg_energy_cost: total / n as f64,
        total_perf_cost: perf,
        carbon: FootprintStats::new(carbon),
        water: FootprintStats::new(water),
        objective,
    })
}

pub fn report<M: SlotModel + ?Sized>(model: &M, plans: &[SlotPlan], equity: &EquitySpec) -> Result<RunReport> {
    report_from_impacts(model.fleet(), equity, &impacts(model, plans))
}
