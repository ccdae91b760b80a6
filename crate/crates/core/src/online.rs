//! Online equity-aware GLB by dual mirror descent.
//!
//! Each slot, with multipliers `κ_t = [κ_c; κ_w]`:
//!
//! 1. route load to minimize `g_t(x) + κ_cᵀĉ_t(x) + κ_wᵀŵ_t(x)`, where `ĉ`, `ŵ`
//!    are the equity-scaled footprints;
//! 2. pick `z_c, z_w` minimizing `μ·max_i θ_i z_i − κᵀz` on `[0, z̄]`;
//! 3. `d_t = [z_c; z_w] − [ĉ_t; ŵ_t]`;
//! 4. `κ_{t+1} = max(κ_t − η·d_t, 0)`.
//!
//! A DC whose footprint keeps exceeding what the max term is willing to pay
//! for sees its multiplier grow, which raises its routing price.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::auxstep::{minimize_aux, AuxBlock};
use crate::dmd::{self, DualState, Reference};
use crate::error::{check_len, check_nonneg, Error, Result};
use crate::metrics::{self, RunReport};
use crate::model::{marginal_coefficients, unit_cost, EquitySpec, FleetSpec, SlotInput};
use crate::slot::{dual_prices, peak_bounds, scaled, Prices, SlotModel, SlotPlan};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub equity: EquitySpec,
    pub eta: f64,
    pub zbar_carbon: Vec<f64>,
    pub zbar_water: Vec<f64>,
    pub kappa_init: Vec<f64>,
    /// Keep `κ` at `kappa_init` for the whole run.
    pub freeze_duals: bool,
}

impl RunConfig {
    /// Zero initial multipliers and `z̄` set to the largest scaled footprint
    /// each DC can reach anywhere in the trace.
    pub fn new<M: SlotModel + ?Sized>(model: &M, equity: EquitySpec, eta: f64) -> Self {
        let (zbar_carbon, zbar_water) = default_zbar(model, &equity);
        let n = model.n_datacenters();
        RunConfig {
            equity,
            eta,
            zbar_carbon,
            zbar_water,
            kappa_init: vec![0.0; 2 * n],
            freeze_duals: false,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.equity.validate(n)?;
        check_len("zbar_carbon", n, self.zbar_carbon.len())?;
        check_len("zbar_water", n, self.zbar_water.len())?;
        check_len("kappa_init", 2 * n, self.kappa_init.len())?;
        check_nonneg("zbar_carbon", &self.zbar_carbon)?;
        check_nonneg("zbar_water", &self.zbar_water)?;
        check_nonneg("kappa_init", &self.kappa_init)?;
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(alloc::format!(
                "learning rate must be positive, got {}",
                self.eta
            )));
        }
        Ok(())
    }

    /// Configurations that are valid but degenerate.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let blocks = [
            ("carbon", self.equity.mu_carbon, &self.zbar_carbon),
            ("water", self.equity.mu_water, &self.zbar_water),
        ];
        for (name, mu, zbar) in blocks {
            if mu == 0.0 && zbar.iter().all(|&z| z == 0.0) {
                out.push(alloc::format!(
                    "{name} weight and z̄ are both zero: the {name} multipliers only grow and penalize every footprint"
                ));
            }
        }
        out
    }
}

pub fn default_zbar<M: SlotModel + ?Sized>(model: &M, equity: &EquitySpec) -> (Vec<f64>, Vec<f64>) {
    peak_bounds(model, equity)
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Schedule {
    pub plans: Vec<SlotPlan>,
    /// `κ_1 … κ_{T+1}`; empty for algorithms without multipliers.
    pub dual_trajectory: Vec<Vec<f64>>,
    /// `(z_c, z_w)` per slot; empty for algorithms without multipliers.
    pub aux_trajectory: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Schedule {
    pub fn from_plans(plans: Vec<SlotPlan>) -> Self {
        Schedule {
            plans,
            ..Schedule::default()
        }
    }

    pub fn decisions(&self) -> impl Iterator<Item = &crate::model::Decision> {
        self.plans.iter().map(|p| &p.routing)
    }
}

/// Per-MW routing cost for a homogeneous fleet under multipliers `kappa`.
pub fn primal_cost_vector(fleet: &FleetSpec, input: &SlotInput, kappa: &[f64], equity: &EquitySpec) -> Vec<f64> {
    let c = marginal_coefficients(fleet, input);
    let (pc, pw) = dual_prices(fleet, equity, kappa);
    (0..fleet.n_datacenters)
        .map(|i| unit_cost(1.0, c.energy_cost[i], 0.0, pc[i], c.carbon[i], pw[i], c.water[i]))
        .collect()
}

pub fn run<M: SlotModel + ?Sized>(model: &M, config: &RunConfig) -> Result<(Schedule, RunReport)> {
    let fleet = model.fleet();
    let n = fleet.n_datacenters;
    config.validate(n)?;
    let eq = &config.equity;
    let mut state = DualState {
        kappa: config.kappa_init.clone(),
        eta: config.eta,
        reference: Reference::Quadratic,
    };
    let mut sched = Schedule {
        plans: Vec::with_capacity(model.n_slots()),
        dual_trajectory: vec![state.kappa.clone()],
        aux_trajectory: Vec::with_capacity(model.n_slots()),
    };
    let mut impacts = Vec::with_capacity(model.n_slots());
    for t in 0..model.n_slots() {
        let (pc, pw) = dual_prices(fleet, eq, &state.kappa);
        let plan = model.solve(
            t,
            &Prices {
                cost: 1.0,
                carbon: &pc,
                water: &pw,
            },
        )?;
        let imp = model.impact(t, &plan);
        let aux = minimize_aux(
            &AuxBlock {
                mu: eq.mu_carbon,
                theta: eq.theta_carbon.clone(),
                kappa: state.kappa[..n].to_vec(),
                zbar: config.zbar_carbon.clone(),
            },
            &AuxBlock {
                mu: eq.mu_water,
                theta: eq.theta_water.clone(),
                kappa: state.kappa[n..].to_vec(),
                zbar: config.zbar_water.clone(),
            },
        )?;
        if !config.freeze_duals {
            let d = dmd::subgradient(
                &aux.carbon.z,
                &aux.water.z,
                &scaled(fleet, eq, &imp.carbon),
                &scaled(fleet, eq, &imp.water),
            )?;
            state = dmd::update(&state, &d)?;
        }
        sched.dual_trajectory.push(state.kappa.clone());
        sched.aux_trajectory.push((aux.carbon.z, aux.water.z));
        sched.plans.push(plan);
        impacts.push(imp);
    }
    let report = metrics::report_from_impacts(fleet, eq, &impacts)?;
    Ok((sched, report))
}
