//! Domain types and the per-slot cost model.
//!
//! Server energy at data center `i` is `e_i = ρ_i·Ē_s,i + (ℓ_i/M_i)·Ē_d,i`
//! where `ℓ_i` is the load routed to it. The energy bill, carbon and water
//! footprints are all multiples of `e_i`:
//!
//! ```text
//! g   = Σ_i p_i·γ_i·e_i
//! c_i = α_i·γ_i·e_i
//! w_i = (ε_i + β_i·γ_i)·e_i      // on-site water scales with server energy only
//! ```
//!
//! Every quantity is therefore affine in the per-DC load, which is what makes
//! the routing subproblem a transportation problem.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, check_nonneg, check_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizingMode {
    /// Powered fraction tracks utilization, `ρ = ℓ/M`.
    #[default]
    PerfectRightSize,
    /// All servers stay on, `ρ = 1`.
    AlwaysOn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    /// MWh per slot at `ρ = 1`.
    pub static_energy: Vec<f64>,
    /// MWh per slot at full utilization.
    pub dynamic_energy: Vec<f64>,
    pub sizing_mode: SizingMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleetSpec {
    pub n_datacenters: usize,
    pub n_gateways: usize,
    /// MW of server power per data center.
    pub capacity: Vec<f64>,
    /// Row-major `N×J`; entry `i*J + j` allows routing gateway `j` to DC `i`.
    pub connectivity: Vec<bool>,
    pub energy_model: EnergyModel,
    pub nearest_map: Vec<usize>,
    pub slot_hours: f64,
}

impl FleetSpec {
    /// Fleet where every gateway reaches every data center and the nearest DC
    /// of gateway `j` is `j mod N`.
    pub fn fully_connected(capacity: Vec<f64>, gateways: usize, energy_model: EnergyModel) -> Self {
        let n = capacity.len();
        FleetSpec {
            n_datacenters: n,
            n_gateways: gateways,
            capacity,
            connectivity: vec![true; n * gateways],
            energy_model,
            nearest_map: (0..gateways).map(|j| j % n.max(1)).collect(),
            slot_hours: 1.0,
        }
    }

    #[inline]
    pub fn allowed(&self, dc: usize, gateway: usize) -> bool {
        self.connectivity[dc * self.n_gateways + gateway]
    }

    pub fn validate(&self) -> Result<()> {
        let (n, j) = (self.n_datacenters, self.n_gateways);
        if n == 0 || j == 0 {
            return Err(Error::Config("fleet needs at least one data center and one gateway".into()));
        }
        check_len("capacity", n, self.capacity.len())?;
        check_len("connectivity", n * j, self.connectivity.len())?;
        check_len("static_energy", n, self.energy_model.static_energy.len())?;
        check_len("dynamic_energy", n, self.energy_model.dynamic_energy.len())?;
        check_len("nearest_map", j, self.nearest_map.len())?;
        check_positive("capacity", &self.capacity)?;
        check_nonneg("static_energy", &self.energy_model.static_energy)?;
        check_positive("dynamic_energy", &self.energy_model.dynamic_energy)?;
        check_positive("slot_hours", &[self.slot_hours])?;
        for g in 0..j {
            if !(0..n).any(|i| self.allowed(i, g)) {
                return Err(Error::Config(alloc::format!("gateway {g} cannot reach any data center")));
            }
            let near = self.nearest_map[g];
            if near >= n || !self.allowed(near, g) {
                return Err(Error::Config(alloc::format!(
                    "nearest data center {near} of gateway {g} is not reachable from it"
                )));
            }
        }
        Ok(())
    }

    /// Constant part of `e_i`, independent of routing.
    pub fn energy_offset(&self, dc: usize) -> f64 {
        match self.energy_model.sizing_mode {
            SizingMode::PerfectRightSize => 0.0,
            SizingMode::AlwaysOn => self.energy_model.static_energy[dc],
        }
    }

    /// `∂e_i/∂ℓ`, MWh per MW routed.
    pub fn energy_slope(&self, dc: usize) -> f64 {
        let em = &self.energy_model;
        match em.sizing_mode {
            SizingMode::PerfectRightSize => {
                (em.static_energy[dc] + em.dynamic_energy[dc]) / self.capacity[dc]
            }
            SizingMode::AlwaysOn => em.dynamic_energy[dc] / self.capacity[dc],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlotInput {
    pub t: usize,
    /// MW per gateway.
    pub load: Vec<f64>,
    /// USD/MWh.
    pub price: Vec<f64>,
    pub pue: Vec<f64>,
    /// ton/MWh.
    pub carbon_intensity: Vec<f64>,
    /// m³/MWh, identical to L/kWh.
    pub wue_direct: Vec<f64>,
    /// m³/MWh.
    pub wue_indirect: Vec<f64>,
}

impl SlotInput {
    pub fn validate(&self, fleet: &FleetSpec) -> Result<()> {
        let n = fleet.n_datacenters;
        check_len("load", fleet.n_gateways, self.load.len())?;
        check_len("price", n, self.price.len())?;
        check_len("pue", n, self.pue.len())?;
        check_len("carbon_intensity", n, self.carbon_intensity.len())?;
        check_len("wue_direct", n, self.wue_direct.len())?;
        check_len("wue_indirect", n, self.wue_indirect.len())?;
        check_nonneg("load", &self.load)?;
        check_nonneg("price", &self.price)?;
        check_nonneg("pue", &self.pue)?;
        check_nonneg("carbon_intensity", &self.carbon_intensity)?;
        check_nonneg("wue_direct", &self.wue_direct)?;
        check_nonneg("wue_indirect", &self.wue_indirect)
    }
}

/// Weights of the minimax equity terms, with linear `H_i(v) = θ_i·v`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquitySpec {
    pub theta_carbon: Vec<f64>,
    pub theta_water: Vec<f64>,
    pub mu_carbon: f64,
    pub mu_water: f64,
    /// Divide footprints by `M_i` before applying `H_i`.
    pub normalize_by_capacity: bool,
}

impl EquitySpec {
    /// `θ = 1` everywhere, no normalization.
    pub fn uniform(n: usize, mu_carbon: f64, mu_water: f64) -> Self {
        EquitySpec {
            theta_carbon: vec![1.0; n],
            theta_water: vec![1.0; n],
            mu_carbon,
            mu_water,
            normalize_by_capacity: false,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_len("theta_carbon", n, self.theta_carbon.len())?;
        check_len("theta_water", n, self.theta_water.len())?;
        check_nonneg("theta_carbon", &self.theta_carbon)?;
        check_nonneg("theta_water", &self.theta_water)?;
        check_nonneg("mu_carbon", &[self.mu_carbon])?;
        check_nonneg("mu_water", &[self.mu_water])
    }

    /// Factor applied to DC `i`'s footprint before `H_i`.
    pub fn scale(&self, fleet: &FleetSpec, dc: usize) -> f64 {
        if self.normalize_by_capacity {
            1.0 / fleet.capacity[dc]
        } else {
            1.0
        }
    }
}

/// Routing matrix `x`, row-major `N×J`, MW from gateway `j` to DC `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub n_dc: usize,
    pub n_gw: usize,
    pub x: Vec<f64>,
}

impl Decision {
    pub fn zeros(n_dc: usize, n_gw: usize) -> Self {
        Decision {
            n_dc,
            n_gw,
            x: vec![0.0; n_dc * n_gw],
        }
    }

    #[inline]
    pub fn get(&self, dc: usize, gw: usize) -> f64 {
        self.x[dc * self.n_gw + gw]
    }

    #[inline]
    pub fn set(&mut self, dc: usize, gw: usize, v: f64) {
        self.x[dc * self.n_gw + gw] = v;
    }

    pub fn dc_load(&self, dc: usize) -> f64 {
        self.x[dc * self.n_gw..(dc + 1) * self.n_gw].iter().sum()
    }

    pub fn dc_loads(&self) -> Vec<f64> {
        (0..self.n_dc).map(|i| self.dc_load(i)).collect()
    }

    pub fn gateway_total(&self, gw: usize) -> f64 {
        (0..self.n_dc).map(|i| self.get(i, gw)).sum()
    }

    /// Checks nonnegativity, the connectivity mask, demand conservation
    /// (relative tolerance 1e-9) and capacities (absolute tolerance 1e-9).
    pub fn validate(&self, fleet: &FleetSpec, input: &SlotInput) -> Result<()> {
        check_len("decision rows", fleet.n_datacenters, self.n_dc)?;
        check_len("decision columns", fleet.n_gateways, self.n_gw)?;
        check_len("decision", self.n_dc * self.n_gw, self.x.len())?;
        check_nonneg("x", &self.x)?;
        for i in 0..self.n_dc {
            for j in 0..self.n_gw {
                if !fleet.allowed(i, j) && self.get(i, j) != 0.0 {
                    return Err(Error::InvalidValue {
                        field: "x (forbidden route)",
                        index: i * self.n_gw + j,
                        value: self.get(i, j),
                    });
                }
            }
        }
        for j in 0..self.n_gw {
            let total = self.gateway_total(j);
            let want = input.load[j];
            if (total - want).abs() > 1e-9 * want.max(1.0) {
                return Err(Error::InvalidValue {
                    field: "gateway total",
                    index: j,
                    value: total,
                });
            }
        }
        for i in 0..self.n_dc {
            let load = self.dc_load(i);
            if load > fleet.capacity[i] + 1e-9 {
                return Err(Error::CapacityExceeded {
                    slot: input.t,
                    dc: i,
                    load,
                    capacity: fleet.capacity[i],
                });
            }
        }
        Ok(())
    }
}

/// Server energy `e_i` given the per-DC loads.
pub fn server_energy_from_loads(fleet: &FleetSpec, loads: &[f64]) -> Vec<f64> {
    loads
        .iter()
        .enumerate()
        .map(|(i, &l)| fleet.energy_offset(i) + fleet.energy_slope(i) * l)
        .collect()
}

pub fn server_energy(fleet: &FleetSpec, x: &Decision) -> Result<Vec<f64>> {
    check_len("decision rows", fleet.n_datacenters, x.n_dc)?;
    check_len("decision columns", fleet.n_gateways, x.n_gw)?;
    Ok(server_energy_from_loads(fleet, &x.dc_loads()))
}

/// USD per MWh of server energy at DC `i`.
#[inline]
pub fn energy_price(input: &SlotInput, i: usize) -> f64 {
    input.price[i] * input.pue[i]
}

/// ton per MWh of server energy.
#[inline]
pub fn carbon_rate(input: &SlotInput, i: usize) -> f64 {
    input.carbon_intensity[i] * input.pue[i]
}

/// m³ per MWh of server energy.
#[inline]
pub fn water_rate(input: &SlotInput, i: usize) -> f64 {
    input.wue_direct[i] + input.wue_indirect[i] * input.pue[i]
}

pub fn energy_cost(fleet: &FleetSpec, input: &SlotInput, x: &Decision) -> Result<f64> {
    let e = server_energy(fleet, x)?;
    Ok(e.iter().enumerate().map(|(i, &e)| energy_price(input, i) * e).sum())
}

pub fn carbon_footprint(fleet: &FleetSpec, input: &SlotInput, x: &Decision) -> Result<Vec<f64>> {
    let e = server_energy(fleet, x)?;
    Ok(e.iter().enumerate().map(|(i, &e)| carbon_rate(input, i) * e).collect())
}

pub fn water_footprint(fleet: &FleetSpec, input: &SlotInput, x: &Decision) -> Result<Vec<f64>> {
    let e = server_energy(fleet, x)?;
    Ok(e.iter().enumerate().map(|(i, &e)| water_rate(input, i) * e).collect())
}

/// Per-MW slopes of energy cost (USD/MW), carbon (ton/MW) and water (m³/MW).
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficients {
    pub energy_cost: Vec<f64>,
    pub carbon: Vec<f64>,
    pub water: Vec<f64>,
}

pub fn marginal_coefficients(fleet: &FleetSpec, input: &SlotInput) -> Coefficients {
    let n = fleet.n_datacenters;
    let mut c = Coefficients {
        energy_cost: Vec::with_capacity(n),
        carbon: Vec::with_capacity(n),
        water: Vec::with_capacity(n),
    };
    for i in 0..n {
        let de = fleet.energy_slope(i);
        c.energy_cost.push(energy_price(input, i) * de);
        c.carbon.push(carbon_rate(input, i) * de);
        c.water.push(water_rate(input, i) * de);
    }
    c
}

/// Per-MW cost of one route under a price vector. Shared by every slot
/// model so that equal inputs give bit-identical costs.
#[inline]
pub fn unit_cost(
    cost_weight: f64,
    energy_slope: f64,
    perf_slope: f64,
    carbon_price: f64,
    carbon_slope: f64,
    water_price: f64,
    water_slope: f64,
) -> f64 {
    cost_weight * (energy_slope + perf_slope) + carbon_price * carbon_slope + water_price * water_slope
}
