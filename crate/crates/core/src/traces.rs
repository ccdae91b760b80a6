//! Exogenous time series: validated traces, workload splitting, horizon
//! augmentation and a seeded synthetic generator.
//!
//! All randomness comes from `Pcg64` (PCG XSL RR 128/64) seeded with
//! `seed_from_u64`, so generated traces are identical across platforms.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};

use crate::error::{check_nonneg, Error, Result};
use crate::model::{
    carbon_rate, energy_price, marginal_coefficients, unit_cost, water_rate, FleetSpec, SizingMode,
    EnergyModel, SlotInput,
};
use crate::slot::{Prices, SlotImpact, SlotModel, SlotPlan};
use crate::transport::{self, TransportInstance};

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub slots: Vec<SlotInput>,
    pub fleet: FleetSpec,
    pub provenance: String,
}

impl Trace {
    /// Validates the fleet, every slot, and that each slot's demand can be
    /// routed at all.
    pub fn new(fleet: FleetSpec, slots: Vec<SlotInput>, provenance: String) -> Result<Self> {
        fleet.validate()?;
        for (t, s) in slots.iter().enumerate() {
            if s.t != t {
                return Err(Error::Config(alloc::format!("slot {t} carries index {}", s.t)));
            }
            s.validate(&fleet)?;
            let inst = TransportInstance {
                unit_cost: vec![0.0; fleet.n_datacenters],
                capacity: fleet.capacity.clone(),
                demand: s.load.clone(),
                mask: fleet.connectivity.clone(),
            };
            let f = transport::check_feasible(&inst)?;
            if !f.feasible {
                return Err(Error::Infeasible {
                    slot: Some(t),
                    gateways: f.witness,
                });
            }
        }
        Ok(Trace {
            slots,
            fleet,
            provenance,
        })
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Same fleet, slots `range`, re-indexed from zero.
    pub fn window(&self, start: usize, end: usize) -> Trace {
        let slots = self.slots[start..end]
            .iter()
            .enumerate()
            .map(|(k, s)| SlotInput { t: k, ..s.clone() })
            .collect();
        Trace {
            slots,
            fleet: self.fleet.clone(),
            provenance: self.provenance.clone(),
        }
    }

    fn instance(&self, t: usize, unit: Vec<f64>) -> TransportInstance {
        TransportInstance {
            unit_cost: unit,
            capacity: self.fleet.capacity.clone(),
            demand: self.slots[t].load.clone(),
            mask: self.fleet.connectivity.clone(),
        }
    }
}

/// Impact of per-DC server energies `e` in slot `input`.
pub(crate) fn impact_from_energy(input: &SlotInput, e: &[f64], perf_cost: f64) -> SlotImpact {
    let mut energy_cost = 0.0;
    let mut carbon = Vec::with_capacity(e.len());
    let mut water = Vec::with_capacity(e.len());
    for (i, &e) in e.iter().enumerate() {
        energy_cost += energy_price(input, i) * e;
        carbon.push(carbon_rate(input, i) * e);
        water.push(water_rate(input, i) * e);
    }
    SlotImpact {
        energy_cost,
        perf_cost,
        carbon,
        water,
    }
}

impl SlotModel for Trace {
    fn fleet(&self) -> &FleetSpec {
        &self.fleet
    }

    fn n_slots(&self) -> usize {
        self.slots.len()
    }

    fn solve(&self, t: usize, prices: &Prices) -> Result<SlotPlan> {
        let c = marginal_coefficients(&self.fleet, &self.slots[t]);
        let unit = (0..self.fleet.n_datacenters)
            .map(|i| {
                unit_cost(
                    prices.cost,
                    c.energy_cost[i],
                    0.0,
                    prices.carbon[i],
                    c.carbon[i],
                    prices.water[i],
                    c.water[i],
                )
            })
            .collect();
        transport::solve(&self.instance(t, unit))
            .map(SlotPlan::routing_only)
            .map_err(|e| e.at_slot(t))
    }

    fn impact(&self, t: usize, plan: &SlotPlan) -> SlotImpact {
        let f = &self.fleet;
        let e: Vec<f64> = (0..f.n_datacenters)
            .map(|i| f.energy_offset(i) + f.energy_slope(i) * plan.routing.dc_load(i))
            .collect();
        impact_from_energy(&self.slots[t], &e, 0.0)
    }

    fn peak_footprint(&self, t: usize) -> (Vec<f64>, Vec<f64>) {
        let f = &self.fleet;
        let e: Vec<f64> = (0..f.n_datacenters)
            .map(|i| f.energy_offset(i) + f.energy_slope(i) * f.capacity[i])
            .collect();
        let imp = impact_from_energy(&self.slots[t], &e, 0.0);
        (imp.carbon, imp.water)
    }
}

fn uniform_pm(rng: &mut Pcg64, frac: f64) -> f64 {
    frac * (2.0 * rng.random::<f64>() - 1.0)
}

/// Splits one aggregate load series evenly across `gateways` and applies an
/// independent multiplicative perturbation `1 + u`, `u ~ U[−frac, frac]`, to
/// every (slot, gateway) entry. Returns one series per gateway.
pub fn distribute_to_gateways(
    single_load: &[f64],
    gateways: usize,
    perturbation_frac: f64,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    check_nonneg("single_load", single_load)?;
    check_nonneg("perturbation_frac", &[perturbation_frac])?;
    if gateways == 0 {
        return Err(Error::Config("need at least one gateway".into()));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut out = vec![Vec::with_capacity(single_load.len()); gateways];
    for &total in single_load {
        let share = total / gateways as f64;
        for series in out.iter_mut() {
            let u = uniform_pm(&mut rng, perturbation_frac);
            series.push((share * (1.0 + u)).max(0.0));
        }
    }
    Ok(out)
}

/// Extends `trace` to `target_slots` by appending copies whose workloads are
/// independently perturbed by up to `±perturbation_frac`. The first copy is
/// the original. Only workloads are perturbed.
pub fn augment(trace: &Trace, target_slots: usize, perturbation_frac: f64, seed: u64) -> Result<Trace> {
    check_nonneg("perturbation_frac", &[perturbation_frac])?;
    let base = trace.len();
    if base == 0 || target_slots < base {
        return Err(Error::Config(alloc::format!(
            "cannot augment a {base}-slot trace to {target_slots} slots"
        )));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut slots = trace.slots.clone();
    while slots.len() < target_slots {
        let t = slots.len();
        let src = &trace.slots[t % base];
        let load = src
            .load
            .iter()
            .map(|&l| (l * (1.0 + uniform_pm(&mut rng, perturbation_frac))).max(0.0))
            .collect();
        slots.push(SlotInput {
            t,
            load,
            ..src.clone()
        });
    }
    Trace::new(trace.fleet.clone(), slots, trace.provenance.clone())
}

/// `mean·(1 + amplitude·sin(2π(t + phase)/period) + noise·u)`, `u ~ U[−1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesProfile {
    pub mean: f64,
    #[serde(default)]
    pub amplitude: f64,
    #[serde(default)]
    pub noise: f64,
}

impl SeriesProfile {
    pub fn constant(mean: f64) -> Self {
        SeriesProfile {
            mean,
            amplitude: 0.0,
            noise: 0.0,
        }
    }

    fn sample(&self, t: usize, phase: f64, period: f64, rng: &mut Pcg64) -> f64 {
        let u = uniform_pm(rng, 1.0);
        let wave = libm::sin(2.0 * PI * (t as f64 + phase) / period);
        (self.mean * (1.0 + self.amplitude * wave + self.noise * u)).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DcProfile {
    #[serde(default)]
    pub name: String,
    pub capacity_mw: f64,
    #[serde(default)]
    pub static_energy_mwh: f64,
    /// Defaults to `capacity_mw × slot_hours`.
    #[serde(default)]
    pub dynamic_energy_mwh: Option<f64>,
    /// Local-time offset in slots; shifts every diurnal series.
    #[serde(default)]
    pub phase: f64,
    pub price: SeriesProfile,
    pub pue: SeriesProfile,
    pub carbon: SeriesProfile,
    pub wue_direct: SeriesProfile,
    pub wue_indirect: SeriesProfile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadProfile {
    /// Aggregate MW across all gateways.
    pub total: SeriesProfile,
    #[serde(default)]
    pub phase: f64,
    /// Per-gateway perturbation when splitting the aggregate.
    #[serde(default)]
    pub gateway_perturbation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthProfile {
    pub n_gateways: usize,
    #[serde(default = "default_period")]
    pub period: f64,
    #[serde(default = "default_slot_hours")]
    pub slot_hours: f64,
    #[serde(default)]
    pub sizing_mode: SizingMode,
    pub load: LoadProfile,
    pub datacenters: Vec<DcProfile>,
    /// `connectivity[i][j]`; all routes allowed when absent.
    #[serde(default)]
    pub connectivity: Option<Vec<Vec<bool>>>,
    /// Defaults to `j mod N`.
    #[serde(default)]
    pub nearest: Option<Vec<usize>>,
}

fn default_period() -> f64 {
    24.0
}

fn default_slot_hours() -> f64 {
    1.0
}

/// Seed offset for the gateway split, so it does not share a stream with the
/// slot series.
const GATEWAY_STREAM: u64 = 0x9E37_79B9_7F4A_7C15;

impl SynthProfile {
    pub fn fleet(&self) -> Result<FleetSpec> {
        let n = self.datacenters.len();
        let j = self.n_gateways;
        let connectivity = match &self.connectivity {
            Some(rows) => {
                if rows.len() != n || rows.iter().any(|r| r.len() != j) {
                    return Err(Error::Config("connectivity must be N rows of J entries".into()));
                }
                rows.iter().flatten().copied().collect()
            }
            None => vec![true; n * j],
        };
        let fleet = FleetSpec {
            n_datacenters: n,
            n_gateways: j,
            capacity: self.datacenters.iter().map(|d| d.capacity_mw).collect(),
            connectivity,
            energy_model: EnergyModel {
                static_energy: self.datacenters.iter().map(|d| d.static_energy_mwh).collect(),
                dynamic_energy: self
                    .datacenters
                    .iter()
                    .map(|d| d.dynamic_energy_mwh.unwrap_or(d.capacity_mw * self.slot_hours))
                    .collect(),
                sizing_mode: self.sizing_mode,
            },
            nearest_map: self
                .nearest
                .clone()
                .unwrap_or_else(|| (0..j).map(|g| g % n.max(1)).collect()),
            slot_hours: self.slot_hours,
        };
        fleet.validate()?;
        Ok(fleet)
    }
}

/// Deterministic synthetic trace of `slots` slots.
///
/// Draw order per slot: the aggregate load, then for each DC its price, PUE,
/// carbon intensity, direct and indirect WUE.
pub fn synth(profile: &SynthProfile, slots: usize, seed: u64) -> Result<Trace> {
    let fleet = profile.fleet()?;
    if !(profile.period > 0.0) {
        return Err(Error::Config("period must be positive".into()));
    }
    let mut rng = Pcg64::seed_from_u64(seed);
    let mut totals = Vec::with_capacity(slots);
    let mut per_dc: Vec<[Vec<f64>; 5]> = Vec::with_capacity(slots);
    let p = profile.period;
    for t in 0..slots {
        totals.push(profile.load.total.sample(t, profile.load.phase, p, &mut rng));
        let mut row: [Vec<f64>; 5] = Default::default();
        for d in &profile.datacenters {
            row[0].push(d.price.sample(t, d.phase, p, &mut rng));
            row[1].push(d.pue.sample(t, d.phase, p, &mut rng));
            row[2].push(d.carbon.sample(t, d.phase, p, &mut rng));
            row[3].push(d.wue_direct.sample(t, d.phase, p, &mut rng));
            row[4].push(d.wue_indirect.sample(t, d.phase, p, &mut rng));
        }
        per_dc.push(row);
    }
    let loads = distribute_to_gateways(
        &totals,
        profile.n_gateways,
        profile.load.gateway_perturbation,
        seed ^ GATEWAY_STREAM,
    )?;
    let slots = per_dc
        .into_iter()
        .enumerate()
        .map(|(t, [price, pue, carbon_intensity, wue_direct, wue_indirect])| SlotInput {
            t,
            load: loads.iter().map(|s| s[t]).collect(),
            price,
            pue,
            carbon_intensity,
            wue_direct,
            wue_indirect,
        })
        .collect();
    Trace::new(fleet, slots, alloc::format!("synthetic, seed {seed}"))
}
