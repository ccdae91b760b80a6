//! Data centers hosting several model variants of different size.
//!
//! Serving one MW of load with model `l` at DC `i` uses `e_il` MWh of server
//! energy, `r_il` units of the DC's capacity `M_i`, and costs `φ·s_l` in
//! accuracy loss. For a DC receiving load `ℓ`, the cheapest model mix
//!
//! ```text
//! F_i(ℓ) = min Σ_l c_il·y_l   s.t.  Σ_l y_l = ℓ,  Σ_l r_il·y_l ≤ M_i,  y ≥ 0
//! ```
//!
//! is convex and piecewise linear in `ℓ`. Each linear piece becomes a
//! virtual data center with its own capacity, so the slot problem stays a
//! transportation problem.
//!
//! Energy keeps the fleet's routing-independent offset (the static share of
//! always-on servers); the load-dependent part comes from `e_il`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, check_nonneg, check_positive, Result};
use crate::model::{carbon_rate, energy_price, unit_cost, water_rate, Decision, FleetSpec, SlotInput};
use crate::slot::{Prices, SlotImpact, SlotModel, SlotPlan};
use crate::traces::{impact_from_energy, Trace};
use crate::transport::{self, TransportInstance};

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct HeteroModel {
    pub n_models: usize,
    /// `N×L`, MWh per MW served.
    pub energy_per_load: Vec<f64>,
    /// `N×L`, capacity units per MW served; must be positive.
    pub resource_per_load: Vec<f64>,
    /// Length `L`, accuracy-loss units per MW served.
    pub perf_cost_per_load: Vec<f64>,
    /// USD per accuracy-loss unit.
    pub phi: f64,
}

impl HeteroModel {
    /// One model per DC that behaves exactly like the homogeneous fleet.
    pub fn single(fleet: &FleetSpec) -> Self {
        let n = fleet.n_datacenters;
        HeteroModel {
            n_models: 1,
            energy_per_load: (0..n).map(|i| fleet.energy_slope(i)).collect(),
            resource_per_load: vec![1.0; n],
            perf_cost_per_load: vec![0.0],
            phi: 0.0,
        }
    }

    pub fn validate(&self, fleet: &FleetSpec) -> Result<()> {
        let nl = fleet.n_datacenters * self.n_models;
        if self.n_models == 0 {
            return Err(crate::Error::Config("need at least one model".into()));
        }
        check_len("energy_per_load", nl, self.energy_per_load.len())?;
        check_len("resource_per_load", nl, self.resource_per_load.len())?;
        check_len("perf_cost_per_load", self.n_models, self.perf_cost_per_load.len())?;
        check_nonneg("energy_per_load", &self.energy_per_load)?;
        check_positive("resource_per_load", &self.resource_per_load)?;
        check_nonneg("perf_cost_per_load", &self.perf_cost_per_load)?;
        check_nonneg("phi", &[self.phi])
    }

    #[inline]
    fn idx(&self, dc: usize, l: usize) -> usize {
        dc * self.n_models + l
    }
}

/// Energy plus accuracy cost per MW, `p_i·γ_i·e_il + φ·s_l`, as an `N×L`
/// matrix.
pub fn hetero_slot_cost(model: &HeteroModel, input: &SlotInput, fleet: &FleetSpec) -> Vec<f64> {
    let mut out = Vec::with_capacity(fleet.n_datacenters * model.n_models);
    for i in 0..fleet.n_datacenters {
        for l in 0..model.n_models {
            out.push(energy_price(input, i) * model.energy_per_load[model.idx(i, l)] + model.phi * model.perf_cost_per_load[l]);
        }
    }
    out
}

/// One linear piece of `F_i`: load moves from model `from` to model `to`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    from: Option<usize>,
    to: usize,
    length: f64,
    slope: f64,
}

/// Lower convex envelope of `F` for one DC with per-MW costs `c` and
/// resource use `r`.
fn envelope(c: &[f64], r: &[f64], cap: f64) -> Vec<Piece> {
    let l = c.len();
    let start = (0..l)
        .min_by(|&a, &b| c[a].total_cmp(&c[b]).then(r[a].total_cmp(&r[b])).then(a.cmp(&b)))
        .expect("at least one model");
    let mut pieces = vec![Piece {
        from: None,
        to: start,
        length: cap / r[start],
        slope: c[start],
    }];
    let mut a = start;
    loop {
        let slope = |b: usize| (c[b] * r[a] - c[a] * r[b]) / (r[a] - r[b]);
        let next = (0..l).filter(|&b| r[b] < r[a]).min_by(|&x, &y| {
            slope(x)
                .total_cmp(&slope(y))
                .then(r[x].total_cmp(&r[y]))
                .then(x.cmp(&y))
        });
        let Some(b) = next else { break };
        pieces.push(Piece {
            from: Some(a),
            to: b,
            length: cap / r[b] - cap / r[a],
            slope: slope(b),
        });
        a = b;
    }
    pieces
}

/// Model mix realizing `F(ℓ)` on the envelope.
fn mix(pieces: &[Piece], r: &[f64], cap: f64, load: f64, y: &mut [f64]) {
    y.iter_mut().for_each(|v| *v = 0.0);
    let first = pieces[0];
    let mut end = first.length;
    if load <= end || pieces.len() == 1 {
        y[first.to] = load;
        return;
    }
    for (k, p) in pieces.iter().enumerate().skip(1) {
        end += p.length;
        if load <= end || k + 1 == pieces.len() {
            let (a, b) = (p.from.expect("later pieces have a source"), p.to);
            let yb = ((r[a] * load - cap) / (r[a] - r[b])).clamp(0.0, load);
            y[b] = yb;
            y[a] = load - yb;
            return;
        }
    }
}

/// Cheapest routing and model mix for one slot.
pub fn solve_hetero_slot(model: &HeteroModel, fleet: &FleetSpec, input: &SlotInput, prices: &Prices) -> Result<SlotPlan> {
    let (n, nl, jn) = (fleet.n_datacenters, model.n_models, fleet.n_gateways);
    let mut envelopes = Vec::with_capacity(n);
    let mut inst = TransportInstance {
        unit_cost: Vec::new(),
        capacity: Vec::new(),
        demand: input.load.clone(),
        mask: Vec::new(),
    };
    let mut owner = Vec::new();
    for i in 0..n {
        let (ep, cr, wr) = (energy_price(input, i), carbon_rate(input, i), water_rate(input, i));
        let c: Vec<f64> = (0..nl)
            .map(|l| {
                let e = model.energy_per_load[model.idx(i, l)];
                unit_cost(
                    prices.cost,
                    ep * e,
                    model.phi * model.perf_cost_per_load[l],
                    prices.carbon[i],
                    cr * e,
                    prices.water[i],
                    wr * e,
                )
            })
            .collect();
        let r = &model.resource_per_load[i * nl..(i + 1) * nl];
        let env = envelope(&c, r, fleet.capacity[i]);
        for p in &env {
            inst.unit_cost.push(p.slope);
            inst.capacity.push(p.length);
            inst.mask.extend_from_slice(&fleet.connectivity[i * jn..(i + 1) * jn]);
            owner.push(i);
        }
        envelopes.push(env);
    }
    let flow = transport::solve(&inst).map_err(|e| e.at_slot(input.t))?;
    let mut routing = Decision::zeros(n, jn);
    for (v, &i) in owner.iter().enumerate() {
        for j in 0..jn {
            let add = flow.get(v, j);
            if add != 0.0 {
                routing.set(i, j, routing.get(i, j) + add);
            }
        }
    }
    let mut models = vec![0.0; n * nl];
    for i in 0..n {
        let r = &model.resource_per_load[i * nl..(i + 1) * nl];
        mix(&envelopes[i], r, fleet.capacity[i], routing.dc_load(i), &mut models[i * nl..(i + 1) * nl]);
    }
    Ok(SlotPlan {
        routing,
        models: Some(models),
    })
}

/// A trace served by a multi-model fleet.
#[derive(Debug, Clone, PartialEq)]
pub struct HeteroTrace {
    pub trace: Trace,
    pub model: HeteroModel,
}

impl HeteroTrace {
    pub fn new(trace: Trace, model: HeteroModel) -> Result<Self> {
        model.validate(&trace.fleet)?;
        Ok(HeteroTrace { trace, model })
    }

    fn energy(&self, y: &[f64]) -> Vec<f64> {
        let f = &self.trace.fleet;
        let nl = self.model.n_models;
        (0..f.n_datacenters)
            .map(|i| {
                let mut e = f.energy_offset(i);
                for l in 0..nl {
                    e += self.model.energy_per_load[i * nl + l] * y[i * nl + l];
                }
                e
            })
            .collect()
    }
}

impl SlotModel for HeteroTrace {
    fn fleet(&self) -> &FleetSpec {
        &self.trace.fleet
    }

    fn n_slots(&self) -> usize {
        self.trace.len()
    }

    fn solve(&self, t: usize, prices: &Prices) -> Result<SlotPlan> {
        solve_hetero_slot(&self.model, &self.trace.fleet, &self.trace.slots[t], prices)
    }

    fn impact(&self, t: usize, plan: &SlotPlan) -> SlotImpact {
        let nl = self.model.n_models;
        // With one model the mix is the DC load. Reading it off the routing
        // keeps blended plans bitwise equal to the homogeneous path.
        let loads;
        let y = if nl == 1 {
            loads = plan.routing.dc_loads();
            &loads[..]
        } else {
            plan.models.as_deref().expect("multi-model plans carry a model mix")
        };
        let mut perf = 0.0;
        for (k, &v) in y.iter().enumerate() {
            perf += self.model.perf_cost_per_load[k % nl] * v;
        }
        impact_from_energy(&self.trace.slots[t], &self.energy(y), self.model.phi * perf)
    }

    fn peak_footprint(&self, t: usize) -> (Vec<f64>, Vec<f64>) {
        let f = &self.trace.fleet;
        let nl = self.model.n_models;
        let e: Vec<f64> = (0..f.n_datacenters)
            .map(|i| {
                let per_cap = (0..nl)
                    .map(|l| self.model.energy_per_load[i * nl + l] / self.model.resource_per_load[i * nl + l])
                    .fold(0.0, f64::max);
                f.energy_offset(i) + f.capacity[i] * per_cap
            })
            .collect();
        let imp = impact_from_energy(&self.trace.slots[t], &e, 0.0);
        (imp.carbon, imp.water)
    }
}
