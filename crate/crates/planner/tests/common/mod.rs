#![allow(dead_code)]

use eglb_core::traces::{synth, DcProfile, LoadProfile, SeriesProfile, SynthProfile};
use eglb_core::{EnergyModel, FleetSpec, SizingMode, SlotInput, Trace};

pub fn series(mean: f64, amplitude: f64, noise: f64) -> SeriesProfile {
    SeriesProfile { mean, amplitude, noise }
}

/// `n` data centers of 1 MW; DC 0 is water-stressed and DC 1 carbon-heavy
/// while both are the cheapest.
pub fn skewed_profile(n: usize, gateways: usize) -> SynthProfile {
    let datacenters = (0..n)
        .map(|i| DcProfile {
            name: format!("dc{i}"),
            capacity_mw: 1.0,
            static_energy_mwh: 0.0,
            dynamic_energy_mwh: None,
            phase: i as f64 * 2.0,
            price: series(if i < 2 { 30.0 } else { 45.0 + 3.0 * i as f64 }, 0.25, 0.1),
            pue: series(1.1, 0.02, 0.0),
            carbon: series(if i == 1 { 0.8 } else { 0.3 + 0.02 * i as f64 }, 0.1, 0.05),
            wue_direct: series(if i == 0 { 9.0 } else { 1.5 + 0.2 * i as f64 }, 0.3, 0.05),
            wue_indirect: series(1.8, 0.0, 0.0),
        })
        .collect();
    SynthProfile {
        n_gateways: gateways,
        period: 24.0,
        slot_hours: 1.0,
        sizing_mode: SizingMode::PerfectRightSize,
        load: LoadProfile {
            total: series(0.45 * n as f64, 0.3, 0.05),
            phase: 0.0,
            gateway_perturbation: 0.1,
        },
        datacenters,
        connectivity: None,
        nearest: None,
    }
}

pub fn skewed(n: usize, gateways: usize, slots: usize, seed: u64) -> Trace {
    synth(&skewed_profile(n, gateways), slots, seed).unwrap()
}

/// Per-DC parameters of a hand-built slot.
#[derive(Debug, Clone)]
pub struct TinyDc {
    pub price: f64,
    pub pue: f64,
    pub carbon: f64,
    pub wue_direct: f64,
    pub wue_indirect: f64,
}

/// Unit-capacity DCs with one MWh per MW, a single gateway, and per-slot
/// DC parameters `dcs[t]`.
pub fn tiny(loads: &[f64], dcs: &[Vec<TinyDc>]) -> Trace {
    let n = dcs[0].len();
    let fleet = FleetSpec::fully_connected(
        vec![1.0; n],
        1,
        EnergyModel {
            static_energy: vec![0.0; n],
            dynamic_energy: vec![1.0; n],
            sizing_mode: SizingMode::PerfectRightSize,
        },
    );
    let slots = loads
        .iter()
        .zip(dcs)
        .enumerate()
        .map(|(t, (&l, d))| SlotInput {
            t,
            load: vec![l],
            price: d.iter().map(|x| x.price).collect(),
            pue: d.iter().map(|x| x.pue).collect(),
            carbon_intensity: d.iter().map(|x| x.carbon).collect(),
            wue_direct: d.iter().map(|x| x.wue_direct).collect(),
            wue_indirect: d.iter().map(|x| x.wue_indirect).collect(),
        })
        .collect();
    Trace::new(fleet, slots, String::new()).unwrap()
}

pub fn load_fixture() -> SynthProfile {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/skewed10.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
