//! Trace directories: long-format CSV files plus an optional `trace.json`.
//!
//! ```text
//! workloads.csv     t,gateway,load_mw
//! datacenters.csv   t,dc,price_usd_per_mwh,pue,carbon_ton_per_mwh,wue_direct_m3_per_mwh,wue_indirect_m3_per_mwh
//! fleet.csv         dc,capacity_mw,static_energy_mwh,dynamic_energy_mwh
//! connectivity.csv  dc,gateway,allowed          (optional, default all 1)
//! nearest.csv       gateway,dc                  (optional, default j mod N)
//! trace.json        {provenance, sizing_mode, slot_hours}   (optional)
//! ```
//!
//! Floats are written with `{}`, the shortest decimal that parses back to
//! the same bits, so `load(save(trace))` is exact.

use std::fmt::Display;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use eglb_core::{EnergyModel, FleetSpec, SizingMode, SlotInput, Trace};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

pub const WORKLOADS: &str = "workloads.csv";
pub const DATACENTERS: &str = "datacenters.csv";
pub const FLEET: &str = "fleet.csv";
pub const CONNECTIVITY: &str = "connectivity.csv";
pub const NEAREST: &str = "nearest.csv";
pub const META: &str = "trace.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceMeta {
    #[serde(default)]
    pub provenance: String,
    #[serde(default)]
    pub sizing_mode: SizingMode,
    #[serde(default = "one")]
    pub slot_hours: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Deserialize)]
struct WorkloadRow {
    t: usize,
    gateway: usize,
    load_mw: f64,
}

#[derive(Deserialize)]
struct DcRow {
    t: usize,
    dc: usize,
    price_usd_per_mwh: f64,
    pue: f64,
    carbon_ton_per_mwh: f64,
    wue_direct_m3_per_mwh: f64,
    wue_indirect_m3_per_mwh: f64,
}

#[derive(Deserialize)]
struct FleetRow {
    dc: usize,
    capacity_mw: f64,
    static_energy_mwh: f64,
    dynamic_energy_mwh: f64,
}

#[derive(Deserialize)]
struct ConnectivityRow {
    dc: usize,
    gateway: usize,
    allowed: u8,
}

#[derive(Deserialize)]
struct NearestRow {
    gateway: usize,
    dc: usize,
}

/// Rows of `file` paired with their 1-based line numbers.
fn read_rows<T: DeserializeOwned>(dir: &Path, file: &str) -> Result<Vec<(u64, T)>> {
    let path = dir.join(file);
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(&path)
        .with_context(|| format!("cannot open {}", path.display()))?;
    let mut rows = Vec::new();
    // Data starts on line 2; the format has no multi-line fields.
    for (k, rec) in rdr.deserialize().enumerate() {
        let line = k as u64 + 2;
        let row: T = rec.map_err(|e| anyhow!("{file}:{line}: {e}"))?;
        rows.push((line, row));
    }
    Ok(rows)
}

fn check_value(file: &str, line: u64, field: &str, v: f64, positive: bool) -> Result<()> {
    if !v.is_finite() || v < 0.0 || (positive && v == 0.0) {
        let need = if positive { "positive" } else { "nonnegative" };
        bail!("{file}:{line}: {field} must be finite and {need}, got {v}");
    }
    Ok(())
}

/// Places `value` at `grid[a][b]`, rejecting duplicates.
fn place<T: Copy>(grid: &mut [Vec<Option<T>>], a: usize, b: usize, value: T, file: &str, line: u64) -> Result<()> {
    let cell = &mut grid[a][b];
    if cell.is_some() {
        bail!("{file}:{line}: duplicate entry ({a}, {b})");
    }
    *cell = Some(value);
    Ok(())
}

fn complete<T: Copy>(grid: Vec<Vec<Option<T>>>, file: &str, names: (&str, &str)) -> Result<Vec<Vec<T>>> {
    grid.into_iter()
        .enumerate()
        .map(|(a, row)| {
            row.into_iter()
                .enumerate()
                .map(|(b, v)| v.ok_or_else(|| anyhow!("{file}: missing row for {}={a}, {}={b}", names.0, names.1)))
                .collect()
        })
        .collect()
}

pub fn load_trace(dir: &Path) -> Result<Trace> {
    let meta: TraceMeta = match fs::read_to_string(dir.join(META)) {
        Ok(s) => serde_json::from_str(&s).with_context(|| format!("{META}: malformed"))?,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => TraceMeta {
            provenance: String::new(),
            sizing_mode: SizingMode::default(),
            slot_hours: 1.0,
        },
        Err(e) => return Err(e).with_context(|| format!("cannot read {}", dir.join(META).display())),
    };

    let fleet_rows: Vec<(u64, FleetRow)> = read_rows(dir, FLEET)?;
    let n = fleet_rows.iter().map(|(_, r)| r.dc + 1).max().ok_or_else(|| anyhow!("{FLEET}: no data centers"))?;
    let mut fleet_grid = vec![vec![None]; n];
    for (line, r) in &fleet_rows {
        check_value(FLEET, *line, "capacity_mw", r.capacity_mw, true)?;
        check_value(FLEET, *line, "static_energy_mwh", r.static_energy_mwh, false)?;
        check_value(FLEET, *line, "dynamic_energy_mwh", r.dynamic_energy_mwh, true)?;
        place(&mut fleet_grid, r.dc, 0, (r.capacity_mw, r.static_energy_mwh, r.dynamic_energy_mwh), FLEET, *line)?;
    }
    let fleet_cols: Vec<(f64, f64, f64)> = complete(fleet_grid, FLEET, ("dc", "column"))?.into_iter().map(|r| r[0]).collect();

    let work: Vec<(u64, WorkloadRow)> = read_rows(dir, WORKLOADS)?;
    let slots = work.iter().map(|(_, r)| r.t + 1).max().ok_or_else(|| anyhow!("{WORKLOADS}: no rows"))?;
    let j = work.iter().map(|(_, r)| r.gateway + 1).max().unwrap_or(0);
    let mut loads = vec![vec![None; j]; slots];
    for (line, r) in &work {
        check_value(WORKLOADS, *line, "load_mw", r.load_mw, false)?;
        place(&mut loads, r.t, r.gateway, r.load_mw, WORKLOADS, *line)?;
    }
    let loads = complete(loads, WORKLOADS, ("t", "gateway"))?;

    let dcs: Vec<(u64, DcRow)> = read_rows(dir, DATACENTERS)?;
    let mut params = vec![vec![None; n]; slots];
    for (line, r) in &dcs {
        if r.t >= slots {
            bail!("{DATACENTERS}:{line}: slot {} beyond the {slots} slots of {WORKLOADS}", r.t);
        }
        if r.dc >= n {
            bail!("{DATACENTERS}:{line}: data center {} not in {FLEET}", r.dc);
        }
        check_value(DATACENTERS, *line, "price_usd_per_mwh", r.price_usd_per_mwh, false)?;
        check_value(DATACENTERS, *line, "pue", r.pue, true)?;
        check_value(DATACENTERS, *line, "carbon_ton_per_mwh", r.carbon_ton_per_mwh, false)?;
        check_value(DATACENTERS, *line, "wue_direct_m3_per_mwh", r.wue_direct_m3_per_mwh, false)?;
        check_value(DATACENTERS, *line, "wue_indirect_m3_per_mwh", r.wue_indirect_m3_per_mwh, false)?;
        let v = [
            r.price_usd_per_mwh,
            r.pue,
            r.carbon_ton_per_mwh,
            r.wue_direct_m3_per_mwh,
            r.wue_indirect_m3_per_mwh,
        ];
        place(&mut params, r.t, r.dc, v, DATACENTERS, *line)?;
    }
    let params = complete(params, DATACENTERS, ("t", "dc"))?;

    let mut fleet = FleetSpec::fully_connected(
        fleet_cols.iter().map(|c| c.0).collect(),
        j,
        EnergyModel {
            static_energy: fleet_cols.iter().map(|c| c.1).collect(),
            dynamic_energy: fleet_cols.iter().map(|c| c.2).collect(),
            sizing_mode: meta.sizing_mode,
        },
    );
    fleet.slot_hours = meta.slot_hours;
    if dir.join(CONNECTIVITY).exists() {
        let mut grid = vec![vec![None; j]; n];
        for (line, r) in read_rows::<ConnectivityRow>(dir, CONNECTIVITY)? {
            if r.dc >= n || r.gateway >= j || r.allowed > 1 {
                bail!("{CONNECTIVITY}:{line}: entry ({}, {}, {}) out of range", r.dc, r.gateway, r.allowed);
            }
            place(&mut grid, r.dc, r.gateway, r.allowed == 1, CONNECTIVITY, line)?;
        }
        fleet.connectivity = complete(grid, CONNECTIVITY, ("dc", "gateway"))?.concat();
    }
    if dir.join(NEAREST).exists() {
        let mut grid = vec![vec![None]; j];
        for (line, r) in read_rows::<NearestRow>(dir, NEAREST)? {
            if r.gateway >= j || r.dc >= n {
                bail!("{NEAREST}:{line}: entry ({}, {}) out of range", r.gateway, r.dc);
            }
            place(&mut grid, r.gateway, 0, r.dc, NEAREST, line)?;
        }
        fleet.nearest_map = complete(grid, NEAREST, ("gateway", "column"))?.into_iter().map(|r| r[0]).collect();
    }

    let slots = loads
        .into_iter()
        .zip(params)
        .enumerate()
        .map(|(t, (load, p))| SlotInput {
            t,
            load,
            price: p.iter().map(|v| v[0]).collect(),
            pue: p.iter().map(|v| v[1]).collect(),
            carbon_intensity: p.iter().map(|v| v[2]).collect(),
            wue_direct: p.iter().map(|v| v[3]).collect(),
            wue_indirect: p.iter().map(|v| v[4]).collect(),
        })
        .collect();
    Trace::new(fleet, slots, meta.provenance).with_context(|| format!("invalid trace in {}", dir.display()))
}

/// Writes rows of `Display` fields, header first.
pub fn write_csv<R, I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: Display,
{
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.into_iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Tabular cell that is either an index or a float.
#[derive(Clone, Copy)]
pub enum Cell {
    I(usize),
    F(f64),
}

impl Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::I(v) => write!(f, "{v}"),
            Cell::F(v) => write!(f, "{v}"),
        }
    }
}

pub fn save_trace(trace: &Trace, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let f = &trace.fleet;
    let (n, j) = (f.n_datacenters, f.n_gateways);
    write_csv(
        &dir.join(WORKLOADS),
        &["t", "gateway", "load_mw"],
        trace
            .slots
            .iter()
            .flat_map(|s| s.load.iter().enumerate().map(move |(g, &l)| [Cell::I(s.t), Cell::I(g), Cell::F(l)])),
    )?;
    write_csv(
        &dir.join(DATACENTERS),
        &[
            "t",
            "dc",
            "price_usd_per_mwh",
            "pue",
            "carbon_ton_per_mwh",
            "wue_direct_m3_per_mwh",
            "wue_indirect_m3_per_mwh",
        ],
        trace.slots.iter().flat_map(|s| {
            (0..n).map(move |i| {
                [
                    Cell::I(s.t),
                    Cell::I(i),
                    Cell::F(s.price[i]),
                    Cell::F(s.pue[i]),
                    Cell::F(s.carbon_intensity[i]),
                    Cell::F(s.wue_direct[i]),
                    Cell::F(s.wue_indirect[i]),
                ]
            })
        }),
    )?;
    write_csv(
        &dir.join(FLEET),
        &["dc", "capacity_mw", "static_energy_mwh", "dynamic_energy_mwh"],
        (0..n).map(|i| {
            [
                Cell::I(i),
                Cell::F(f.capacity[i]),
                Cell::F(f.energy_model.static_energy[i]),
                Cell::F(f.energy_model.dynamic_energy[i]),
            ]
        }),
    )?;
    write_csv(
        &dir.join(CONNECTIVITY),
        &["dc", "gateway", "allowed"],
        (0..n).flat_map(|i| (0..j).map(move |g| [i, g, usize::from(f.allowed(i, g))])),
    )?;
    write_csv(
        &dir.join(NEAREST),
        &["gateway", "dc"],
        f.nearest_map.iter().enumerate().map(|(g, &i)| [g, i]),
    )?;
    let meta = TraceMeta {
        provenance: trace.provenance.clone(),
        sizing_mode: f.energy_model.sizing_mode,
        slot_hours: f.slot_hours,
    };
    write_json(&dir.join(META), &meta)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    fs::write(path, s).with_context(|| format!("cannot write {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let s = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&s).with_context(|| format!("{}: malformed", path.display()))
}
