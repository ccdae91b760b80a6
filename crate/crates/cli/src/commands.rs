use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context};
use eglb_core::bounds::{self, BoundCheck, BoundConstants};
use eglb_core::hetero::{HeteroModel, HeteroTrace};
use eglb_core::slot::SlotModel;
use eglb_core::traces::{augment, synth, SynthProfile};
use eglb_core::{EquitySpec, Error, RunReport, Trace};
use eglb_planner::{run_algorithm, solve_offline, Algorithm, AlgorithmParams, OfflineOptions, Outcome};
use serde::{Deserialize, Serialize};

use crate::io::{self, Cell};
use crate::table::{self, Stat};
use crate::{CompareArgs, Common, Failure, GenArgs, RunArgs, VerifyArgs};

/// Column order of comparison tables.
const COMPARE_ORDER: [Algorithm; 9] = [
    Algorithm::Energy,
    Algorithm::Carbon,
    Algorithm::Water,
    Algorithm::C2,
    Algorithm::All,
    Algorithm::Nearest,
    Algorithm::EglbOff,
    Algorithm::EglbMpc,
    Algorithm::Eglb,
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceInfo {
    pub provenance: String,
    pub n_slots: usize,
    pub n_datacenters: usize,
    pub n_gateways: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsInfo {
    pub eta: f64,
    pub mu_carbon: f64,
    pub mu_water: f64,
    pub normalize_by_capacity: bool,
    pub window: usize,
    pub w_carbon: f64,
    pub w_water: f64,
    pub tol: f64,
    pub max_iters: usize,
    pub multi_model: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigInfo {
    pub zbar_carbon: Vec<f64>,
    pub zbar_water: Vec<f64>,
    pub kappa_init: Vec<f64>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OfflineInfo {
    pub lower_bound: f64,
    pub gap_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsInfo {
    pub constants: BoundConstants,
    /// Certified lower bound on the offline optimum used as the comparator.
    pub offline_lower_bound: f64,
    pub theorem: BoundCheck,
    pub dual_norm: BoundCheck,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: String,
    pub label: String,
    pub trace: TraceInfo,
    pub params: ParamsInfo,
    pub report: RunReport,
    pub config: Option<ConfigInfo>,
    pub offline: Option<OfflineInfo>,
    pub bounds: Option<BoundsInfo>,
}

struct Setup {
    trace: Trace,
    hetero: Option<HeteroModel>,
    params: AlgorithmParams,
}

impl Setup {
    fn load(c: &Common) -> anyhow::Result<Self> {
        if !(c.eta > 0.0 && c.eta.is_finite()) {
            bail!("--eta must be positive, got {}", c.eta);
        }
        let trace = io::load_trace(&c.trace)?;
        let hetero = match &c.hetero {
            Some(p) => {
                let m: HeteroModel = io::read_json(p)?;
                m.validate(&trace.fleet).with_context(|| format!("invalid model file {}", p.display()))?;
                Some(m)
            }
            None => None,
        };
        let mut equity = EquitySpec::uniform(trace.fleet.n_datacenters, c.mu_c, c.mu_w);
        equity.normalize_by_capacity = c.normalize;
        equity.validate(trace.fleet.n_datacenters)?;
        let mut params = AlgorithmParams::new(equity, c.eta);
        params.window = c.window;
        params.offline = OfflineOptions {
            tol: c.tol,
            max_iters: c.max_iters,
        };
        if let Some(w) = c.w_carbon {
            params.w_carbon = w;
        }
        if let Some(w) = c.w_water {
            params.w_water = w;
        }
        Ok(Setup { trace, hetero, params })
    }

    fn info(&self) -> TraceInfo {
        TraceInfo {
            provenance: self.trace.provenance.clone(),
            n_slots: self.trace.len(),
            n_datacenters: self.trace.fleet.n_datacenters,
            n_gateways: self.trace.fleet.n_gateways,
        }
    }

    fn params_info(&self) -> ParamsInfo {
        let p = &self.params;
        ParamsInfo {
            eta: p.eta,
            mu_carbon: p.equity.mu_carbon,
            mu_water: p.equity.mu_water,
            normalize_by_capacity: p.equity.normalize_by_capacity,
            window: p.window,
            w_carbon: p.w_carbon,
            w_water: p.w_water,
            tol: p.offline.tol,
            max_iters: p.offline.max_iters,
            multi_model: self.hetero.is_some(),
        }
    }

    fn run(&self, algo: Algorithm) -> eglb_core::Result<Outcome> {
        run_algorithm(&self.trace, self.hetero.as_ref(), algo, &self.params)
    }

    /// Both bound checks of an online outcome, against an offline solve on
    /// the same fleet.
    fn bounds(&self, out: &Outcome) -> anyhow::Result<Option<BoundsInfo>> {
        let Some(cfg) = &out.config else { return Ok(None) };
        let check = |model: &dyn SlotModel| -> anyhow::Result<BoundsInfo> {
            let eq = &self.params.equity;
            let k = bounds::constants(model, eq, &cfg.zbar_carbon, &cfg.zbar_water)?;
            let off = solve_offline(model, eq, &self.params.offline)?;
            let slots = model.n_slots();
            Ok(BoundsInfo {
                constants: k,
                offline_lower_bound: off.lower_bound,
                theorem: bounds::check_theorem1(out.report.objective, off.lower_bound, &k, cfg.eta, slots),
                dual_norm: bounds::check_dual_norm(&out.schedule, &k, cfg.eta),
            })
        };
        Ok(Some(match &self.hetero {
            Some(m) => check(&HeteroTrace::new(self.trace.clone(), m.clone())?)?,
            None => check(&self.trace)?,
        }))
    }
}

fn record(setup: &Setup, out: &Outcome, bounds: Option<BoundsInfo>) -> RunRecord {
    RunRecord {
        algorithm: out.algorithm.name().to_string(),
        label: out.algorithm.label().to_string(),
        trace: setup.info(),
        params: setup.params_info(),
        report: out.report.clone(),
        config: out.config.as_ref().map(|c| ConfigInfo {
            zbar_carbon: c.zbar_carbon.clone(),
            zbar_water: c.zbar_water.clone(),
            kappa_init: c.kappa_init.clone(),
            warnings: c.warnings(),
        }),
        offline: out.offline.as_ref().map(|o| OfflineInfo {
            lower_bound: o.lower_bound,
            gap_estimate: o.gap_estimate,
            iterations: o.iterations,
            converged: o.converged,
        }),
        bounds,
    }
}

pub const REPORT: &str = "report.json";
pub const SCHEDULE: &str = "schedule.csv";
pub const MODELS: &str = "models.csv";
pub const DUALS: &str = "duals.csv";

fn write_schedule(dir: &Path, trace: &Trace, out: &Outcome) -> anyhow::Result<()> {
    let f = &trace.fleet;
    let plans = &out.schedule.plans;
    io::write_csv(
        &dir.join(SCHEDULE),
        &["t", "dc", "gateway", "load_mw"],
        plans.iter().enumerate().flat_map(|(t, p)| {
            (0..f.n_datacenters).flat_map(move |i| {
                (0..f.n_gateways)
                    .filter(move |&g| f.allowed(i, g))
                    .map(move |g| [Cell::I(t), Cell::I(i), Cell::I(g), Cell::F(p.routing.get(i, g))])
            })
        }),
    )?;
    if let Some(nl) = plans.first().and_then(|p| p.models.as_ref()).map(|m| m.len() / f.n_datacenters) {
        io::write_csv(
            &dir.join(MODELS),
            &["t", "dc", "model", "load_mw"],
            plans.iter().enumerate().flat_map(|(t, p)| {
                let y = p.models.clone().unwrap_or_default();
                (0..y.len()).map(move |k| [Cell::I(t), Cell::I(k / nl), Cell::I(k % nl), Cell::F(y[k])])
            }),
        )?;
    }
    let n = f.n_datacenters;
    io::write_csv(
        &dir.join(DUALS),
        &["t", "dc", "kappa_carbon", "kappa_water"],
        out.schedule
            .dual_trajectory
            .iter()
            .enumerate()
            .flat_map(|(t, k)| (0..n).map(move |i| [Cell::I(t), Cell::I(i), Cell::F(k[i]), Cell::F(k[n + i])])),
    )
}

pub fn run(a: &RunArgs) -> Result<(), Failure> {
    let setup = Setup::load(&a.common)?;
    let out = setup.run(a.algo).map_err(|e| anyhow!(e).context(format!("{} failed", a.algo)))?;
    let bounds = setup.bounds(&out)?;
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    write_schedule(&a.out, &setup.trace, &out)?;
    io::write_json(&a.out.join(REPORT), &record(&setup, &out, bounds))?;
    Ok(())
}

#[derive(Serialize)]
struct CompareEntry {
    algorithm: String,
    label: String,
    /// Why the algorithm produced no schedule, if it did not.
    note: Option<String>,
    report: Option<RunReport>,
}

pub fn compare(a: &CompareArgs) -> Result<(), Failure> {
    let setup = Setup::load(&a.common)?;
    let shared = &setup;
    let results: Vec<eglb_core::Result<Outcome>> = std::thread::scope(|s| {
        let handles: Vec<_> = COMPARE_ORDER.iter().map(|&algo| s.spawn(move || shared.run(algo))).collect();
        handles.into_iter().map(|h| h.join().expect("algorithm thread panicked")).collect()
    });
    let mut entries = Vec::new();
    for (algo, res) in COMPARE_ORDER.iter().zip(results) {
        let (note, report) = match res {
            Ok(out) => (None, Some(out.report)),
            // Nearest routing has no fallback when a region overflows or the
            // fleet is multi-model; the column is reported as missing.
            Err(e @ (Error::CapacityExceeded { .. } | Error::Config(_))) if *algo == Algorithm::Nearest => {
                (Some(e.to_string()), None)
            }
            Err(e) => return Err(anyhow!(e).context(format!("{algo} failed")).into()),
        };
        entries.push(CompareEntry {
            algorithm: algo.name().to_string(),
            label: algo.label().to_string(),
            note,
            report,
        });
    }
    let columns: Vec<(&str, Option<&RunReport>)> = entries.iter().map(|e| (e.label.as_str(), e.report.as_ref())).collect();
    let mut text = table::render(&columns);
    let p = &setup.params;
    text.push_str(&format!(
        "\nGLB-C2 prices total carbon at {} USD/ton; GLB-All adds total water at {} USD/m3.\n",
        p.w_carbon, p.w_water
    ));
    let report_of = |algo: Algorithm| entries.iter().find(|e| e.algorithm == algo.name()).and_then(|e| e.report.as_ref());
    if let Some(off) = report_of(Algorithm::EglbOff) {
        // The weighted baselines are meant to undercut eGLB-Off's totals.
        let checks: [(Algorithm, &str, Stat); 3] = [
            (Algorithm::C2, "carbon", |r| r.carbon.total),
            (Algorithm::All, "carbon", |r| r.carbon.total),
            (Algorithm::All, "water", |r| r.water.total),
        ];
        for (algo, what, f) in checks {
            if let Some(r) = report_of(algo) {
                let below = if f(r) < f(off) { "below" } else { "not below" };
                text.push_str(&format!(
                    "{} total {what} {:.3} is {below} eGLB-Off's {:.3}.\n",
                    algo.label(),
                    f(r),
                    f(off)
                ));
            }
        }
    }
    for e in entries.iter().filter(|e| e.note.is_some()) {
        text.push_str(&format!("{}: {}\n", e.label, e.note.as_deref().unwrap_or_default()));
    }
    print!("{text}");
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let (header, rows) = table::csv_rows(&columns);
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        io::write_csv(&dir.join("compare.csv"), &header, rows)?;
        fs::write(dir.join("compare.txt"), &text).context("cannot write compare.txt")?;
        #[derive(Serialize)]
        struct Doc<'a> {
            trace: TraceInfo,
            params: ParamsInfo,
            algorithms: &'a [CompareEntry],
        }
        io::write_json(
            &dir.join("compare.json"),
            &Doc {
                trace: setup.info(),
                params: setup.params_info(),
                algorithms: &entries,
            },
        )?;
    }
    Ok(())
}

pub fn gen(a: &GenArgs) -> Result<(), Failure> {
    let profile: SynthProfile = io::read_json(&a.profile)?;
    let per_day = 24.0 / profile.slot_hours;
    if !(per_day >= 1.0 && (per_day - per_day.round()).abs() < 1e-9) {
        return Err(anyhow!("slot_hours {} does not divide a day", profile.slot_hours).into());
    }
    let per_day = per_day.round() as usize;
    if a.days == 0 {
        return Err(anyhow!("--days must be at least 1").into());
    }
    let mut trace = synth(&profile, a.days * per_day, a.seed)?;
    if let Some(extra) = a.augment_days {
        trace = augment(&trace, extra * per_day, a.perturbation, a.seed)?;
        trace.provenance.push_str(&format!(", augmented to {extra} days (perturbation {})", a.perturbation));
    }
    let names: Vec<&str> = profile.datacenters.iter().map(|d| d.name.as_str()).collect();
    if names.iter().any(|n| !n.is_empty()) {
        trace.provenance.push_str(&format!("; data centers: {}", names.join(", ")));
    }
    io::save_trace(&trace, &a.out)?;
    Ok(())
}

#[derive(Deserialize)]
struct DualRow {
    t: usize,
    dc: usize,
    kappa_carbon: f64,
    kappa_water: f64,
}

/// Multiplier trajectory from `duals.csv`, one `[κ_c; κ_w]` per row group.
fn read_duals(path: &Path, n: usize) -> anyhow::Result<Vec<Vec<f64>>> {
    let mut rdr = csv::Reader::from_path(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut traj: Vec<Vec<f64>> = Vec::new();
    for (k, rec) in rdr.deserialize::<DualRow>().enumerate() {
        let line = k + 2;
        let r = rec.map_err(|e| anyhow!("{DUALS}:{line}: {e}"))?;
        if r.dc >= n || r.t > traj.len() || (r.t == traj.len()) != (r.dc == 0) || (r.t < traj.len() && r.t + 1 != traj.len()) {
            bail!("{DUALS}:{line}: rows must be ordered by t then dc");
        }
        if r.dc == 0 {
            traj.push(vec![f64::NAN; 2 * n]);
        }
        let row = traj.last_mut().expect("pushed above");
        row[r.dc] = r.kappa_carbon;
        row[n + r.dc] = r.kappa_water;
    }
    Ok(traj)
}

pub fn verify_bound(a: &VerifyArgs) -> Result<(), Failure> {
    let rec: RunRecord = io::read_json(&a.run.join(REPORT))?;
    let Some(b) = &rec.bounds else {
        return Err(anyhow!("{} holds a {} run; bounds apply to eglb runs only", a.run.display(), rec.algorithm).into());
    };
    let n = rec.trace.n_datacenters;
    let slots = rec.trace.n_slots;
    let traj = read_duals(&a.run.join(DUALS), n)?;
    if traj.len() != slots + 1 {
        return Err(Failure::Check(format!(
            "{DUALS} holds {} multipliers, expected {} for {slots} slots",
            traj.len(),
            slots + 1
        )));
    }
    if let Some(t) = traj.iter().position(|k| k.iter().any(|v| !(*v >= 0.0) || !v.is_finite())) {
        return Err(Failure::Check(format!("multiplier {t} in {DUALS} is negative or not a number")));
    }
    let eta = rec.params.eta;
    let dual = bounds::check_final_dual(&traj[slots], &b.constants, eta, slots);
    let theorem = bounds::check_theorem1(rec.report.objective, b.offline_lower_bound, &b.constants, eta, slots);
    println!(
        "theorem: {} (cost {} <= bound {}, slack {})",
        verdict(&theorem),
        theorem.lhs,
        theorem.rhs,
        theorem.slack
    );
    println!(
        "dual norm: {} (norm {} <= bound {}, slack {})",
        verdict(&dual),
        dual.lhs,
        dual.rhs,
        dual.slack
    );
    let failed: Vec<&str> = [("theorem", theorem), ("dual norm", dual)]
        .iter()
        .filter(|(_, c)| !c.pass)
        .map(|(name, _)| *name)
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(failed.join(", ")))
    }
}

fn verdict(c: &BoundCheck) -> &'static str {
    if c.pass {
        "pass"
    } else {
        "FAIL"
    }
}
