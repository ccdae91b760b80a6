use core::fmt;
use core::str::FromStr;

use eglb_core::baselines;
use eglb_core::hetero::{HeteroModel, HeteroTrace};
use eglb_core::metrics::RunReport;
use eglb_core::online::{self, RunConfig};
use eglb_core::slot::SlotModel;
use eglb_core::{EquitySpec, Error, Result, Schedule, Trace};

use crate::mpc::run_mpc;
use crate::offline::{solve_offline, OfflineOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Eglb,
    EglbOff,
    EglbMpc,
    Energy,
    Carbon,
    Water,
    C2,
    All,
    Nearest,
}

impl Algorithm {
    pub const ALL: [Algorithm; 9] = [
        Algorithm::Eglb,
        Algorithm::EglbOff,
        Algorithm::EglbMpc,
        Algorithm::Energy,
        Algorithm::Carbon,
        Algorithm::Water,
        Algorithm::C2,
        Algorithm::All,
        Algorithm::Nearest,
    ];

    /// Command-line name.
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Eglb => "eglb",
            Algorithm::EglbOff => "eglb-off",
            Algorithm::EglbMpc => "eglb-mpc",
            Algorithm::Energy => "energy",
            Algorithm::Carbon => "carbon",
            Algorithm::Water => "water",
            Algorithm::C2 => "c2",
            Algorithm::All => "all",
            Algorithm::Nearest => "nearest",
        }
    }

    /// Column heading in comparison tables.
    pub fn label(self) -> &'static str {
        match self {
            Algorithm::Eglb => "eGLB",
            Algorithm::EglbOff => "eGLB-Off",
            Algorithm::EglbMpc => "eGLB-MPC",
            Algorithm::Energy => "GLB-Energy",
            Algorithm::Carbon => "GLB-Carbon",
            Algorithm::Water => "GLB-Water",
            Algorithm::C2 => "GLB-C2",
            Algorithm::All => "GLB-All",
            Algorithm::Nearest => "GLB-Nearest",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown algorithm '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgorithmParams {
    pub equity: EquitySpec,
    pub eta: f64,
    pub window: usize,
    pub offline: OfflineOptions,
    /// Per-unit footprint weights of the weighted baselines.
    pub w_carbon: f64,
    pub w_water: f64,
    /// Overrides the default `z̄` of the online algorithm.
    pub zbar: Option<(Vec<f64>, Vec<f64>)>,
}

impl AlgorithmParams {
    /// Weighted baselines charge total footprints at the equity weights.
    pub fn new(equity: EquitySpec, eta: f64) -> Self {
        AlgorithmParams {
            w_carbon: equity.mu_carbon,
            w_water: equity.mu_water,
            equity,
            eta,
            window: 24,
            offline: OfflineOptions::default(),
            zbar: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineSummary {
    pub lower_bound: f64,
    pub gap_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub algorithm: Algorithm,
    pub schedule: Schedule,
    pub report: RunReport,
    /// Online runs only.
    pub config: Option<RunConfig>,
    /// Offline runs only.
    pub offline: Option<OfflineSummary>,
}

fn run_model<M: SlotModel + ?Sized>(model: &M, algo: Algorithm, p: &AlgorithmParams) -> Result<Outcome> {
    let eq = &p.equity;
    let plain = |(schedule, report): (Schedule, RunReport)| Outcome {
        algorithm: algo,
        schedule,
        report,
        config: None,
        offline: None,
    };
    Ok(match algo {
        Algorithm::Eglb => {
            let mut cfg = RunConfig::new(model, eq.clone(), p.eta);
            if let Some((zc, zw)) = &p.zbar {
                cfg.zbar_carbon = zc.clone();
                cfg.zbar_water = zw.clone();
            }
            let (schedule, report) = online::run(model, &cfg)?;
            Outcome {
                algorithm: algo,
                schedule,
                report,
                config: Some(cfg),
                offline: None,
            }
        }
        Algorithm::EglbOff => {
            let sol = solve_offline(model, eq, &p.offline)?;
            let report = eglb_core::metrics::report(model, &sol.plans, eq)?;
            Outcome {
                algorithm: algo,
                schedule: Schedule::from_plans(sol.plans),
                report,
                config: None,
                offline: Some(OfflineSummary {
                    lower_bound: sol.lower_bound,
                    gap_estimate: sol.gap_estimate,
                    iterations: sol.iterations,
                    converged: sol.converged,
                }),
            }
        }
        Algorithm::EglbMpc => plain(run_mpc(model, eq, p.window, &p.offline)?),
        Algorithm::Energy => plain(baselines::run_energy(model, eq)?),
        Algorithm::Carbon => plain(baselines::run_carbon(model, eq)?),
        Algorithm::Water => plain(baselines::run_water(model, eq)?),
        Algorithm::C2 => plain(baselines::run_weighted(model, eq, 1.0, p.w_carbon, 0.0)?),
        Algorithm::All => plain(baselines::run_weighted(model, eq, 1.0, p.w_carbon, p.w_water)?),
        Algorithm::Nearest => unreachable!("handled by the caller"),
    })
}

/// Runs `algo` on `trace`, on a multi-model fleet when `hetero` is given.
pub fn run_algorithm(trace: &Trace, hetero: Option<&HeteroModel>, algo: Algorithm, params: &AlgorithmParams) -> Result<Outcome> {
    match (algo, hetero) {
        (Algorithm::Nearest, None) => {
            let (schedule, report) = baselines::run_nearest(trace, &params.equity)?;
            Ok(Outcome {
                algorithm: algo,
                schedule,
                report,
                config: None,
                offline: None,
            })
        }
        (Algorithm::Nearest, Some(_)) => Err(Error::Config(
            "the nearest-DC baseline has no model selection; run it without a model file".into(),
        )),
        (_, None) => run_model(trace, algo, params),
        (_, Some(m)) => {
            let h = HeteroTrace::new(trace.clone(), m.clone())?;
            run_model(&h, algo, params)
        }
    }
}
