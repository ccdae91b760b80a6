//! Column generation for the offline problem over a horizon of slots.
//!
//! Given LP duals `π ≥ 0` with `Σπ ≤ μ` for each block, the Lagrangian
//!
//! ```text
//! L(π) = (1/D)·[Σ_t min_x (g_t(x) + κ_cᵀĉ_t(x) + κ_wᵀŵ_t(x)) + κ_cᵀa_c + κ_wᵀa_w],   κ = π∘θ
//! ```
//!
//! is a lower bound on the horizon objective because
//! `μ·max_i θ_i v_i ≥ Σ_i π_i θ_i v_i`. The inner minimum is one
//! transportation problem per slot, and its minimizer is the new column.

use eglb_core::metrics;
use eglb_core::slot::{scaled, Prices, SlotImpact, SlotModel, SlotPlan};
use eglb_core::{EquitySpec, FleetSpec, Result};

use crate::master::{project_pi, solve_master, Block, Column};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OfflineOptions {
    /// Relative duality gap at which to stop.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for OfflineOptions {
    fn default() -> Self {
        OfflineOptions {
            tol: 1e-4,
            max_iters: 400,
        }
    }
}

/// Slots `start..end` of a longer run. `carried_*` are the raw (unscaled)
/// per-DC footprint totals of the `elapsed` slots before `start`.
#[derive(Debug, Clone, Copy)]
pub struct WindowSpec<'a> {
    pub start: usize,
    pub end: usize,
    pub elapsed: usize,
    pub carried_carbon: &'a [f64],
    pub carried_water: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct HorizonSolution {
    pub plans: Vec<SlotPlan>,
    /// Horizon objective of `plans`, carried footprints included.
    pub upper_bound: f64,
    pub lower_bound: f64,
    pub gap_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `[κ_c; κ_w]` of the best lower bound.
    pub kappa: Vec<f64>,
    /// Every plan generated per slot.
    pub pool: Vec<Vec<SlotPlan>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OfflineSolution {
    pub plans: Vec<SlotPlan>,
    pub objective: f64,
    pub lower_bound: f64,
    pub gap_estimate: f64,
    pub iterations: usize,
    pub converged: bool,
    pub kappa: Vec<f64>,
}

/// Slots `start..start+len` of `inner`, indexed from zero.
struct View<'a, M: ?Sized> {
    inner: &'a M,
    start: usize,
    len: usize,
}

impl<M: SlotModel + ?Sized> SlotModel for View<'_, M> {
    fn fleet(&self) -> &FleetSpec {
        self.inner.fleet()
    }

    fn n_slots(&self) -> usize {
        self.len
    }

    fn solve(&self, t: usize, prices: &Prices) -> Result<SlotPlan> {
        self.inner.solve(self.start + t, prices)
    }

    fn impact(&self, t: usize, plan: &SlotPlan) -> SlotImpact {
        self.inner.impact(self.start + t, plan)
    }

    fn peak_footprint(&self, t: usize) -> (Vec<f64>, Vec<f64>) {
        self.inner.peak_footprint(self.start + t)
    }
}

struct Pool<'a, M: ?Sized> {
    model: &'a M,
    equity: &'a EquitySpec,
    plans: Vec<Vec<SlotPlan>>,
    columns: Vec<Vec<Column>>,
}

impl<M: SlotModel + ?Sized> Pool<'_, M> {
    fn column(&self, t: usize, plan: &SlotPlan) -> Column {
        let f = self.model.fleet();
        let imp = self.model.impact(t, plan);
        Column {
            cost: imp.operating_cost(),
            carbon: scaled(f, self.equity, &imp.carbon),
            water: scaled(f, self.equity, &imp.water),
        }
    }

    /// Adds `plan` unless slot `t` already has it; returns its column.
    fn add(&mut self, t: usize, plan: SlotPlan) -> (bool, Column) {
        if let Some(k) = self.plans[t].iter().position(|p| *p == plan) {
            return (false, self.columns[t][k].clone());
        }
        let col = self.column(t, &plan);
        self.plans[t].push(plan);
        self.columns[t].push(col.clone());
        (true, col)
    }
}

fn horizon_objective(
    impacts: &[SlotImpact],
    fleet: &FleetSpec,
    equity: &EquitySpec,
    carried: (&[f64], &[f64]),
    horizon: f64,
) -> f64 {
    let n = fleet.n_datacenters;
    let mut cost = 0.0;
    let mut c = carried.0.to_vec();
    let mut w = carried.1.to_vec();
    for imp in impacts {
        cost += imp.operating_cost();
        for i in 0..n {
            c[i] += imp.carbon[i];
            w[i] += imp.water[i];
        }
    }
    let (mut top_c, mut top_w) = (0.0f64, 0.0f64);
    for i in 0..n {
        let s = equity.scale(fleet, i);
        top_c = top_c.max(equity.theta_carbon[i] * (c[i] * s / horizon));
        top_w = top_w.max(equity.theta_water[i] * (w[i] * s / horizon));
    }
    cost / horizon + equity.mu_carbon * top_c + equity.mu_water * top_w
}

/// Optimal plans for slots `window.start..window.end`, minimizing energy cost
/// plus the max terms evaluated on carried-plus-window footprints, all
/// divided by `elapsed + window length`. `warm` seeds the column pool.
pub fn solve_window<M: SlotModel + ?Sized>(
    model: &M,
    equity: &EquitySpec,
    window: &WindowSpec,
    opts: &OfflineOptions,
    warm: Option<&[Vec<SlotPlan>]>,
) -> Result<HorizonSolution> {
    let fleet = model.fleet();
    let n = fleet.n_datacenters;
    equity.validate(n)?;
    if window.end <= window.start || window.end > model.n_slots() {
        return Err(eglb_core::Error::Config(format!(
            "window {}..{} outside a {}-slot trace",
            window.start,
            window.end,
            model.n_slots()
        )));
    }
    let len = window.end - window.start;
    let view = View {
        inner: model,
        start: window.start,
        len,
    };
    let horizon = (window.elapsed + len) as f64;
    let carried_c = scaled(fleet, equity, window.carried_carbon);
    let carried_w = scaled(fleet, equity, window.carried_water);
    let zeros = vec![0.0; n];
    let ones: Vec<f64> = (0..n).map(|i| equity.scale(fleet, i)).collect();

    let energy_only = Prices {
        cost: 1.0,
        carbon: &zeros,
        water: &zeros,
    };
    if equity.mu_carbon == 0.0 && equity.mu_water == 0.0 {
        let plans = (0..len).map(|t| view.solve(t, &energy_only)).collect::<Result<Vec<_>>>()?;
        let impacts: Vec<SlotImpact> = plans.iter().enumerate().map(|(t, p)| view.impact(t, p)).collect();
        let v = horizon_objective(&impacts, fleet, equity, (window.carried_carbon, window.carried_water), horizon);
        return Ok(HorizonSolution {
            pool: plans.iter().map(|p| vec![p.clone()]).collect(),
            plans,
            upper_bound: v,
            lower_bound: v,
            gap_estimate: 0.0,
            iterations: 0,
            converged: true,
            kappa: vec![0.0; 2 * n],
        });
    }

    let mut pool = Pool {
        model: &view,
        equity,
        plans: vec![Vec::new(); len],
        columns: vec![Vec::new(); len],
    };
    if let Some(w) = warm {
        for (t, plans) in w.iter().enumerate().take(len) {
            for p in plans {
                pool.add(t, p.clone());
            }
        }
    }
    let seeds = [
        energy_only,
        Prices {
            cost: 0.0,
            carbon: &ones,
            water: &zeros,
        },
        Prices {
            cost: 0.0,
            carbon: &zeros,
            water: &ones,
        },
    ];
    for t in 0..len {
        for p in &seeds {
            let plan = view.solve(t, p)?;
            pool.add(t, plan);
        }
    }

    let mut best_ub = f64::INFINITY;
    let mut best_plans = Vec::new();
    let mut best_lb = f64::NEG_INFINITY;
    let mut best_kappa = vec![0.0; 2 * n];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iters {
        iterations += 1;
        let m = solve_master(
            &pool.columns,
            &Block {
                mu: equity.mu_carbon,
                theta: &equity.theta_carbon,
                carried: &carried_c,
            },
            &Block {
                mu: equity.mu_water,
                theta: &equity.theta_water,
                carried: &carried_w,
            },
            horizon,
        )?;

        // Primal side: blend the columns with the master weights.
        let plans: Vec<SlotPlan> = (0..len)
            .map(|t| {
                let refs: Vec<&SlotPlan> = pool.plans[t].iter().collect();
                SlotPlan::blend(&m.lambda[t], &refs)
            })
            .collect();
        let impacts: Vec<SlotImpact> = plans.iter().enumerate().map(|(t, p)| view.impact(t, p)).collect();
        let ub = horizon_objective(&impacts, fleet, equity, (window.carried_carbon, window.carried_water), horizon);
        if ub < best_ub {
            best_ub = ub;
            best_plans = plans;
        }

        // Dual side: price new columns and evaluate the Lagrangian bound.
        let pc = project_pi(&m.pi_carbon, equity.mu_carbon);
        let pw = project_pi(&m.pi_water, equity.mu_water);
        let kappa: Vec<f64> = (0..n)
            .map(|i| pc[i] * equity.theta_carbon[i])
            .chain((0..n).map(|i| pw[i] * equity.theta_water[i]))
            .collect();
        let price_c = scaled(fleet, equity, &kappa[..n]);
        let price_w = scaled(fleet, equity, &kappa[n..]);
        let prices = Prices {
            cost: 1.0,
            carbon: &price_c,
            water: &price_w,
        };
        let mut lagrangian = 0.0;
        for i in 0..n {
            lagrangian += kappa[i] * carried_c[i] + kappa[n + i] * carried_w[i];
        }
        let mut added = 0;
        for t in 0..len {
            let plan = view.solve(t, &prices)?;
            let (new, col) = pool.add(t, plan);
            added += usize::from(new);
            lagrangian += col.cost;
            for i in 0..n {
                lagrangian += kappa[i] * col.carbon[i] + kappa[n + i] * col.water[i];
            }
        }
        let lb = lagrangian / horizon;
        if lb > best_lb {
            best_lb = lb;
            best_kappa = kappa;
        }

        if best_ub - best_lb <= opts.tol * best_ub.abs().max(f64::MIN_POSITIVE) {
            converged = true;
            break;
        }
        if added == 0 {
            break;
        }
    }
    let gap = (best_ub - best_lb).max(0.0);
    Ok(HorizonSolution {
        plans: best_plans,
        upper_bound: best_ub,
        lower_bound: best_lb,
        gap_estimate: gap,
        iterations,
        converged: converged || gap <= opts.tol * best_ub.abs(),
        kappa: best_kappa,
        pool: pool.plans,
    })
}

/// Offline optimum over the whole trace.
pub fn solve_offline<M: SlotModel + ?Sized>(model: &M, equity: &EquitySpec, opts: &OfflineOptions) -> Result<OfflineSolution> {
    let n = model.n_datacenters();
    let zeros = vec![0.0; n];
    let h = solve_window(
        model,
        equity,
        &WindowSpec {
            start: 0,
            end: model.n_slots(),
            elapsed: 0,
            carried_carbon: &zeros,
            carried_water: &zeros,
        },
        opts,
        None,
    )?;
    let objective = metrics::objective(model, &h.plans, equity)?;
    Ok(OfflineSolution {
        plans: h.plans,
        objective,
        lower_bound: h.lower_bound,
        gap_estimate: h.gap_estimate,
        iterations: h.iterations,
        converged: h.converged,
        kappa: h.kappa,
    })
}
