//! Restricted master LP of the column generation:
//!
//! ```text
//! min  (1/D) Σ_{t,k} g_tk λ_tk + μ_c u_c + μ_w u_w
//! s.t. Σ_k λ_tk = 1                                        for every slot t
//!      θ_i (a_i + Σ_{t,k} f_tk,i λ_tk) / D ≤ u              per DC, per active block
//!      λ ≥ 0, u ≥ 0
//! ```
//!
//! `a_i` is the footprint carried in from before the horizon and `f` the
//! scaled footprint of a column.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, SolverStatus, SupportedConeT};
use eglb_core::{Error, Result};

/// Cost and scaled footprints of one candidate plan.
#[derive(Debug, Clone)]
pub struct Column {
    pub cost: f64,
    pub carbon: Vec<f64>,
    pub water: Vec<f64>,
}

pub struct Block<'a> {
    pub mu: f64,
    pub theta: &'a [f64],
    pub carried: &'a [f64],
}

pub struct MasterSolution {
    /// Per slot, weights of its columns.
    pub lambda: Vec<Vec<f64>>,
    /// Linking-row duals for the carbon and water blocks (zero when inactive).
    pub pi_carbon: Vec<f64>,
    pub pi_water: Vec<f64>,
}

pub fn solve_master(columns: &[Vec<Column>], carbon: &Block, water: &Block, horizon: f64) -> Result<MasterSolution> {
    let slots = columns.len();
    let n = carbon.theta.len();
    let active = [carbon.mu > 0.0, water.mu > 0.0];
    let n_blocks = active.iter().filter(|&&a| a).count();
    let n_lambda: usize = columns.iter().map(Vec::len).sum();
    let n_vars = n_lambda + n_blocks;
    let link0 = slots;
    let link_rows = n * n_blocks;
    let nonneg0 = link0 + link_rows;
    let n_rows = nonneg0 + n_vars;

    // Row offset of each active block's linking rows.
    let mut block_row = [usize::MAX; 2];
    let mut next = link0;
    for b in 0..2 {
        if active[b] {
            block_row[b] = next;
            next += n;
        }
    }

    let mut colptr = Vec::with_capacity(n_vars + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    let mut q = Vec::with_capacity(n_vars);
    let mut var = 0;
    for (t, cols) in columns.iter().enumerate() {
        for c in cols {
            colptr.push(rowval.len());
            q.push(c.cost / horizon);
            rowval.push(t);
            nzval.push(1.0);
            for (b, (blk, f)) in [(carbon, &c.carbon), (water, &c.water)].into_iter().enumerate() {
                if !active[b] {
                    continue;
                }
                for i in 0..n {
                    let v = blk.theta[i] * f[i] / horizon;
                    if v != 0.0 {
                        rowval.push(block_row[b] + i);
                        nzval.push(v);
                    }
                }
            }
            rowval.push(nonneg0 + var);
            nzval.push(-1.0);
            var += 1;
        }
    }
    for (b, blk) in [carbon, water].into_iter().enumerate() {
        if !active[b] {
            continue;
        }
        colptr.push(rowval.len());
        q.push(blk.mu);
        for i in 0..n {
            rowval.push(block_row[b] + i);
            nzval.push(-1.0);
        }
        rowval.push(nonneg0 + var);
        nzval.push(-1.0);
        var += 1;
    }
    colptr.push(rowval.len());

    let mut rhs = vec![0.0; n_rows];
    rhs[..slots].iter_mut().for_each(|v| *v = 1.0);
    for (b, blk) in [carbon, water].into_iter().enumerate() {
        if active[b] {
            for i in 0..n {
                rhs[block_row[b] + i] = -blk.theta[i] * blk.carried[i] / horizon;
            }
        }
    }

    let a = CscMatrix::new(n_rows, n_vars, colptr, rowval, nzval);
    let p = CscMatrix::<f64>::zeros((n_vars, n_vars));
    let cones = [
        SupportedConeT::ZeroConeT(slots),
        SupportedConeT::NonnegativeConeT(n_rows - slots),
    ];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .build()
        .map_err(|e| Error::Config(format!("LP settings: {e}")))?;
    let mut solver = DefaultSolver::new(&p, &q, &a, &rhs, &cones, settings)
        .map_err(|e| Error::Config(format!("LP setup: {e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    if !matches!(sol.status, SolverStatus::Solved | SolverStatus::AlmostSolved) {
        return Err(Error::Config(format!("LP master did not solve: {:?}", sol.status)));
    }

    let mut lambda = Vec::with_capacity(slots);
    let mut k = 0;
    for cols in columns {
        let mut w: Vec<f64> = sol.x[k..k + cols.len()].iter().map(|&v| v.max(0.0)).collect();
        k += cols.len();
        let s: f64 = w.iter().sum();
        if s > 0.0 {
            w.iter_mut().for_each(|v| *v /= s);
        } else {
            w[0] = 1.0;
        }
        lambda.push(w);
    }
    let pi = |b: usize| -> Vec<f64> {
        if active[b] {
            sol.z[block_row[b]..block_row[b] + n].to_vec()
        } else {
            vec![0.0; n]
        }
    };
    Ok(MasterSolution {
        lambda,
        pi_carbon: pi(0),
        pi_water: pi(1),
    })
}

/// Projects `π` onto `{π ≥ 0, Σπ ≤ μ}` by clipping and uniform rescaling, which
/// keeps the Lagrangian bound valid.
pub fn project_pi(pi: &[f64], mu: f64) -> Vec<f64> {
    let mut out: Vec<f64> = pi.iter().map(|&v| if v.is_finite() { v.max(0.0) } else { 0.0 }).collect();
    let s: f64 = out.iter().sum();
    if s > mu {
        let f = if s > 0.0 { mu / s } else { 0.0 };
        out.iter_mut().for_each(|v| *v *= f);
        // guard against rounding pushing the sum just above μ
        while out.iter().sum::<f64>() > mu {
            out.iter_mut().for_each(|v| *v *= 1.0 - 1e-15);
        }
    }
    out
}
