//! Exact minimizer of `f(z) = μ·max_i θ_i·z_i − κᵀz` over the box `[0, z̄]`.
//!
//! Fix the level `m = max_i θ_i z_i`. The best `z` at that level raises every
//! rewarded component as far as the level and its bound allow,
//! `z_i(m) = min(z̄_i, m/θ_i)`, so along this path `f` is convex and piecewise
//! linear in `m` with breakpoints at `θ_i·z̄_i`. Its slope on a segment is
//! `μ − Σ κ_i/θ_i` over the components not yet saturated; the scan stops at
//! the first breakpoint where the slope turns nonnegative.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_len, check_nonneg, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct AuxBlock {
    pub mu: f64,
    pub theta: Vec<f64>,
    pub kappa: Vec<f64>,
    pub zbar: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxSolution {
    pub z: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuxPair {
    pub carbon: AuxSolution,
    pub water: AuxSolution,
}

impl AuxPair {
    pub fn value(&self) -> f64 {
        self.carbon.value + self.water.value
    }
}

/// `μ·max_i θ_i z_i − κᵀz`.
pub fn block_value(b: &AuxBlock, z: &[f64]) -> f64 {
    let top = b
        .theta
        .iter()
        .zip(z)
        .fold(0.0f64, |m, (&t, &z)| m.max(t * z));
    let reward: f64 = b.kappa.iter().zip(z).map(|(&k, &z)| k * z).sum();
    b.mu * top - reward
}

/// Returns the minimizer with the smallest level `m`; components with
/// `κ_i = 0` are left at zero.
pub fn minimize_block(b: &AuxBlock) -> Result<AuxSolution> {
    let n = b.theta.len();
    check_len("kappa", n, b.kappa.len())?;
    check_len("zbar", n, b.zbar.len())?;
    check_nonneg("mu", &[b.mu])?;
    check_nonneg("theta", &b.theta)?;
    check_nonneg("kappa", &b.kappa)?;
    check_nonneg("zbar", &b.zbar)?;

    let mut z = vec![0.0; n];
    let mut active: Vec<usize> = Vec::new();
    for i in 0..n {
        if b.kappa[i] > 0.0 {
            if b.theta[i] == 0.0 {
                // Free reward: raising z_i never moves the max term.
                z[i] = b.zbar[i];
            } else {
                active.push(i);
            }
        }
    }
    active.sort_by(|&a, &c| {
        (b.theta[a] * b.zbar[a])
            .total_cmp(&(b.theta[c] * b.zbar[c]))
            .then(a.cmp(&c))
    });

    // Σ κ_i/θ_i over active components with breakpoint above the level.
    let mut pull: f64 = active.iter().map(|&i| b.kappa[i] / b.theta[i]).sum();
    let mut level = 0.0;
    let mut saturated = 0;
    for (k, &i) in active.iter().enumerate() {
        let bp = b.theta[i] * b.zbar[i];
        if bp > level {
            if b.mu - pull >= 0.0 {
                break;
            }
            level = bp;
        }
        pull -= b.kappa[i] / b.theta[i];
        saturated = k + 1;
    }
    for (k, &i) in active.iter().enumerate() {
        z[i] = if k < saturated {
            b.zbar[i]
        } else {
            (level / b.theta[i]).min(b.zbar[i])
        };
    }
    let value = block_value(b, &z);
    Ok(AuxSolution { z, value })
}

pub fn minimize_aux(carbon: &AuxBlock, water: &AuxBlock) -> Result<AuxPair> {
    Ok(AuxPair {
        carbon: minimize_block(carbon)?,
        water: minimize_block(water)?,
    })
}
