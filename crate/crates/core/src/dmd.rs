//! Dual state and the mirror-descent step with the quadratic reference
//! `h(a) = ½‖a‖²`, for which the Bregman step has the closed form
//! `κ ← max(κ − η·d, 0)`.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    #[default]
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualState {
    /// `[κ_c; κ_w]`, length `2N`.
    pub kappa: Vec<f64>,
    pub eta: f64,
    pub reference: Reference,
}

impl DualState {
    pub fn zero(n: usize, eta: f64) -> Self {
        DualState {
            kappa: alloc::vec![0.0; 2 * n],
            eta,
            reference: Reference::Quadratic,
        }
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.kappa)
    }
}

pub fn l2_norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

/// `d = [z_c; z_w] − [carbon; water]`.
pub fn subgradient(z_c: &[f64], z_w: &[f64], carbon: &[f64], water: &[f64]) -> Result<Vec<f64>> {
    let n = z_c.len();
    check_len("z_w", n, z_w.len())?;
    check_len("carbon", n, carbon.len())?;
    check_len("water", n, water.len())?;
    Ok(z_c
        .iter()
        .zip(carbon)
        .chain(z_w.iter().zip(water))
        .map(|(z, e)| z - e)
        .collect())
}

pub fn step(kappa: f64, eta: f64, d: f64) -> f64 {
    (kappa - eta * d).max(0.0)
}

pub fn update(state: &DualState, d: &[f64]) -> Result<DualState> {
    if !(state.eta > 0.0 && state.eta.is_finite()) {
        return Err(Error::Config(alloc::format!(
            "learning rate must be positive, got {}",
            state.eta
        )));
    }
    check_len("subgradient", state.kappa.len(), d.len())?;
    let kappa = match state.reference {
        Reference::Quadratic => state
            .kappa
            .iter()
            .zip(d)
            .map(|(&k, &g)| step(k, state.eta, g))
            .collect(),
    };
    Ok(DualState {
        kappa,
        eta: state.eta,
        reference: state.reference,
    })
}
