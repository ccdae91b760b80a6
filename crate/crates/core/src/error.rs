use alloc::string::String;
use alloc::vec::Vec;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch for {what}: expected {expected}, got {got}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("invalid value for {field}[{index}]: {value}")]
    InvalidValue {
        field: &'static str,
        index: usize,
        value: f64,
    },

    /// No routing satisfies every gateway. `gateways` is a Hall violator: their
    /// combined demand exceeds the capacity of every data center they may use.
    #[error("infeasible routing{}: gateways {gateways:?} cannot be served", slot_suffix(*slot))]
    Infeasible {
        slot: Option<usize>,
        gateways: Vec<usize>,
    },

    #[error("slot {slot}: data center {dc} receives {load} MW but has capacity {capacity} MW")]
    CapacityExceeded {
        slot: usize,
        dc: usize,
        load: f64,
        capacity: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

fn slot_suffix(slot: Option<usize>) -> String {
    match slot {
        Some(t) => alloc::format!(" at slot {t}"),
        None => String::new(),
    }
}

impl Error {
    pub(crate) fn at_slot(self, t: usize) -> Self {
        match self {
            Error::Infeasible { slot: None, gateways } => Error::Infeasible {
                slot: Some(t),
                gateways,
            },
            other => other,
        }
    }
}

pub(crate) fn check_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension {
            what,
            expected,
            got,
        })
    }
}

/// Every entry finite and `>= 0`.
pub(crate) fn check_nonneg(field: &'static str, values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidValue {
                field,
                index,
                value,
            });
        }
    }
    Ok(())
}

/// Every entry finite and `> 0`.
pub(crate) fn check_positive(field: &'static str, values: &[f64]) -> Result<()> {
    for (index, &value) in values.iter().enumerate() {
        if !value.is_finite() || value <= 0.0 {
            return Err(Error::InvalidValue {
                field,
                index,
                value,
            });
        }
    }
    Ok(())
}
