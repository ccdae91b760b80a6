//! Equity-aware geographical load balancing (GLB) for AI inference fleets.
//!
//! Workload arriving at front-end gateways is routed, slot by slot, to
//! geo-distributed data centers. Besides the energy bill, every routing
//! decision leaves a carbon and a water footprint on the region hosting the
//! data center. The equity-aware objective adds the *largest* long-run
//! regional footprint (minimax fairness) to the energy cost:
//!
//! ```text
//! (1/T) Σ_t g_t(x_t) + μ_c · max_i θ_c,i · avg_t c_i,t + μ_w · max_i θ_w,i · avg_t w_i,t
//! ```
//!
//! The max terms couple all slots, so an online scheduler cannot optimise
//! them directly. [`online::run`] relaxes the coupling with per-DC Lagrange
//! multipliers that are learned by dual mirror descent while the trace is
//! revealed; each slot then reduces to a transportation problem
//! ([`transport`]) and a small piecewise-linear problem ([`auxstep`]).
//!
//! The crate is `no_std` (it needs `alloc`). File formats, the CLI and the
//! offline/MPC planners live in companion crates.
//!
//! ```text
//!  Trace ──▶ SlotModel ──▶ transport::solve ──▶ SlotPlan ──▶ metrics::report
//!              ▲                                    │
//!              └── κ_t ◀── dmd::update ◀── auxstep ◀┘
//! ```

#![no_std]

extern crate alloc;

pub mod auxstep;
pub mod baselines;
pub mod bounds;
pub mod dmd;
mod error;
pub mod hetero;
pub mod metrics;
pub mod model;
pub mod online;
pub mod slot;
pub mod traces;
pub mod transport;

pub use error::{Error, Result};
pub use metrics::RunReport;
pub use model::{Decision, EnergyModel, EquitySpec, FleetSpec, SizingMode, SlotInput};
pub use online::{RunConfig, Schedule};
pub use slot::{Prices, SlotImpact, SlotModel, SlotPlan};
pub use traces::Trace;
