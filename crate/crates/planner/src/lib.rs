//! Planners that see the future: the offline optimum and its
//! receding-horizon (MPC) variant, plus a dispatcher that runs any algorithm
//! by name.
//!
//! The offline problem couples all slots only through the two max terms.
//! It is solved by column generation: a small LP over convex combinations of
//! per-slot routing plans, whose duals price new plans through the same
//! transportation solver the online algorithm uses. The LP duals also give a
//! certified lower bound on the optimum, so every solution carries a
//! duality gap.

mod dispatch;
mod master;
mod mpc;
mod offline;

pub use dispatch::{run_algorithm, Algorithm, AlgorithmParams, OfflineSummary, Outcome};
pub use mpc::run_mpc;
pub use offline::{solve_offline, solve_window, HorizonSolution, OfflineOptions, OfflineSolution, WindowSpec};
