//! Stochastic unit commitment under wind-forecast uncertainty.
//!
//! The crate builds AR(1) quantile scenario trees for wind forecast error,
//! formulates the multi-scenario unit-commitment MILP, solves it with a
//! built-in simplex/branch-and-bound solver (or an external executable), and
//! runs rolling-horizon day simulations in which branch probabilities are
//! either fixed or recalibrated each step by a two-agent LLM pipeline.

pub mod agents;
pub mod cli;
pub mod error;
pub mod io;
pub mod milp;
pub mod scenario_tree;
pub mod simulator;
pub mod uc;

pub use error::{Error, Result};
