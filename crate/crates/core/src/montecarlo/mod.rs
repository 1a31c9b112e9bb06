//! Agent-based simulation of the exact node kernels with a synchronous
//! update.
//!
//! Each node consumes exactly two uniforms per step, in node order:
//! `u1` decides infection (`u1 < 1 - (1 - beta)^m`) and `u2` decides
//! vaccination, healing or immunity loss. Fixed draw positions make runs
//! with common random numbers comparable across parameter values.

mod ensemble;
mod sim;

pub use ensemble::{ensemble, Ensemble, EnsembleRow};
pub use sim::{
    empirical_distribution, mc_step, run, update_node, Init, RunOptions, SimState, Trajectory,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MonteCarloError {
    #[error("infected fraction {0} is outside (0, 1]")]
    BadFraction(f64),
    #[error("invalid initial condition `{0}`; expected `one`, `all` or `fraction:<q>`")]
    BadInit(String),
    #[error("horizon must be at least 1")]
    ZeroHorizon,
    #[error("at least one replica is required")]
    ZeroRuns,
    #[error("state has {got} nodes but the graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{0} nodes do not fit a 64-bit state code (limit 40)")]
    TooLargeForCodes(usize),
}
