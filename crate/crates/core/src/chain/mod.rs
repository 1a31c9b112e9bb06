//! The exact `3^n`-state Markov chain.
//!
//! Node `i` of a network state is base-3 digit `i` of its [`ChainState`]
//! code (0 = S, 1 = I, 2 = R). Transition rows are never materialised as a
//! matrix: each row is the product of per-node kernels and is enumerated on
//! the fly, so the chain is usable up to about ten nodes.

mod distribution;
mod domination;
mod evolve;
mod kernel;
mod mixing;
mod state;
mod stationary;

pub use distribution::{tv_distance, ChainDistribution, MarginalVector};
pub use domination::{verify_linear_domination, DominationReport};
pub use evolve::{evolve, step, transition_row, Evolution};
pub use kernel::{infected_neighbor_counts, node_kernel};
pub use mixing::{mixing_time, mixing_time_bound, MixingBound, MixingReport};
pub use state::ChainState;
pub use stationary::stationary_distribution;

use thiserror::Error;

/// Node cap above which exact mode refuses to run.
pub const DEFAULT_MAX_NODES: usize = 10;
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 26;
pub const DEFAULT_PRUNE_TOL: f64 = 1e-15;
pub const DEFAULT_MAX_STEPS: usize = 100_000;

#[derive(Debug, Error, PartialEq)]
pub enum ChainError {
    #[error("exact chain limited to {cap} nodes (graph has {n}); use Monte Carlo mode instead")]
    TooLarge { n: usize, cap: usize },
    #[error("support grew past the memory budget of {budget} entries at step {step}")]
    SupportExplosion { step: usize, budget: usize },
    #[error("distribution is over {got} nodes but the graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("stationary distribution undefined: {0}")]
    NoStationary(&'static str),
    #[error("epsilon must lie in (0, 1], got {0}")]
    BadEpsilon(f64),
    #[error(
        "slow mixing suspected: total variation still {tv:.3e} after {steps} steps"
    )]
    SlowMixing { steps: usize, tv: f64 },
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

/// Limits and numerical knobs for exact-mode computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub max_nodes: usize,
    /// Maximum number of support entries held at once.
    pub memory_budget: usize,
    /// Entries below this mass are dropped after each step.
    pub prune_tol: f64,
    /// Threads used to propagate chunks of source states. Results are
    /// bitwise independent of this value.
    pub workers: usize,
    /// Step budget for [`mixing_time`].
    pub max_steps: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            max_nodes: DEFAULT_MAX_NODES,
            memory_budget: DEFAULT_MEMORY_BUDGET,
            prune_tol: DEFAULT_PRUNE_TOL,
            workers: 1,
            max_steps: DEFAULT_MAX_STEPS,
        }
    }
}

impl ChainConfig {
    pub fn exact() -> Self {
        Self {
            prune_tol: 0.0,
            ..Self::default()
        }
    }

    pub(crate) fn check_size(&self, n: usize) -> Result<(), ChainError> {
        if n > self.max_nodes || n > 39 {
            Err(ChainError::TooLarge {
                n,
                cap: self.max_nodes.min(39),
            })
        } else {
            Ok(())
        }
    }
}
