//! Discrete-time SIRS and SIV epidemics on graphs at three levels of
//! description:
//!
//! * [`chain`]: the exact `3^n`-state Markov chain (small graphs),
//! * [`meanfield`]: the `2n`-dimensional nonlinear mean-field map and its
//!   linearisations,
//! * [`montecarlo`]: agent-based simulation of the exact kernel (large graphs),
//!
//! together with graph utilities and scripted [`experiments`].

pub mod chain;
pub mod experiments;
pub mod graph;
pub mod meanfield;
pub mod montecarlo;
pub mod params;
mod parallel;
pub mod spectral;

pub use chain::{ChainConfig, ChainDistribution, ChainError, ChainState, MarginalVector};
pub use graph::{generate, Graph, GraphError, GraphKind};
pub use meanfield::{FixedPointResult, LinearModel, MeanFieldError, NodeProbs, Regime, ThresholdReport};
pub use parallel::available_jobs;
pub use params::{EpidemicParams, NodeState, ParamError, Variant};
pub use spectral::{spectral_radius, spectral_radius_default, SpectralError, SpectralReport};
