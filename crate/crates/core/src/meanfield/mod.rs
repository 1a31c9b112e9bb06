//! The `2n`-dimensional mean-field map, its linearisations around the
//! disease-free point, threshold classification and the endemic fixed point.

mod fixed_point;
mod linear;
mod map;
mod properties;
mod psi;
mod threshold;

pub use fixed_point::{
    endemic_fixed_point, endemic_fixed_point_from, probe_uniqueness, symmetric_start, Damping,
    FixedPointOptions, FixedPointResult, Outcome, UniquenessProbe,
};
pub use linear::{step_linear, LinearModel};
pub use map::{infection_upper_bound, iterate, step_nonlinear};
pub use properties::{xi_omega_property_suite, PropertyCheck, PropertySuiteReport};
pub use psi::{omega, psi, xi};
pub use threshold::{threshold_report, Regime, ThresholdReport, CRITICAL_BAND};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::MarginalVector;
use crate::params::{EpidemicParams, ParamError};
use crate::spectral::SpectralError;

#[derive(Debug, Error, PartialEq)]
pub enum MeanFieldError {
    #[error("P_R + P_I = {sum} >= 1 at node {node}; omega is singular there")]
    Domain { node: usize, sum: f64 },
    #[error("state has {got} nodes but the graph has {expected}")]
    SizeMismatch { expected: usize, got: usize },
    #[error("endemic solver needs a supercritical SIRS model (ratio {ratio:.6}, {regime})")]
    NotSupercritical { ratio: f64, regime: Regime },
    #[error("endemic solver supports SIRS only")]
    UnsupportedVariant,
    #[error("gamma must be positive for an endemic fixed point")]
    ZeroGamma,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Approximate per-node probabilities of R and I; `P_S` is implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeProbs {
    pub p_r: Vec<f64>,
    pub p_i: Vec<f64>,
}

impl NodeProbs {
    pub fn new(p_r: Vec<f64>, p_i: Vec<f64>) -> Self {
        assert_eq!(p_r.len(), p_i.len(), "P_R and P_I lengths differ");
        Self { p_r, p_i }
    }

    pub fn uniform(n: usize, p_r: f64, p_i: f64) -> Self {
        Self::new(vec![p_r; n], vec![p_i; n])
    }

    /// `(P_R*, 0)`: all-susceptible for SIRS, the S/R balance for SIV.
    pub fn disease_free(n: usize, params: &EpidemicParams) -> Self {
        Self::uniform(n, params.recovered_star(), 0.0)
    }

    pub fn node_count(&self) -> usize {
        self.p_i.len()
    }

    pub fn total_infected(&self) -> f64 {
        self.p_i.iter().sum()
    }

    pub fn mean_infected(&self) -> f64 {
        self.total_infected() / self.node_count() as f64
    }

    /// Largest componentwise difference.
    pub fn max_abs_diff(&self, other: &NodeProbs) -> f64 {
        self.p_r
            .iter()
            .zip(&other.p_r)
            .chain(self.p_i.iter().zip(&other.p_i))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Components in `[0, 1]` and `P_R + P_I <= 1 + tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        self.p_r.iter().zip(&self.p_i).all(|(&r, &i)| {
            (-tol..=1.0 + tol).contains(&r) && (-tol..=1.0 + tol).contains(&i) && r + i <= 1.0 + tol
        })
    }
}

impl From<MarginalVector> for NodeProbs {
    fn from(m: MarginalVector) -> Self {
        Self::new(m.p_r, m.p_i)
    }
}
