use std::fmt;

use serde::{Deserialize, Serialize};

use super::MeanFieldError;
use crate::graph::Graph;
use crate::params::{EpidemicParams, Variant};
use crate::spectral::spectral_radius_default;

/// Ratios within this distance of 1 are labelled critical.
pub const CRITICAL_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Subcritical,
    Critical,
    Supercritical,
}

impl Regime {
    pub fn classify(ratio: f64) -> Self {
        if (ratio - 1.0).abs() <= CRITICAL_BAND {
            Regime::Critical
        } else if ratio < 1.0 {
            Regime::Subcritical
        } else {
            Regime::Supercritical
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Subcritical => "subcritical",
            Regime::Critical => "critical",
            Regime::Supercritical => "supercritical",
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Threshold quantities for one parameter set.
///
/// `ratio_global` multiplies `beta lambda_max / delta` by
/// `vaccination_factor` (`1 - theta` for the vaccination-dominant variant,
/// 1 otherwise). `ratio_local` additionally carries `susceptible_factor`
/// `gamma / (gamma + theta)`. For SIRS both factors are 1 and the two ratios
/// coincide. `regime` is the classification of `ratio_global`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub beta: f64,
    pub delta: f64,
    pub lambda_max: f64,
    pub susceptible_factor: f64,
    pub vaccination_factor: f64,
    pub ratio_local: f64,
    pub ratio_global: f64,
    pub regime: Regime,
    pub regime_local: Regime,
}

impl ThresholdReport {
    pub fn new(params: &EpidemicParams, lambda_max: f64) -> Self {
        let base = if params.delta == 0.0 {
            f64::INFINITY
        } else {
            params.beta * lambda_max / params.delta
        };
        let vaccination_factor = match params.variant {
            Variant::SivVaccinationDominant => 1.0 - params.theta,
            _ => 1.0,
        };
        let susceptible_factor = params.susceptible_star();
        let ratio_global = vaccination_factor * base;
        let ratio_local = susceptible_factor * vaccination_factor * base;
        Self {
            beta: params.beta,
            delta: params.delta,
            lambda_max,
            susceptible_factor,
            vaccination_factor,
            ratio_local,
            ratio_global,
            regime: Regime::classify(ratio_global),
            regime_local: Regime::classify(ratio_local),
        }
    }
}

pub fn threshold_report(g: &Graph, params: &EpidemicParams) -> Result<ThresholdReport, MeanFieldError> {
    let spectral = spectral_radius_default(g)?;
    Ok(ThresholdReport::new(params, spectral.lambda_max))
}
