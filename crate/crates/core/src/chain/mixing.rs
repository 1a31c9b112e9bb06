use serde::{Deserialize, Serialize};

use super::distribution::{tv_distance, ChainDistribution};
use super::evolve::step;
use super::state::ChainState;
use super::stationary::stationary_distribution;
use super::{ChainConfig, ChainError};
use crate::graph::Graph;
use crate::params::{EpidemicParams, NodeState, Variant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    /// Smallest `t` with TV(all-infected after t steps, stationary) <= epsilon.
    pub steps: usize,
    /// TV distance at `steps`.
    pub tv: f64,
}

/// Empirical mixing time from the all-infected start, which stands in for
/// the supremum over initial distributions.
pub fn mixing_time(
    g: &Graph,
    params: &EpidemicParams,
    epsilon: f64,
    config: &ChainConfig,
) -> Result<MixingReport, ChainError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(ChainError::BadEpsilon(epsilon));
    }
    let n = g.node_count();
    config.check_size(n)?;
    let pi = stationary_distribution(g, params)?;
    let mut mu = ChainDistribution::point_mass(n, ChainState::uniform(n, NodeState::I));
    let mut tv = tv_distance(&mu, &pi);
    if tv <= epsilon {
        return Ok(MixingReport { steps: 0, tv });
    }
    for t in 1..=config.max_steps {
        mu = step(g, params, &mu, config)?.0;
        tv = tv_distance(&mu, &pi);
        if tv <= epsilon {
            return Ok(MixingReport { steps: t, tv });
        }
    }
    Err(ChainError::SlowMixing {
        steps: config.max_steps,
        tv,
    })
}

/// Upper bound on the mixing time derived from linear domination of the
/// marginals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixingBound {
    /// Operator 2-norm of the dominating matrix.
    pub norm: f64,
    /// `log(c n / eps) / (-log norm)`, or `None` when `norm >= 1`.
    pub steps: Option<f64>,
}

/// SIRS: `log(2n/eps) / (-log ||M||)` with `M` the joint `[p_R; p_I]` matrix.
/// SIV: `log(n/eps) / (-log ||(1-delta) I + c beta A||)` with `c = 1`
/// (infection-dominant) or `1 - theta` (vaccination-dominant); this bounds
/// the time for infection to die out and ignores the S/R relaxation.
///
/// `M` is not normal, so its 2-norm is computed exactly rather than taken
/// from its spectral radius: with `a = 1-gamma`, `b = delta` and
/// `c = 1-delta+beta*lambda_max`, `||M||^2` is the top eigenvalue of
/// `[[a^2, ab], [ab, b^2 + c^2]]`.
pub fn mixing_time_bound(n: usize, params: &EpidemicParams, lambda_max: f64, epsilon: f64) -> MixingBound {
    let (norm, scale) = match params.variant {
        Variant::Sirs => {
            let a = 1.0 - params.gamma;
            let b = params.delta;
            let c = 1.0 - params.delta + params.beta * lambda_max;
            let trace = a * a + b * b + c * c;
            let disc = (trace * trace - 4.0 * a * a * c * c).max(0.0);
            (((trace + disc.sqrt()) / 2.0).sqrt(), 2.0)
        }
        Variant::SivInfectionDominant => (1.0 - params.delta + params.beta * lambda_max, 1.0),
        Variant::SivVaccinationDominant => (
            1.0 - params.delta + (1.0 - params.theta) * params.beta * lambda_max,
            1.0,
        ),
    };
    let steps = (norm < 1.0).then(|| (scale * n as f64 / epsilon).ln() / -norm.ln());
    MixingBound { norm, steps }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    #[test]
    fn single_node_fast_recovery() {
        // I -> {I: 0.1, R: 0.9}; two steps give P(S) = 0.81
        let g = Graph::empty(1).unwrap();
        let p = EpidemicParams::sirs(0.3, 0.9, 0.9).unwrap();
        let r = mixing_time(&g, &p, 0.25, &ChainConfig::default()).unwrap();
        assert_eq!(r.steps, 2);
        assert!((r.tv - 0.19).abs() < 1e-12);
    }

    #[test]
    fn epsilon_one_is_immediate() {
        let g = generate(GraphKind::Path(3), 0).unwrap();
        let p = EpidemicParams::sirs(0.1, 0.5, 0.5).unwrap();
        assert_eq!(mixing_time(&g, &p, 1.0, &ChainConfig::default()).unwrap().steps, 0);
        assert!(mixing_time(&g, &p, 0.0, &ChainConfig::default()).is_err());
    }

    #[test]
    fn supercritical_runs_out_of_budget() {
        let g = generate(GraphKind::Complete(5), 0).unwrap();
        let p = EpidemicParams::sirs(0.9, 0.1, 0.5).unwrap();
        let cfg = ChainConfig {
            max_steps: 30,
            ..ChainConfig::default()
        };
        let err = mixing_time(&g, &p, 0.25, &cfg).unwrap_err();
        assert!(matches!(err, ChainError::SlowMixing { steps: 30, .. }));
        assert!(err.to_string().contains("slow mixing"));
    }

    #[test]
    fn bound_norm_dominates_radius() {
        let p = EpidemicParams::sirs(0.05, 0.5, 0.3).unwrap();
        let b = mixing_time_bound(4, &p, 2.0, 0.25);
        let radius = (1.0f64 - 0.3).max(1.0 - 0.5 + 0.1);
        assert!(b.norm >= radius);
        let supercritical = mixing_time_bound(4, &EpidemicParams::sirs(0.5, 0.5, 0.3).unwrap(), 2.0, 0.25);
        assert!(supercritical.steps.is_none());
    }
}
