use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::map::step_nonlinear;
use super::psi::psi;
use super::threshold::{threshold_report, Regime};
use super::{MeanFieldError, NodeProbs};
use crate::graph::Graph;
use crate::parallel::parallel_map;
use crate::params::{EpidemicParams, Variant};

const MIN_ALPHA: f64 = 1.0 / 16.0;
const SIGN_WINDOW: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Damping {
    /// Start at `alpha = 1`; halve (down to 1/16) whenever the net change
    /// in total infection alternates sign over four consecutive steps.
    Adaptive,
    /// Constant `alpha`; `Fixed(1.0)` is the plain map iteration.
    Fixed(f64),
}

impl fmt::Display for Damping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Damping::Adaptive => f.write_str("adaptive"),
            Damping::Fixed(a) => write!(f, "fixed:{a}"),
        }
    }
}

impl FromStr for Damping {
    type Err = String;

    /// `adaptive`, `fixed` (alpha 1) or `fixed:<alpha>`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("invalid damping `{s}`; expected `adaptive`, `fixed` or `fixed:<alpha>`");
        match s.split_once(':') {
            None if s == "adaptive" => Ok(Damping::Adaptive),
            None if s == "fixed" => Ok(Damping::Fixed(1.0)),
            Some(("fixed", a)) => {
                let alpha: f64 = a.parse().map_err(|_| bad())?;
                if alpha > 0.0 && alpha <= 1.0 {
                    Ok(Damping::Fixed(alpha))
                } else {
                    Err(bad())
                }
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPointOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub damping: Damping,
    /// Number of trailing iterates kept for cycle detection.
    pub cycle_window: usize,
    pub cycle_tol: f64,
}

impl Default for FixedPointOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 100_000,
            damping: Damping::Adaptive,
            cycle_window: 64,
            cycle_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    CycleDetected { period: usize },
    /// Left the valid region or ran out of iterations.
    Diverged,
}

impl Outcome {
    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Converged => "converged",
            Outcome::CycleDetected { .. } => "cycle_detected",
            Outcome::Diverged => "diverged",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedPointResult {
    pub p_i_star: Vec<f64>,
    pub p_r_star: Vec<f64>,
    /// `max |Psi|` at the returned point; infinite outside the domain.
    pub residual: f64,
    pub outcome: Outcome,
    pub iterations: usize,
}

impl FixedPointResult {
    pub fn is_converged(&self) -> bool {
        self.outcome == Outcome::Converged
    }

    pub fn state(&self) -> NodeProbs {
        NodeProbs::new(self.p_r_star.clone(), self.p_i_star.clone())
    }
}

/// `P_I = c 1`, `P_R = (delta / gamma) c 1` with
/// `c = min(0.5, 0.9 / (1 + delta / gamma))`, so that `P_R + P_I <= 0.9`.
pub fn symmetric_start(n: usize, params: &EpidemicParams) -> NodeProbs {
    let ratio = params.delta / params.gamma;
    let c = (0.9 / (1.0 + ratio)).min(0.5);
    NodeProbs::uniform(n, ratio * c, c)
}

/// Endemic fixed point of the SIRS map from [`symmetric_start`].
pub fn endemic_fixed_point(
    g: &Graph,
    params: &EpidemicParams,
    opts: &FixedPointOptions,
) -> Result<FixedPointResult, MeanFieldError> {
    check_preconditions(g, params)?;
    Ok(solve(g, params, symmetric_start(g.node_count(), params), opts))
}

pub fn endemic_fixed_point_from(
    g: &Graph,
    params: &EpidemicParams,
    start: NodeProbs,
    opts: &FixedPointOptions,
) -> Result<FixedPointResult, MeanFieldError> {
    if start.node_count() != g.node_count() {
        return Err(MeanFieldError::SizeMismatch {
            expected: g.node_count(),
            got: start.node_count(),
        });
    }
    check_preconditions(g, params)?;
    Ok(solve(g, params, start, opts))
}

fn check_preconditions(g: &Graph, params: &EpidemicParams) -> Result<(), MeanFieldError> {
    params.validate()?;
    if params.variant != Variant::Sirs {
        return Err(MeanFieldError::UnsupportedVariant);
    }
    if params.gamma <= 0.0 {
        return Err(MeanFieldError::ZeroGamma);
    }
    let report = threshold_report(g, params)?;
    if report.regime != Regime::Supercritical {
        return Err(MeanFieldError::NotSupercritical {
            ratio: report.ratio_global,
            regime: report.regime,
        });
    }
    Ok(())
}

fn residual_at(g: &Graph, params: &EpidemicParams, s: &NodeProbs) -> f64 {
    psi(g, params, &s.p_r, &s.p_i).map_or(f64::INFINITY, |v| v.iter().fold(0.0, |m, x| m.max(x.abs())))
}

fn finish(g: &Graph, params: &EpidemicParams, s: NodeProbs, outcome: Outcome, iterations: usize) -> FixedPointResult {
    FixedPointResult {
        residual: residual_at(g, params, &s),
        p_i_star: s.p_i,
        p_r_star: s.p_r,
        outcome,
        iterations,
    }
}

fn solve(g: &Graph, params: &EpidemicParams, start: NodeProbs, opts: &FixedPointOptions) -> FixedPointResult {
    let mut alpha = match opts.damping {
        Damping::Adaptive => 1.0,
        Damping::Fixed(a) => a,
    };
    let mut x = start;
    let mut window: VecDeque<NodeProbs> = VecDeque::with_capacity(opts.cycle_window + 1);
    let mut signs: VecDeque<bool> = VecDeque::with_capacity(SIGN_WINDOW);
    for it in 1..=opts.max_iter {
        let fx = step_nonlinear(g, params, &x);
        let next = if alpha == 1.0 {
            fx
        } else {
            NodeProbs {
                p_r: x.p_r.iter().zip(&fx.p_r).map(|(a, b)| (1.0 - alpha) * a + alpha * b).collect(),
                p_i: x.p_i.iter().zip(&fx.p_i).map(|(a, b)| (1.0 - alpha) * a + alpha * b).collect(),
            }
        };
        if !next.is_valid(1e-9) || next.p_i.iter().chain(&next.p_r).any(|v| !v.is_finite()) {
            return finish(g, params, next, Outcome::Diverged, it);
        }
        let step = next.max_abs_diff(&x);
        if step <= opts.tol && residual_at(g, params, &next) <= opts.tol {
            return finish(g, params, next, Outcome::Converged, it);
        }

        if step > opts.cycle_tol {
            // `x` (lag 1) is not in the window yet, so its newest entry is lag 2
            if let Some(period) = window
                .iter()
                .rev()
                .position(|past| past.max_abs_diff(&next) <= opts.cycle_tol)
                .map(|k| k + 2)
            {
                return finish(g, params, next, Outcome::CycleDetected { period }, it);
            }
        }

        if matches!(opts.damping, Damping::Adaptive) && alpha > MIN_ALPHA {
            let change: f64 = next.p_i.iter().zip(&x.p_i).map(|(a, b)| a - b).sum();
            if change != 0.0 {
                if signs.len() == SIGN_WINDOW {
                    signs.pop_front();
                }
                signs.push_back(change > 0.0);
                if signs.len() == SIGN_WINDOW && signs.iter().zip(signs.iter().skip(1)).all(|(a, b)| a != b) {
                    alpha = (alpha / 2.0).max(MIN_ALPHA);
                    signs.clear();
                    log::debug!("iteration {it}: oscillation detected, damping alpha = {alpha}");
                }
            }
        }

        window.push_back(x);
        if window.len() > opts.cycle_window {
            window.pop_front();
        }
        x = next;
    }
    log::warn!("fixed-point iteration hit max_iter = {}", opts.max_iter);
    finish(g, params, x, Outcome::Diverged, opts.max_iter)
}

/// Multi-start agreement check. Agreement is evidence of uniqueness, not a
/// proof: basins of attraction are not characterised.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniquenessProbe {
    pub results: Vec<FixedPointResult>,
    /// Minimum-residual converged point (earliest start on ties).
    pub consensus: Option<FixedPointResult>,
    pub converged: usize,
    /// Largest max-norm distance from a converged point to the consensus.
    pub max_deviation: f64,
}

impl UniquenessProbe {
    pub fn agrees(&self, tol: f64) -> bool {
        self.converged == self.results.len() && self.consensus.is_some() && self.max_deviation <= tol
    }
}

/// Runs the solver from `starts` random interior points. Start `k` is drawn
/// from a generator seeded with `seed + k`, so results do not depend on
/// `jobs`.
pub fn probe_uniqueness(
    g: &Graph,
    params: &EpidemicParams,
    starts: usize,
    seed: u64,
    opts: &FixedPointOptions,
    jobs: usize,
) -> Result<UniquenessProbe, MeanFieldError> {
    check_preconditions(g, params)?;
    let n = g.node_count();
    let initial: Vec<NodeProbs> = (0..starts as u64)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k));
            let mut s = NodeProbs::uniform(n, 0.0, 0.0);
            for node in 0..n {
                let i = rng.random_range(0.01..0.9);
                s.p_i[node] = i;
                s.p_r[node] = rng.random_range(0.0..(0.95 - i));
            }
            s
        })
        .collect();
    let results = parallel_map(&initial, jobs, |_, s| solve(g, params, s.clone(), opts));
    let consensus = results
        .iter()
        .filter(|r| r.is_converged())
        .min_by(|a, b| a.residual.total_cmp(&b.residual))
        .cloned();
    let converged = results.iter().filter(|r| r.is_converged()).count();
    let max_deviation = consensus.as_ref().map_or(f64::INFINITY, |c| {
        let target = c.state();
        results
            .iter()
            .filter(|r| r.is_converged())
            .map(|r| r.state().max_abs_diff(&target))
            .fold(0.0, f64::max)
    });
    Ok(UniquenessProbe {
        results,
        consensus,
        converged,
        max_deviation,
    })
}
