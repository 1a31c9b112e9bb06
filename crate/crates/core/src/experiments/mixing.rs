use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::plot::LinePlot;
use super::spec::ExperimentSpec;
use super::{csv_field, fmt_opt, ExperimentError};
use crate::chain::{mixing_time, mixing_time_bound, ChainConfig, ChainError};
use crate::parallel::parallel_map;
use crate::params::{EpidemicParams, Variant};
use crate::spectral::spectral_radius_default;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingStatus {
    Ok,
    /// The step budget ran out before the distance fell below epsilon.
    SlowMixingSuspected,
    Error(String),
}

impl fmt::Display for MixingStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MixingStatus::Ok => f.write_str("ok"),
            MixingStatus::SlowMixingSuspected => f.write_str("slow_mixing_suspected"),
            MixingStatus::Error(e) => write!(f, "error: {e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingRow {
    pub point: usize,
    pub variant: Variant,
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub n: usize,
    pub lambda_max: f64,
    pub epsilon: f64,
    /// Measured mixing time from the all-infected start.
    pub t_mix: Option<usize>,
    /// Total variation at `t_mix`, or at the budget when it ran out.
    pub tv: Option<f64>,
    pub bound_norm: f64,
    /// `None` when the norm is at least 1.
    pub bound_steps: Option<f64>,
    pub status: MixingStatus,
}

fn measure(spec: &ExperimentSpec, point: usize, p: &EpidemicParams, n: usize) -> MixingRow {
    let mut row = MixingRow {
        point,
        variant: p.variant,
        beta: p.beta,
        delta: p.delta,
        gamma: p.gamma,
        theta: p.theta,
        n,
        lambda_max: f64::NAN,
        epsilon: spec.epsilon,
        t_mix: None,
        tv: None,
        bound_norm: f64::NAN,
        bound_steps: None,
        status: MixingStatus::Ok,
    };
    let g = match spec.graph_for(n) {
        Ok(g) => g,
        Err(e) => {
            row.status = MixingStatus::Error(e.to_string());
            return row;
        }
    };
    row.lambda_max = match spectral_radius_default(&g) {
        Ok(r) => r.lambda_max,
        Err(e) => {
            row.status = MixingStatus::Error(e.to_string());
            return row;
        }
    };
    let bound = mixing_time_bound(n, p, row.lambda_max, spec.epsilon);
    row.bound_norm = bound.norm;
    row.bound_steps = bound.steps;
    let config = ChainConfig {
        max_steps: spec.max_steps,
        workers: 1,
        ..ChainConfig::exact()
    };
    match mixing_time(&g, p, spec.epsilon, &config) {
        Ok(r) => {
            row.t_mix = Some(r.steps);
            row.tv = Some(r.tv);
        }
        Err(ChainError::SlowMixing { tv, .. }) => {
            row.tv = Some(tv);
            row.status = MixingStatus::SlowMixingSuspected;
        }
        Err(e) => row.status = MixingStatus::Error(e.to_string()),
    }
    row
}

/// Measured mixing time and its upper bound for every grid point and node
/// count. Exhausted step budgets are reported, not raised.
pub fn run_mixing_scaling(spec: &ExperimentSpec, jobs: usize) -> Result<Vec<MixingRow>, ExperimentError> {
    spec.validate()?;
    let points = spec.grid.points()?;
    let cases: Vec<(usize, EpidemicParams, usize)> = points
        .iter()
        .enumerate()
        .flat_map(|(k, p)| spec.node_counts.iter().map(move |&n| (k, *p, n)))
        .collect();
    Ok(parallel_map(&cases, jobs, |_, (k, p, n)| measure(spec, *k, p, *n)))
}

pub(crate) fn write_rows(rows: &[MixingRow], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "point,variant,beta,delta,gamma,theta,n,lambda_max,epsilon,t_mix,tv,bound_norm,bound_steps,status"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.point,
            r.variant,
            r.beta,
            r.delta,
            r.gamma,
            r.theta,
            r.n,
            r.lambda_max,
            r.epsilon,
            r.t_mix.map_or_else(String::new, |t| t.to_string()),
            fmt_opt(r.tv),
            r.bound_norm,
            fmt_opt(r.bound_steps),
            csv_field(&r.status.to_string())
        )?;
    }
    Ok(())
}

pub(crate) fn scaling_plot(spec: &ExperimentSpec, rows: &[MixingRow]) -> LinePlot {
    let mut plot = LinePlot::new(&spec.name, "n", "steps");
    let mut point = usize::MAX;
    for r in rows {
        if r.point != point {
            point = r.point;
            plot.add(format!("p{point} measured"), Vec::new());
            plot.add(format!("p{point} bound"), Vec::new());
        }
        let len = plot.series.len();
        if let Some(t) = r.t_mix {
            plot.series[len - 2].points.push((r.n as f64, t as f64));
        }
        if let Some(b) = r.bound_steps {
            plot.series[len - 1].points.push((r.n as f64, b));
        }
    }
    plot
}
