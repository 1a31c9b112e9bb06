use std::io::Write;

use serde::{Deserialize, Serialize};

use super::plot::LinePlot;
use super::spec::{ExperimentSpec, Layer};
use super::{fmt_opt, ExperimentError};
use crate::chain::{step, ChainConfig, ChainDistribution, ChainState};
use crate::graph::Graph;
use crate::meanfield::{step_linear, step_nonlinear, LinearModel, NodeProbs};
use crate::montecarlo::SimState;
use crate::parallel::parallel_map;
use crate::params::{EpidemicParams, Variant};
use crate::spectral::spectral_radius_default;

/// Discrepancy between exact marginals and the approximate layers at one
/// step of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerRow {
    pub point: usize,
    pub variant: Variant,
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub t: usize,
    pub exact_mean_infected: f64,
    pub meanfield_mean_infected: f64,
    /// `max_i |p_I,i - P_I,i|`.
    pub max_abs_diff_infected: f64,
    pub max_abs_diff_recovered: f64,
    /// Same for the linear model, when that layer is selected.
    pub linear_max_abs_diff_infected: Option<f64>,
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn compare_point(
    spec: &ExperimentSpec,
    g: &Graph,
    lambda_max: f64,
    point: usize,
    p: &EpidemicParams,
    start: ChainState,
) -> Result<Vec<LayerRow>, ExperimentError> {
    let n = g.node_count();
    let config = ChainConfig::exact();
    let mut mu = ChainDistribution::point_mass(n, start);
    let mut mf = NodeProbs::from(mu.marginals());
    let model = spec.has_layer(Layer::Linear).then(|| LinearModel::new(g, p, lambda_max));
    let mut lin = mf.clone();
    let mut rows = Vec::with_capacity(spec.horizon + 1);
    for t in 0..=spec.horizon {
        if t > 0 {
            mu = step(g, p, &mu, &config)?.0;
            mf = step_nonlinear(g, p, &mf);
            if let Some(m) = &model {
                lin = step_linear(m, &lin);
            }
        }
        let exact = mu.marginals();
        rows.push(LayerRow {
            point,
            variant: p.variant,
            beta: p.beta,
            delta: p.delta,
            gamma: p.gamma,
            theta: p.theta,
            t,
            exact_mean_infected: exact.p_i.iter().sum::<f64>() / n as f64,
            meanfield_mean_infected: mf.mean_infected(),
            max_abs_diff_infected: max_diff(&exact.p_i, &mf.p_i),
            max_abs_diff_recovered: max_diff(&exact.p_r, &mf.p_r),
            linear_max_abs_diff_infected: model.as_ref().map(|_| max_diff(&exact.p_i, &lin.p_i)),
        });
    }
    Ok(rows)
}

/// Exact marginals against the mean-field map (and optionally the linear
/// model) from a common deterministic start drawn from `init` with `seed`.
pub fn run_layer_comparison(spec: &ExperimentSpec, jobs: usize) -> Result<Vec<LayerRow>, ExperimentError> {
    spec.validate()?;
    let g = spec.load_graph()?;
    ChainConfig::exact().check_size(g.node_count())?;
    let lambda_max = spectral_radius_default(&g)?.lambda_max;
    let sim = SimState::from_init(g.node_count(), spec.init, spec.seed)
        .map_err(|e| ExperimentError::Spec(e.to_string()))?;
    let start = ChainState::encode(sim.states());
    let points = spec.grid.points()?;
    let per_point = parallel_map(&points, jobs, |k, p| compare_point(spec, &g, lambda_max, k, p, start));
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    Ok(rows)
}

pub(crate) fn write_rows(rows: &[LayerRow], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "point,variant,beta,delta,gamma,theta,t,exact_mean_infected,meanfield_mean_infected,\
         max_abs_diff_infected,max_abs_diff_recovered,linear_max_abs_diff_infected"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.point,
            r.variant,
            r.beta,
            r.delta,
            r.gamma,
            r.theta,
            r.t,
            r.exact_mean_infected,
            r.meanfield_mean_infected,
            r.max_abs_diff_infected,
            r.max_abs_diff_recovered,
            fmt_opt(r.linear_max_abs_diff_infected)
        )?;
    }
    Ok(())
}

pub(crate) fn discrepancy_plot(spec: &ExperimentSpec, rows: &[LayerRow]) -> LinePlot {
    let mut plot = LinePlot::new(&spec.name, "t", "max |exact - mean-field| infected");
    let mut point = usize::MAX;
    for r in rows {
        if r.point != point {
            point = r.point;
            plot.add(format!("p{point}"), Vec::new());
        }
        if let Some(s) = plot.series.last_mut() {
            s.points.push((r.t as f64, r.max_abs_diff_infected));
        }
    }
    plot
}
