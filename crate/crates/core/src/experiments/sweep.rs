use std::io::Write;

use serde::{Deserialize, Serialize};

use super::plot::LinePlot;
use super::spec::{ExperimentSpec, Layer};
use super::{csv_field, fmt_opt, ExperimentError};
use crate::chain::mixing_time_bound;
use crate::graph::Graph;
use crate::meanfield::{
    endemic_fixed_point, iterate, step_linear, FixedPointOptions, LinearModel, NodeProbs, Regime, ThresholdReport,
};
use crate::montecarlo::{ensemble, Ensemble, RunOptions};
use crate::parallel::parallel_map;
use crate::params::{EpidemicParams, Variant};
use crate::spectral::spectral_radius_default;

/// Steps `first..=last` of the log-linear decay fit.
pub const DECAY_FIT_WINDOW: (usize, usize) = (10, 100);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub point: usize,
    pub variant: Variant,
    pub beta: f64,
    pub delta: f64,
    pub gamma: f64,
    pub theta: f64,
    pub lambda_max: f64,
    pub ratio_local: f64,
    pub ratio_global: f64,
    pub regime: Regime,
    pub regime_local: Regime,
    /// `ln ||M||` of the matrix used by the mixing bound.
    pub log_norm_bound: f64,
    /// Slope of `ln(sum P_I)` against `t` over the fit window.
    pub decay_rate_fit: Option<f64>,
    pub decay_rate_fit_linear: Option<f64>,
    /// Mean `P_I*` of the endemic fixed point (SIRS, supercritical).
    pub endemic_level_mf: Option<f64>,
    pub endemic_outcome: Option<String>,
    /// Fraction of replicas with infected nodes at the horizon.
    pub mc_survival_fraction: Option<f64>,
    /// Replica mean of the infected fraction averaged over
    /// `average_from..=horizon`.
    pub mc_mean_infected_fraction: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointCurves {
    /// `(mean P_I, mean P_R)` per mean-field step.
    pub meanfield: Vec<(f64, f64)>,
    pub montecarlo: Option<Ensemble>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub curves: Vec<PointCurves>,
}

/// Least-squares slope of `ln y` against `t` over the fit window, skipping
/// non-positive values. `None` with fewer than two usable points.
pub(crate) fn decay_fit(totals: &[f64]) -> Option<f64> {
    let (first, last) = DECAY_FIT_WINDOW;
    let pts: Vec<(f64, f64)> = (first..=last.min(totals.len().saturating_sub(1)))
        .filter(|&t| totals[t] > 0.0 && totals[t].is_finite())
        .map(|t| (t as f64, totals[t].ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let mean_t = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mean_t) * (p.1 - mean_y)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mean_t).powi(2)).sum();
    Some(sxy / sxx)
}

fn start_state(spec: &ExperimentSpec, n: usize) -> NodeProbs {
    NodeProbs::uniform(n, 0.0, spec.init.infected_count(n) as f64 / n as f64)
}

fn run_point(
    spec: &ExperimentSpec,
    g: &Graph,
    lambda_max: f64,
    point: usize,
    p: &EpidemicParams,
    jobs: usize,
) -> (SweepRow, PointCurves) {
    let n = g.node_count();
    let report = ThresholdReport::new(p, lambda_max);
    let mut row = SweepRow {
        point,
        variant: p.variant,
        beta: p.beta,
        delta: p.delta,
        gamma: p.gamma,
        theta: p.theta,
        lambda_max,
        ratio_local: report.ratio_local,
        ratio_global: report.ratio_global,
        regime: report.regime,
        regime_local: report.regime_local,
        log_norm_bound: mixing_time_bound(n, p, lambda_max, spec.epsilon).norm.ln(),
        decay_rate_fit: None,
        decay_rate_fit_linear: None,
        endemic_level_mf: None,
        endemic_outcome: None,
        mc_survival_fraction: None,
        mc_mean_infected_fraction: None,
        error: None,
    };
    let mut curves = PointCurves {
        meanfield: Vec::new(),
        montecarlo: None,
    };
    let steps = spec.horizon.max(DECAY_FIT_WINDOW.1);

    if spec.has_layer(Layer::Meanfield) {
        let mut totals = Vec::with_capacity(steps + 1);
        iterate(g, p, start_state(spec, n), steps, |_, s| {
            totals.push(s.total_infected());
            curves
                .meanfield
                .push((s.mean_infected(), s.p_r.iter().sum::<f64>() / n as f64));
        });
        row.decay_rate_fit = decay_fit(&totals);
        if p.variant == Variant::Sirs && report.regime == Regime::Supercritical && p.gamma > 0.0 {
            match endemic_fixed_point(g, p, &FixedPointOptions::default()) {
                Ok(fp) => {
                    row.endemic_outcome = Some(fp.outcome.label().to_string());
                    if fp.is_converged() {
                        row.endemic_level_mf = Some(fp.p_i_star.iter().sum::<f64>() / n as f64);
                    }
                }
                Err(e) => row.error = Some(e.to_string()),
            }
        }
    }

    if spec.has_layer(Layer::Linear) {
        let model = LinearModel::new(g, p, lambda_max);
        let mut s = start_state(spec, n);
        let mut totals = vec![s.total_infected()];
        for _ in 0..DECAY_FIT_WINDOW.1 {
            s = step_linear(&model, &s);
            totals.push(s.total_infected());
        }
        row.decay_rate_fit_linear = decay_fit(&totals);
    }

    if spec.has_layer(Layer::Montecarlo) {
        let opts = RunOptions::new(spec.horizon);
        match ensemble(g, p, spec.init, spec.replicas, &opts, spec.seed, jobs) {
            Ok(e) => {
                row.mc_survival_fraction = Some(e.survival_fraction(spec.horizon));
                let from = spec.average_from();
                let avg = e
                    .trajectories
                    .iter()
                    .map(|t| t.mean_infected_fraction(from, spec.horizon))
                    .sum::<f64>()
                    / e.runs() as f64;
                row.mc_mean_infected_fraction = Some(avg);
                curves.montecarlo = Some(e);
            }
            Err(e) => row.error = Some(e.to_string()),
        }
    }
    (row, curves)
}

/// Per grid point: threshold quantities, mean-field and linear decay-rate
/// fits, the mean-field endemic level and Monte Carlo survival. Failures at
/// one grid point are recorded in its `error` column.
pub fn run_threshold_sweep(spec: &ExperimentSpec, jobs: usize) -> Result<SweepOutput, ExperimentError> {
    spec.validate()?;
    if spec.has_layer(Layer::Exact) {
        log::warn!("the exact layer is not part of threshold sweeps; ignoring it");
    }
    let g = spec.load_graph()?;
    let lambda_max = spectral_radius_default(&g)?.lambda_max;
    let points = spec.grid.points()?;
    let jobs = jobs.max(1);
    // parallelise over whichever axis is wider
    let (outer, inner) = if points.len() >= jobs { (jobs, 1) } else { (1, jobs) };
    let results = parallel_map(&points, outer, |k, p| {
        log::info!("grid point {k}: {p:?}");
        run_point(spec, &g, lambda_max, k, p, inner)
    });
    let (rows, curves) = results.into_iter().unzip();
    Ok(SweepOutput { rows, curves })
}

pub(crate) fn write_rows(rows: &[SweepRow], out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(
        out,
        "point,variant,beta,delta,gamma,theta,lambda_max,ratio_local,ratio_global,regime,regime_local,\
         log_norm_bound,decay_rate_fit,decay_rate_fit_linear,endemic_level_mf,endemic_outcome,\
         mc_survival_fraction,mc_mean_infected_fraction,error"
    )?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.point,
            r.variant,
            r.beta,
            r.delta,
            r.gamma,
            r.theta,
            r.lambda_max,
            r.ratio_local,
            r.ratio_global,
            r.regime,
            r.regime_local,
            r.log_norm_bound,
            fmt_opt(r.decay_rate_fit),
            fmt_opt(r.decay_rate_fit_linear),
            fmt_opt(r.endemic_level_mf),
            r.endemic_outcome.as_deref().unwrap_or(""),
            fmt_opt(r.mc_survival_fraction),
            fmt_opt(r.mc_mean_infected_fraction),
            csv_field(r.error.as_deref().unwrap_or("")),
        )?;
    }
    Ok(())
}

pub(crate) fn write_meanfield_curve(curve: &PointCurves, out: &mut dyn Write) -> std::io::Result<()> {
    writeln!(out, "t,mean_p_i,mean_p_r")?;
    for (t, (i, r)) in curve.meanfield.iter().enumerate() {
        writeln!(out, "{t},{i},{r}")?;
    }
    Ok(())
}

pub(crate) fn infected_plot(spec: &ExperimentSpec, result: &SweepOutput) -> LinePlot {
    let mut plot = LinePlot::new(&spec.name, "t", "infected fraction");
    for (row, curve) in result.rows.iter().zip(&result.curves) {
        let tag = format!("p{} ratio {:.2}", row.point, row.ratio_global);
        if let Some(e) = &curve.montecarlo {
            plot.add(
                format!("{tag} mc"),
                e.rows.iter().map(|r| (r.t as f64, r.mean_infected_fraction)).collect(),
            );
        }
        if !curve.meanfield.is_empty() {
            plot.add(
                format!("{tag} mf"),
                curve
                    .meanfield
                    .iter()
                    .take(spec.horizon + 1)
                    .enumerate()
                    .map(|(t, v)| (t as f64, v.0))
                    .collect(),
            );
        }
    }
    plot
}
