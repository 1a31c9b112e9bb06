use std::io::Write;

use serde::{Deserialize, Serialize};

use super::sim::{run, Init, RunOptions, Trajectory};
use super::MonteCarloError;
use crate::graph::Graph;
use crate::parallel::parallel_map;
use crate::params::EpidemicParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRow {
    pub t: usize,
    pub mean_infected_fraction: f64,
    pub q10_infected_fraction: f64,
    pub median_infected_fraction: f64,
    pub q90_infected_fraction: f64,
    /// Fraction of replicas with no infected node at `t`.
    pub extinct_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ensemble {
    pub base_seed: u64,
    /// Replica `r` was seeded with `base_seed + r`.
    pub trajectories: Vec<Trajectory>,
    pub rows: Vec<EnsembleRow>,
}

/// Nearest-rank quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

impl Ensemble {
    fn from_trajectories(base_seed: u64, horizon: usize, trajectories: Vec<Trajectory>) -> Self {
        let runs = trajectories.len() as f64;
        let rows = (0..=horizon)
            .map(|t| {
                let mut fractions: Vec<f64> = trajectories
                    .iter()
                    .map(|tr| tr.infected_at(t) as f64 / tr.n as f64)
                    .collect();
                let extinct = fractions.iter().filter(|f| **f == 0.0).count() as f64;
                let mean = fractions.iter().sum::<f64>() / runs;
                fractions.sort_by(f64::total_cmp);
                EnsembleRow {
                    t,
                    mean_infected_fraction: mean,
                    q10_infected_fraction: quantile(&fractions, 0.1),
                    median_infected_fraction: quantile(&fractions, 0.5),
                    q90_infected_fraction: quantile(&fractions, 0.9),
                    extinct_fraction: extinct / runs,
                }
            })
            .collect();
        Self {
            base_seed,
            trajectories,
            rows,
        }
    }

    pub fn runs(&self) -> usize {
        self.trajectories.len()
    }

    /// Fraction of replicas with at least one infected node at `t`.
    pub fn survival_fraction(&self, t: usize) -> f64 {
        let alive = self.trajectories.iter().filter(|tr| tr.infected_at(t) > 0).count();
        alive as f64 / self.runs() as f64
    }

    /// Per-step aggregate CSV.
    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(
            out,
            "t,mean_infected_fraction,q10_infected_fraction,median_infected_fraction,q90_infected_fraction,extinct_fraction"
        )?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{}",
                r.t,
                r.mean_infected_fraction,
                r.q10_infected_fraction,
                r.median_infected_fraction,
                r.q90_infected_fraction,
                r.extinct_fraction
            )?;
        }
        Ok(())
    }

    /// All replicas in long format: `replica,t,num_S,num_I,num_R`.
    pub fn write_replicas_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "replica,t,num_S,num_I,num_R")?;
        for (r, tr) in self.trajectories.iter().enumerate() {
            for (t, c) in tr.counts.iter().enumerate() {
                writeln!(out, "{r},{t},{},{},{}", c[0], c[1], c[2])?;
            }
        }
        Ok(())
    }
}

/// Runs `runs` replicas on up to `jobs` threads. Results do not depend on
/// `jobs`.
pub fn ensemble(
    g: &Graph,
    params: &EpidemicParams,
    init: Init,
    runs: usize,
    opts: &RunOptions,
    base_seed: u64,
    jobs: usize,
) -> Result<Ensemble, MonteCarloError> {
    if runs == 0 {
        return Err(MonteCarloError::ZeroRuns);
    }
    if opts.horizon == 0 {
        return Err(MonteCarloError::ZeroHorizon);
    }
    init.validate()?;
    let ids: Vec<u64> = (0..runs as u64).collect();
    let trajectories = parallel_map(&ids, jobs, |_, &r| run(g, params, init, opts, base_seed.wrapping_add(r)))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Ensemble::from_trajectories(base_seed, opts.horizon, trajectories))
}
