use std::collections::HashMap;

use super::distribution::ChainDistribution;
use super::kernel::{infected_neighbor_counts, node_kernel};
use super::state::{pow3, state_count, ChainState};
use super::{ChainConfig, ChainError};
use crate::graph::Graph;
use crate::parallel::parallel_map;
use crate::params::EpidemicParams;

/// Result of [`evolve`]: the final distribution and the mass pruned at each
/// step.
#[derive(Debug, Clone, PartialEq)]
pub struct Evolution {
    pub distribution: ChainDistribution,
    pub pruned_mass: Vec<f64>,
}

/// Calls `visit(code, probability)` for every successor of `from` with
/// non-zero probability. Probabilities are multiplied in node order.
pub(crate) fn for_each_successor<F>(g: &Graph, params: &EpidemicParams, from: ChainState, mut visit: F)
where
    F: FnMut(u64, f64),
{
    let n = g.node_count();
    let states = from.decode(n);
    let counts = infected_neighbor_counts(g, &states);
    let mut choices: Vec<([(u64, f64); 3], usize)> = Vec::with_capacity(n);
    for i in 0..n {
        let row = node_kernel(params, states[i], counts[i]);
        let mut opts = [(0u64, 0.0f64); 3];
        let mut len = 0;
        for (d, &p) in row.iter().enumerate() {
            if p > 0.0 {
                opts[len] = (d as u64 * pow3(i), p);
                len += 1;
            }
        }
        choices.push((opts, len));
    }
    recurse(&choices, 0, 0, 1.0, &mut visit);
}

fn recurse<F: FnMut(u64, f64)>(choices: &[([(u64, f64); 3], usize)], k: usize, code: u64, prob: f64, visit: &mut F) {
    if k == choices.len() {
        if prob > 0.0 {
            visit(code, prob);
        }
        return;
    }
    let (opts, len) = &choices[k];
    for &(c, p) in &opts[..*len] {
        recurse(choices, k + 1, code + c, prob * p, visit);
    }
}

/// Row `from` of the transition matrix as a distribution.
pub fn transition_row(
    g: &Graph,
    params: &EpidemicParams,
    from: ChainState,
    config: &ChainConfig,
) -> Result<ChainDistribution, ChainError> {
    let n = g.node_count();
    config.check_size(n)?;
    let mut entries = Vec::new();
    for_each_successor(g, params, from, |code, p| entries.push((code, p)));
    entries.sort_by_key(|e| e.0);
    Ok(ChainDistribution::from_sorted_unchecked(n, entries))
}

enum Accumulator {
    Dense(Vec<f64>),
    Sparse(HashMap<u64, f64>),
}

impl Accumulator {
    fn add(&mut self, code: u64, mass: f64) {
        match self {
            Accumulator::Dense(v) => v[code as usize] += mass,
            Accumulator::Sparse(m) => *m.entry(code).or_insert(0.0) += mass,
        }
    }

    fn len_hint(&self) -> usize {
        match self {
            Accumulator::Dense(_) => 0,
            Accumulator::Sparse(m) => m.len(),
        }
    }

    fn into_sorted(self) -> Vec<(u64, f64)> {
        match self {
            Accumulator::Dense(v) => v
                .into_iter()
                .enumerate()
                .filter(|e| e.1 != 0.0)
                .map(|(c, m)| (c as u64, m))
                .collect(),
            Accumulator::Sparse(m) => {
                let mut out: Vec<_> = m.into_iter().filter(|e| e.1 != 0.0).collect();
                out.sort_by_key(|e| e.0);
                out
            }
        }
    }
}

fn propagate_chunk(
    g: &Graph,
    params: &EpidemicParams,
    sources: &[(u64, f64)],
    dense: bool,
    config: &ChainConfig,
    step_index: usize,
) -> Result<Vec<(u64, f64)>, ChainError> {
    let total = state_count(g.node_count());
    let mut acc = if dense {
        Accumulator::Dense(vec![0.0; total as usize])
    } else {
        Accumulator::Sparse(HashMap::new())
    };
    for &(code, mass) in sources {
        for_each_successor(g, params, ChainState(code), |to, p| acc.add(to, mass * p));
        if acc.len_hint() > config.memory_budget {
            return Err(ChainError::SupportExplosion {
                step: step_index,
                budget: config.memory_budget,
            });
        }
    }
    Ok(acc.into_sorted())
}

/// Sources are propagated in fixed-size chunks whose partial sums are merged
/// in chunk order, so the floating-point result does not depend on the number
/// of workers.
const SOURCE_CHUNK: usize = 2048;

/// One application of the transition kernel, followed by pruning. Returns
/// the new distribution and the pruned mass.
pub fn step(
    g: &Graph,
    params: &EpidemicParams,
    mu: &ChainDistribution,
    config: &ChainConfig,
) -> Result<(ChainDistribution, f64), ChainError> {
    step_indexed(g, params, mu, config, 1)
}

fn step_indexed(
    g: &Graph,
    params: &EpidemicParams,
    mu: &ChainDistribution,
    config: &ChainConfig,
    step_index: usize,
) -> Result<(ChainDistribution, f64), ChainError> {
    let n = g.node_count();
    config.check_size(n)?;
    if mu.node_count() != n {
        return Err(ChainError::SizeMismatch {
            expected: n,
            got: mu.node_count(),
        });
    }
    let total = state_count(n);
    // dense accumulation once the support is a sizeable fraction of the space
    let dense = (total as usize) <= config.memory_budget && (mu.support_len() as u64) * 3 > total;
    let sources = mu.entries();
    let merged = if sources.len() <= SOURCE_CHUNK {
        propagate_chunk(g, params, sources, dense, config, step_index)?
    } else {
        let chunks: Vec<&[(u64, f64)]> = sources.chunks(SOURCE_CHUNK).collect();
        let parts = parallel_map(&chunks, config.workers.max(1), |_, part| {
            propagate_chunk(g, params, part, dense, config, step_index)
        });
        let mut acc = if dense {
            Accumulator::Dense(vec![0.0; total as usize])
        } else {
            Accumulator::Sparse(HashMap::new())
        };
        for part in parts {
            for (code, mass) in part? {
                acc.add(code, mass);
            }
        }
        acc.into_sorted()
    };
    if merged.len() > config.memory_budget {
        return Err(ChainError::SupportExplosion {
            step: step_index,
            budget: config.memory_budget,
        });
    }
    let (kept, pruned) = prune(merged, config.prune_tol);
    Ok((ChainDistribution::from_sorted_unchecked(n, kept), pruned))
}

fn prune(entries: Vec<(u64, f64)>, tol: f64) -> (Vec<(u64, f64)>, f64) {
    if tol <= 0.0 {
        return (entries, 0.0);
    }
    let mut pruned = 0.0;
    let mut kept = Vec::with_capacity(entries.len());
    for (code, mass) in entries {
        if mass < tol {
            pruned += mass;
        } else {
            kept.push((code, mass));
        }
    }
    if pruned > 0.0 {
        let total: f64 = kept.iter().map(|e| e.1).sum();
        for e in &mut kept {
            e.1 /= total;
        }
    }
    (kept, pruned)
}

/// Applies the transition kernel `steps` times.
pub fn evolve(
    g: &Graph,
    params: &EpidemicParams,
    mu: &ChainDistribution,
    steps: usize,
    config: &ChainConfig,
) -> Result<Evolution, ChainError> {
    let mut current = mu.clone();
    let mut pruned_mass = Vec::with_capacity(steps);
    for s in 1..=steps {
        let (next, pruned) = step_indexed(g, params, &current, config, s)?;
        current = next;
        pruned_mass.push(pruned);
    }
    Ok(Evolution {
        distribution: current,
        pruned_mass,
    })
}
