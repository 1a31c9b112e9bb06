//! Largest adjacency eigenvalue by shifted power iteration.
//!
//! Iterating `A + dI` with `d` the maximum degree keeps the operator
//! positive semidefinite, so bipartite graphs (where `-lambda_max` is also an
//! eigenvalue of `A`) still converge and the Rayleigh quotient is monotone
//! non-decreasing along the iterates. The start vector is all-ones, which has
//! positive overlap with the Perron vector of every connected component.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub lambda_max: f64,
    /// Iterations summed over components.
    pub iterations: usize,
    /// `||A x - lambda x|| / (lambda ||x||)` at the returned vector; zero for
    /// edgeless components.
    pub residual: f64,
    /// False when the graph has several components; `lambda_max` is then the
    /// maximum over components.
    pub connected: bool,
}

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error(
        "power iteration did not converge in {iterations} iterations \
         (estimate {best_estimate}, residual {residual:e})"
    )]
    NoConvergence {
        best_estimate: f64,
        residual: f64,
        iterations: usize,
    },
}

/// Per-iteration trace of the Rayleigh quotient on a connected graph; used by
/// tests and diagnostics.
pub fn rayleigh_trace(g: &Graph, iterations: usize) -> Vec<f64> {
    let mut state = PowerState::new(g);
    (0..iterations).map(|_| state.advance(g).0).collect()
}

pub fn spectral_radius(g: &Graph, tol: f64, max_iter: usize) -> Result<SpectralReport, SpectralError> {
    let components = g.components();
    let connected = components.len() == 1;
    if !connected {
        log::warn!(
            "graph has {} components; reporting the largest component spectral radius",
            components.len()
        );
    }
    let mut best = SpectralReport {
        lambda_max: 0.0,
        iterations: 0,
        residual: 0.0,
        connected,
    };
    let mut total_iterations = 0;
    for comp in components {
        if comp.len() == 1 {
            continue;
        }
        let sub;
        let graph = if connected {
            g
        } else {
            sub = g.induced(&comp);
            &sub
        };
        let (lambda, iterations, residual) = match component_radius(graph, tol, max_iter) {
            Ok(v) => v,
            Err(SpectralError::NoConvergence {
                best_estimate,
                residual,
                iterations,
            }) => {
                return Err(SpectralError::NoConvergence {
                    best_estimate: best_estimate.max(best.lambda_max),
                    residual,
                    iterations: total_iterations + iterations,
                })
            }
        };
        total_iterations += iterations;
        if lambda > best.lambda_max {
            best.lambda_max = lambda;
            best.residual = residual;
        }
    }
    best.iterations = total_iterations;
    Ok(best)
}

pub fn spectral_radius_default(g: &Graph) -> Result<SpectralReport, SpectralError> {
    spectral_radius(g, DEFAULT_TOLERANCE, DEFAULT_MAX_ITER)
}

struct PowerState {
    x: Vec<f64>,
    shift: f64,
}

impl PowerState {
    fn new(g: &Graph) -> Self {
        let n = g.node_count();
        let norm = (n as f64).sqrt();
        Self {
            x: vec![1.0 / norm; n],
            shift: g.max_degree() as f64,
        }
    }

    /// Returns the Rayleigh quotient of `A` at the current unit vector and
    /// its relative residual, then advances `x <- (A + dI)x / ||.||`.
    fn advance(&mut self, g: &Graph) -> (f64, f64) {
        let ax = g.adjacency_mul(&self.x);
        let rayleigh: f64 = ax.iter().zip(&self.x).map(|(a, b)| a * b).sum();
        let resid_sq: f64 = ax
            .iter()
            .zip(&self.x)
            .map(|(a, b)| (a - rayleigh * b).powi(2))
            .sum();
        let residual = if rayleigh > 0.0 {
            resid_sq.sqrt() / rayleigh
        } else {
            f64::INFINITY
        };
        let mut next: Vec<f64> = ax.iter().zip(&self.x).map(|(a, b)| a + self.shift * b).collect();
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut next {
            *v /= norm;
        }
        self.x = next;
        (rayleigh, residual)
    }
}

fn component_radius(g: &Graph, tol: f64, max_iter: usize) -> Result<(f64, usize, f64), SpectralError> {
    let mut state = PowerState::new(g);
    let mut best = (0.0, f64::INFINITY);
    for it in 1..=max_iter {
        let (rayleigh, residual) = state.advance(g);
        best = (rayleigh, residual);
        if residual <= tol {
            return Ok((rayleigh, it, residual));
        }
    }
    Err(SpectralError::NoConvergence {
        best_estimate: best.0,
        residual: best.1,
        iterations: max_iter,
    })
}
