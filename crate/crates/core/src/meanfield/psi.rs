use super::map::escape_products;
use super::MeanFieldError;
use crate::graph::Graph;
use crate::params::EpidemicParams;

/// Infection pressure `Xi_i = 1 - prod_{j in N_i} (1 - beta P_I,j)`.
pub fn xi(g: &Graph, beta: f64, p_i: &[f64]) -> Vec<f64> {
    escape_products(g, beta, p_i).into_iter().map(|q| 1.0 - q).collect()
}

/// Normalised recovery pressure `delta i / (1 - r - i)`; infinite at the
/// singular edge `r + i = 1` unless `delta i = 0`.
pub fn omega(delta: f64, r: f64, i: f64) -> f64 {
    delta * i / (1.0 - r - i)
}

/// `Psi = Xi - omega`, whose zeros are the fixed points of the SIRS map on
/// the manifold `P_R = (delta / gamma) P_I`.
pub fn psi(g: &Graph, params: &EpidemicParams, p_r: &[f64], p_i: &[f64]) -> Result<Vec<f64>, MeanFieldError> {
    let n = g.node_count();
    for got in [p_r.len(), p_i.len()] {
        if got != n {
            return Err(MeanFieldError::SizeMismatch { expected: n, got });
        }
    }
    if let Some(node) = (0..n).find(|&k| p_r[k] + p_i[k] >= 1.0) {
        return Err(MeanFieldError::Domain {
            node,
            sum: p_r[node] + p_i[node],
        });
    }
    Ok(xi(g, params.beta, p_i)
        .into_iter()
        .enumerate()
        .map(|(k, x)| x - omega(params.delta, p_r[k], p_i[k]))
        .collect())
}
