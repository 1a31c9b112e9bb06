use super::NodeProbs;
use crate::graph::Graph;
use crate::params::{EpidemicParams, Variant};

/// Linearisation of the mean-field map around its disease-free point,
///
/// ```text
/// [P_R; P_I](t+1) = [r* 1; 0] + [[a I,  b I + c A], [0, d I + e A]] ([P_R; P_I](t) - [r* 1; 0])
/// ```
///
/// stored blockwise rather than as a dense `2n x 2n` matrix.
#[derive(Debug, Clone)]
pub struct LinearModel<'g> {
    graph: &'g Graph,
    pub variant: Variant,
    /// `a`: `1 - gamma - theta`.
    pub recovered_diag: f64,
    /// `b`: `delta - theta`.
    pub cross_diag: f64,
    /// `c`: `-theta P_S* beta` (infection-dominant), zero otherwise.
    pub cross_adj: f64,
    /// `d`: `1 - delta`.
    pub infected_diag: f64,
    /// `e`: `beta`, `P_S* beta`, or `(1 - theta) P_S* beta`.
    pub infected_adj: f64,
    /// `r*`: disease-free recovered level, zero for SIRS.
    pub offset_r: f64,
    /// Largest eigenvalue modulus of the system: the larger of `|a|` and
    /// `d + e lambda_max`.
    pub spectral_norm_upper: f64,
}

impl<'g> LinearModel<'g> {
    pub fn new(graph: &'g Graph, params: &EpidemicParams, lambda_max: f64) -> Self {
        let (beta, delta, gamma, theta) = (params.beta, params.delta, params.gamma, params.theta);
        let s_star = params.susceptible_star();
        let (cross_adj, infected_adj) = match params.variant {
            Variant::Sirs => (0.0, beta),
            Variant::SivInfectionDominant => (-theta * s_star * beta, s_star * beta),
            Variant::SivVaccinationDominant => (0.0, (1.0 - theta) * s_star * beta),
        };
        let recovered_diag = 1.0 - gamma - theta;
        let infected_diag = 1.0 - delta;
        Self {
            graph,
            variant: params.variant,
            recovered_diag,
            cross_diag: delta - theta,
            cross_adj,
            infected_diag,
            infected_adj,
            offset_r: params.recovered_star(),
            spectral_norm_upper: recovered_diag.abs().max((infected_diag + infected_adj * lambda_max).abs()),
        }
    }

    pub fn graph(&self) -> &'g Graph {
        self.graph
    }

    pub fn dim(&self) -> usize {
        2 * self.graph.node_count()
    }

    /// Matrix entry; rows and columns `0..n` are recovered coordinates,
    /// `n..2n` infected ones.
    pub fn entry(&self, row: usize, col: usize) -> f64 {
        let n = self.graph.node_count();
        let adj = |i: usize, j: usize| if self.graph.has_edge(i, j) { 1.0 } else { 0.0 };
        let eye = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
        match (row < n, col < n) {
            (true, true) => self.recovered_diag * eye(row, col),
            (true, false) => self.cross_diag * eye(row, col - n) + self.cross_adj * adj(row, col - n),
            (false, true) => 0.0,
            (false, false) => {
                let (i, j) = (row - n, col - n);
                self.infected_diag * eye(i, j) + self.infected_adj * adj(i, j)
            }
        }
    }

    /// Row-major dense copy of the matrix.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d).map(|r| (0..d).map(|c| self.entry(r, c)).collect()).collect()
    }

    pub fn offset(&self) -> NodeProbs {
        NodeProbs::uniform(self.graph.node_count(), self.offset_r, 0.0)
    }
}

/// One affine step `offset + M (s - offset)`.
pub fn step_linear(model: &LinearModel<'_>, s: &NodeProbs) -> NodeProbs {
    let g = model.graph;
    let dr: Vec<f64> = s.p_r.iter().map(|r| r - model.offset_r).collect();
    let pressure = g.adjacency_mul(&s.p_i);
    let p_r = dr
        .iter()
        .zip(&s.p_i)
        .zip(&pressure)
        .map(|((r, i), a)| model.offset_r + model.recovered_diag * r + model.cross_diag * i + model.cross_adj * a)
        .collect();
    let p_i = s
        .p_i
        .iter()
        .zip(&pressure)
        .map(|(i, a)| model.infected_diag * i + model.infected_adj * a)
        .collect();
    NodeProbs { p_r, p_i }
}
