use super::NodeProbs;
use crate::graph::Graph;
use crate::params::{EpidemicParams, Variant};

/// `prod_{j in N_i} (1 - beta P_I,j)` for every node.
pub(crate) fn escape_products(g: &Graph, beta: f64, p_i: &[f64]) -> Vec<f64> {
    (0..g.node_count())
        .map(|i| g.neighbors(i).iter().map(|&j| 1.0 - beta * p_i[j]).product())
        .collect()
}

/// One step of the nonlinear mean-field map for the model variant.
pub fn step_nonlinear(g: &Graph, params: &EpidemicParams, s: &NodeProbs) -> NodeProbs {
    let n = g.node_count();
    assert_eq!(s.node_count(), n, "state size does not match graph");
    let escape = escape_products(g, params.beta, &s.p_i);
    let (keep_infected, delta, gamma, theta) = (1.0 - params.delta, params.delta, params.gamma, params.theta);
    let mut p_r = Vec::with_capacity(n);
    let mut p_i = Vec::with_capacity(n);
    for k in 0..n {
        let (r, i) = (s.p_r[k], s.p_i[k]);
        let sus = 1.0 - r - i;
        let q = escape[k];
        let (next_r, next_i) = match params.variant {
            Variant::Sirs => ((1.0 - gamma) * r + delta * i, keep_infected * i + (1.0 - q) * sus),
            Variant::SivInfectionDominant => (
                (1.0 - gamma) * r + delta * i + q * theta * sus,
                keep_infected * i + (1.0 - q) * sus,
            ),
            Variant::SivVaccinationDominant => (
                (1.0 - gamma) * r + delta * i + theta * sus,
                keep_infected * i + (1.0 - theta) * (1.0 - q) * sus,
            ),
        };
        p_r.push(next_r);
        p_i.push(next_i);
    }
    let out = NodeProbs { p_r, p_i };
    debug_assert!(out.is_valid(1e-12), "mean-field map left the simplex");
    out
}

/// The linear bound `(1 - delta) P_I + c beta A P_I` that dominates the
/// infected coordinates of [`step_nonlinear`], with `c = 1 - theta` for the
/// vaccination-dominant map and 1 otherwise.
pub fn infection_upper_bound(g: &Graph, params: &EpidemicParams, s: &NodeProbs) -> Vec<f64> {
    let coupling = match params.variant {
        Variant::SivVaccinationDominant => (1.0 - params.theta) * params.beta,
        _ => params.beta,
    };
    let pressure = g.adjacency_mul(&s.p_i);
    s.p_i
        .iter()
        .zip(pressure)
        .map(|(i, a)| (1.0 - params.delta) * i + coupling * a)
        .collect()
}

/// Iterates the map `steps` times, calling `observe(t, state)` for
/// `t = 0..=steps`. Returns the final state.
pub fn iterate<F>(g: &Graph, params: &EpidemicParams, start: NodeProbs, steps: usize, mut observe: F) -> NodeProbs
where
    F: FnMut(usize, &NodeProbs),
{
    let mut s = start;
    observe(0, &s);
    for t in 1..=steps {
        s = step_nonlinear(g, params, &s);
        observe(t, &s);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    #[test]
    fn no_infection_only_wanes_immunity() {
        let g = generate(GraphKind::Cycle(5), 0).unwrap();
        let p = EpidemicParams::sirs(0.4, 0.2, 0.3).unwrap();
        let s = NodeProbs::new(vec![0.5, 0.1, 0.0, 0.9, 0.3], vec![0.0; 5]);
        let next = step_nonlinear(&g, &p, &s);
        assert_eq!(next.p_i, vec![0.0; 5]);
        for k in 0..5 {
            assert!((next.p_r[k] - 0.7 * s.p_r[k]).abs() < 1e-16);
        }
    }

    #[test]
    fn isolated_node_heals_geometrically() {
        let g = Graph::empty(1).unwrap();
        let p = EpidemicParams::sirs(0.9, 0.25, 0.3).unwrap();
        let next = step_nonlinear(&g, &p, &NodeProbs::new(vec![0.1], vec![0.6]));
        assert!((next.p_i[0] - 0.75 * 0.6).abs() < 1e-16);
    }

    #[test]
    fn two_node_path_against_scalar_evaluation() {
        let g = generate(GraphKind::Path(2), 0).unwrap();
        let p = EpidemicParams::sirs(0.5, 0.4, 0.3).unwrap();
        let next = step_nonlinear(&g, &p, &NodeProbs::new(vec![0.0, 0.0], vec![0.2, 0.6]));
        let i0 = (1.0 - 0.4) * 0.2 + (1.0 - (1.0 - 0.5 * 0.6)) * (1.0 - 0.0 - 0.2);
        let i1 = (1.0 - 0.4) * 0.6 + (1.0 - (1.0 - 0.5 * 0.2)) * (1.0 - 0.0 - 0.6);
        assert!((next.p_i[0] - i0).abs() < 1e-15);
        assert!((next.p_i[1] - i1).abs() < 1e-15);
        assert!((next.p_r[0] - 0.4 * 0.2).abs() < 1e-15);
        assert!((next.p_r[1] - 0.4 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn siv_disease_free_point_is_fixed() {
        let g = generate(GraphKind::ErdosRenyi { n: 30, p: 0.2 }, 4).unwrap();
        for variant in [Variant::SivInfectionDominant, Variant::SivVaccinationDominant] {
            let p = EpidemicParams::new(variant, 0.3, 0.4, 0.25, 0.15).unwrap();
            let dfp = NodeProbs::disease_free(30, &p);
            let next = step_nonlinear(&g, &p, &dfp);
            assert!(next.max_abs_diff(&dfp) < 1e-14);
        }
    }
}
