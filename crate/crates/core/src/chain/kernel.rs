use crate::graph::Graph;
use crate::params::{EpidemicParams, NodeState, Variant};

/// Next-state distribution of one node, indexed by the next state's digit,
/// given its current state and the number `m` of currently infected
/// neighbours.
pub fn node_kernel(params: &EpidemicParams, state: NodeState, infected_neighbors: usize) -> [f64; 3] {
    match state {
        NodeState::I => [0.0, 1.0 - params.delta, params.delta],
        NodeState::R => [params.gamma, 0.0, 1.0 - params.gamma],
        NodeState::S => {
            let escape = (1.0 - params.beta).powi(infected_neighbors as i32);
            let theta = params.theta;
            match params.variant {
                Variant::Sirs => [escape, 1.0 - escape, 0.0],
                Variant::SivInfectionDominant => [escape * (1.0 - theta), 1.0 - escape, escape * theta],
                Variant::SivVaccinationDominant => {
                    [escape * (1.0 - theta), (1.0 - escape) * (1.0 - theta), theta]
                }
            }
        }
    }
}

/// `m_i` for every node: the number of neighbours currently infected.
pub fn infected_neighbor_counts(g: &Graph, states: &[NodeState]) -> Vec<usize> {
    let mut counts = vec![0usize; g.node_count()];
    for (j, s) in states.iter().enumerate() {
        if *s == NodeState::I {
            for &i in g.neighbors(j) {
                counts[i] += 1;
            }
        }
    }
    counts
}
