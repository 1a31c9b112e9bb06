use super::distribution::ChainDistribution;
use super::state::ChainState;
use super::ChainError;
use crate::graph::Graph;
use crate::params::{EpidemicParams, Variant};

/// Stationary distribution of the chain.
///
/// SIRS: the point mass on all-susceptible. SIV variants: once infection is
/// gone every node flips independently between S and R, giving the product
/// measure with `P(S) = gamma/(gamma+theta)` and `P(R) = theta/(gamma+theta)`.
pub fn stationary_distribution(g: &Graph, params: &EpidemicParams) -> Result<ChainDistribution, ChainError> {
    let n = g.node_count();
    match params.variant {
        Variant::Sirs => {
            if params.gamma <= 0.0 {
                return Err(ChainError::NoStationary(
                    "SIRS with gamma = 0 has absorbing recovered states",
                ));
            }
            Ok(ChainDistribution::point_mass(n, ChainState(0)))
        }
        Variant::SivInfectionDominant | Variant::SivVaccinationDominant => {
            if params.theta <= 0.0 {
                return Err(ChainError::NoStationary("SIV stationary form requires theta > 0"));
            }
            if params.gamma == 1.0 && params.theta == 1.0 {
                return Err(ChainError::NoStationary("gamma = theta = 1 is periodic"));
            }
            let node = [params.susceptible_star(), 0.0, params.recovered_star()];
            ChainDistribution::product(&vec![node; n])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    #[test]
    fn sirs_point_mass() {
        let g = generate(GraphKind::Cycle(4), 0).unwrap();
        let p = EpidemicParams::sirs(0.3, 0.2, 0.1).unwrap();
        let pi = stationary_distribution(&g, &p).unwrap();
        assert_eq!(pi.entries(), &[(0, 1.0)]);
        let p0 = EpidemicParams::sirs(0.3, 0.2, 0.0).unwrap();
        assert!(stationary_distribution(&g, &p0).is_err());
    }

    #[test]
    fn siv_product_form() {
        let p = EpidemicParams::new(Variant::SivInfectionDominant, 0.3, 0.2, 0.3, 0.1).unwrap();
        let one = stationary_distribution(&Graph::empty(1).unwrap(), &p).unwrap();
        assert!((one.mass(ChainState(0)) - 0.75).abs() < 1e-15);
        assert!((one.mass(ChainState(2)) - 0.25).abs() < 1e-15);
        let two = stationary_distribution(&generate(GraphKind::Path(2), 0).unwrap(), &p).unwrap();
        for (code, want) in [(0, 0.5625), (6, 0.1875), (2, 0.1875), (8, 0.0625)] {
            assert!((two.mass(ChainState(code)) - want).abs() < 1e-15);
        }
        let m = two.marginals();
        for i in 0..2 {
            assert!((m.p_r[i] - 0.25).abs() < 1e-15);
            assert_eq!(m.p_i[i], 0.0);
        }
    }
}
