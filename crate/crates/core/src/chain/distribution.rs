use std::io::{BufRead, BufReader, Read, Write};

use serde::{Deserialize, Serialize};

use super::state::{pow3, state_count, ChainState};
use super::ChainError;

const MASS_TOL: f64 = 1e-12;

/// Sparse probability vector over network states, sorted by code with
/// strictly positive entries.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainDistribution {
    n: usize,
    entries: Vec<(u64, f64)>,
}

impl ChainDistribution {
    pub fn point_mass(n: usize, state: ChainState) -> Self {
        debug_assert!(state.0 < state_count(n));
        Self {
            n,
            entries: vec![(state.0, 1.0)],
        }
    }

    /// Builds a distribution from `(code, mass)` pairs. Repeated codes are
    /// summed, zero masses dropped, and the total must be 1 within 1e-12.
    pub fn from_entries<I>(n: usize, entries: I) -> Result<Self, ChainError>
    where
        I: IntoIterator<Item = (u64, f64)>,
    {
        let total_states = state_count(n);
        let mut list: Vec<(u64, f64)> = Vec::new();
        for (code, mass) in entries {
            if code >= total_states {
                return Err(ChainError::InvalidDistribution(format!(
                    "state code {code} out of range for {n} nodes"
                )));
            }
            if !(mass >= 0.0) || !mass.is_finite() {
                return Err(ChainError::InvalidDistribution(format!(
                    "mass {mass} at state {code} is not a probability"
                )));
            }
            list.push((code, mass));
        }
        list.sort_by_key(|e| e.0);
        let mut entries: Vec<(u64, f64)> = Vec::with_capacity(list.len());
        for (code, mass) in list {
            match entries.last_mut() {
                Some(last) if last.0 == code => last.1 += mass,
                _ => entries.push((code, mass)),
            }
        }
        entries.retain(|e| e.1 > 0.0);
        let dist = Self { n, entries };
        let total = dist.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(ChainError::InvalidDistribution(format!(
                "total mass {total} differs from 1"
            )));
        }
        Ok(dist)
    }

    /// Caller guarantees sorted, unique, positive entries.
    pub(crate) fn from_sorted_unchecked(n: usize, entries: Vec<(u64, f64)>) -> Self {
        Self { n, entries }
    }

    /// Product measure in which node `i` is independently distributed as
    /// `per_node[i]` (indexed by state digit).
    pub fn product(per_node: &[[f64; 3]]) -> Result<Self, ChainError> {
        let n = per_node.len();
        let mut entries = vec![(0u64, 1.0f64)];
        for (i, probs) in per_node.iter().enumerate() {
            let place = pow3(i);
            let mut next = Vec::with_capacity(entries.len() * 3);
            for d in 0..3u64 {
                let p = probs[d as usize];
                if p > 0.0 {
                    next.extend(entries.iter().map(|&(c, m)| (c + d * place, m * p)));
                }
            }
            entries = next;
        }
        Self::from_entries(n, entries)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[(u64, f64)] {
        &self.entries
    }

    pub fn mass(&self, state: ChainState) -> f64 {
        self.entries
            .binary_search_by_key(&state.0, |e| e.0)
            .map_or(0.0, |k| self.entries[k].1)
    }

    pub fn total_mass(&self) -> f64 {
        self.entries.iter().map(|e| e.1).sum()
    }

    /// Per-node marginals `p_R,i = sum over X with X_i = R of mu_X`, and
    /// likewise for I.
    pub fn marginals(&self) -> MarginalVector {
        let mut p_r = vec![0.0; self.n];
        let mut p_i = vec![0.0; self.n];
        for &(code, mass) in &self.entries {
            let mut c = code;
            for i in 0..self.n {
                match c % 3 {
                    1 => p_i[i] += mass,
                    2 => p_r[i] += mass,
                    _ => {}
                }
                c /= 3;
            }
        }
        MarginalVector { p_r, p_i }
    }

    /// CSV with header `state_code,probability`, rows sorted by code.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "state_code,probability")?;
        for &(code, mass) in &self.entries {
            writeln!(out, "{code},{mass:e}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    pub fn read_csv<R: Read>(n: usize, reader: R) -> Result<Self, ChainError> {
        let mut entries = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = idx + 1;
            let line = line.map_err(|e| ChainError::Parse {
                line: line_no,
                reason: e.to_string(),
            })?;
            let line = line.trim();
            if line.is_empty() || (line_no == 1 && line.starts_with("state_code")) {
                continue;
            }
            let bad = |reason: String| ChainError::Parse { line: line_no, reason };
            let (code, mass) = line
                .split_once(',')
                .ok_or_else(|| bad("expected `state_code,probability`".into()))?;
            let code: u64 = code.trim().parse().map_err(|_| bad(format!("bad state code `{code}`")))?;
            let mass: f64 = mass.trim().parse().map_err(|_| bad(format!("bad probability `{mass}`")))?;
            entries.push((code, mass));
        }
        Self::from_entries(n, entries)
    }
}

/// Exact per-node marginals of a chain distribution. `p_S` is implied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginalVector {
    pub p_r: Vec<f64>,
    pub p_i: Vec<f64>,
}

impl MarginalVector {
    pub fn p_s(&self, i: usize) -> f64 {
        1.0 - self.p_r[i] - self.p_i[i]
    }

    /// Node state probabilities indexed by digit.
    pub fn node_probs(&self, i: usize) -> [f64; 3] {
        [self.p_s(i), self.p_i[i], self.p_r[i]]
    }
}

/// Total variation distance, half the L1 distance over the union support.
pub fn tv_distance(a: &ChainDistribution, b: &ChainDistribution) -> f64 {
    let (x, y) = (&a.entries, &b.entries);
    let (mut i, mut j) = (0, 0);
    let mut sum = 0.0;
    while i < x.len() || j < y.len() {
        match (x.get(i), y.get(j)) {
            (Some(&(ca, ma)), Some(&(cb, mb))) if ca == cb => {
                sum += (ma - mb).abs();
                i += 1;
                j += 1;
            }
            (Some(&(ca, ma)), Some(&(cb, _))) if ca < cb => {
                sum += ma;
                i += 1;
            }
            (Some(&(_, ma)), None) => {
                sum += ma;
                i += 1;
            }
            (_, Some(&(_, mb))) => {
                sum += mb;
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    (0.5 * sum).min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::NodeState;
    use proptest::prelude::*;

    fn dist(n: usize, e: &[(u64, f64)]) -> ChainDistribution {
        ChainDistribution::from_entries(n, e.iter().copied()).unwrap()
    }

    #[test]
    fn single_node_marginals() {
        let m = dist(1, &[(0, 0.2), (1, 0.5), (2, 0.3)]).marginals();
        assert_eq!(m.p_r, vec![0.3]);
        assert_eq!(m.p_i, vec![0.5]);
    }

    #[test]
    fn all_infected_marginals() {
        let m = ChainDistribution::point_mass(4, ChainState::uniform(4, NodeState::I)).marginals();
        assert_eq!(m.p_i, vec![1.0; 4]);
        assert_eq!(m.p_r, vec![0.0; 4]);
    }

    #[test]
    fn tv_examples() {
        let a = dist(1, &[(0, 0.6), (1, 0.4)]);
        let b = dist(1, &[(0, 1.0)]);
        assert!((tv_distance(&a, &b) - 0.4).abs() < 1e-15);
        assert_eq!(tv_distance(&a, &a), 0.0);
        let c = dist(1, &[(2, 1.0)]);
        assert_eq!(tv_distance(&b, &c), 1.0);
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(ChainDistribution::from_entries(1, [(0, 0.5)]).is_err());
        assert!(ChainDistribution::from_entries(1, [(0, 1.5), (1, -0.5)]).is_err());
        assert!(ChainDistribution::from_entries(1, [(3, 1.0)]).is_err());
    }

    #[test]
    fn product_of_independent_nodes() {
        let d = ChainDistribution::product(&[[0.75, 0.0, 0.25], [0.75, 0.0, 0.25]]).unwrap();
        assert_eq!(d.support_len(), 4);
        assert!((d.mass(ChainState(0)) - 0.5625).abs() < 1e-15);
        assert!((d.mass(ChainState(8)) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let d = dist(2, &[(0, 0.1), (4, 0.25), (8, 0.65)]);
        let text = d.to_csv_string();
        assert!(text.starts_with("state_code,probability\n0,"));
        assert_eq!(ChainDistribution::read_csv(2, text.as_bytes()).unwrap(), d);
    }

    fn arb_dist(n: usize) -> impl Strategy<Value = ChainDistribution> {
        let states = state_count(n);
        proptest::collection::vec((0..states, 0.01f64..1.0), 1..12).prop_map(move |raw| {
            let total: f64 = raw.iter().map(|e| e.1).sum();
            ChainDistribution::from_entries(n, raw.into_iter().map(|(c, m)| (c, m / total))).unwrap()
        })
    }

    proptest! {
        #[test]
        fn tv_is_a_metric(a in arb_dist(3), b in arb_dist(3), c in arb_dist(3)) {
            let ab = tv_distance(&a, &b);
            prop_assert!((0.0..=1.0).contains(&ab));
            prop_assert!((ab - tv_distance(&b, &a)).abs() <= 1e-12);
            prop_assert!(ab <= tv_distance(&a, &c) + tv_distance(&c, &b) + 1e-12);
            prop_assert!(tv_distance(&a, &a) <= 1e-12);
        }

        #[test]
        fn marginals_match_enumeration(d in arb_dist(3)) {
            let m = d.marginals();
            for i in 0..3 {
                let mut pr = 0.0;
                let mut pi = 0.0;
                for code in 0..27u64 {
                    let digits = [code % 3, (code / 3) % 3, code / 9];
                    let mass = d.mass(ChainState(code));
                    if digits[i] == 2 { pr += mass; }
                    if digits[i] == 1 { pi += mass; }
                }
                prop_assert!((m.p_r[i] - pr).abs() < 1e-12);
                prop_assert!((m.p_i[i] - pi).abs() < 1e-12);
                prop_assert!(m.p_r[i] + m.p_i[i] <= 1.0 + 1e-12);
            }
        }
    }
}
