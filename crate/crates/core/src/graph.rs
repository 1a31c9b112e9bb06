//! Undirected simple graphs, generators and the edge-list text format.

use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("edge probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },
    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("unknown graph spec `{0}` (expected complete:N, path:N, star:N, cycle:N or er:N:P)")]
    BadSpec(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// An immutable undirected graph on nodes `0..n` with sorted, symmetric
/// adjacency lists and no self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Graph {
    /// Builds a graph from an edge iterator. Duplicates (in either
    /// orientation) are merged; self-loops and out-of-range ids are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency = vec![Vec::new(); n];
        for (u, v) in edges {
            for node in [u, v] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop { line: 0, node: u });
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        Ok(Self::from_raw_adjacency(adjacency))
    }

    fn from_raw_adjacency(mut adjacency: Vec<Vec<usize>>) -> Self {
        for list in &mut adjacency {
            list.sort_unstable();
            list.dedup();
        }
        let degree_sum: usize = adjacency.iter().map(Vec::len).sum();
        Self {
            adjacency,
            edge_count: degree_sum / 2,
        }
    }

    /// Graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Result<Self, GraphError> {
        Self::from_edges(n, std::iter::empty())
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn average_degree(&self) -> f64 {
        2.0 * self.edge_count as f64 / self.node_count() as f64
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Edges as `(u, v)` pairs with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    /// `y = A x`.
    pub fn adjacency_mul(&self, x: &[f64]) -> Vec<f64> {
        self.adjacency
            .iter()
            .map(|list| list.iter().map(|&j| x[j]).sum())
            .collect()
    }

    /// Connected components, each a sorted node list, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            stack.push(start);
            let mut comp = Vec::new();
            while let Some(u) = stack.pop() {
                comp.push(u);
                for &v in &self.adjacency[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() == 1
    }

    /// Induced subgraph on `nodes` (relabelled `0..nodes.len()` in the given order).
    pub fn induced(&self, nodes: &[usize]) -> Graph {
        let mut index = vec![usize::MAX; self.node_count()];
        for (k, &v) in nodes.iter().enumerate() {
            index[v] = k;
        }
        let adjacency = nodes
            .iter()
            .map(|&u| {
                self.adjacency[u]
                    .iter()
                    .filter_map(|&v| (index[v] != usize::MAX).then_some(index[v]))
                    .collect()
            })
            .collect();
        Graph::from_raw_adjacency(adjacency)
    }

    /// Parses the edge-list text format: one `u v` pair per line, 0-indexed,
    /// `#` comments allowed. A `# nodes: N` comment pins the node count so
    /// trailing isolated nodes survive a round trip.
    pub fn load_edge_list<R: Read>(reader: R) -> Result<Self, GraphError> {
        let mut edges = Vec::new();
        let mut declared = 0usize;
        let mut max_id: Option<usize> = None;
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            if let Some(comment) = trimmed.strip_prefix('#') {
                if let Some(count) = comment.trim().strip_prefix("nodes:") {
                    declared = count.trim().parse().map_err(|_| GraphError::Parse {
                        line: line_no,
                        reason: format!("bad node count `{}`", count.trim()),
                    })?;
                }
                continue;
            }
            let mut fields = trimmed.split_whitespace();
            let mut next_id = |what: &str| -> Result<usize, GraphError> {
                let tok = fields.next().ok_or_else(|| GraphError::Parse {
                    line: line_no,
                    reason: format!("missing {what} node id"),
                })?;
                tok.parse().map_err(|_| GraphError::Parse {
                    line: line_no,
                    reason: format!("invalid node id `{tok}`"),
                })
            };
            let u = next_id("first")?;
            let v = next_id("second")?;
            if let Some(extra) = fields.next() {
                return Err(GraphError::Parse {
                    line: line_no,
                    reason: format!("unexpected token `{extra}`"),
                });
            }
            if u == v {
                return Err(GraphError::SelfLoop { line: line_no, node: u });
            }
            max_id = Some(max_id.map_or(u.max(v), |m| m.max(u).max(v)));
            edges.push((u, v));
        }
        let n = declared.max(max_id.map_or(0, |m| m + 1));
        Self::from_edges(n, edges)
    }

    pub fn write_edge_list<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# nodes: {}", self.node_count())?;
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}")?;
        }
        Ok(())
    }

    pub fn to_edge_list_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_edge_list(&mut buf).expect("writing to Vec cannot fail");
        String::from_utf8(buf).expect("edge list is ASCII")
    }
}

/// Graph families that [`generate`] knows how to build.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphKind {
    ErdosRenyi { n: usize, p: f64 },
    Complete(usize),
    Path(usize),
    /// One centre plus `n - 1` leaves.
    Star(usize),
    Cycle(usize),
}

impl GraphKind {
    pub fn node_count(&self) -> usize {
        match *self {
            GraphKind::ErdosRenyi { n, .. }
            | GraphKind::Complete(n)
            | GraphKind::Path(n)
            | GraphKind::Star(n)
            | GraphKind::Cycle(n) => n,
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphKind::ErdosRenyi { n, p } => write!(f, "er:{n}:{p}"),
            GraphKind::Complete(n) => write!(f, "complete:{n}"),
            GraphKind::Path(n) => write!(f, "path:{n}"),
            GraphKind::Star(n) => write!(f, "star:{n}"),
            GraphKind::Cycle(n) => write!(f, "cycle:{n}"),
        }
    }
}

impl FromStr for GraphKind {
    type Err = GraphError;

    /// `complete:10`, `path:3`, `star:5`, `cycle:6`, `er:500:0.02`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GraphError::BadSpec(s.to_string());
        let parts: Vec<&str> = s.trim().split(':').collect();
        let count = |tok: &str| tok.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["complete" | "k", n] => Ok(GraphKind::Complete(count(n)?)),
            ["path", n] => Ok(GraphKind::Path(count(n)?)),
            ["star", n] => Ok(GraphKind::Star(count(n)?)),
            ["cycle", n] => Ok(GraphKind::Cycle(count(n)?)),
            ["er" | "erdos_renyi" | "gnp", n, p] => Ok(GraphKind::ErdosRenyi {
                n: count(n)?,
                p: p.parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

/// Builds a graph of the given family. Only Erdős–Rényi graphs consume the
/// seed; the result is a pure function of `(kind, seed)`.
pub fn generate(kind: GraphKind, seed: u64) -> Result<Graph, GraphError> {
    let n = kind.node_count();
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let edges: Vec<(usize, usize)> = match kind {
        GraphKind::Complete(n) => (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect(),
        GraphKind::Path(n) => (1..n).map(|v| (v - 1, v)).collect(),
        GraphKind::Star(n) => (1..n).map(|v| (0, v)).collect(),
        GraphKind::Cycle(n) => {
            let mut e: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
            if n >= 3 {
                e.push((n - 1, 0));
            }
            e
        }
        GraphKind::ErdosRenyi { n, p } => erdos_renyi_edges(n, p, seed)?,
    };
    Graph::from_edges(n, edges)
}

/// G(n, p) by geometric skipping over the lower-triangular pair sequence,
/// so the cost is proportional to the number of edges rather than `n^2`.
fn erdos_renyi_edges(n: usize, p: f64, seed: u64) -> Result<Vec<(usize, usize)>, GraphError> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(GraphError::BadProbability(p));
    }
    if p == 0.0 {
        return Ok(Vec::new());
    }
    if p == 1.0 {
        return Ok((0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let log_q = (1.0 - p).ln();
    let mut edges = Vec::new();
    let mut v: usize = 1;
    let mut w: i64 = -1;
    while v < n {
        let r: f64 = rng.random();
        let skip = ((1.0 - r).ln() / log_q).floor();
        w += 1 + skip as i64;
        while w >= v as i64 && v < n {
            w -= v as i64;
            v += 1;
        }
        if v < n {
            edges.push((w as usize, v));
        }
    }
    Ok(edges)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_well_formed(g: &Graph) {
        for u in 0..g.node_count() {
            let list = g.neighbors(u);
            assert!(list.windows(2).all(|w| w[0] < w[1]), "unsorted or duplicate at {u}");
            assert!(!list.contains(&u), "self-loop at {u}");
            for &v in list {
                assert!(g.has_edge(v, u), "asymmetric edge {u}-{v}");
            }
        }
    }

    #[test]
    fn complete_four() {
        let g = generate(GraphKind::Complete(4), 0).unwrap();
        assert_eq!(g.edge_count(), 6);
        assert!((0..4).all(|u| g.degree(u) == 3));
        assert_well_formed(&g);
    }

    #[test]
    fn er_zero_probability_is_empty() {
        for seed in [0, 1, 99] {
            let g = generate(GraphKind::ErdosRenyi { n: 100, p: 0.0 }, seed).unwrap();
            assert_eq!(g.edge_count(), 0);
        }
    }

    #[test]
    fn er_edge_count_window() {
        let g = generate(GraphKind::ErdosRenyi { n: 1000, p: 0.01 }, 17).unwrap();
        assert!((3500..=6500).contains(&g.edge_count()), "{}", g.edge_count());
        assert_well_formed(&g);
    }

    #[test]
    fn er_is_seed_deterministic() {
        let kind = GraphKind::ErdosRenyi { n: 300, p: 0.05 };
        assert_eq!(generate(kind, 5).unwrap(), generate(kind, 5).unwrap());
        assert_ne!(generate(kind, 5).unwrap(), generate(kind, 6).unwrap());
    }

    #[test]
    fn rejects_zero_nodes() {
        assert!(matches!(generate(GraphKind::Path(0), 0), Err(GraphError::Empty)));
        assert!(matches!(
            generate(GraphKind::ErdosRenyi { n: 0, p: 0.5 }, 0),
            Err(GraphError::Empty)
        ));
    }

    #[test]
    fn small_families() {
        let star = generate(GraphKind::Star(5), 0).unwrap();
        assert_eq!(star.degree(0), 4);
        assert_eq!(star.edge_count(), 4);
        let cycle = generate(GraphKind::Cycle(5), 0).unwrap();
        assert!((0..5).all(|u| cycle.degree(u) == 2));
        let c2 = generate(GraphKind::Cycle(2), 0).unwrap();
        assert_eq!(c2.edge_count(), 1);
    }

    #[test]
    fn load_path() {
        let g = Graph::load_edge_list("0 1\n1 2".as_bytes()).unwrap();
        assert_eq!(g, generate(GraphKind::Path(3), 0).unwrap());
    }

    #[test]
    fn load_dedups_reverse_edge() {
        let g = Graph::load_edge_list("0 1\n1 0\n".as_bytes()).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn load_rejects_self_loop() {
        let err = Graph::load_edge_list("0 0".as_bytes()).unwrap_err();
        assert!(matches!(err, GraphError::SelfLoop { line: 1, node: 0 }));
    }

    #[test]
    fn load_reports_bad_line() {
        let err = Graph::load_edge_list("# header\n0 1\n1 x\n".as_bytes()).unwrap_err();
        assert!(err.to_string().starts_with("line 3"), "{err}");
        assert!(Graph::load_edge_list("0\n".as_bytes()).is_err());
        assert!(Graph::load_edge_list("0 1 2\n".as_bytes()).is_err());
    }

    #[test]
    fn gaps_become_isolated_nodes() {
        let g = Graph::load_edge_list("0 4\n".as_bytes()).unwrap();
        assert_eq!(g.node_count(), 5);
        assert_eq!(g.degree(2), 0);
        assert_eq!(g.components().len(), 4);
    }

    #[test]
    fn edge_list_round_trip_keeps_isolated_tail() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2)]).unwrap();
        let text = g.to_edge_list_string();
        assert_eq!(Graph::load_edge_list(text.as_bytes()).unwrap(), g);
    }

    #[test]
    fn spec_strings_parse() {
        assert_eq!("complete:10".parse::<GraphKind>().unwrap(), GraphKind::Complete(10));
        assert_eq!(
            "er:500:0.02".parse::<GraphKind>().unwrap(),
            GraphKind::ErdosRenyi { n: 500, p: 0.02 }
        );
        assert!("tree:4".parse::<GraphKind>().is_err());
        let k = GraphKind::Star(7);
        assert_eq!(k.to_string().parse::<GraphKind>().unwrap(), k);
    }
}
