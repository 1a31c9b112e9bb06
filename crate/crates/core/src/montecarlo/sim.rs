use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::str::FromStr;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::MonteCarloError;
use crate::chain::{infected_neighbor_counts, ChainDistribution, ChainState};
use crate::graph::Graph;
use crate::parallel::parallel_map;
use crate::params::{EpidemicParams, NodeState, Variant};

const MAX_CODE_NODES: usize = 40;

/// Serialised as `one`, `all` or `fraction:<q>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Init {
    /// One uniformly chosen infected node, everyone else susceptible.
    OneRandomInfected,
    AllInfected,
    /// `round(q n)` (at least one) distinct uniformly chosen infected nodes.
    Fraction(f64),
}

impl fmt::Display for Init {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Init::OneRandomInfected => f.write_str("one"),
            Init::AllInfected => f.write_str("all"),
            Init::Fraction(q) => write!(f, "fraction:{q}"),
        }
    }
}

impl FromStr for Init {
    type Err = MonteCarloError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "one" | "one_random_infected" => Ok(Init::OneRandomInfected),
            "all" | "all_infected" => Ok(Init::AllInfected),
            _ => {
                let q = s
                    .strip_prefix("fraction:")
                    .and_then(|q| q.parse::<f64>().ok())
                    .ok_or_else(|| MonteCarloError::BadInit(s.to_string()))?;
                let init = Init::Fraction(q);
                init.validate()?;
                Ok(init)
            }
        }
    }
}

impl TryFrom<String> for Init {
    type Error = MonteCarloError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Init> for String {
    fn from(init: Init) -> Self {
        init.to_string()
    }
}

impl Init {
    /// Number of initially infected nodes out of `n`.
    pub fn infected_count(&self, n: usize) -> usize {
        match *self {
            Init::AllInfected => n,
            Init::OneRandomInfected => 1.min(n),
            Init::Fraction(q) => ((q * n as f64).round() as usize).clamp(1, n),
        }
    }

    pub fn validate(&self) -> Result<(), MonteCarloError> {
        match *self {
            Init::Fraction(q) if !(q > 0.0 && q <= 1.0) => Err(MonteCarloError::BadFraction(q)),
            _ => Ok(()),
        }
    }
}

/// Network state of one replica together with its generator.
#[derive(Debug, Clone)]
pub struct SimState {
    states: Vec<NodeState>,
    t: usize,
    rng: ChaCha8Rng,
}

impl SimState {
    pub fn new(states: Vec<NodeState>, seed: u64) -> Self {
        Self {
            states,
            t: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Draws the initial condition from the replica's own generator.
    pub fn from_init(n: usize, init: Init, seed: u64) -> Result<Self, MonteCarloError> {
        init.validate()?;
        let mut sim = Self::new(vec![NodeState::S; n], seed);
        let infected = init.infected_count(n);
        if infected == n {
            sim.states.fill(NodeState::I);
        } else {
            for k in sample(&mut sim.rng, n, infected) {
                sim.states[k] = NodeState::I;
            }
        }
        Ok(sim)
    }

    pub fn states(&self) -> &[NodeState] {
        &self.states
    }

    pub fn t(&self) -> usize {
        self.t
    }

    /// `[num_S, num_I, num_R]`.
    pub fn counts(&self) -> [usize; 3] {
        let mut c = [0; 3];
        for s in &self.states {
            c[s.digit() as usize] += 1;
        }
        c
    }

    pub fn num_infected(&self) -> usize {
        self.states.iter().filter(|s| **s == NodeState::I).count()
    }
}

/// Next state of one node from its current state, infected-neighbour count
/// and the two uniforms assigned to it.
pub fn update_node(params: &EpidemicParams, state: NodeState, infected_neighbors: usize, u1: f64, u2: f64) -> NodeState {
    match state {
        NodeState::I => {
            if u2 < params.delta {
                NodeState::R
            } else {
                NodeState::I
            }
        }
        NodeState::R => {
            if u2 < params.gamma {
                NodeState::S
            } else {
                NodeState::R
            }
        }
        NodeState::S => {
            let infect = u1 < 1.0 - (1.0 - params.beta).powi(infected_neighbors as i32);
            let vaccinate = u2 < params.theta;
            match params.variant {
                Variant::SivVaccinationDominant if vaccinate => NodeState::R,
                _ if infect => NodeState::I,
                Variant::SivInfectionDominant if vaccinate => NodeState::R,
                _ => NodeState::S,
            }
        }
    }
}

/// One synchronous step: neighbour counts come from the current state, then
/// every node draws `u1, u2` in node order.
pub fn mc_step(g: &Graph, params: &EpidemicParams, sim: &mut SimState) {
    debug_assert_eq!(sim.states.len(), g.node_count());
    let counts = infected_neighbor_counts(g, &sim.states);
    for (state, m) in sim.states.iter_mut().zip(counts) {
        let u1: f64 = sim.rng.random();
        let u2: f64 = sim.rng.random();
        *state = update_node(params, *state, m, u1, u2);
    }
    sim.t += 1;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunOptions {
    pub horizon: usize,
    /// Stop at the first step without infected nodes.
    pub stop_at_extinction: bool,
    /// Record per-node infection indicators every this many steps.
    pub snapshot_every: Option<usize>,
}

impl RunOptions {
    pub fn new(horizon: usize) -> Self {
        Self {
            horizon,
            stop_at_extinction: true,
            snapshot_every: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub n: usize,
    /// `[num_S, num_I, num_R]` for `t = 0, 1, ...` up to the horizon or the
    /// extinction step.
    pub counts: Vec<[usize; 3]>,
    pub extinction_step: Option<usize>,
    /// `(t, infected indicators)` at sampled steps.
    pub snapshots: Vec<(usize, Vec<bool>)>,
}

impl Trajectory {
    /// Infected count at `t`; zero past an early stop at extinction.
    pub fn infected_at(&self, t: usize) -> usize {
        self.counts.get(t).map_or(0, |c| c[1])
    }

    pub fn last_step(&self) -> usize {
        self.counts.len() - 1
    }

    /// Mean infected fraction over `t` in `from..=to`.
    pub fn mean_infected_fraction(&self, from: usize, to: usize) -> f64 {
        let total: usize = (from..=to).map(|t| self.infected_at(t)).sum();
        total as f64 / ((to - from + 1) as f64 * self.n as f64)
    }

    /// CSV with header `t,num_S,num_I,num_R`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,num_S,num_I,num_R")?;
        for (t, c) in self.counts.iter().enumerate() {
            writeln!(out, "{t},{},{},{}", c[0], c[1], c[2])?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to Vec cannot fail");
        String::from_utf8(buf).expect("CSV is ASCII")
    }

    /// Reads counts written by [`Trajectory::write_csv`]; snapshots are not
    /// part of the CSV.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, MonteCarloError> {
        let mut counts: Vec<[usize; 3]> = Vec::new();
        for (idx, line) in BufReader::new(reader).lines().enumerate() {
            let bad = |reason: String| MonteCarloError::Parse { line: idx + 1, reason };
            let line = line.map_err(|e| bad(e.to_string()))?;
            let line = line.trim();
            if line.is_empty() || (idx == 0 && line.starts_with("t,")) {
                continue;
            }
            let fields: Vec<usize> = line
                .split(',')
                .map(|f| f.trim().parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| bad(e.to_string()))?;
            if fields.len() != 4 || fields[0] != counts.len() {
                return Err(bad(format!("expected `{},num_S,num_I,num_R`", counts.len())));
            }
            counts.push([fields[1], fields[2], fields[3]]);
        }
        let n = counts.first().map_or(0, |c| c.iter().sum());
        if n == 0 || counts.iter().any(|c| c.iter().sum::<usize>() != n) {
            return Err(MonteCarloError::Parse {
                line: 0,
                reason: "counts are empty or do not sum to a constant node count".into(),
            });
        }
        let extinction_step = counts.iter().position(|c| c[1] == 0);
        Ok(Self {
            n,
            counts,
            extinction_step,
            snapshots: Vec::new(),
        })
    }
}

fn infected_flags(sim: &SimState) -> Vec<bool> {
    sim.states.iter().map(|s| *s == NodeState::I).collect()
}

/// Simulates a single replica seeded with `seed`.
pub fn run(g: &Graph, params: &EpidemicParams, init: Init, opts: &RunOptions, seed: u64) -> Result<Trajectory, MonteCarloError> {
    let sim = SimState::from_init(g.node_count(), init, seed)?;
    run_from(g, params, sim, opts)
}

pub(crate) fn run_from(
    g: &Graph,
    params: &EpidemicParams,
    mut sim: SimState,
    opts: &RunOptions,
) -> Result<Trajectory, MonteCarloError> {
    if opts.horizon == 0 {
        return Err(MonteCarloError::ZeroHorizon);
    }
    if sim.states.len() != g.node_count() {
        return Err(MonteCarloError::SizeMismatch {
            expected: g.node_count(),
            got: sim.states.len(),
        });
    }
    let mut traj = Trajectory {
        n: g.node_count(),
        counts: Vec::with_capacity(opts.horizon + 1),
        extinction_step: None,
        snapshots: Vec::new(),
    };
    let snapshot = |sim: &SimState, traj: &mut Trajectory| {
        if let Some(every) = opts.snapshot_every {
            if every > 0 && sim.t.is_multiple_of(every) {
                traj.snapshots.push((sim.t, infected_flags(sim)));
            }
        }
    };
    loop {
        let counts = sim.counts();
        traj.counts.push(counts);
        snapshot(&sim, &mut traj);
        if counts[1] == 0 && traj.extinction_step.is_none() {
            traj.extinction_step = Some(sim.t);
            if opts.stop_at_extinction {
                break;
            }
        }
        if sim.t == opts.horizon {
            break;
        }
        mc_step(g, params, &mut sim);
    }
    Ok(traj)
}

/// Empirical distribution of the network state after `steps` steps over
/// `replicas` independent runs from `start`; replica `r` is seeded with
/// `base_seed + r`.
pub fn empirical_distribution(
    g: &Graph,
    params: &EpidemicParams,
    start: &[NodeState],
    steps: usize,
    replicas: usize,
    base_seed: u64,
    jobs: usize,
) -> Result<ChainDistribution, MonteCarloError> {
    let n = g.node_count();
    if start.len() != n {
        return Err(MonteCarloError::SizeMismatch {
            expected: n,
            got: start.len(),
        });
    }
    if n > MAX_CODE_NODES {
        return Err(MonteCarloError::TooLargeForCodes(n));
    }
    if replicas == 0 {
        return Err(MonteCarloError::ZeroRuns);
    }
    let ids: Vec<u64> = (0..replicas as u64).collect();
    let codes = parallel_map(&ids, jobs, |_, &r| {
        let mut sim = SimState::new(start.to_vec(), base_seed.wrapping_add(r));
        for _ in 0..steps {
            mc_step(g, params, &mut sim);
        }
        ChainState::encode(&sim.states).0
    });
    let weight = 1.0 / replicas as f64;
    let dist = ChainDistribution::from_entries(n, codes.into_iter().map(|c| (c, weight)))
        .expect("replica frequencies form a distribution");
    Ok(dist)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, GraphKind};

    #[test]
    fn all_susceptible_is_absorbing() {
        let g = generate(GraphKind::Complete(6), 0).unwrap();
        let p = EpidemicParams::sirs(0.9, 0.5, 0.5).unwrap();
        let mut sim = SimState::new(vec![NodeState::S; 6], 1);
        for _ in 0..50 {
            mc_step(&g, &p, &mut sim);
            assert_eq!(sim.counts(), [6, 0, 0]);
        }
    }

    #[test]
    fn certain_infection_reaches_all_neighbours() {
        let g = generate(GraphKind::Star(8), 0).unwrap();
        let p = EpidemicParams::sirs(1.0, 0.3, 0.2).unwrap();
        for seed in 0..20 {
            let mut states = vec![NodeState::S; 8];
            states[0] = NodeState::I;
            let mut sim = SimState::new(states, seed);
            mc_step(&g, &p, &mut sim);
            assert!(sim.states()[1..].iter().all(|s| *s == NodeState::I));
        }
    }

    #[test]
    fn certain_healing_without_spread() {
        let g = generate(GraphKind::Cycle(10), 0).unwrap();
        let p = EpidemicParams::sirs(0.0, 1.0, 0.2).unwrap();
        for seed in 0..20 {
            let t = run(&g, &p, Init::AllInfected, &RunOptions::new(50), seed).unwrap();
            assert_eq!(t.extinction_step, Some(1));
        }
    }

    #[test]
    fn fraction_init_counts() {
        let sim = SimState::from_init(500, Init::Fraction(0.1), 3).unwrap();
        assert_eq!(sim.num_infected(), 50);
        let sim = SimState::from_init(10, Init::OneRandomInfected, 3).unwrap();
        assert_eq!(sim.num_infected(), 1);
        assert!(SimState::from_init(10, Init::Fraction(0.0), 3).is_err());
    }

    #[test]
    fn init_parses() {
        assert_eq!("one".parse::<Init>().unwrap(), Init::OneRandomInfected);
        assert_eq!("all".parse::<Init>().unwrap(), Init::AllInfected);
        assert_eq!("fraction:0.25".parse::<Init>().unwrap(), Init::Fraction(0.25));
        assert!("fraction:2".parse::<Init>().is_err());
        assert!("some".parse::<Init>().is_err());
    }

    #[test]
    fn dominance_rules() {
        let id = EpidemicParams::new(Variant::SivInfectionDominant, 0.5, 0.3, 0.2, 0.5).unwrap();
        let vd = EpidemicParams { variant: Variant::SivVaccinationDominant, ..id };
        // both events fire
        assert_eq!(update_node(&id, NodeState::S, 1, 0.1, 0.1), NodeState::I);
        assert_eq!(update_node(&vd, NodeState::S, 1, 0.1, 0.1), NodeState::R);
        // vaccination only
        assert_eq!(update_node(&id, NodeState::S, 1, 0.9, 0.1), NodeState::R);
        assert_eq!(update_node(&vd, NodeState::S, 1, 0.9, 0.1), NodeState::R);
        // neither
        assert_eq!(update_node(&id, NodeState::S, 1, 0.9, 0.9), NodeState::S);
    }

    #[test]
    fn trajectory_csv() {
        let g = generate(GraphKind::Path(3), 0).unwrap();
        let p = EpidemicParams::sirs(0.0, 1.0, 0.2).unwrap();
        let t = run(&g, &p, Init::AllInfected, &RunOptions::new(5), 0).unwrap();
        assert_eq!(t.to_csv_string(), "t,num_S,num_I,num_R\n0,0,3,0\n1,0,0,3\n");
        assert_eq!(Trajectory::read_csv(t.to_csv_string().as_bytes()).unwrap(), t);
        assert!(Trajectory::read_csv("t,num_S,num_I,num_R\n0,1,1,0\n1,1,0,0\n".as_bytes()).is_err());
    }

    #[test]
    fn snapshots_are_sampled() {
        let g = generate(GraphKind::Cycle(5), 0).unwrap();
        let p = EpidemicParams::sirs(0.5, 0.1, 0.1).unwrap();
        let opts = RunOptions {
            horizon: 10,
            stop_at_extinction: false,
            snapshot_every: Some(5),
        };
        let t = run(&g, &p, Init::AllInfected, &opts, 0).unwrap();
        let steps: Vec<usize> = t.snapshots.iter().map(|s| s.0).collect();
        assert_eq!(steps, vec![0, 5, 10]);
        assert_eq!(t.snapshots[0].1, vec![true; 5]);
        assert_eq!(t.counts.len(), 11);
    }
}
