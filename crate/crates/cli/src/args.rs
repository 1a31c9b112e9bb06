use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use sirsnet_core::meanfield::Damping;
use sirsnet_core::montecarlo::Init;
use sirsnet_core::{GraphKind, Variant};

#[derive(Debug, Parser)]
#[command(name = "sirsnet", version = crate::BUILD_ID, about = "SIRS and SIV epidemics on networks")]
pub struct Cli {
    /// Worker threads (defaults to the number of available cores).
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: Option<u64>,

    /// JSON file with default values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug, -vvv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate or inspect graphs.
    #[command(subcommand)]
    Graph(GraphCommand),
    /// Epidemic threshold ratios and regime.
    Threshold(ThresholdArgs),
    /// Deterministic mean-field map.
    #[command(subcommand)]
    Meanfield(MeanfieldCommand),
    /// Exact Markov chain over all 3^n network states.
    #[command(subcommand)]
    Exact(ExactCommand),
    /// Stochastic simulation.
    #[command(subcommand)]
    Mc(McCommand),
    /// Run an experiment described by a JSON file.
    Experiment(ExperimentArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct GraphSource {
    /// Generator spec: complete:N, path:N, star:N, cycle:N or er:N:P.
    #[arg(long, value_name = "SPEC", conflicts_with = "edges")]
    pub graph: Option<GraphKind>,
    /// Edge-list file: one `u v` pair per line, optional `# nodes: N` comment.
    #[arg(long, value_name = "FILE")]
    pub edges: Option<PathBuf>,
    /// Seed for random graph generators.
    #[arg(long, value_name = "SEED")]
    pub graph_seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct Rates {
    /// sirs, siv_infection_dominant (id) or siv_vaccination_dominant (vd).
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Per-edge infection probability.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Recovery probability.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Loss-of-immunity probability.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Vaccination probability (SIV variants).
    #[arg(long)]
    pub theta: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum GraphCommand {
    /// Write a graph as an edge list.
    Gen {
        #[command(flatten)]
        source: GraphSource,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Print size, degree and spectral statistics.
    Info {
        #[command(flatten)]
        source: GraphSource,
        /// Write the statistics as JSON.
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[command(flatten)]
    pub source: GraphSource,
    #[command(flatten)]
    pub rates: Rates,
    #[arg(long, value_name = "FILE")]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum MeanfieldCommand {
    /// Iterate the mean-field map from a uniform start.
    Run {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        rates: Rates,
        /// Number of steps (defaults to `horizon` from the config, else 200).
        #[arg(long)]
        steps: Option<usize>,
        /// Initial infection: one, all or fraction:Q (uniform over nodes).
        #[arg(long)]
        init: Option<Init>,
        /// Per-step averages as CSV.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Final per-node probabilities as JSON.
        #[arg(long, value_name = "FILE")]
        state_out: Option<PathBuf>,
    },
    /// Solve for the endemic fixed point (SIRS).
    FixedPoint {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        rates: Rates,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 100_000)]
        max_iter: usize,
        /// adaptive, or fixed:ALPHA with ALPHA in (0, 1].
        #[arg(long, default_value = "adaptive")]
        damping: Damping,
        /// Also solve from this many random starts and compare.
        #[arg(long, value_name = "K")]
        probe: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Solver result (or probe results) as JSON.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct ExactLimits {
    /// Refuse graphs with more nodes than this.
    #[arg(long, default_value_t = 10)]
    pub max_nodes: usize,
    /// Drop states whose mass falls below this after each step.
    #[arg(long, default_value_t = 1e-15)]
    pub prune_tol: f64,
}

#[derive(Debug, Subcommand)]
pub enum ExactCommand {
    /// Evolve a point mass for a number of steps.
    Evolve {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        rates: Rates,
        #[command(flatten)]
        limits: ExactLimits,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// all, one, fraction:Q, code:N or states:<S|I|R per node>.
        #[arg(long, default_value = "all")]
        start: String,
        /// Seed for randomised starts.
        #[arg(long)]
        seed: Option<u64>,
        /// Final distribution as `state_code,probability` CSV.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Per-step node marginals as CSV.
        #[arg(long, value_name = "FILE")]
        marginals: Option<PathBuf>,
    },
    /// Steps until the all-infected start is within EPS of stationarity.
    MixingTime {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        rates: Rates,
        #[command(flatten)]
        limits: ExactLimits,
        #[arg(long, alias = "epsilon")]
        eps: Option<f64>,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
    /// Stationary distribution.
    Stationary {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        rates: Rates,
        #[command(flatten)]
        limits: ExactLimits,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Check exact infection marginals against the linear upper bound.
    VerifyDomination {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        rates: Rates,
        #[command(flatten)]
        limits: ExactLimits,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        #[arg(long, default_value = "all")]
        start: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Allowed negative slack.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_name = "FILE")]
        json: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub horizon: Option<usize>,
    /// one, all or fraction:Q.
    #[arg(long)]
    pub init: Option<Init>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Keep stepping after the infection dies out.
    #[arg(long)]
    pub no_stop: bool,
}

#[derive(Debug, Subcommand)]
pub enum McCommand {
    /// One seeded trajectory.
    Run {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        rates: Rates,
        #[command(flatten)]
        sim: SimArgs,
        /// Trajectory as `t,num_S,num_I,num_R` CSV.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Independent replicas with seeds SEED, SEED+1, ...
    Ensemble {
        #[command(flatten)]
        source: GraphSource,
        #[command(flatten)]
        rates: Rates,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long, alias = "replicas")]
        runs: Option<usize>,
        /// Per-step summary CSV.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        /// Every replica trajectory in long CSV form.
        #[arg(long, value_name = "FILE")]
        replicas_out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    pub spec: PathBuf,
    /// Overrides `output_dir` from the experiment file.
    #[arg(long, value_name = "DIR")]
    pub output_dir: Option<PathBuf>,
}
