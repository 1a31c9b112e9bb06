use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentError;
use crate::graph::{generate, Graph, GraphKind};
use crate::montecarlo::Init;
use crate::params::{EpidemicParams, Variant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    ThresholdSweep,
    LayerComparison,
    MixingScaling,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Exact,
    Meanfield,
    Linear,
    Montecarlo,
}

/// Cartesian product of rate lists.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    #[serde(default = "default_variants")]
    pub variant: Vec<Variant>,
    pub beta: Vec<f64>,
    pub delta: Vec<f64>,
    pub gamma: Vec<f64>,
    #[serde(default = "default_theta")]
    pub theta: Vec<f64>,
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::Sirs]
}

fn default_theta() -> Vec<f64> {
    vec![0.0]
}

impl ParamGrid {
    /// Grid points in row-major order (variant slowest, theta fastest).
    pub fn points(&self) -> Result<Vec<EpidemicParams>, ExperimentError> {
        let mut out = Vec::new();
        for &variant in &self.variant {
            for &beta in &self.beta {
                for &delta in &self.delta {
                    for &gamma in &self.gamma {
                        for &theta in &self.theta {
                            let index = out.len();
                            let p = EpidemicParams::new(variant, beta, delta, gamma, theta)
                                .map_err(|source| ExperimentError::GridPoint { index, source })?;
                            out.push(p);
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(ExperimentError::Spec("parameter grid is empty".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub kind: ExperimentKind,
    /// Generator spec such as `er:500:0.02`; mixing-scaling specs put `{n}`
    /// where the node count goes (`path:{n}`).
    #[serde(default)]
    pub graph: Option<String>,
    /// Edge-list file, as an alternative to `graph`.
    #[serde(default)]
    pub edges: Option<PathBuf>,
    #[serde(default)]
    pub graph_seed: u64,
    pub grid: ParamGrid,
    #[serde(default = "default_layers")]
    pub layers: Vec<Layer>,
    #[serde(default = "default_horizon")]
    pub horizon: usize,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    /// Base seed; Monte Carlo replica `r` uses `seed + r`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_init")]
    pub init: Init,
    /// First step of the Monte Carlo time average (default `horizon / 4`).
    #[serde(default)]
    pub average_from: Option<usize>,
    /// Node counts substituted into `graph` for mixing scaling.
    #[serde(default)]
    pub node_counts: Vec<usize>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Step budget of exact mixing-time runs.
    #[serde(default = "default_max_steps")]
    pub max_steps: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
}

fn default_layers() -> Vec<Layer> {
    vec![Layer::Meanfield, Layer::Montecarlo]
}

fn default_horizon() -> usize {
    2000
}

fn default_replicas() -> usize {
    20
}

fn default_init() -> Init {
    Init::Fraction(0.1)
}

fn default_epsilon() -> f64 {
    0.25
}

fn default_max_steps() -> usize {
    10_000
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |msg: String| Err(ExperimentError::Spec(msg));
        if self.name.is_empty() || self.name.contains(['/', '\\']) {
            return bad(format!("name `{}` must be a non-empty file-name stem", self.name));
        }
        if self.graph.is_some() == self.edges.is_some() {
            return bad("give exactly one of `graph` and `edges`".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.layers.contains(&Layer::Montecarlo) && self.replicas == 0 {
            return bad("replicas must be at least 1".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return bad(format!("epsilon {} is outside (0, 1]", self.epsilon));
        }
        if let Some(from) = self.average_from {
            if from > self.horizon {
                return bad(format!("average_from {from} exceeds horizon {}", self.horizon));
            }
        }
        self.init.validate().map_err(|e| ExperimentError::Spec(e.to_string()))?;
        let templated = self.graph.as_deref().is_some_and(|g| g.contains("{n}"));
        match self.kind {
            ExperimentKind::MixingScaling => {
                if self.node_counts.is_empty() || !templated {
                    return bad("mixing scaling needs `node_counts` and a `graph` containing `{n}`".into());
                }
            }
            _ if templated => return bad("`{n}` in `graph` is only used by mixing scaling".into()),
            ExperimentKind::LayerComparison => {
                if !self.layers.contains(&Layer::Exact) || !self.layers.contains(&Layer::Meanfield) {
                    return bad("layer comparison needs the `exact` and `meanfield` layers".into());
                }
            }
            ExperimentKind::ThresholdSweep => {}
        }
        self.grid.points()?;
        Ok(())
    }

    /// Hex SHA-256 of the canonical JSON serialisation.
    pub fn sha256(&self) -> String {
        let json = serde_json::to_string(self).expect("spec serialises");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn average_from(&self) -> usize {
        self.average_from.unwrap_or(self.horizon / 4)
    }

    pub fn has_layer(&self, layer: Layer) -> bool {
        self.layers.contains(&layer)
    }

    /// The graph for non-templated specs.
    pub fn load_graph(&self) -> Result<Graph, ExperimentError> {
        match (&self.graph, &self.edges) {
            (Some(g), _) => Ok(generate(g.parse::<GraphKind>()?, self.graph_seed)?),
            (None, Some(path)) => Ok(Graph::load_edge_list(std::fs::File::open(path)?)?),
            (None, None) => Err(ExperimentError::Spec("no graph source".into())),
        }
    }

    /// The graph with `{n}` replaced by `n`.
    pub fn graph_for(&self, n: usize) -> Result<Graph, ExperimentError> {
        let template = self
            .graph
            .as_deref()
            .ok_or_else(|| ExperimentError::Spec("mixing scaling needs a generator spec".into()))?;
        let kind: GraphKind = template.replace("{n}", &n.to_string()).parse()?;
        Ok(generate(kind, self.graph_seed)?)
    }
}
