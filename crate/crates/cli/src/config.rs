use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Deserialize;
use sirsnet_core::montecarlo::Init;
use sirsnet_core::{generate, EpidemicParams, Graph, GraphKind, Variant};

use crate::args::{GraphSource, Rates};
use crate::usage;

/// Defaults read from `--config`. Field names follow the experiment spec;
/// fields that make no sense for a single command are ignored.
#[derive(Debug, Default, Deserialize)]
pub struct CliConfig {
    pub graph: Option<String>,
    pub edges: Option<PathBuf>,
    pub graph_seed: Option<u64>,
    pub grid: Option<GridDefaults>,
    pub variant: Option<Variant>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub gamma: Option<f64>,
    pub theta: Option<f64>,
    pub seed: Option<u64>,
    pub horizon: Option<usize>,
    pub replicas: Option<usize>,
    pub init: Option<Init>,
    pub epsilon: Option<f64>,
    pub max_steps: Option<usize>,
}

/// A grid whose axes each hold a single value can supply rates.
#[derive(Debug, Default, Deserialize)]
pub struct GridDefaults {
    pub variant: Option<Vec<Variant>>,
    pub beta: Option<Vec<f64>>,
    pub delta: Option<Vec<f64>>,
    pub gamma: Option<Vec<f64>>,
    pub theta: Option<Vec<f64>>,
}

impl CliConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| usage(format!("config {}: {e}", path.display())))
    }

    pub fn resolve_graph(&self, flags: &GraphSource) -> anyhow::Result<Graph> {
        let seed = flags.graph_seed.or(self.graph_seed).unwrap_or(0);
        let source = match (&flags.graph, &flags.edges) {
            (Some(kind), None) => Source::Kind(*kind),
            (None, Some(path)) => Source::File(path.clone()),
            (Some(_), Some(_)) => return Err(usage("give exactly one of --graph and --edges")),
            (None, None) => match (&self.graph, &self.edges) {
                (Some(spec), None) => Source::Kind(
                    spec.parse()
                        .map_err(|e| usage(format!("config graph: {e}")))?,
                ),
                (None, Some(path)) => Source::File(path.clone()),
                (Some(_), Some(_)) => return Err(usage("config sets both graph and edges")),
                (None, None) => return Err(usage("no graph source: pass --graph SPEC or --edges FILE")),
            },
        };
        let g = match source {
            Source::Kind(kind) => generate(kind, seed)?,
            Source::File(path) => {
                let file = std::fs::File::open(&path).with_context(|| format!("opening {}", path.display()))?;
                Graph::load_edge_list(std::io::BufReader::new(file))
                    .with_context(|| format!("reading {}", path.display()))?
            }
        };
        log::info!("graph: {} nodes, {} edges", g.node_count(), g.edge_count());
        Ok(g)
    }

    pub fn resolve_params(&self, flags: &Rates) -> anyhow::Result<EpidemicParams> {
        let grid = self.grid.as_ref();
        let variant = match flags.variant.or(self.variant) {
            Some(v) => v,
            None => single(grid.and_then(|g| g.variant.as_deref()), "variant")?.unwrap_or(Variant::Sirs),
        };
        let rate = |flag: Option<f64>, top: Option<f64>, axis: Option<&[f64]>, name: &str| -> anyhow::Result<Option<f64>> {
            match flag.or(top) {
                Some(x) => Ok(Some(x)),
                None => single(axis, name),
            }
        };
        let required = |v: Option<f64>, name: &str| v.ok_or_else(|| usage(format!("missing --{name}")));
        let beta = required(rate(flags.beta, self.beta, grid.and_then(|g| g.beta.as_deref()), "beta")?, "beta")?;
        let delta = required(rate(flags.delta, self.delta, grid.and_then(|g| g.delta.as_deref()), "delta")?, "delta")?;
        let gamma = required(rate(flags.gamma, self.gamma, grid.and_then(|g| g.gamma.as_deref()), "gamma")?, "gamma")?;
        let theta = rate(flags.theta, self.theta, grid.and_then(|g| g.theta.as_deref()), "theta")?.unwrap_or(0.0);
        Ok(EpidemicParams::new(variant, beta, delta, gamma, theta)?)
    }
}

enum Source {
    Kind(GraphKind),
    File(PathBuf),
}

fn single<T: Copy>(axis: Option<&[T]>, name: &str) -> anyhow::Result<Option<T>> {
    match axis {
        None | Some([]) => Ok(None),
        Some([x]) => Ok(Some(*x)),
        Some(_) => Err(usage(format!("config grid has several {name} values; pass --{name}"))),
    }
}
