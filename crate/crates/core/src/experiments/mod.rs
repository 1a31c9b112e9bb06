//! Scripted parameter sweeps over the model layers, written as CSV tables,
//! SVG line plots and a JSON metadata record.

mod layers;
mod mixing;
pub mod plot;
mod spec;
mod sweep;

pub use layers::{run_layer_comparison, LayerRow};
pub use mixing::{run_mixing_scaling, MixingRow, MixingStatus};
pub use spec::{ExperimentKind, ExperimentSpec, Layer, ParamGrid};
pub use sweep::{run_threshold_sweep, SweepOutput, SweepRow, DECAY_FIT_WINDOW};

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chain::ChainError;
use crate::graph::GraphError;
use crate::params::ParamError;
use crate::spectral::SpectralError;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid experiment spec: {0}")]
    Spec(String),
    #[error("grid point {index}: {source}")]
    GridPoint { index: usize, source: ParamError },
    #[error("cannot parse experiment spec: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Chain(#[from] ChainError),
}

/// Contents of the `<name>_metadata.json` record. Deliberately free of
/// timestamps and timings so that reruns are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub name: String,
    pub kind: ExperimentKind,
    /// SHA-256 of the canonical JSON form of the experiment spec.
    pub spec_sha256: String,
    pub version: String,
    pub decay_fit_window: [usize; 2],
    pub grid_points: usize,
    pub failed_points: usize,
    pub outputs: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub metadata: Metadata,
    pub files: Vec<PathBuf>,
}

pub(crate) fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Quotes a CSV field when needed.
pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

struct OutputSet {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl OutputSet {
    fn write(&mut self, file_name: &str, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> std::io::Result<()> {
        let path = self.dir.join(file_name);
        let mut out = BufWriter::new(fs::File::create(&path)?);
        body(&mut out)?;
        out.flush()?;
        self.files.push(path);
        Ok(())
    }
}

/// Runs the experiment described by `spec` and writes its outputs into
/// `spec.output_dir`. Grid points and replicas use up to `jobs` threads;
/// outputs do not depend on `jobs`.
pub fn run_experiment(spec: &ExperimentSpec, jobs: usize) -> Result<ExperimentReport, ExperimentError> {
    spec.validate()?;
    fs::create_dir_all(&spec.output_dir)?;
    let mut out = OutputSet {
        dir: spec.output_dir.clone(),
        files: Vec::new(),
    };
    let name = &spec.name;
    let (grid_points, failed_points) = match spec.kind {
        ExperimentKind::ThresholdSweep => {
            let result = run_threshold_sweep(spec, jobs)?;
            out.write(&format!("{name}_sweep.csv"), |w| sweep::write_rows(&result.rows, w))?;
            for (k, curve) in result.curves.iter().enumerate() {
                if !curve.meanfield.is_empty() {
                    out.write(&format!("{name}_p{k:03}_meanfield.csv"), |w| sweep::write_meanfield_curve(curve, w))?;
                }
                if let Some(ens) = &curve.montecarlo {
                    out.write(&format!("{name}_p{k:03}_mc.csv"), |w| ens.write_summary_csv(w))?;
                }
            }
            let svg = sweep::infected_plot(spec, &result).to_svg();
            out.write(&format!("{name}_infected.svg"), |w| w.write_all(svg.as_bytes()))?;
            let failed = result.rows.iter().filter(|r| r.error.is_some()).count();
            (result.rows.len(), failed)
        }
        ExperimentKind::LayerComparison => {
            let rows = run_layer_comparison(spec, jobs)?;
            out.write(&format!("{name}_layers.csv"), |w| layers::write_rows(&rows, w))?;
            let svg = layers::discrepancy_plot(spec, &rows).to_svg();
            out.write(&format!("{name}_layers.svg"), |w| w.write_all(svg.as_bytes()))?;
            (spec.grid.points()?.len(), 0)
        }
        ExperimentKind::MixingScaling => {
            let rows = run_mixing_scaling(spec, jobs)?;
            out.write(&format!("{name}_mixing.csv"), |w| mixing::write_rows(&rows, w))?;
            let svg = mixing::scaling_plot(spec, &rows).to_svg();
            out.write(&format!("{name}_mixing.svg"), |w| w.write_all(svg.as_bytes()))?;
            let failed = rows.iter().filter(|r| matches!(r.status, MixingStatus::Error(_))).count();
            (rows.len(), failed)
        }
    };
    let mut outputs: Vec<String> = out
        .files
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let meta_name = format!("{name}_metadata.json");
    outputs.push(meta_name.clone());
    let metadata = Metadata {
        name: name.clone(),
        kind: spec.kind,
        spec_sha256: spec.sha256(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        decay_fit_window: [DECAY_FIT_WINDOW.0, DECAY_FIT_WINDOW.1],
        grid_points,
        failed_points,
        outputs,
    };
    let json = serde_json::to_string_pretty(&metadata)?;
    out.write(&meta_name, |w| writeln!(w, "{json}"))?;
    Ok(ExperimentReport {
        metadata,
        files: out.files,
    })
}

/// Loads a spec from a JSON file.
pub fn load_spec(path: &Path) -> Result<ExperimentSpec, ExperimentError> {
    let text = fs::read_to_string(path)?;
    ExperimentSpec::from_json(&text)
}
