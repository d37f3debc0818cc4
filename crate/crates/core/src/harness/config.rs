//! TOML run configuration. Angles are given in units of π.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::analysis::PeakOptions;
use crate::backend::{BackendOptions, Registry};
use crate::circuit::FloquetParams;
use crate::lattice::{
    build_chain, build_heavy_hex, devices, load_coupling_map, make_pattern, parse_pattern, InitialPattern,
    LatticeGraph, MeasureSet, PatternKind,
};
use crate::noise::NoiseModel;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_steps")]
    pub n_steps: usize,
    pub graph: GraphSpec,
    pub pattern: PatternSpec,
    pub params: ParamGrid,
    #[serde(default)]
    pub backend: BackendSpec,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub measure: MeasureSpec,
    #[serde(default)]
    pub analysis: AnalysisSpec,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_steps() -> usize {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    HeavyHex { rows: usize, cols: usize },
    Chain { length: usize },
    /// The 133-qubit device.
    Torino,
    /// The shipped 28-qubit device region.
    TorinoL28,
    /// A region of the 133-qubit device given by device labels, in order.
    TorinoRegion { labels: Vec<usize> },
    /// Coupling-map file, relative paths resolved against the config file.
    File { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    pub kind: PatternKind,
    #[serde(default)]
    pub bits: Option<Vec<u8>>,
    /// Pattern file; overrides `kind`.
    #[serde(default)]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamGrid {
    #[serde(default = "default_theta_j")]
    pub theta_j: f64,
    pub theta_x: Vec<f64>,
    pub theta_z: Vec<f64>,
}

fn default_theta_j() -> f64 {
    -0.5
}

impl ParamGrid {
    /// Grid points in row-major order (`θx` outer).
    pub fn points(&self) -> Vec<FloquetParams> {
        self.theta_x
            .iter()
            .flat_map(|&tx| self.theta_z.iter().map(move |&tz| FloquetParams::from_pi_units(self.theta_j, tx, tz)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackendSpec {
    #[serde(default = "default_backend")]
    pub name: String,
    #[serde(flatten)]
    pub options: BackendOptions,
}

fn default_backend() -> String {
    "sv".into()
}

impl Default for BackendSpec {
    fn default() -> Self {
        Self { name: default_backend(), options: BackendOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(flatten)]
    pub model: NoiseModel,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default = "default_trajectories")]
    pub trajectories: usize,
    /// Also run the `θx = π` calibration circuit and divide by it.
    #[serde(default = "yes")]
    pub mitigate: bool,
}

fn default_shots() -> usize {
    1 << 14
}

fn default_trajectories() -> usize {
    200
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    /// Every vertex touched by a gate.
    #[default]
    Active,
    Qubits { qubits: Vec<usize> },
    /// The measured row of the 28-qubit device region.
    TorinoL28,
    /// Device labels, mapped through a `torino_region` graph.
    TorinoLabels { labels: Vec<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSpec {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(flatten)]
    pub peaks: PeakOptions,
}

fn default_n_max() -> usize {
    crate::analysis::DEFAULT_N_MAX
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self { n_max: default_n_max(), peaks: PeakOptions::default() }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Steps at which per-site snapshots are written.
    #[serde(default)]
    pub snapshot_steps: Vec<usize>,
}

/// A validated configuration with its graph, pattern and measured set built.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub config: RunConfig,
    pub graph: LatticeGraph,
    pub pattern: InitialPattern,
    pub measure: MeasureSet,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads and validates a config file; relative paths inside it are
    /// resolved against its directory.
    pub fn load(path: &Path) -> Result<Prepared> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let GraphSpec::File { path: p } = &mut cfg.graph {
            *p = base.join(&*p);
        }
        if let Some(p) = &mut cfg.pattern.path {
            *p = base.join(&*p);
        }
        cfg.prepare()
    }

    pub fn prepare(self) -> Result<Prepared> {
        if self.schema != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported schema {} (this build reads schema {SCHEMA_VERSION})",
                self.schema
            )));
        }
        if self.params.theta_x.is_empty() || self.params.theta_z.is_empty() {
            return Err(HarnessError::Config("parameter grid is empty: give at least one theta_x and theta_z".into()));
        }
        if self.n_steps == 0 {
            return Err(HarnessError::Config("n_steps must be positive".into()));
        }
        if self.analysis.n_max > self.n_steps + 1 {
            return Err(HarnessError::Config(format!(
                "n_max = {} needs at least {} steps",
                self.analysis.n_max,
                self.analysis.n_max - 1
            )));
        }
        let graph = self.build_graph()?;
        let pattern = self.build_pattern(&graph)?;
        let measure = self.build_measure(&graph)?;

        let registry = Registry::default();
        let backend = registry.create(&self.backend.name, &self.backend.options).map_err(|e| {
            HarnessError::Config(format!("backend '{}': {e} (known: {})", self.backend.name, registry.names().join(", ")))
        })?;
        backend.check_graph(&graph).map_err(|e| HarnessError::BackendGraphMismatch(e.to_string()))?;

        if let Some(noise) = &self.noise {
            noise.model.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
            if self.backend.name != "sv" {
                return Err(HarnessError::Config("noise emulation runs on the sv backend only".into()));
            }
            if noise.trajectories == 0 {
                return Err(HarnessError::Config("noise.trajectories must be positive".into()));
            }
            if noise.mitigate {
                let bits: Vec<u8> = measure.qubits().iter().map(|&q| pattern.bits()[q]).collect();
                if bits.iter().any(|&b| b != bits[0]) {
                    return Err(HarnessError::Config(
                        "mitigation needs every measured qubit to start in the same state; \
                         pick a measured set inside one stripe or set noise.mitigate = false"
                            .into(),
                    ));
                }
            }
        }
        if let Some(&s) = self.output.snapshot_steps.iter().find(|&&s| s > self.n_steps) {
            return Err(HarnessError::Config(format!("snapshot step {s} is beyond n_steps = {}", self.n_steps)));
        }
        Ok(Prepared { config: self, graph, pattern, measure })
    }

    fn build_graph(&self) -> Result<LatticeGraph> {
        let g = match &self.graph {
            GraphSpec::HeavyHex { rows, cols } => build_heavy_hex(*rows, *cols),
            GraphSpec::Chain { length } => build_chain(*length),
            GraphSpec::Torino => devices::ibm_torino(),
            GraphSpec::TorinoL28 => devices::torino_l28(),
            GraphSpec::TorinoRegion { labels } => devices::ibm_torino().and_then(|d| d.induced(labels)),
            GraphSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                load_coupling_map(&text)
            }
        };
        g.map_err(|e| HarnessError::Config(format!("graph: {e}")))
    }

    fn build_pattern(&self, graph: &LatticeGraph) -> Result<InitialPattern> {
        let p = match &self.pattern.path {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                parse_pattern(&text, graph.num_qubits())
            }
            None => make_pattern(graph, self.pattern.kind, self.pattern.bits.as_deref()),
        };
        p.map_err(|e| HarnessError::Config(format!("pattern: {e}")))
    }

    fn build_measure(&self, graph: &LatticeGraph) -> Result<MeasureSet> {
        let n = graph.num_qubits();
        let m = match &self.measure {
            MeasureSpec::Active => MeasureSet::active(graph),
            MeasureSpec::Qubits { qubits } => MeasureSet::new(qubits.iter().copied(), n),
            MeasureSpec::TorinoL28 => {
                if self.graph != GraphSpec::TorinoL28 {
                    return Err(HarnessError::Config("measure kind torino_l28 needs graph kind torino_l28".into()));
                }
                devices::torino_l28_measure_set()
            }
            MeasureSpec::TorinoLabels { labels } => {
                let region = match &self.graph {
                    GraphSpec::TorinoRegion { labels } => labels.clone(),
                    GraphSpec::Torino => (0..n).collect(),
                    GraphSpec::TorinoL28 => devices::TORINO_L28_REGION.to_vec(),
                    _ => return Err(HarnessError::Config("measure kind torino_labels needs a torino graph".into())),
                };
                let local: Option<Vec<usize>> =
                    labels.iter().map(|q| region.iter().position(|r| r == q)).collect();
                let local = local.ok_or_else(|| HarnessError::Config("a measured label is outside the region".into()))?;
                MeasureSet::new(local, n)
            }
        };
        m.map_err(|e| HarnessError::Config(format!("measure: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema = 1
[graph]
kind = "heavy_hex"
rows = 1
cols = 1
[pattern]
kind = "stripe"
[params]
theta_x = [0.9, 1.0]
theta_z = [0.0]
"#;

    #[test]
    fn defaults_fill_in() {
        let p = RunConfig::from_toml(MINIMAL).unwrap().prepare().unwrap();
        assert_eq!(p.config.n_steps, 100);
        assert_eq!(p.config.backend.name, "sv");
        assert_eq!(p.config.backend.options.chi, 32);
        assert_eq!(p.graph.num_qubits(), 12);
        assert_eq!(p.config.params.points().len(), 2);
        assert!((p.config.params.points()[0].theta_j + std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn mps_on_heavy_hex_is_rejected() {
        let text = format!("{MINIMAL}[backend]\nname = \"mps\"\n");
        let err = RunConfig::from_toml(&text).unwrap().prepare().unwrap_err();
        assert!(matches!(err, HarnessError::BackendGraphMismatch(_)), "{err}");
    }

    #[test]
    fn validation_messages() {
        let bad = MINIMAL.replace("schema = 1", "schema = 7");
        assert!(RunConfig::from_toml(&bad).unwrap().prepare().is_err());
        let empty = MINIMAL.replace("theta_z = [0.0]", "theta_z = []");
        assert!(RunConfig::from_toml(&empty).unwrap().prepare().is_err());
        let unknown = format!("{MINIMAL}[backend]\nchii = 3\n");
        assert!(RunConfig::from_toml(&unknown).is_err());
        // the stripe pattern mixes signs over all active qubits
        let noisy = format!("{MINIMAL}[noise]\ntrajectories = 4\n");
        assert!(RunConfig::from_toml(&noisy).unwrap().prepare().is_err());
        let unmitigated = format!("{MINIMAL}[noise]\nmitigate = false\n");
        assert!(RunConfig::from_toml(&unmitigated).unwrap().prepare().is_ok());
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(RunConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
    }
}
