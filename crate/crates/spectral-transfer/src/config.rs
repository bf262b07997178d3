//! Experiment configuration files (TOML).
//!
//! ```toml
//! experiment = "coarsen-transfer"
//! seed = 7
//! laplacian = "unnormalized"
//! modes = 8
//! filters = [{ family = "lowpass", c = 1.0 }, { family = "heat", t = 1.0 }]
//!
//! [graph]
//! source = "path"
//! n = 20
//! ```
//!
//! Relative file paths are resolved against the directory holding the config.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filter::{Filter, FilterKind};
use crate::graph::{cycle, grid, path, random_geometric, LaplacianKind, WeightedGraph};
use crate::io::{parse_graph, parse_mesh_off, GraphFormat};
use crate::montecarlo::TrialConfig;
use crate::sampling::{PerturbationMode, PerturbationSpec};
use crate::space::GraphSpace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    CoarsenTransfer,
    PerturbStability,
    CircleSampling,
    ConvnetTransfer,
    McVerify,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::CoarsenTransfer => "coarsen-transfer",
            Experiment::PerturbStability => "perturb-stability",
            Experiment::CircleSampling => "circle-sampling",
            Experiment::ConvnetTransfer => "convnet-transfer",
            Experiment::McVerify => "mc-verify",
        }
    }
}

/// Where the graph M comes from. The tag makes the source unique.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSource {
    Path { n: usize },
    Cycle { n: usize },
    Grid { rows: usize, cols: usize },
    /// Seeded by the experiment seed unless given here.
    RandomGeometric { n: usize, radius: f64, seed: Option<u64> },
    File { path: PathBuf, format: Option<GraphFormat> },
    Mesh { path: PathBuf },
}

impl GraphSource {
    pub fn build(&self, master_seed: u64) -> Result<WeightedGraph> {
        match self {
            GraphSource::Path { n } => Ok(path(*n)),
            GraphSource::Cycle { n } => Ok(cycle(*n)),
            GraphSource::Grid { rows, cols } => Ok(grid(*rows, *cols)),
            GraphSource::RandomGeometric { n, radius, seed } => Ok(random_geometric(*n, *radius, seed.unwrap_or(master_seed)).0),
            GraphSource::File { path, format } => parse_graph(path, format.unwrap_or_else(|| GraphFormat::from_extension(path))),
            GraphSource::Mesh { path } => parse_mesh_off(path),
        }
    }

    fn resolve(&mut self, base: &Path) {
        if let GraphSource::File { path, .. } | GraphSource::Mesh { path } = self {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }

    fn check_exists(&self) -> Result<()> {
        if let GraphSource::File { path, .. } | GraphSource::Mesh { path } = self {
            if !path.is_file() {
                return Err(Error::Config(format!("graph file {} does not exist", path.display())));
            }
        }
        Ok(())
    }
}

/// One perturbation; without its own seed it draws from the experiment seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PerturbationEntry {
    pub mode: PerturbationMode,
    pub fraction: f64,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvNetSection {
    /// ConvNet spec file (TOML).
    pub spec: PathBuf,
    #[serde(default = "default_inputs")]
    pub inputs: usize,
    #[serde(default = "default_probes")]
    pub probes: usize,
    /// Relative weight jitter of the second graph; 0 runs a single graph.
    #[serde(default)]
    pub reweight: f64,
    /// Random input pairs for the contraction check.
    #[serde(default = "default_pairs")]
    pub contraction_pairs: usize,
}

fn default_inputs() -> usize {
    20
}

fn default_probes() -> usize {
    200
}

fn default_pairs() -> usize {
    50
}

fn default_signals() -> usize {
    8
}

fn default_laplacian() -> LaplacianKind {
    LaplacianKind::Unnormalized
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub graph: Option<GraphSource>,
    #[serde(default = "default_laplacian")]
    pub laplacian: LaplacianKind,
    #[serde(default)]
    pub filters: Vec<FilterKind>,
    /// Paley-Wiener band; alternatively `modes` picks the band holding that many modes.
    pub band: Option<f64>,
    pub modes: Option<usize>,
    /// Random PW signals for the pointwise items.
    #[serde(default = "default_signals")]
    pub signals: usize,
    #[serde(default)]
    pub perturbations: Vec<PerturbationEntry>,
    /// Trial design shared by circle-sampling and mc-verify.
    pub montecarlo: Option<TrialConfig>,
    pub convnet: Option<ConvNetSection>,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(g) = &mut cfg.graph {
            g.resolve(base);
        }
        if let Some(c) = &mut cfg.convnet {
            if c.spec.is_relative() {
                c.spec = base.join(&c.spec);
            }
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml_str(&text, base).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The master seed. Every experiment draws random signals or samples, so it is mandatory.
    pub fn master_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config(format!("experiment {} needs a seed", self.experiment.name())))
    }

    pub fn validate(&self) -> Result<()> {
        self.master_seed()?;
        let needs_graph = matches!(
            self.experiment,
            Experiment::CoarsenTransfer | Experiment::PerturbStability | Experiment::ConvnetTransfer
        );
        match (&self.graph, needs_graph) {
            (None, true) => return Err(Error::Config(format!("{} needs a [graph] section", self.experiment.name()))),
            (Some(_), false) => return Err(Error::Config(format!("{} runs on the circle and takes no [graph]", self.experiment.name()))),
            (Some(g), true) => g.check_exists()?,
            (None, false) => {}
        }
        let needs_band = matches!(self.experiment, Experiment::CoarsenTransfer | Experiment::PerturbStability);
        if needs_band && self.band.is_some() == self.modes.is_some() {
            return Err(Error::Config("give exactly one of `band` and `modes`".into()));
        }
        let needs_filters = matches!(
            self.experiment,
            Experiment::CoarsenTransfer | Experiment::PerturbStability | Experiment::CircleSampling
        );
        if needs_filters && self.filters.is_empty() {
            return Err(Error::Config(format!("{} needs at least one filter", self.experiment.name())));
        }
        if self.experiment == Experiment::PerturbStability && self.perturbations.is_empty() {
            return Err(Error::Config("perturb-stability needs at least one [[perturbations]] entry".into()));
        }
        if matches!(self.experiment, Experiment::CircleSampling | Experiment::McVerify) {
            self.trial_config()?.validate()?;
        }
        if self.experiment == Experiment::ConvnetTransfer {
            let c = self.convnet.as_ref().ok_or_else(|| Error::Config("convnet-transfer needs a [convnet] section".into()))?;
            if !c.spec.is_file() {
                return Err(Error::Config(format!("ConvNet spec {} does not exist", c.spec.display())));
            }
        }
        Ok(())
    }

    pub fn build_graph(&self) -> Result<WeightedGraph> {
        let g = self.graph.as_ref().ok_or_else(|| Error::Config("no [graph] section".into()))?;
        g.build(self.master_seed()?)
    }

    pub fn build_filters(&self) -> Result<Vec<Filter>> {
        self.filters.iter().cloned().map(Filter::new).collect()
    }

    pub fn resolve_band(&self, space: &GraphSpace) -> Result<f64> {
        match (self.band, self.modes) {
            (Some(b), None) => Ok(b),
            (None, Some(k)) => space.band_for_modes(k),
            _ => Err(Error::Config("give exactly one of `band` and `modes`".into())),
        }
    }

    /// Perturbation `i` with its seed filled in from the master seed.
    pub fn perturbation(&self, i: usize) -> Result<PerturbationSpec> {
        let p = &self.perturbations[i];
        let seed = p.seed.unwrap_or(self.master_seed()?.wrapping_add(i as u64 + 1));
        Ok(PerturbationSpec { mode: p.mode, fraction: p.fraction, seed })
    }

    /// The [montecarlo] section with the master seed.
    pub fn trial_config(&self) -> Result<TrialConfig> {
        let mut t = self.montecarlo.clone().ok_or_else(|| Error::Config(format!("{} needs a [montecarlo] section", self.experiment.name())))?;
        t.seed = self.master_seed()?;
        Ok(t)
    }
}
