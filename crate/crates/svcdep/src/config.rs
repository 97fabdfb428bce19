//! TOML run configuration.
//!
//! One file drives a whole run. Every table is optional and falls back to the
//! library defaults, so an empty file is a valid config that simulates the
//! default scenario.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use svcdep_core::eval::{SweepKnob, SweepSpec};
use svcdep_core::{DetectConfig, DirectionMode, ExperimentConfig, ModelSpec, ObjectiveConfig, ScenarioConfig, SplitConfig, TrainConfig};

use crate::error::RunError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub direction: DirectionMode,
    /// Fraction of train / validation cells that keep their label.
    pub label_ratio: f64,
    /// Gaussian noise added after standardization.
    pub noise_sigma: f64,
    pub paths: Paths,
    pub model: ModelSpec,
    pub objective: ObjectiveConfig,
    pub train: TrainConfig,
    pub detect: DetectConfig,
    pub split: SplitConfig,
    /// Used when `paths.metrics` is not set.
    pub scenario: ScenarioConfig,
    pub sweep: SweepConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let exp = ExperimentConfig::default();
        Self {
            seed: exp.seed,
            direction: exp.direction,
            label_ratio: exp.label_ratio,
            noise_sigma: exp.noise_sigma,
            paths: Paths::default(),
            model: exp.model,
            objective: exp.objective,
            train: exp.train,
            detect: exp.detect,
            split: exp.split,
            scenario: ScenarioConfig::default(),
            sweep: SweepConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

/// Input files and the output directory. Relative paths are resolved against
/// the directory holding the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub edges: Option<PathBuf>,
    pub metrics: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Self { edges: None, metrics: None, out: PathBuf::from("out") }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub axes: Vec<SweepAxis>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepAxis {
    pub knob: SweepKnob,
    pub values: Vec<f64>,
}

impl SweepConfig {
    pub fn spec(&self) -> SweepSpec {
        SweepSpec { axes: self.axes.iter().map(|a| (a.knob, a.values.clone())).collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Fill the `seconds` column of the history file. Off by default so
    /// reruns stay byte-identical.
    pub record_wall_time: bool,
    /// Window of the rolling metrics file, in steps.
    pub rolling_window: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { record_wall_time: false, rolling_window: 50 }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Read `path` and resolve its relative paths against the file's directory.
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.paths.resolve(base);
        Ok(cfg)
    }

    /// `--seed` drives the scenario too, so one flag reseeds the whole run.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.scenario.seed = seed;
    }

    pub fn experiment(&self) -> ExperimentConfig {
        ExperimentConfig {
            seed: self.seed,
            direction: self.direction,
            model: self.model,
            objective: self.objective,
            train: self.train,
            detect: self.detect,
            split: self.split,
            label_ratio: self.label_ratio,
            noise_sigma: self.noise_sigma,
        }
    }

    /// Referenced input files must exist before any work starts.
    pub fn check_paths(&self) -> Result<(), RunError> {
        match (&self.paths.edges, &self.paths.metrics) {
            (None, None) => Ok(()),
            (Some(e), Some(m)) => {
                for p in [e, m] {
                    if !p.is_file() {
                        return Err(RunError::Config(format!("missing input file {}", p.display())));
                    }
                }
                Ok(())
            }
            _ => Err(RunError::Config("paths.edges and paths.metrics must be given together".into())),
        }
    }
}

impl Paths {
    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        self.edges.iter_mut().for_each(fix);
        self.metrics.iter_mut().for_each(fix);
        fix(&mut self.out);
    }
}
