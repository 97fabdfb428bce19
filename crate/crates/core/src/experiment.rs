//! The full pipeline: split, standardize, perturb, train, build the
//! reference bank, pick a threshold on validation and report on test.

use alloc::vec::Vec;
use core::ops::Range;

use crate::detect::{build_reference, score_steps, select_threshold, AnomalyScore, DetectConfig};
use crate::encoder::{ModelParams, ModelSpec};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport};
use crate::graph::{build_graph, DirectionMode, ServiceGraph};
use crate::objective::ObjectiveConfig;
use crate::rng;
use crate::simgen::{generate_topology, simulate, ScenarioConfig};
use crate::telemetry::{inject_noise, mask_labels_in, standardize, MetricPanel, StandardizationStats};
use crate::train::{train_from, TrainConfig, TrainHistory};

/// Contiguous time-axis split fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SplitConfig {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        Self { train: 0.6, val: 0.2, test: 0.2 }
    }
}

/// Step ranges of the three splits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Splits {
    pub train: Range<usize>,
    pub val: Range<usize>,
    pub test: Range<usize>,
}

impl SplitConfig {
    pub fn validate(&self) -> Result<()> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|p| p.is_nan() || *p <= 0.0) || libm::fabs(parts.iter().sum::<f64>() - 1.0) > 1e-9 {
            return Err(Error::InvalidConfig("split fractions must be positive and sum to 1".into()));
        }
        Ok(())
    }

    /// Train and validation lengths are rounded; test takes the remainder.
    pub fn ranges(&self, steps: usize) -> Result<Splits> {
        self.validate()?;
        let a = libm::round(self.train * steps as f64) as usize;
        let b = (a + libm::round(self.val * steps as f64) as usize).min(steps);
        if a == 0 || b == a || b == steps {
            return Err(Error::InvalidConfig("every split needs at least one step".into()));
        }
        Ok(Splits { train: 0..a, val: a..b, test: b..steps })
    }
}

/// Where the telemetry comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// Panel rows must follow the graph's node order.
    Given { panel: MetricPanel, graph: ServiceGraph },
    Simulated(ScenarioConfig),
}

impl Dataset {
    /// Materialize `(panel, graph)`.
    pub fn load(&self, mode: DirectionMode) -> Result<(MetricPanel, ServiceGraph)> {
        match self {
            Dataset::Given { panel, graph } => {
                if panel.node_ids() != graph.node_ids() {
                    return Err(Error::DimensionMismatch("panel node order differs from the graph".into()));
                }
                Ok((panel.clone(), graph.clone()))
            }
            Dataset::Simulated(s) => {
                let topo = generate_topology(s.tiers, s.seed)?;
                let graph = build_graph(&topo.edge_list(), mode)?;
                let panel = simulate(&topo, s)?;
                Ok((panel, graph))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ExperimentConfig {
    pub seed: u64,
    pub direction: DirectionMode,
    pub model: ModelSpec,
    pub objective: ObjectiveConfig,
    pub train: TrainConfig,
    pub detect: DetectConfig,
    pub split: SplitConfig,
    /// Fraction of train / validation cells that keep their label.
    pub label_ratio: f64,
    /// Extra Gaussian noise after standardization, in standardized units.
    pub noise_sigma: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            direction: DirectionMode::default(),
            model: ModelSpec::default(),
            objective: ObjectiveConfig::default(),
            train: TrainConfig::default(),
            detect: DetectConfig::default(),
            split: SplitConfig::default(),
            label_ratio: 0.1,
            noise_sigma: 0.0,
        }
    }
}

/// Standardized, perturbed and label-masked inputs of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Prepared {
    pub graph: ServiceGraph,
    /// Standardized + noised features with masked train / validation labels.
    pub panel: MetricPanel,
    /// Same features with every ground-truth label.
    pub truth: MetricPanel,
    pub stats: StandardizationStats,
    pub splits: Splits,
}

pub fn prepare(data: &Dataset, cfg: &ExperimentConfig) -> Result<Prepared> {
    let (raw, graph) = data.load(cfg.direction)?;
    let splits = cfg.split.ranges(raw.num_steps())?;
    let (standardized, stats) = standardize(&raw, splits.train.clone())?;
    let truth = inject_noise(&standardized, cfg.noise_sigma, cfg.seed)?;
    let masked = mask_labels_in(&truth, splits.train.clone(), cfg.label_ratio, cfg.seed)?;
    let panel = mask_labels_in(&masked, splits.val.clone(), cfg.label_ratio, rng::derive(cfg.seed, 1))?;
    Ok(Prepared { graph, panel, truth, stats, splits })
}

/// Scores over validation + test, the validation threshold and the test report.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub scores: AnomalyScore,
    pub threshold: f64,
    pub report: EvalReport,
    pub bank_size: usize,
}

pub fn detect(params: &ModelParams, prep: &Prepared, cfg: &ExperimentConfig) -> Result<Detection> {
    let bank = build_reference(
        params,
        &prep.graph,
        &prep.panel,
        prep.splits.train.clone(),
        cfg.model.neighborhood_cap,
        &cfg.detect,
        cfg.seed,
    )?;
    let scores = score_steps(params, &prep.graph, &prep.panel, prep.splits.val.start..prep.splits.test.end, cfg.model.neighborhood_cap, &bank)?;
    let val = scores.slice(prep.splits.val.clone());
    let threshold = select_threshold(val.values(), &val.aligned_labels(&prep.panel))?;
    let test = scores.slice(prep.splits.test.clone());
    let report = evaluate(test.values(), &test.aligned_labels(&prep.truth), threshold)?;
    Ok(Detection { scores, threshold, report, bank_size: bank.len() })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub params: ModelParams,
    pub history: TrainHistory,
    pub prepared: Prepared,
    pub detection: Detection,
    pub report: EvalReport,
}

pub fn run_experiment(data: &Dataset, cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with_clock(data, cfg, &mut || 0.0)
}

pub fn run_experiment_with_clock(data: &Dataset, cfg: &ExperimentConfig, clock: &mut dyn FnMut() -> f64) -> Result<ExperimentOutcome> {
    let prepared = prepare(data, cfg)?;
    let train = TrainConfig { seed: cfg.seed, ..cfg.train };
    let params = crate::encoder::init_params(cfg.model.dims, cfg.model.activation, cfg.seed)?;
    let (params, history) =
        train_from(params, &prepared.panel, &prepared.graph, &cfg.model, &cfg.objective, &train, prepared.splits.train.clone(), clock)?;
    let detection = detect(&params, &prepared, cfg)?;
    let report = detection.report.clone();
    Ok(ExperimentOutcome { params, history, prepared, detection, report })
}

/// Median of a non-empty list (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}
