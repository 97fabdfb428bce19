//! Precision / recall / F1, rank AUC, time-resolved metrics and
//! hyper-parameter sweeps.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::detect::{classify, AnomalyScore};
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, Dataset, ExperimentConfig};
use crate::telemetry::{Label, MetricPanel};

/// Confusion counts over labeled cells.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Counts {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    pub fn_: usize,
}

impl Counts {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Harmonic mean, 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    }
}

/// Confusion counts; unlabeled cells are skipped.
pub fn confusion(predictions: &[bool], labels: &[Label]) -> Result<Counts> {
    if predictions.len() != labels.len() {
        return Err(Error::DimensionMismatch("predictions vs labels".into()));
    }
    let mut c = Counts::default();
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (true, Label::Anomaly) => c.tp += 1,
            (true, Label::Normal) => c.fp += 1,
            (false, Label::Normal) => c.tn += 1,
            (false, Label::Anomaly) => c.fn_ += 1,
            (_, Label::Unlabeled) => {}
        }
    }
    Ok(c)
}

/// `(precision, recall, f1)`.
pub fn prf(predictions: &[bool], labels: &[Label]) -> Result<(f64, f64, f64)> {
    let c = confusion(predictions, labels)?;
    Ok((c.precision(), c.recall(), c.f1()))
}

/// Mann–Whitney AUC over labeled cells, ties at half credit.
///
/// Pair counts are kept in exact integer half-units, so the result equals a
/// brute-force pairwise count bit for bit.
pub fn auc(scores: &[f64], labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch("scores vs labels".into()));
    }
    let mut cells: Vec<(f64, bool)> =
        scores.iter().zip(labels).filter(|(_, l)| l.is_labeled()).map(|(&s, &l)| (s, l == Label::Anomaly)).collect();
    let pos = cells.iter().filter(|c| c.1).count() as u128;
    let neg = cells.len() as u128 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::SingleClass("auc needs both classes"));
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut half_units, mut below) = (0u128, 0u128);
    let mut i = 0;
    while i < cells.len() {
        let mut j = i;
        let (mut p, mut n) = (0u128, 0u128);
        while j < cells.len() && cells[j].0.total_cmp(&cells[i].0).is_eq() {
            if cells[j].1 {
                p += 1;
            } else {
                n += 1;
            }
            j += 1;
        }
        half_units += p * (2 * below + n);
        below += n;
        i = j;
    }
    Ok(half_units as f64 / (2 * pos * neg) as f64)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EvalReport {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// `None` when the evaluated cells hold a single class.
    pub auc: Option<f64>,
    pub counts: Counts,
    pub threshold: f64,
    pub sweep_coords: Vec<(String, f64)>,
}

impl EvalReport {
    pub fn auc_or_nan(&self) -> f64 {
        self.auc.unwrap_or(f64::NAN)
    }
}

/// Threshold `scores` and compare against `labels`.
pub fn evaluate(scores: &[f64], labels: &[Label], threshold: f64) -> Result<EvalReport> {
    let counts = confusion(&classify(scores, threshold), labels)?;
    let auc = match auc(scores, labels) {
        Ok(a) => Some(a),
        Err(Error::SingleClass(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(EvalReport {
        precision: counts.precision(),
        recall: counts.recall(),
        f1: counts.f1(),
        auc,
        counts,
        threshold,
        sweep_coords: Vec::new(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RollingPoint {
    /// First step of the window.
    pub start: usize,
    pub report: EvalReport,
}

/// Metrics over every window of `window_steps` consecutive steps (stride 1)
/// with a fixed global threshold.
pub fn rolling_eval(scores: &AnomalyScore, panel: &MetricPanel, threshold: f64, window_steps: usize) -> Result<Vec<RollingPoint>> {
    if window_steps == 0 {
        return Err(Error::InvalidConfig("window_steps must be >= 1".into()));
    }
    let range = scores.steps();
    if range.end > panel.num_steps() || scores.num_nodes() != panel.num_nodes() {
        return Err(Error::DimensionMismatch("scores do not fit the panel".into()));
    }
    let mut out = Vec::new();
    let mut start = range.start;
    while start + window_steps <= range.end {
        let w = scores.slice(start..start + window_steps);
        let report = evaluate(w.values(), &w.aligned_labels(panel), threshold)?;
        out.push(RollingPoint { start, report });
        start += 1;
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum SweepKnob {
    GcnLayers,
    NeighborhoodCap,
    EmbedDim,
    LearningRate,
    LabelRatio,
    NoiseSigma,
    AnomalyIntensity,
}

impl SweepKnob {
    pub const ALL: [SweepKnob; 7] = [
        SweepKnob::GcnLayers,
        SweepKnob::NeighborhoodCap,
        SweepKnob::EmbedDim,
        SweepKnob::LearningRate,
        SweepKnob::LabelRatio,
        SweepKnob::NoiseSigma,
        SweepKnob::AnomalyIntensity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SweepKnob::GcnLayers => "gcn_layers",
            SweepKnob::NeighborhoodCap => "neighborhood_cap",
            SweepKnob::EmbedDim => "embed_dim",
            SweepKnob::LearningRate => "learning_rate",
            SweepKnob::LabelRatio => "label_ratio",
            SweepKnob::NoiseSigma => "noise_sigma",
            SweepKnob::AnomalyIntensity => "anomaly_intensity",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name).ok_or_else(|| Error::UnknownKnob(name.to_string()))
    }

    fn integral(self, value: f64) -> Result<usize> {
        if value >= 0.0 && libm::trunc(value) == value && value < 1e9 {
            Ok(value as usize)
        } else {
            Err(Error::InvalidConfig(format!("{} takes a non-negative integer, got {value}", self.name())))
        }
    }

    /// Apply one knob value to a configuration / dataset pair.
    pub fn apply(self, value: f64, cfg: &mut ExperimentConfig, data: &mut Dataset) -> Result<()> {
        match self {
            SweepKnob::GcnLayers => cfg.model.dims.gcn_layers = self.integral(value)?,
            SweepKnob::NeighborhoodCap => cfg.model.neighborhood_cap = self.integral(value)?,
            SweepKnob::EmbedDim => cfg.model.dims.d_emb = self.integral(value)?,
            SweepKnob::LearningRate => cfg.train.learning_rate = value,
            SweepKnob::LabelRatio => cfg.label_ratio = value,
            SweepKnob::NoiseSigma => cfg.noise_sigma = value,
            SweepKnob::AnomalyIntensity => match data {
                Dataset::Simulated(s) => s.set_intensity(value),
                Dataset::Given { .. } => {
                    return Err(Error::InvalidConfig("anomaly_intensity needs a simulated dataset".into()));
                }
            },
        }
        Ok(())
    }
}

/// Cartesian grid over one or more knobs; the first axis varies slowest.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepSpec {
    pub axes: Vec<(SweepKnob, Vec<f64>)>,
}

impl SweepSpec {
    pub fn single(knob: SweepKnob, grid: Vec<f64>) -> Self {
        Self { axes: vec![(knob, grid)] }
    }

    pub fn with(mut self, knob: SweepKnob, grid: Vec<f64>) -> Self {
        self.axes.push((knob, grid));
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() || self.axes.iter().any(|a| a.1.is_empty()) {
            return Err(Error::InvalidConfig("sweep needs at least one non-empty axis".into()));
        }
        for (i, a) in self.axes.iter().enumerate() {
            if self.axes[..i].iter().any(|b| b.0 == a.0) {
                return Err(Error::InvalidConfig(format!("knob {} swept twice", a.0.name())));
            }
        }
        Ok(())
    }

    /// Every grid point in order.
    pub fn points(&self) -> Vec<Vec<(SweepKnob, f64)>> {
        let mut out: Vec<Vec<(SweepKnob, f64)>> = vec![Vec::new()];
        for (knob, grid) in &self.axes {
            out = out.into_iter().flat_map(|p| grid.iter().map(move |&v| [p.as_slice(), &[(*knob, v)]].concat())).collect();
        }
        out
    }
}

/// Run one grid point and tag the report with its coordinates.
pub fn run_point(point: &[(SweepKnob, f64)], base: &ExperimentConfig, data: &Dataset) -> Result<EvalReport> {
    let mut cfg = base.clone();
    let mut data = data.clone();
    for &(knob, v) in point {
        knob.apply(v, &mut cfg, &mut data)?;
    }
    let mut report = run_experiment(&data, &cfg)?.report;
    report.sweep_coords = point.iter().map(|&(k, v)| (k.name().to_string(), v)).collect();
    Ok(report)
}

/// Sequential sweep; reports follow [`SweepSpec::points`] order.
pub fn run_sweep(spec: &SweepSpec, base: &ExperimentConfig, data: &Dataset) -> Result<Vec<EvalReport>> {
    spec.validate()?;
    spec.points().iter().map(|p| run_point(p, base, data)).collect()
}
