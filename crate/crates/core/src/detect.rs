//! k-NN cosine-distance scoring against a bank of presumed-normal embeddings.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::index;

use crate::encoder::{forward, EmbeddingFrame, ModelParams};
use crate::error::{Error, Result};
use crate::graph::ServiceGraph;
use crate::matrix::{dot, Matrix};
use crate::objective::{base_view_seed, MIN_NORM};
use crate::rng;
use crate::telemetry::{Label, MetricPanel};

/// Neighborhood sampling seed used for every inference-time encoding.
pub const INFERENCE_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct DetectConfig {
    pub k: usize,
    pub bank_capacity: usize,
}

impl Default for DetectConfig {
    fn default() -> Self {
        Self { k: 10, bank_capacity: 4096 }
    }
}

/// Encode every step in `steps` with the inference neighborhoods.
pub fn encode_steps(params: &ModelParams, g: &ServiceGraph, panel: &MetricPanel, steps: Range<usize>, cap: usize) -> Result<Vec<EmbeddingFrame>> {
    if steps.end > panel.num_steps() {
        return Err(Error::InvalidConfig("encode range outside panel".into()));
    }
    steps.map(|t| forward(&panel.step_matrix(t), g, params, cap, base_view_seed(INFERENCE_SEED, t))).collect()
}

fn normalized(v: &[f64]) -> Vec<f64> {
    let n = libm::sqrt(dot(v, v));
    if n < MIN_NORM {
        vec![0.0; v.len()]
    } else {
        v.iter().map(|x| x / n).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBank {
    /// Unit-normalized rows (all-zero for degenerate embeddings).
    vectors: Matrix,
    /// `(node, step)` of every row.
    provenance: Vec<(usize, usize)>,
    k: usize,
}

impl ReferenceBank {
    /// Bank over explicit vectors; `k` is clamped to the bank size.
    pub fn from_vectors(vectors: &[Vec<f64>], provenance: Vec<(usize, usize)>, k: usize) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::NoNormalReference);
        }
        if k == 0 {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        if provenance.len() != vectors.len() {
            return Err(Error::DimensionMismatch("bank provenance length".into()));
        }
        let rows: Vec<Vec<f64>> = vectors.iter().map(|v| normalized(v)).collect();
        Ok(Self { vectors: Matrix::from_rows(&rows), provenance, k: k.min(vectors.len()) })
    }

    pub fn len(&self) -> usize {
        self.vectors.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn provenance(&self) -> &[(usize, usize)] {
        &self.provenance
    }

    /// Mean cosine distance from `z` to its `k` nearest bank vectors.
    pub fn score(&self, z: &[f64]) -> f64 {
        let mut scratch = Vec::with_capacity(self.len());
        self.score_with(z, &mut scratch)
    }

    fn score_with(&self, z: &[f64], dists: &mut Vec<f64>) -> f64 {
        let q = normalized(z);
        dists.clear();
        dists.extend((0..self.len()).map(|r| 1.0 - dot(&q, self.vectors.row(r)).clamp(-1.0, 1.0)));
        let k = self.k;
        if k < dists.len() {
            dists.select_nth_unstable_by(k - 1, f64::total_cmp);
        }
        let nearest = &mut dists[..k];
        nearest.sort_unstable_by(f64::total_cmp);
        nearest.iter().sum::<f64>() / k as f64
    }
}

/// Encode the training steps and keep every cell not labeled anomalous,
/// down-sampled uniformly to the bank capacity.
pub fn build_reference(
    params: &ModelParams,
    g: &ServiceGraph,
    panel: &MetricPanel,
    train_steps: Range<usize>,
    cap: usize,
    cfg: &DetectConfig,
    seed: u64,
) -> Result<ReferenceBank> {
    if cfg.bank_capacity == 0 {
        return Err(Error::InvalidConfig("bank capacity must be >= 1".into()));
    }
    let frames = encode_steps(params, g, panel, train_steps.clone(), cap)?;
    let mut candidates = Vec::new();
    for (k, t) in train_steps.enumerate() {
        for node in 0..panel.num_nodes() {
            if panel.label(node, t) != Label::Anomaly {
                candidates.push((node, t, k));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::NoNormalReference);
    }
    if candidates.len() > cfg.bank_capacity {
        let mut keep = index::sample(&mut rng::stream(seed, rng::TAG_BANK), candidates.len(), cfg.bank_capacity).into_vec();
        keep.sort_unstable();
        candidates = keep.into_iter().map(|i| candidates[i]).collect();
    }
    let vectors: Vec<Vec<f64>> = candidates.iter().map(|&(node, _, k)| frames[k].row(node).to_vec()).collect();
    let provenance = candidates.iter().map(|&(node, t, _)| (node, t)).collect();
    ReferenceBank::from_vectors(&vectors, provenance, cfg.k)
}

/// Scores over a step range, `[node][step]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AnomalyScore {
    num_nodes: usize,
    steps: Range<usize>,
    values: Vec<f64>,
}

impl AnomalyScore {
    pub fn new(num_nodes: usize, steps: Range<usize>, values: Vec<f64>) -> Result<Self> {
        if values.len() != num_nodes * steps.len() {
            return Err(Error::DimensionMismatch("score tensor size".into()));
        }
        Ok(Self { num_nodes, steps, values })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn steps(&self) -> Range<usize> {
        self.steps.clone()
    }

    pub fn get(&self, node: usize, step: usize) -> f64 {
        self.values[node * self.steps.len() + (step - self.steps.start)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Scores restricted to a sub-range, node-major.
    pub fn slice(&self, steps: Range<usize>) -> AnomalyScore {
        let mut values = Vec::with_capacity(self.num_nodes * steps.len());
        for node in 0..self.num_nodes {
            values.extend(steps.clone().map(|t| self.get(node, t)));
        }
        AnomalyScore { num_nodes: self.num_nodes, steps, values }
    }

    /// Labels aligned with [`values`](Self::values).
    pub fn aligned_labels(&self, panel: &MetricPanel) -> Vec<Label> {
        let mut out = Vec::with_capacity(self.values.len());
        for node in 0..self.num_nodes {
            out.extend(self.steps.clone().map(|t| panel.label(node, t)));
        }
        out
    }
}

/// Score every node at every step of `steps`.
pub fn score_steps(
    params: &ModelParams,
    g: &ServiceGraph,
    panel: &MetricPanel,
    steps: Range<usize>,
    cap: usize,
    bank: &ReferenceBank,
) -> Result<AnomalyScore> {
    let frames = encode_steps(params, g, panel, steps.clone(), cap)?;
    score_frames(&frames, steps, bank)
}

pub fn score_panel(params: &ModelParams, g: &ServiceGraph, panel: &MetricPanel, cap: usize, bank: &ReferenceBank) -> Result<AnomalyScore> {
    score_steps(params, g, panel, 0..panel.num_steps(), cap, bank)
}

/// Score precomputed frames (`frames[k]` is step `steps.start + k`).
pub fn score_frames(frames: &[EmbeddingFrame], steps: Range<usize>, bank: &ReferenceBank) -> Result<AnomalyScore> {
    if frames.len() != steps.len() {
        return Err(Error::DimensionMismatch("one frame per step is required".into()));
    }
    let n = frames.first().map_or(0, EmbeddingFrame::num_nodes);
    let mut values = vec![0.0; n * steps.len()];
    let mut scratch = Vec::with_capacity(bank.len());
    for (k, f) in frames.iter().enumerate() {
        for node in 0..n {
            values[node * steps.len() + k] = bank.score_with(f.row(node), &mut scratch);
        }
    }
    AnomalyScore::new(n, steps, values)
}

fn f1_from(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fn_) as f64
    }
}

/// F1-maximizing threshold over labeled cells.
///
/// Candidates are midpoints between consecutive distinct sorted scores and
/// cells with `score > threshold` are predicted anomalous. Ties go to the
/// smallest threshold. Fails when labels hold a single class or when no
/// candidate yields any true positive.
pub fn select_threshold(scores: &[f64], labels: &[Label]) -> Result<f64> {
    if scores.len() != labels.len() {
        return Err(Error::DimensionMismatch("scores vs labels".into()));
    }
    let mut cells: Vec<(f64, bool)> = scores
        .iter()
        .zip(labels)
        .filter(|(_, l)| l.is_labeled())
        .map(|(&s, &l)| (s, l == Label::Anomaly))
        .collect();
    let positives = cells.iter().filter(|c| c.1).count();
    if positives == 0 || positives == cells.len() {
        return Err(Error::SingleClass("threshold selection needs both classes"));
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));

    // suffix counts: positives/negatives at index >= k
    let mut best: Option<(f64, f64)> = None;
    let mut tp = positives;
    let mut fp = cells.len() - positives;
    for k in 0..cells.len() - 1 {
        if cells[k].1 {
            tp -= 1;
        } else {
            fp -= 1;
        }
        let (lo, hi) = (cells[k].0, cells[k + 1].0);
        if lo == hi {
            continue;
        }
        let f1 = f1_from(tp, fp, positives - tp);
        if best.is_none_or(|(b, _)| f1 > b) {
            best = Some((f1, lo + (hi - lo) / 2.0));
        }
    }
    match best {
        Some((f1, th)) if f1 > 0.0 => Ok(th),
        _ => Err(Error::NoSeparatingCandidate),
    }
}

/// `true` iff `score > threshold`.
pub fn classify(scores: &[f64], threshold: f64) -> Vec<bool> {
    scores.iter().map(|&s| s > threshold).collect()
}
