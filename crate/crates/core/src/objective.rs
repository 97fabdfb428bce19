//! Contrastive and temporal-consistency objectives.
//!
//! Per anchor `z` with positive `z⁺` and negatives `{z⁻}`:
//!
//! ```text
//! L_contrast = −log( exp(sim(z, z⁺)/τ) / Σ_{z_j ∈ {z⁺} ∪ {z⁻}} exp(sim(z, z_j)/τ) )
//! ```
//!
//! averaged over anchors (the anchor is not part of its own denominator).
//! `L_temporal` is the squared embedding change between consecutive steps,
//! averaged over step pairs and nodes, and `L = L_contrast + λ·L_temporal`.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::index;
use rand::Rng;

use crate::encoder::{forward_with_plan, EmbeddingFrame, ModelParams, ModelSpec, NeighborhoodPlan};
use crate::error::{Error, Result};
use crate::graph::ServiceGraph;
use crate::matrix::{dot, Matrix};
use crate::rng;
use crate::telemetry::{Label, MetricPanel};

/// Norms below this make cosine similarity 0 by convention.
pub const MIN_NORM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PositiveMode {
    /// Second stochastic view (feature masking + edge dropout) of the same cell.
    #[default]
    Augment,
    /// The same node at the next step.
    TemporalAdjacent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ObjectiveConfig {
    pub tau: f64,
    pub lambda: f64,
    pub negatives_per_anchor: usize,
    pub positive_mode: PositiveMode,
    pub aug_feature_mask_prob: f64,
    pub aug_edge_drop_prob: f64,
}

impl Default for ObjectiveConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            lambda: 0.1,
            negatives_per_anchor: 16,
            positive_mode: PositiveMode::Augment,
            aug_feature_mask_prob: 0.1,
            aug_edge_drop_prob: 0.2,
        }
    }
}

impl ObjectiveConfig {
    pub fn validate(&self) -> Result<()> {
        let prob = |p: f64| (0.0..1.0).contains(&p);
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(Error::InvalidConfig("tau must be > 0".into()));
        }
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidConfig("lambda must be >= 0".into()));
        }
        if self.negatives_per_anchor == 0 {
            return Err(Error::InvalidConfig("negatives_per_anchor must be >= 1".into()));
        }
        if !prob(self.aug_feature_mask_prob) || !prob(self.aug_edge_drop_prob) {
            return Err(Error::InvalidConfig("augmentation probabilities must be in [0, 1)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum View {
    Base,
    Augmented,
}

/// Provenance of one embedding in a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellRef {
    pub node: usize,
    pub step: usize,
    pub view: View,
}

impl CellRef {
    pub fn base(node: usize, step: usize) -> Self {
        Self { node, step, view: View::Base }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairEntry {
    pub anchor: CellRef,
    pub positive: CellRef,
    pub negatives: Vec<CellRef>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ContrastBatch {
    pub anchors: Vec<Vec<f64>>,
    pub positives: Vec<Vec<f64>>,
    pub negatives: Vec<Vec<Vec<f64>>>,
    pub provenance: Vec<PairEntry>,
}

impl ContrastBatch {
    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.anchors.len();
        if self.positives.len() != n || self.negatives.len() != n {
            return Err(Error::DimensionMismatch("batch component lengths differ".into()));
        }
        let Some(d) = self.anchors.first().map(Vec::len) else { return Ok(()) };
        for k in 0..n {
            if self.negatives[k].is_empty() {
                return Err(Error::InvalidConfig("every anchor needs at least one negative".into()));
            }
            let same = self.anchors[k].len() == d
                && self.positives[k].len() == d
                && self.negatives[k].iter().all(|v| v.len() == d);
            if !same {
                return Err(Error::DimensionMismatch("batch vectors differ in dimension".into()));
            }
        }
        for p in &self.provenance {
            if p.negatives.contains(&p.positive) {
                return Err(Error::InvalidConfig("positive reappears among negatives".into()));
            }
        }
        Ok(())
    }
}

/// `a·b / (‖a‖‖b‖)`, or 0 when either norm is below [`MIN_NORM`].
pub fn cosine_sim(a: &[f64], b: &[f64]) -> f64 {
    let (na, nb) = (libm::sqrt(dot(a, a)), libm::sqrt(dot(b, b)));
    if na < MIN_NORM || nb < MIN_NORM {
        return 0.0;
    }
    (dot(a, b) / (na * nb)).clamp(-1.0, 1.0)
}

/// Cosine similarity with `∂/∂a` and `∂/∂b` scaled by `upstream`, added into
/// `da` and `db`.
fn cosine_sim_backward(a: &[f64], b: &[f64], upstream: f64, da: &mut [f64], db: &mut [f64]) -> f64 {
    let (na, nb) = (libm::sqrt(dot(a, a)), libm::sqrt(dot(b, b)));
    if na < MIN_NORM || nb < MIN_NORM {
        return 0.0;
    }
    let inv = 1.0 / (na * nb);
    let s = dot(a, b) * inv;
    let (ca, cb) = (s / (na * na), s / (nb * nb));
    for k in 0..a.len() {
        da[k] += upstream * (b[k] * inv - ca * a[k]);
        db[k] += upstream * (a[k] * inv - cb * b[k]);
    }
    s
}

/// Gradients of the contrastive loss w.r.t. every vector of a batch.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchGrads {
    pub anchors: Vec<Vec<f64>>,
    pub positives: Vec<Vec<f64>>,
    pub negatives: Vec<Vec<Vec<f64>>>,
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidConfig("tau must be > 0".into()))
    }
}

/// Per-anchor loss from similarities, `sims[0]` being the positive.
fn anchor_term(sims: &[f64], tau: f64) -> f64 {
    let max = sims.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s / tau));
    let sum: f64 = sims.iter().map(|&s| libm::exp(s / tau - max)).sum();
    max + libm::log(sum) - sims[0] / tau
}

pub fn contrastive_loss(batch: &ContrastBatch, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    batch.validate()?;
    if batch.is_empty() {
        return Ok(0.0);
    }
    let mut sims = Vec::new();
    let mut total = 0.0;
    for k in 0..batch.len() {
        sims.clear();
        sims.push(cosine_sim(&batch.anchors[k], &batch.positives[k]));
        sims.extend(batch.negatives[k].iter().map(|n| cosine_sim(&batch.anchors[k], n)));
        total += anchor_term(&sims, tau);
    }
    Ok(total / batch.len() as f64)
}

pub fn contrastive_loss_with_grad(batch: &ContrastBatch, tau: f64) -> Result<(f64, BatchGrads)> {
    check_tau(tau)?;
    batch.validate()?;
    let mut grads = BatchGrads {
        anchors: batch.anchors.iter().map(|v| vec![0.0; v.len()]).collect(),
        positives: batch.positives.iter().map(|v| vec![0.0; v.len()]).collect(),
        negatives: batch.negatives.iter().map(|ns| ns.iter().map(|v| vec![0.0; v.len()]).collect()).collect(),
    };
    if batch.is_empty() {
        return Ok((0.0, grads));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;
    let mut sims = Vec::new();
    for k in 0..batch.len() {
        let a = &batch.anchors[k];
        sims.clear();
        sims.push(cosine_sim(a, &batch.positives[k]));
        sims.extend(batch.negatives[k].iter().map(|n| cosine_sim(a, n)));
        total += anchor_term(&sims, tau);

        // dL/dsim_j = (softmax_j − [j = 0]) / τ
        let max = sims.iter().fold(f64::NEG_INFINITY, |m, &s| m.max(s / tau));
        let weights: Vec<f64> = sims.iter().map(|&s| libm::exp(s / tau - max)).collect();
        let z: f64 = weights.iter().sum();
        let coeff = |j: usize| scale * (weights[j] / z - if j == 0 { 1.0 } else { 0.0 }) / tau;

        let (ga, gp) = (&mut grads.anchors[k], &mut grads.positives[k]);
        cosine_sim_backward(a, &batch.positives[k], coeff(0), ga, gp);
        for (j, neg) in batch.negatives[k].iter().enumerate() {
            cosine_sim_backward(a, neg, coeff(j + 1), &mut grads.anchors[k], &mut grads.negatives[k][j]);
        }
    }
    Ok((total * scale, grads))
}

fn check_frames(frames: &[EmbeddingFrame]) -> Result<()> {
    let Some(first) = frames.first() else {
        return Err(Error::InvalidConfig("temporal loss needs at least one frame".into()));
    };
    if frames.iter().any(|f| f.0.shape() != first.0.shape()) {
        return Err(Error::DimensionMismatch("frames differ in shape".into()));
    }
    Ok(())
}

/// Mean squared change of each node's embedding between consecutive frames.
pub fn temporal_loss(frames: &[EmbeddingFrame]) -> Result<f64> {
    check_frames(frames)?;
    let pairs = frames.len() - 1;
    let nodes = frames[0].num_nodes();
    if pairs == 0 || nodes == 0 {
        return Ok(0.0);
    }
    let mut sum = 0.0;
    for w in frames.windows(2) {
        for (a, b) in w[0].0.as_slice().iter().zip(w[1].0.as_slice()) {
            sum += (a - b) * (a - b);
        }
    }
    Ok(sum / (pairs * nodes) as f64)
}

pub fn temporal_loss_with_grad(frames: &[EmbeddingFrame]) -> Result<(f64, Vec<Matrix>)> {
    let loss = temporal_loss(frames)?;
    let (rows, cols) = frames[0].0.shape();
    let mut grads: Vec<Matrix> = frames.iter().map(|_| Matrix::zeros(rows, cols)).collect();
    let pairs = frames.len() - 1;
    if pairs == 0 || rows == 0 {
        return Ok((loss, grads));
    }
    let c = 2.0 / (pairs * rows) as f64;
    for t in 0..pairs {
        let (a, b) = (frames[t].0.as_slice(), frames[t + 1].0.as_slice());
        for k in 0..a.len() {
            let d = c * (a[k] - b[k]);
            grads[t].as_mut_slice()[k] += d;
            grads[t + 1].as_mut_slice()[k] -= d;
        }
    }
    Ok((loss, grads))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossComponents {
    pub contrast: f64,
    pub temporal: f64,
}

/// `L = L_contrast + λ·L_temporal`, with both components.
pub fn total_loss(batch: &ContrastBatch, frames: &[EmbeddingFrame], cfg: &ObjectiveConfig) -> Result<(f64, LossComponents)> {
    cfg.validate()?;
    let contrast = contrastive_loss(batch, cfg.tau)?;
    let temporal = temporal_loss(frames)?;
    Ok((contrast + cfg.lambda * temporal, LossComponents { contrast, temporal }))
}

/// A masked input plus neighborhoods for the augmented view of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedView {
    pub step: usize,
    pub input: Matrix,
    pub plan: NeighborhoodPlan,
}

/// All sampling decisions for one optimizer step, drawn up front so the loss
/// is a deterministic, differentiable function of the parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPlan {
    pub window: Range<usize>,
    /// Neighborhoods of the base view, one per window step.
    pub base_plans: Vec<NeighborhoodPlan>,
    /// Steps outside the window whose labeled anomalies serve as negatives,
    /// encoded in the base view after the window frames.
    pub recalled: Vec<usize>,
    pub recalled_plans: Vec<NeighborhoodPlan>,
    pub augmented: Vec<AugmentedView>,
    pub pairs: Vec<PairEntry>,
}

impl StepPlan {
    /// Position of the base frame of `step` (window steps first).
    pub fn base_index(&self, step: usize) -> Option<usize> {
        if self.window.contains(&step) {
            Some(step - self.window.start)
        } else {
            self.recalled.iter().position(|&s| s == step).map(|k| self.window.len() + k)
        }
    }

    /// Index of the augmented view of `step`, if one was drawn.
    pub fn augmented_index(&self, step: usize) -> Option<usize> {
        self.augmented.iter().position(|v| v.step == step)
    }
}

/// Most steps outside the window recalled per optimizer step for their
/// labeled anomalies.
pub const RECALLED_STEPS: usize = 4;

/// Forward seed of the base view of `step` under a step seed.
pub fn base_view_seed(seed: u64, step: usize) -> u64 {
    rng::derive(rng::derive(seed, rng::TAG_FORWARD), step as u64)
}

/// Sample anchors, positives and negatives for a window.
///
/// Anchors are cells not labeled anomalous (in temporal-adjacent mode the
/// next-step positive must not be anomalous either). Negatives are drawn with
/// replacement from the other nodes at the anchor's step plus every labeled
/// anomaly in the window and in `recalled`, anomalous cells at double
/// weight. Unlabeled and normal cells are treated identically.
pub fn plan_pairs(
    panel: &MetricPanel,
    window: Range<usize>,
    recalled: &[usize],
    cfg: &ObjectiveConfig,
    anchors: usize,
    seed: u64,
) -> Result<Vec<PairEntry>> {
    cfg.validate()?;
    let n = panel.num_nodes();
    if n < 2 {
        return Err(Error::InsufficientNegatives);
    }
    if window.is_empty() || window.end > panel.num_steps() {
        return Err(Error::InvalidConfig("pair window outside panel".into()));
    }
    let temporal = cfg.positive_mode == PositiveMode::TemporalAdjacent;
    let mut eligible = Vec::new();
    for t in window.clone() {
        if temporal && t + 1 >= window.end {
            continue;
        }
        for node in 0..n {
            let ok = panel.label(node, t) != Label::Anomaly && !(temporal && panel.label(node, t + 1) == Label::Anomaly);
            if ok {
                eligible.push(CellRef::base(node, t));
            }
        }
    }

    let mut rng = rng::stream(seed, rng::TAG_PAIRS);
    let mut picks: Vec<usize> = index::sample(&mut rng, eligible.len(), anchors.min(eligible.len())).into_vec();
    picks.sort_unstable();

    // labeled anomalies anywhere in the window join every pool
    let flagged: Vec<CellRef> = window
        .clone()
        .chain(recalled.iter().copied())
        .flat_map(|t| (0..n).map(move |j| (j, t)))
        .filter(|&(j, t)| panel.label(j, t) == Label::Anomaly)
        .map(|(j, t)| CellRef::base(j, t))
        .collect();
    let mut out = Vec::with_capacity(picks.len());
    let mut pool: Vec<(CellRef, u32)> = Vec::with_capacity(n + flagged.len());
    for k in picks {
        let anchor = eligible[k];
        let positive = if temporal {
            CellRef::base(anchor.node, anchor.step + 1)
        } else {
            CellRef { view: View::Augmented, ..anchor }
        };
        pool.clear();
        pool.extend((0..n).filter(|&j| j != anchor.node && panel.label(j, anchor.step) != Label::Anomaly).map(|j| (CellRef::base(j, anchor.step), 1)));
        pool.extend(flagged.iter().map(|&c| (c, 2)));
        let total: u32 = pool.iter().map(|p| p.1).sum();
        let negatives = (0..cfg.negatives_per_anchor)
            .map(|_| {
                let mut u = rng.random_range(0..total);
                let mut j = 0;
                while u >= pool[j].1 {
                    u -= pool[j].1;
                    j += 1;
                }
                pool[j].0
            })
            .collect();
        out.push(PairEntry { anchor, positive, negatives });
    }
    Ok(out)
}

/// Draw every stochastic choice of one optimizer step.
#[allow(clippy::too_many_arguments)]
pub fn plan_step(
    panel: &MetricPanel,
    g: &ServiceGraph,
    window: Range<usize>,
    pool: Range<usize>,
    cfg: &ObjectiveConfig,
    spec: &ModelSpec,
    anchors: usize,
    seed: u64,
) -> Result<StepPlan> {
    let layers = spec.dims.gcn_layers;
    let candidates: Vec<usize> = pool
        .clone()
        .filter(|t| !window.contains(t) && *t < panel.num_steps())
        .filter(|&t| (0..panel.num_nodes()).any(|n| panel.label(n, t) == Label::Anomaly))
        .collect();
    let mut recall_rng = rng::stream(seed, rng::TAG_RECALL);
    let mut recalled: Vec<usize> = index::sample(&mut recall_rng, candidates.len(), RECALLED_STEPS.min(candidates.len()))
        .into_iter()
        .map(|k| candidates[k])
        .collect();
    recalled.sort_unstable();
    let pairs = plan_pairs(panel, window.clone(), &recalled, cfg, anchors, seed)?;
    let sample = |t: usize| NeighborhoodPlan::sample(g, spec.neighborhood_cap, layers, base_view_seed(seed, t));
    let base_plans = window.clone().map(sample).collect::<Result<Vec<_>>>()?;
    let recalled_plans = recalled.iter().map(|&t| sample(t)).collect::<Result<Vec<_>>>()?;

    let mut augmented = Vec::new();
    if cfg.positive_mode == PositiveMode::Augment {
        let mut steps: Vec<usize> = pairs.iter().map(|p| p.anchor.step).collect();
        steps.dedup();
        let aug_seed = rng::derive(seed, rng::TAG_AUG);
        for t in steps {
            let view_seed = rng::derive(aug_seed, t as u64);
            let mut view_rng = rng::rng_from(view_seed);
            let mut input = panel.step_matrix(t);
            if cfg.aug_feature_mask_prob > 0.0 {
                let d = input.cols();
                for r in 0..input.rows() {
                    let row = input.row_mut(r);
                    let keep = row.to_vec();
                    for v in row.iter_mut() {
                        if view_rng.random::<f64>() < cfg.aug_feature_mask_prob {
                            *v = 0.0;
                        }
                    }
                    // an all-zero row would sit on the relu kink at zero bias
                    if d > 0 && row.iter().zip(&keep).all(|(v, k)| *v == 0.0 && *k != 0.0) {
                        let j = view_rng.random_range(0..d);
                        row[j] = keep[j];
                    }
                }
            }
            let mut plan = NeighborhoodPlan::sample(g, spec.neighborhood_cap, layers, rng::derive(view_seed, 1))?;
            plan.drop_edges(cfg.aug_edge_drop_prob, &mut view_rng);
            augmented.push(AugmentedView { step: t, input, plan });
        }
    }
    Ok(StepPlan { window, base_plans, recalled, recalled_plans, augmented, pairs })
}

/// Gather batch vectors from base and augmented frames.
pub(crate) fn gather_batch(plan: &StepPlan, base: &[&Matrix], aug: &[&Matrix]) -> ContrastBatch {
    let lookup = |c: &CellRef| -> Vec<f64> {
        match c.view {
            View::Base => base[plan.base_index(c.step).unwrap()].row(c.node).to_vec(),
            // plan_step draws a view for every anchor step.
            View::Augmented => aug[plan.augmented_index(c.step).unwrap()].row(c.node).to_vec(),
        }
    };
    ContrastBatch {
        anchors: plan.pairs.iter().map(|p| lookup(&p.anchor)).collect(),
        positives: plan.pairs.iter().map(|p| lookup(&p.positive)).collect(),
        negatives: plan.pairs.iter().map(|p| p.negatives.iter().map(&lookup).collect()).collect(),
        provenance: plan.pairs.clone(),
    }
}

/// Build a contrastive batch for `window`, whose base-view frames are
/// `frames` (one per window step). Augmented positives are re-encoded
/// through the encoder.
#[allow(clippy::too_many_arguments)]
pub fn build_pairs(
    panel: &MetricPanel,
    window: Range<usize>,
    frames: &[EmbeddingFrame],
    g: &ServiceGraph,
    cfg: &ObjectiveConfig,
    params: &ModelParams,
    spec: &ModelSpec,
    anchors: usize,
    seed: u64,
) -> Result<ContrastBatch> {
    if frames.len() != window.len() {
        return Err(Error::DimensionMismatch("one frame per window step is required".into()));
    }
    let plan = plan_step(panel, g, window.clone(), window, cfg, spec, anchors, seed)?;
    let aug_frames = plan
        .augmented
        .iter()
        .map(|v| forward_with_plan(&v.input, g, params, v.plan.clone()))
        .collect::<Result<Vec<_>>>()?;
    let base: Vec<&Matrix> = frames.iter().map(|f| &f.0).collect();
    let aug: Vec<&Matrix> = aug_frames.iter().map(|f| &f.0).collect();
    Ok(gather_batch(&plan, &base, &aug))
}
