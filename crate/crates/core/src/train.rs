//! Optimization of the encoder against `L_contrast + λ·L_temporal`.
//!
//! Gradients are hand-derived reverse mode through every layer. Sampling
//! (anchors, negatives, augmentation masks, neighborhoods) is frozen per
//! optimizer step in a [`StepPlan`], so the step loss is a deterministic
//! function of the parameters and can be checked against finite differences.

use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::encoder::{backward, forward_cached, init_params, EmbeddingFrame, ForwardCache, ModelParams, ModelSpec};
use crate::error::{Error, Result};
use crate::graph::ServiceGraph;
use crate::matrix::Matrix;
use crate::objective::{
    contrastive_loss_with_grad, gather_batch, plan_step, temporal_loss_with_grad, LossComponents, ObjectiveConfig, StepPlan, View,
};
use crate::rng;
use crate::telemetry::MetricPanel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum OptimizerKind {
    /// SGD with heavy-ball momentum 0.9.
    SgdMomentum,
    /// Adam with β₁ = 0.9, β₂ = 0.999, ε = 1e-8.
    #[default]
    Adam,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    /// Consecutive steps per optimizer step.
    pub window_length: usize,
    pub anchors_per_step: usize,
    pub seed: u64,
    /// Verify analytic gradients against finite differences on the first step.
    pub grad_check: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 10,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            window_length: 8,
            anchors_per_step: 64,
            seed: 0,
            grad_check: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be >= 1".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.window_length < 2 {
            return Err(Error::InvalidConfig("window_length must be >= 2".into()));
        }
        if self.anchors_per_step == 0 {
            return Err(Error::InvalidConfig("anchors_per_step must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub total: f64,
    pub contrast: f64,
    pub temporal: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }
}

/// Loss, components and parameter gradients for one planned step.
#[derive(Debug, Clone)]
pub struct StepEvaluation {
    pub loss: f64,
    pub components: LossComponents,
    pub grads: ModelParams,
}

struct StepForward {
    base: Vec<ForwardCache>,
    aug: Vec<ForwardCache>,
}

fn run_forward(params: &ModelParams, g: &ServiceGraph, panel: &MetricPanel, plan: &StepPlan) -> Result<StepForward> {
    let base = plan
        .window
        .clone()
        .zip(&plan.base_plans)
        .chain(plan.recalled.iter().copied().zip(&plan.recalled_plans))
        .map(|(t, nb)| forward_cached(&panel.step_matrix(t), g, params, nb.clone()))
        .collect::<Result<Vec<_>>>()?;
    let aug = plan
        .augmented
        .iter()
        .map(|v| forward_cached(&v.input, g, params, v.plan.clone()))
        .collect::<Result<Vec<_>>>()?;
    Ok(StepForward { base, aug })
}

fn losses(fwd: &StepForward, plan: &StepPlan, cfg: &ObjectiveConfig, with_grad: bool) -> Result<(f64, LossComponents, Vec<Matrix>, Vec<Matrix>)> {
    let base_out: Vec<&Matrix> = fwd.base.iter().map(|c| &c.output).collect();
    let aug_out: Vec<&Matrix> = fwd.aug.iter().map(|c| &c.output).collect();
    let batch = gather_batch(plan, &base_out, &aug_out);
    let frames: Vec<EmbeddingFrame> = base_out[..plan.window.len()].iter().map(|m| EmbeddingFrame((*m).clone())).collect();
    let (contrast, bg) = contrastive_loss_with_grad(&batch, cfg.tau)?;
    let (temporal, tg) = temporal_loss_with_grad(&frames)?;
    let loss = contrast + cfg.lambda * temporal;
    let components = LossComponents { contrast, temporal };
    if !with_grad {
        return Ok((loss, components, Vec::new(), Vec::new()));
    }

    let mut d_base: Vec<Matrix> = tg;
    if cfg.lambda != 1.0 {
        d_base.iter_mut().for_each(|m| m.scale(cfg.lambda));
    }
    d_base.extend(plan.recalled.iter().map(|_| Matrix::zeros(base_out[0].rows(), base_out[0].cols())));
    let mut d_aug: Vec<Matrix> = fwd.aug.iter().map(|c| Matrix::zeros(c.output.rows(), c.output.cols())).collect();
    let mut scatter = |cell: &crate::objective::CellRef, g: &[f64]| {
        let row = match cell.view {
            View::Base => d_base[plan.base_index(cell.step).unwrap()].row_mut(cell.node),
            View::Augmented => d_aug[plan.augmented_index(cell.step).unwrap()].row_mut(cell.node),
        };
        for (r, v) in row.iter_mut().zip(g) {
            *r += v;
        }
    };
    for (k, entry) in plan.pairs.iter().enumerate() {
        scatter(&entry.anchor, &bg.anchors[k]);
        scatter(&entry.positive, &bg.positives[k]);
        for (j, neg) in entry.negatives.iter().enumerate() {
            scatter(neg, &bg.negatives[k][j]);
        }
    }
    Ok((loss, components, d_base, d_aug))
}

/// Step loss only; the objective the gradient differentiates.
pub fn step_loss(params: &ModelParams, g: &ServiceGraph, panel: &MetricPanel, plan: &StepPlan, cfg: &ObjectiveConfig) -> Result<(f64, LossComponents)> {
    let fwd = run_forward(params, g, panel, plan)?;
    let (loss, comps, _, _) = losses(&fwd, plan, cfg, false)?;
    Ok((loss, comps))
}

/// Analytic gradient of the step loss with respect to every parameter.
pub fn grad(params: &ModelParams, g: &ServiceGraph, panel: &MetricPanel, plan: &StepPlan, cfg: &ObjectiveConfig) -> Result<StepEvaluation> {
    let fwd = run_forward(params, g, panel, plan)?;
    let (loss, components, d_base, d_aug) = losses(&fwd, plan, cfg, true)?;
    let mut grads = params.zeros_like();
    for (cache, d) in fwd.base.iter().zip(&d_base).chain(fwd.aug.iter().zip(&d_aug)) {
        backward(cache, g, params, d, &mut grads);
    }
    if let Some((name, _)) = grads.blocks().into_iter().find(|(_, b)| b.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFiniteGradient(name));
    }
    Ok(StepEvaluation { loss, components, grads })
}

/// Relative error between two gradient blocks, `‖a − b‖ / max(‖a‖, ‖b‖)`.
/// Below a norm of 1e-6 the absolute difference is reported instead.
pub fn block_relative_error(analytic: &[f64], numeric: &[f64]) -> f64 {
    let norm = |v: &[f64]| libm::sqrt(v.iter().map(|x| x * x).sum::<f64>());
    let diff = libm::sqrt(analytic.iter().zip(numeric).map(|(a, b)| (a - b) * (a - b)).sum::<f64>());
    let scale = norm(analytic).max(norm(numeric));
    if scale < 1e-6 {
        diff
    } else {
        diff / scale
    }
}

/// Outcome of the finite-difference check for one parameter block.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCheck {
    pub block: String,
    pub rel_error: f64,
    /// Coordinates compared.
    pub probed: usize,
    /// Coordinates skipped because the loss has a relu kink there.
    pub kinks: usize,
}

/// One-sided probe width for kink detection.
const KINK_PROBE: f64 = 1e-8;

fn is_kink(plus: f64, center: f64, minus: f64) -> bool {
    let (fwd, bwd) = ((plus - center) / KINK_PROBE, (center - minus) / KINK_PROBE);
    (fwd - bwd).abs() > 1e-6 * (1.0 + fwd.abs().max(bwd.abs()))
}

/// Central-difference check of [`grad`], one [`BlockCheck`] per block.
///
/// `coords_per_block` limits the number of probed coordinates per block
/// (chosen by `seed`); `None` probes every coordinate. A coordinate whose
/// forward and backward one-sided slopes disagree sits on a relu kink (an
/// exactly zero pre-activation, which zero-initialized biases make common)
/// and is left out of the comparison, as is one whose difference quotient
/// never settles (see `central_difference`).
#[allow(clippy::too_many_arguments)]
pub fn finite_difference_check(
    params: &ModelParams,
    g: &ServiceGraph,
    panel: &MetricPanel,
    plan: &StepPlan,
    cfg: &ObjectiveConfig,
    h: f64,
    coords_per_block: Option<usize>,
    seed: u64,
) -> Result<Vec<BlockCheck>> {
    let analytic = grad(params, g, panel, plan, cfg)?.grads;
    let center = step_loss(params, g, panel, plan, cfg)?.0;
    let names: Vec<String> = analytic.blocks().into_iter().map(|(n, _)| n).collect();
    let mut rng = rng::rng_from(seed);
    let mut out = Vec::with_capacity(names.len());
    let loss_at = |b: usize, c: usize, delta: f64| -> Result<f64> {
        let mut probe = params.clone();
        probe.blocks_mut()[b][c] += delta;
        Ok(step_loss(&probe, g, panel, plan, cfg)?.0)
    };
    for (b, block) in names.into_iter().enumerate() {
        let len = analytic.blocks()[b].1.len();
        let coords: Vec<usize> = match coords_per_block {
            Some(k) if k < len => (0..k).map(|_| rng.random_range(0..len)).collect(),
            _ => (0..len).collect(),
        };
        let mut numeric = Vec::with_capacity(coords.len());
        let mut exact = Vec::with_capacity(coords.len());
        let mut kinks = 0;
        for &c in &coords {
            if is_kink(loss_at(b, c, KINK_PROBE)?, center, loss_at(b, c, -KINK_PROBE)?) {
                kinks += 1;
                continue;
            }
            match central_difference(&loss_at, b, c, h)? {
                Some(d) => {
                    numeric.push(d);
                    exact.push(analytic.blocks()[b].1[c]);
                }
                None => kinks += 1,
            }
        }
        out.push(BlockCheck { block, rel_error: block_relative_error(&exact, &numeric), probed: exact.len(), kinks });
    }
    Ok(out)
}

/// Central difference at `h`, cross-checked against `h / 4`. The two agree
/// to O(h²) on a smooth stretch; if they do not, a kink lies within `h` and
/// the width is cut by 10 (up to three times). `None` if it never settles.
fn central_difference(loss_at: &dyn Fn(usize, usize, f64) -> Result<f64>, b: usize, c: usize, h: f64) -> Result<Option<f64>> {
    let diff = |h: f64| -> Result<f64> { Ok((loss_at(b, c, h)? - loss_at(b, c, -h)?) / (2.0 * h)) };
    let mut h = h;
    for _ in 0..4 {
        let (coarse, fine) = (diff(h)?, diff(h / 4.0)?);
        if (coarse - fine).abs() <= 1e-7 + 1e-5 * coarse.abs().max(fine.abs()) {
            return Ok(Some(coarse));
        }
        h /= 10.0;
    }
    Ok(None)
}

pub const GRAD_CHECK_STEP: f64 = 1e-5;
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-4;

/// First-order optimizer state.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    learning_rate: f64,
    first: ModelParams,
    second: ModelParams,
    steps: i32,
}

impl Optimizer {
    const MOMENTUM: f64 = 0.9;
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(kind: OptimizerKind, learning_rate: f64, params: &ModelParams) -> Self {
        Self { kind, learning_rate, first: params.zeros_like(), second: params.zeros_like(), steps: 0 }
    }

    pub fn step(&mut self, params: &mut ModelParams, grads: &ModelParams) {
        self.steps += 1;
        let lr = self.learning_rate;
        let grad_blocks = grads.blocks();
        match self.kind {
            OptimizerKind::SgdMomentum => {
                for ((p, m), (_, g)) in params.blocks_mut().into_iter().zip(self.first.blocks_mut()).zip(grad_blocks) {
                    for k in 0..p.len() {
                        m[k] = Self::MOMENTUM * m[k] + g[k];
                        p[k] -= lr * m[k];
                    }
                }
            }
            OptimizerKind::Adam => {
                let c1 = 1.0 - libm::pow(Self::BETA1, self.steps as f64);
                let c2 = 1.0 - libm::pow(Self::BETA2, self.steps as f64);
                let blocks = params.blocks_mut().into_iter().zip(self.first.blocks_mut()).zip(self.second.blocks_mut());
                for (((p, m), v), (_, g)) in blocks.zip(grad_blocks) {
                    for k in 0..p.len() {
                        m[k] = Self::BETA1 * m[k] + (1.0 - Self::BETA1) * g[k];
                        v[k] = Self::BETA2 * v[k] + (1.0 - Self::BETA2) * g[k] * g[k];
                        let (mh, vh) = (m[k] / c1, v[k] / c2);
                        p[k] -= lr * mh / (libm::sqrt(vh) + Self::EPS);
                    }
                }
            }
        }
    }
}

/// Window start positions tiling `steps` with stride `len`.
pub fn window_starts(steps: &Range<usize>, len: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut s = steps.start;
    while s + len <= steps.end {
        out.push(s);
        s += len;
    }
    out
}

/// Train with no wall clock (history seconds are 0).
pub fn train_model(
    panel: &MetricPanel,
    g: &ServiceGraph,
    spec: &ModelSpec,
    obj: &ObjectiveConfig,
    cfg: &TrainConfig,
    train_steps: Range<usize>,
) -> Result<(ModelParams, TrainHistory)> {
    train_model_with_clock(panel, g, spec, obj, cfg, train_steps, &mut || 0.0)
}

/// Train from a fresh initialization; `clock` returns seconds and is only
/// used to fill [`EpochRecord::seconds`].
pub fn train_model_with_clock(
    panel: &MetricPanel,
    g: &ServiceGraph,
    spec: &ModelSpec,
    obj: &ObjectiveConfig,
    cfg: &TrainConfig,
    train_steps: Range<usize>,
    clock: &mut dyn FnMut() -> f64,
) -> Result<(ModelParams, TrainHistory)> {
    let params = init_params(spec.dims, spec.activation, cfg.seed)?;
    train_from(params, panel, g, spec, obj, cfg, train_steps, clock)
}

#[allow(clippy::too_many_arguments)]
pub fn train_from(
    mut params: ModelParams,
    panel: &MetricPanel,
    g: &ServiceGraph,
    spec: &ModelSpec,
    obj: &ObjectiveConfig,
    cfg: &TrainConfig,
    train_steps: Range<usize>,
    clock: &mut dyn FnMut() -> f64,
) -> Result<(ModelParams, TrainHistory)> {
    cfg.validate()?;
    obj.validate()?;
    if panel.num_nodes() != g.len() || panel.d_in() != spec.dims.d_in {
        return Err(Error::DimensionMismatch("panel does not match graph or model input width".into()));
    }
    if train_steps.end > panel.num_steps() {
        return Err(Error::InvalidConfig("training steps outside panel".into()));
    }
    let starts = window_starts(&train_steps, cfg.window_length);
    if starts.is_empty() {
        return Err(Error::InvalidConfig("training range shorter than one window".into()));
    }

    let mut opt = Optimizer::new(cfg.optimizer, cfg.learning_rate, &params);
    let mut history = TrainHistory::default();
    for epoch in 0..cfg.epochs {
        let t0 = clock();
        let epoch_seed = rng::derive(rng::derive(cfg.seed, rng::TAG_EPOCH), epoch as u64);
        let mut order = starts.clone();
        order.shuffle(&mut rng::rng_from(epoch_seed));
        let (mut total, mut contrast, mut temporal) = (0.0, 0.0, 0.0);
        for (step, &start) in order.iter().enumerate() {
            let step_seed = rng::derive(epoch_seed, step as u64 + 1);
            let window = start..start + cfg.window_length;
            let plan = plan_step(panel, g, window, train_steps.clone(), obj, spec, cfg.anchors_per_step, step_seed)?;
            if cfg.grad_check && epoch == 0 && step == 0 {
                let report = finite_difference_check(&params, g, panel, &plan, obj, GRAD_CHECK_STEP, Some(8), step_seed)?;
                if let Some(bad) = report.into_iter().find(|r| r.rel_error.is_nan() || r.rel_error >= GRAD_CHECK_TOLERANCE) {
                    return Err(Error::GradientCheck { block: bad.block, rel_error: bad.rel_error });
                }
            }
            let eval = match grad(&params, g, panel, &plan, obj) {
                Err(Error::NonFiniteNode { .. }) => return Err(Error::NonFiniteLoss { epoch, step }),
                other => other?,
            };
            if !eval.loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch, step });
            }
            opt.step(&mut params, &eval.grads);
            total += eval.loss;
            contrast += eval.components.contrast;
            temporal += eval.components.temporal;
        }
        let n = order.len() as f64;
        history.epochs.push(EpochRecord { total: total / n, contrast: contrast / n, temporal: temporal / n, seconds: clock() - t0 });
    }
    Ok((params, history))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoder::{Activation, ModelDims};
    use crate::graph::{build_graph, DirectionMode};
    use crate::telemetry::Label;
    use alloc::vec;
    use rand::SeedableRng;

    pub(crate) fn toy(nodes: usize, steps: usize, seed: u64) -> (MetricPanel, ServiceGraph) {
        let ids: Vec<String> = (0..nodes).map(|i| alloc::format!("s{i}")).collect();
        let mut edges = Vec::new();
        for i in 1..nodes {
            edges.push((ids[i - 1].clone(), ids[i].clone()));
        }
        edges.push((ids[0].clone(), ids[nodes - 1].clone()));
        let g = build_graph(&edges, DirectionMode::Symmetrize).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = 3;
        let mut feats = vec![0.0; nodes * steps * d];
        for n in 0..nodes {
            for t in 0..steps {
                for f in 0..d {
                    let wave = libm::sin(t as f64 * 0.3 + n as f64 + f as f64);
                    feats[(n * steps + t) * d + f] = wave + 0.3 * rng.random_range(-1.0..1.0);
                }
            }
        }
        let names = (0..d).map(|k| alloc::format!("f{k}")).collect();
        let p = MetricPanel::new(ids, names, steps, 0, 60, feats, vec![Label::Unlabeled; nodes * steps]).unwrap();
        (p, g)
    }

    /// Glorot weights plus small random biases, away from relu kinks.
    pub(crate) fn generic_params(sp: &ModelSpec, seed: u64) -> ModelParams {
        let mut p = init_params(sp.dims, sp.activation, seed).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0xb1a5);
        for l in &mut p.embed {
            l.bias.iter_mut().for_each(|b| *b = rng.random_range(-0.1..0.1));
        }
        p
    }

    fn spec(layers: usize) -> ModelSpec {
        ModelSpec { dims: ModelDims { d_in: 3, d_hid: 5, d_emb: 4, gcn_layers: layers }, activation: Activation::Relu, neighborhood_cap: 10 }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let (mut panel, g) = toy(5, 12, 1);
        // anomalies inside and outside the window feed the negative pool
        for (n, t) in [(1, 0), (3, 4), (2, 10), (0, 11)] {
            panel.set_label(n, t, Label::Anomaly);
        }
        let sp = spec(2);
        let obj = ObjectiveConfig { negatives_per_anchor: 4, tau: 0.5, lambda: 0.3, ..Default::default() };
        for seed in 0..3 {
            let params = generic_params(&sp, seed);
            let plan = plan_step(&panel, &g, 2..8, 0..12, &obj, &sp, 10, seed).unwrap();
            assert!(!plan.recalled.is_empty());
            let report = finite_difference_check(&params, &g, &panel, &plan, &obj, 1e-5, None, 0).unwrap();
            for r in report {
                assert!(r.rel_error < 1e-4, "{r:?}");
                assert_eq!(r.kinks, 0);
            }
        }
    }

    #[test]
    fn kinks_at_zero_bias_init_are_skipped() {
        let (panel, g) = toy(5, 12, 1);
        let sp = spec(2);
        let obj = ObjectiveConfig { negatives_per_anchor: 4, tau: 0.5, lambda: 0.3, ..Default::default() };
        let params = init_params(sp.dims, sp.activation, 1).unwrap();
        let plan = plan_step(&panel, &g, 2..8, 0..12, &obj, &sp, 10, 1).unwrap();
        let report = finite_difference_check(&params, &g, &panel, &plan, &obj, 1e-5, None, 0).unwrap();
        assert!(report.iter().any(|r| r.kinks > 0));
        for r in report {
            assert!(r.rel_error < 1e-4, "{r:?}");
        }
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let (panel, g) = toy(5, 12, 2);
        let sp = spec(2);
        let obj = ObjectiveConfig::default();
        let params = init_params(sp.dims, sp.activation, 3).unwrap();
        let plan = plan_step(&panel, &g, 0..8, 0..12, &obj, &sp, 16, 1).unwrap();
        let ev = grad(&params, &g, &panel, &plan, &obj).unwrap();
        for kind in [OptimizerKind::Adam, OptimizerKind::SgdMomentum] {
            let mut p = params.clone();
            Optimizer::new(kind, 0.0, &p).step(&mut p, &ev.grads);
            assert_eq!(p, params);
        }
    }

    #[test]
    fn one_epoch_gives_one_record_and_zero_epochs_fail() {
        let (panel, g) = toy(5, 30, 3);
        let cfg = TrainConfig { epochs: 1, ..Default::default() };
        let (_, hist) = train_model(&panel, &g, &spec(1), &ObjectiveConfig::default(), &cfg, 0..24).unwrap();
        assert_eq!(hist.len(), 1);
        let bad = TrainConfig { epochs: 0, ..Default::default() };
        assert!(train_model(&panel, &g, &spec(1), &ObjectiveConfig::default(), &bad, 0..24).is_err());
        let short = TrainConfig { window_length: 1, ..Default::default() };
        assert!(train_model(&panel, &g, &spec(1), &ObjectiveConfig::default(), &short, 0..24).is_err());
    }

    #[test]
    fn training_is_bit_reproducible() {
        let (panel, g) = toy(5, 40, 4);
        let cfg = TrainConfig { epochs: 2, seed: 9, ..Default::default() };
        let a = train_model(&panel, &g, &spec(2), &ObjectiveConfig::default(), &cfg, 0..32).unwrap();
        let b = train_model(&panel, &g, &spec(2), &ObjectiveConfig::default(), &cfg, 0..32).unwrap();
        assert_eq!(a.0, b.0);
        assert_eq!(a.1, b.1);
    }

    #[test]
    fn grad_check_flag_passes_on_healthy_model() {
        let (panel, g) = toy(5, 20, 5);
        let cfg = TrainConfig { epochs: 1, grad_check: true, ..Default::default() };
        train_model(&panel, &g, &spec(2), &ObjectiveConfig::default(), &cfg, 0..16).unwrap();
    }

    #[test]
    fn relative_error_floor() {
        assert_eq!(block_relative_error(&[1.0, 0.0], &[1.0, 0.0]), 0.0);
        assert!((block_relative_error(&[2.0], &[1.0]) - 0.5).abs() < 1e-15);
        assert!(block_relative_error(&[1e-9], &[2e-9]) < 1e-8);
    }
}
