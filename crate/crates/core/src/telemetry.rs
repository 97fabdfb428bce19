//! Per-service monitoring panels: a `[node × step × feature]` tensor with
//! per-cell ground-truth labels, plus standardization, noise injection and
//! label sparsification.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use rand::seq::index;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng;

/// Canonical feature order.
pub const CANONICAL_FEATURES: [&str; 7] = ["cpu", "mem", "io", "net_in", "net_out", "latency", "error_rate"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Unlabeled,
    Normal,
    Anomaly,
}

impl Label {
    pub fn as_i8(self) -> i8 {
        match self {
            Label::Unlabeled => -1,
            Label::Normal => 0,
            Label::Anomaly => 1,
        }
    }

    pub fn from_i8(v: i8) -> Option<Self> {
        match v {
            -1 => Some(Label::Unlabeled),
            0 => Some(Label::Normal),
            1 => Some(Label::Anomaly),
            _ => None,
        }
    }

    pub fn from_flag(anomalous: bool) -> Self {
        if anomalous {
            Label::Anomaly
        } else {
            Label::Normal
        }
    }

    pub fn is_labeled(self) -> bool {
        self != Label::Unlabeled
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricPanel {
    node_ids: Vec<String>,
    feature_names: Vec<String>,
    num_steps: usize,
    start_time: i64,
    step_seconds: i64,
    features: Vec<f64>,
    labels: Vec<Label>,
}

impl MetricPanel {
    /// `features` is node-major: `[node][step][feature]`; `labels` is `[node][step]`.
    pub fn new(
        node_ids: Vec<String>,
        feature_names: Vec<String>,
        num_steps: usize,
        start_time: i64,
        step_seconds: i64,
        features: Vec<f64>,
        labels: Vec<Label>,
    ) -> Result<Self> {
        let (n, d) = (node_ids.len(), feature_names.len());
        if features.len() != n * num_steps * d || labels.len() != n * num_steps {
            return Err(Error::DimensionMismatch("panel tensor sizes".into()));
        }
        if let Some(pos) = features.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteNode { stage: "panel", node: pos / (num_steps * d).max(1) });
        }
        Ok(Self { node_ids, feature_names, num_steps, start_time, step_seconds, features, labels })
    }

    pub fn num_nodes(&self) -> usize {
        self.node_ids.len()
    }

    pub fn num_steps(&self) -> usize {
        self.num_steps
    }

    pub fn d_in(&self) -> usize {
        self.feature_names.len()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn step_seconds(&self) -> i64 {
        self.step_seconds
    }

    pub fn start_time(&self) -> i64 {
        self.start_time
    }

    pub fn timestamp(&self, step: usize) -> i64 {
        self.start_time + step as i64 * self.step_seconds
    }

    #[inline]
    fn cell(&self, node: usize, step: usize) -> usize {
        node * self.num_steps + step
    }

    #[inline]
    pub fn features_at(&self, node: usize, step: usize) -> &[f64] {
        let d = self.d_in();
        let c = self.cell(node, step);
        &self.features[c * d..(c + 1) * d]
    }

    #[inline]
    pub fn label(&self, node: usize, step: usize) -> Label {
        self.labels[self.cell(node, step)]
    }

    pub fn set_label(&mut self, node: usize, step: usize, label: Label) {
        let c = self.cell(node, step);
        self.labels[c] = label;
    }

    pub fn raw_features(&self) -> &[f64] {
        &self.features
    }

    pub fn raw_labels(&self) -> &[Label] {
        &self.labels
    }

    /// `[num_nodes × d_in]` slice at one time step.
    pub fn step_matrix(&self, step: usize) -> Matrix {
        let d = self.d_in();
        let mut m = Matrix::zeros(self.num_nodes(), d);
        for node in 0..self.num_nodes() {
            m.row_mut(node).copy_from_slice(self.features_at(node, step));
        }
        m
    }

    /// Labels of all nodes at one step.
    pub fn step_labels(&self, step: usize) -> Vec<Label> {
        (0..self.num_nodes()).map(|n| self.label(n, step)).collect()
    }

    /// Fraction of labeled cells that are anomalous.
    pub fn anomaly_rate(&self) -> f64 {
        let labeled = self.labels.iter().filter(|l| l.is_labeled()).count();
        if labeled == 0 {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l == Label::Anomaly).count() as f64 / labeled as f64
    }

    pub fn with_labels(&self, labels: Vec<Label>) -> Result<Self> {
        if labels.len() != self.labels.len() {
            return Err(Error::DimensionMismatch("label tensor size".into()));
        }
        Ok(Self { labels, ..self.clone() })
    }

    fn map_features(&self, features: Vec<f64>) -> Self {
        Self { features, ..self.clone() }
    }

    fn check_range(&self, steps: &Range<usize>) -> Result<()> {
        if steps.start >= steps.end || steps.end > self.num_steps {
            return Err(Error::InvalidConfig(alloc::format!(
                "step range {}..{} outside panel of {} steps",
                steps.start,
                steps.end,
                self.num_steps
            )));
        }
        Ok(())
    }
}

/// One row of a metrics file.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRecord {
    pub timestamp: i64,
    pub service: String,
    pub values: Vec<f64>,
    pub label: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IngestReport {
    /// Cells filled by carry-forward or node means.
    pub filled: usize,
    /// Rows dropped because they held non-finite values.
    pub rejected: usize,
}

/// Assemble records onto a regular time grid.
///
/// Node order is `nodes` when given (unknown services are an error), else the
/// lexicographic order of service ids. The step is `step_seconds` when given,
/// else the smallest positive gap between distinct timestamps.
pub fn assemble_panel(
    records: &[MetricRecord],
    nodes: Option<&[String]>,
    feature_names: &[String],
    step_seconds: Option<i64>,
) -> Result<(MetricPanel, IngestReport)> {
    let d = feature_names.len();
    let mut report = IngestReport::default();
    let mut accepted: Vec<&MetricRecord> = Vec::with_capacity(records.len());
    for r in records {
        if r.values.len() != d {
            return Err(Error::DimensionMismatch(alloc::format!(
                "record for `{}` has {} values, expected {d}",
                r.service,
                r.values.len()
            )));
        }
        if r.values.iter().all(|v| v.is_finite()) {
            accepted.push(r);
        } else {
            report.rejected += 1;
        }
    }

    let node_ids: Vec<String> = match nodes {
        Some(list) => {
            for r in &accepted {
                if !list.contains(&r.service) {
                    return Err(Error::UnknownService(r.service.clone()));
                }
            }
            list.to_vec()
        }
        None => {
            let mut ids: Vec<String> = accepted.iter().map(|r| r.service.clone()).collect();
            ids.sort();
            ids.dedup();
            ids
        }
    };
    if node_ids.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let index: BTreeMap<&str, usize> = node_ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();

    let mut stamps: Vec<i64> = accepted.iter().map(|r| r.timestamp).collect();
    stamps.sort_unstable();
    stamps.dedup();
    let start = stamps[0];
    let step = match step_seconds {
        Some(s) if s > 0 => s,
        Some(_) => return Err(Error::InvalidConfig("step_seconds must be positive".into())),
        None => stamps.windows(2).map(|w| w[1] - w[0]).min().unwrap_or(60),
    };
    let num_steps = ((stamps[stamps.len() - 1] - start) / step) as usize + 1;
    let n = node_ids.len();

    let mut values: Vec<Option<&[f64]>> = vec![None; n * num_steps];
    let mut labels = vec![Label::Unlabeled; n * num_steps];
    let mut last_seen: Vec<Option<i64>> = vec![None; n];
    for r in &accepted {
        let node = index[r.service.as_str()];
        if last_seen[node].is_some_and(|prev| r.timestamp <= prev) {
            return Err(Error::NonMonotonicTimestamps { service: r.service.clone(), timestamp: r.timestamp });
        }
        last_seen[node] = Some(r.timestamp);
        let offset = r.timestamp - start;
        let t = ((offset + step / 2) / step) as usize;
        let cell = node * num_steps + t.min(num_steps - 1);
        values[cell] = Some(&r.values);
        labels[cell] = r.label.map_or(Label::Unlabeled, Label::from_flag);
    }

    let mut features = vec![0.0; n * num_steps * d];
    for node in 0..n {
        let cells = &values[node * num_steps..(node + 1) * num_steps];
        let observed: Vec<&[f64]> = cells.iter().flatten().copied().collect();
        if observed.is_empty() {
            return Err(Error::MissingService(node_ids[node].clone()));
        }
        let mut means = vec![0.0; d];
        for v in &observed {
            for (m, x) in means.iter_mut().zip(v.iter()) {
                *m += x;
            }
        }
        means.iter_mut().for_each(|m| *m /= observed.len() as f64);

        let mut prev: Option<&[f64]> = None;
        for (t, cell) in cells.iter().enumerate() {
            let src: &[f64] = match (cell, prev) {
                (Some(v), _) => v,
                (None, Some(p)) => {
                    report.filled += 1;
                    p
                }
                (None, None) => {
                    report.filled += 1;
                    &means
                }
            };
            let base = (node * num_steps + t) * d;
            features[base..base + d].copy_from_slice(src);
            if cell.is_some() {
                prev = *cell;
            }
        }
    }

    let panel = MetricPanel::new(node_ids, feature_names.to_vec(), num_steps, start, step, features, labels)?;
    Ok((panel, report))
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StandardizationStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    /// Features whose training variance was zero; their std is clamped to 1.
    pub clamped: Vec<bool>,
}

impl StandardizationStats {
    pub fn any_clamped(&self) -> bool {
        self.clamped.iter().any(|&c| c)
    }

    pub fn apply(&self, panel: &MetricPanel) -> Result<MetricPanel> {
        let d = panel.d_in();
        if self.mean.len() != d || self.std.len() != d {
            return Err(Error::DimensionMismatch("standardization stats vs panel features".into()));
        }
        let mut out = panel.features.clone();
        for chunk in out.chunks_exact_mut(d) {
            for ((x, m), s) in chunk.iter_mut().zip(&self.mean).zip(&self.std) {
                *x = (*x - m) / s;
            }
        }
        Ok(panel.map_features(out))
    }
}

/// Z-score every feature with statistics taken from `train_steps` only.
pub fn standardize(panel: &MetricPanel, train_steps: Range<usize>) -> Result<(MetricPanel, StandardizationStats)> {
    panel.check_range(&train_steps)?;
    let d = panel.d_in();
    let count = (panel.num_nodes() * train_steps.len()) as f64;
    let mut mean = vec![0.0; d];
    for node in 0..panel.num_nodes() {
        for t in train_steps.clone() {
            for (m, x) in mean.iter_mut().zip(panel.features_at(node, t)) {
                *m += x;
            }
        }
    }
    mean.iter_mut().for_each(|m| *m /= count);
    let mut var = vec![0.0; d];
    for node in 0..panel.num_nodes() {
        for t in train_steps.clone() {
            for ((v, m), x) in var.iter_mut().zip(&mean).zip(panel.features_at(node, t)) {
                *v += (x - m) * (x - m);
            }
        }
    }
    let mut clamped = vec![false; d];
    let std: Vec<f64> = var
        .iter()
        .zip(clamped.iter_mut())
        .map(|(v, c)| {
            let s = libm::sqrt(v / count);
            if s < 1e-12 {
                *c = true;
                1.0
            } else {
                s
            }
        })
        .collect();
    let stats = StandardizationStats { mean, std, clamped };
    Ok((stats.apply(panel)?, stats))
}

/// Add i.i.d. `N(0, sigma²)` noise to every feature cell. Labels are untouched.
pub fn inject_noise(panel: &MetricPanel, sigma: f64, seed: u64) -> Result<MetricPanel> {
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig("noise sigma must be finite and >= 0".into()));
    }
    if sigma == 0.0 {
        return Ok(panel.clone());
    }
    let normal = Normal::new(0.0, sigma).map_err(|_| Error::InvalidConfig("noise sigma".into()))?;
    let mut rng = rng::stream(seed, rng::TAG_NOISE);
    let out = panel.features.iter().map(|x| x + normal.sample(&mut rng)).collect();
    Ok(panel.map_features(out))
}

/// Keep `round(keep_ratio × #labeled)` labeled cells, stratified by class so
/// at least one anomaly survives whenever any is kept; all others become
/// unlabeled.
pub fn mask_labels(panel: &MetricPanel, keep_ratio: f64, seed: u64) -> Result<MetricPanel> {
    mask_labels_in(panel, 0..panel.num_steps(), keep_ratio, seed)
}

/// [`mask_labels`] restricted to `steps`; cells outside the range are untouched.
pub fn mask_labels_in(panel: &MetricPanel, steps: Range<usize>, keep_ratio: f64, seed: u64) -> Result<MetricPanel> {
    if !(0.0..=1.0).contains(&keep_ratio) {
        return Err(Error::InvalidConfig("keep_ratio must be in [0, 1]".into()));
    }
    panel.check_range(&steps)?;
    let mut normals = Vec::new();
    let mut anomalies = Vec::new();
    for node in 0..panel.num_nodes() {
        for t in steps.clone() {
            match panel.label(node, t) {
                Label::Normal => normals.push(panel.cell(node, t)),
                Label::Anomaly => anomalies.push(panel.cell(node, t)),
                Label::Unlabeled => {}
            }
        }
    }
    let total = normals.len() + anomalies.len();
    let keep = libm::round(keep_ratio * total as f64) as usize;
    let mut keep_anom = if keep == 0 || anomalies.is_empty() {
        0
    } else {
        let proportional = libm::round(keep as f64 * anomalies.len() as f64 / total as f64) as usize;
        proportional.clamp(1, anomalies.len().min(keep))
    };
    let keep_norm = (keep - keep_anom).min(normals.len());
    keep_anom = keep_anom.max((keep - keep_norm).min(anomalies.len()));

    let mut rng = rng::stream(seed, rng::TAG_MASK);
    let mut labels = panel.labels.clone();
    for &c in normals.iter().chain(&anomalies) {
        labels[c] = Label::Unlabeled;
    }
    for k in index::sample(&mut rng, anomalies.len(), keep_anom) {
        labels[anomalies[k]] = Label::Anomaly;
    }
    for k in index::sample(&mut rng, normals.len(), keep_norm) {
        labels[normals[k]] = Label::Normal;
    }
    Ok(MetricPanel::with_labels_unchecked(panel, labels))
}

impl MetricPanel {
    fn with_labels_unchecked(panel: &MetricPanel, labels: Vec<Label>) -> MetricPanel {
        MetricPanel { labels, ..panel.clone() }
    }
}

pub fn canonical_feature_names() -> Vec<String> {
    CANONICAL_FEATURES.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use proptest::prelude::*;

    fn rec(ts: i64, svc: &str, base: f64, label: Option<bool>) -> MetricRecord {
        MetricRecord { timestamp: ts, service: svc.to_string(), values: (0..7).map(|k| base + k as f64).collect(), label }
    }

    #[test]
    fn complete_input_has_no_fills() {
        let mut records = Vec::new();
        for t in 0..3 {
            records.push(rec(100 + 60 * t, "a", t as f64, Some(false)));
            records.push(rec(100 + 60 * t, "b", 10.0 + t as f64, None));
        }
        let (p, report) = assemble_panel(&records, None, &canonical_feature_names(), None).unwrap();
        assert_eq!((p.num_nodes(), p.num_steps(), p.d_in()), (2, 3, 7));
        assert_eq!(report, IngestReport::default());
        assert_eq!(p.step_seconds(), 60);
        assert_eq!(p.features_at(1, 2)[0], 12.0);
        assert_eq!(p.label(0, 1), Label::Normal);
        assert_eq!(p.label(1, 1), Label::Unlabeled);
    }

    #[test]
    fn middle_gap_carries_forward() {
        let records = vec![rec(0, "a", 1.0, None), rec(120, "a", 3.0, None), rec(60, "b", 5.0, None), rec(0, "b", 4.0, None)];
        // `b` arrives out of order: rejected as non-monotonic.
        let err = assemble_panel(&records, None, &canonical_feature_names(), Some(60)).unwrap_err();
        assert!(matches!(err, Error::NonMonotonicTimestamps { .. }));

        let records = vec![rec(0, "a", 1.0, None), rec(120, "a", 3.0, None), rec(0, "b", 4.0, None), rec(60, "b", 5.0, None), rec(120, "b", 6.0, None)];
        let (p, report) = assemble_panel(&records, None, &canonical_feature_names(), Some(60)).unwrap();
        assert_eq!(report.filled, 1);
        assert_eq!(p.features_at(0, 1), p.features_at(0, 0));
    }

    #[test]
    fn leading_gap_uses_node_mean() {
        let records = vec![rec(0, "a", 0.0, None), rec(60, "a", 0.0, None), rec(120, "a", 0.0, None), rec(60, "b", 2.0, None), rec(120, "b", 4.0, None)];
        let (p, report) = assemble_panel(&records, None, &canonical_feature_names(), None).unwrap();
        assert_eq!(report.filled, 1);
        assert_eq!(p.features_at(1, 0)[0], 3.0);
    }

    #[test]
    fn nan_rows_are_rejected() {
        let mut bad = rec(60, "a", 0.0, None);
        bad.values[3] = f64::NAN;
        let records = vec![rec(0, "a", 1.0, None), bad, rec(120, "a", 1.0, None)];
        let (p, report) = assemble_panel(&records, None, &canonical_feature_names(), Some(60)).unwrap();
        assert_eq!(report.rejected, 1);
        assert_eq!(report.filled, 1);
        assert!(p.raw_features().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn unknown_and_missing_services() {
        let nodes = vec!["a".to_string(), "b".to_string()];
        let records = vec![rec(0, "c", 1.0, None)];
        assert_eq!(
            assemble_panel(&records, Some(&nodes), &canonical_feature_names(), None).unwrap_err(),
            Error::UnknownService("c".into())
        );
        let records = vec![rec(0, "a", 1.0, None)];
        assert_eq!(
            assemble_panel(&records, Some(&nodes), &canonical_feature_names(), None).unwrap_err(),
            Error::MissingService("b".into())
        );
    }

    fn panel_from(values: &[[f64; 2]], nodes: usize) -> MetricPanel {
        let steps = values.len() / nodes;
        let feats = values.iter().flat_map(|v| v.iter().copied()).collect();
        MetricPanel::new(
            (0..nodes).map(|i| format!("n{i}")).collect(),
            vec!["x".into(), "y".into()],
            steps,
            0,
            60,
            feats,
            vec![Label::Normal; nodes * steps],
        )
        .unwrap()
    }

    #[test]
    fn constant_feature_is_clamped() {
        let p = panel_from(&[[5.0, 0.0], [5.0, 2.0]], 1);
        let (z, stats) = standardize(&p, 0..2).unwrap();
        assert_eq!(stats.std[0], 1.0);
        assert!(stats.clamped[0] && !stats.clamped[1]);
        assert_eq!(z.features_at(0, 0)[0], 0.0);
        assert_eq!(z.features_at(0, 1)[0], 0.0);
    }

    #[test]
    fn two_point_feature_standardizes_to_unit() {
        let p = panel_from(&[[5.0, 0.0], [5.0, 2.0]], 1);
        let (z, stats) = standardize(&p, 0..2).unwrap();
        assert_eq!((stats.mean[1], stats.std[1]), (1.0, 1.0));
        assert_eq!(z.features_at(0, 0)[1], -1.0);
        assert_eq!(z.features_at(0, 1)[1], 1.0);
    }

    #[test]
    fn train_slice_mean_is_zero_and_restandardizing_is_stable() {
        let vals: Vec<[f64; 2]> = (0..40).map(|k| [libm::sin(k as f64) * 3.0 + 7.0, (k * k) as f64]).collect();
        let p = panel_from(&vals, 2);
        let (z, _) = standardize(&p, 0..12).unwrap();
        for f in 0..2 {
            let s: f64 = (0..2).flat_map(|n| (0..12).map(move |t| (n, t))).map(|(n, t)| z.features_at(n, t)[f]).sum();
            assert!((s / 24.0).abs() < 1e-9);
        }
        let (zz, _) = standardize(&z, 0..12).unwrap();
        for (a, b) in z.raw_features().iter().zip(zz.raw_features()) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_train_range() {
        let p = panel_from(&[[1.0, 2.0]], 1);
        assert!(standardize(&p, 0..0).is_err());
        assert!(standardize(&p, 0..5).is_err());
    }

    #[test]
    fn zero_noise_is_identity_and_seeded_noise_repeats() {
        let p = panel_from(&[[1.0, 2.0], [3.0, 4.0]], 1);
        assert_eq!(inject_noise(&p, 0.0, 3).unwrap(), p);
        assert_eq!(inject_noise(&p, 0.7, 3).unwrap(), inject_noise(&p, 0.7, 3).unwrap());
        assert_ne!(inject_noise(&p, 0.7, 3).unwrap(), inject_noise(&p, 0.7, 4).unwrap());
        assert!(inject_noise(&p, -1.0, 3).is_err());
    }

    #[test]
    fn noise_sample_std_matches_sigma() {
        let cells = 100_000;
        let p = panel_from(&vec![[0.0, 0.0]; cells / 2], 1);
        let noisy = inject_noise(&p, 0.5, 11).unwrap();
        let xs = noisy.raw_features();
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (xs.len() - 1) as f64;
        let sd = libm::sqrt(var);
        assert!((sd - 0.5).abs() < 0.02, "sample std {sd}");
    }

    fn labeled_panel(normals: usize, anomalies: usize) -> MetricPanel {
        let n = normals + anomalies;
        let mut labels = vec![Label::Normal; n];
        for l in labels.iter_mut().take(anomalies) {
            *l = Label::Anomaly;
        }
        MetricPanel::new(vec!["a".into()], vec!["x".into()], n, 0, 1, vec![0.0; n], labels).unwrap()
    }

    #[test]
    fn mask_extremes_and_counts() {
        let p = labeled_panel(970, 30);
        assert_eq!(mask_labels(&p, 1.0, 1).unwrap(), p);
        assert!(mask_labels(&p, 0.0, 1).unwrap().raw_labels().iter().all(|&l| l == Label::Unlabeled));
        let m = mask_labels(&p, 0.05, 1).unwrap();
        assert_eq!(m.raw_labels().iter().filter(|l| l.is_labeled()).count(), 50);
        assert!(m.raw_labels().contains(&Label::Anomaly));
        let tiny = mask_labels(&p, 0.001, 2).unwrap();
        assert_eq!(tiny.raw_labels().iter().filter(|l| l.is_labeled()).collect::<Vec<_>>(), vec![&Label::Anomaly]);
        assert!(mask_labels(&p, 1.5, 1).is_err());
    }

    #[test]
    fn range_mask_leaves_outside_untouched() {
        let p = labeled_panel(90, 10);
        let m = mask_labels_in(&p, 50..100, 0.0, 9).unwrap();
        assert_eq!(&m.raw_labels()[..50], &p.raw_labels()[..50]);
        assert!(m.raw_labels()[50..].iter().all(|&l| l == Label::Unlabeled));
    }

    proptest! {
        #[test]
        fn masking_never_flips_a_class(ratio in 0.0f64..=1.0, seed in any::<u64>(), anomalies in 0usize..20) {
            let p = labeled_panel(80, anomalies);
            let m = mask_labels(&p, ratio, seed).unwrap();
            for (a, b) in p.raw_labels().iter().zip(m.raw_labels()) {
                prop_assert!(b == a || *b == Label::Unlabeled);
            }
            let total = p.raw_labels().len();
            let expect = libm::round(ratio * total as f64) as usize;
            prop_assert_eq!(m.raw_labels().iter().filter(|l| l.is_labeled()).count(), expect);
        }

        #[test]
        fn noise_preserves_shape_and_labels(sigma in 0.0f64..3.0, seed in any::<u64>()) {
            let p = labeled_panel(20, 5);
            let q = inject_noise(&p, sigma, seed).unwrap();
            prop_assert_eq!(q.raw_features().len(), p.raw_features().len());
            prop_assert_eq!(q.raw_labels(), p.raw_labels());
        }
    }
}
