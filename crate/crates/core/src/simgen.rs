//! Synthetic three-tier microservice telemetry with injected faults.
//!
//! Gateways call middle services, middle services call backends. Request
//! load enters at the gateways, follows the schedule, and is split evenly
//! over outgoing calls. Each feature is a per-node level plus a load term
//! plus an AR(1) process; faults add deviations in units of the feature's
//! innovation scale and may echo upstream with delay and attenuation.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::rng;
use crate::telemetry::{canonical_feature_names, Label, MetricPanel, CANONICAL_FEATURES};

const D: usize = CANONICAL_FEATURES.len();

/// AR(1) coefficient of the baseline processes.
pub const AR_COEFF: f64 = 0.8;
/// Innovation scale per canonical feature.
pub const INNOVATION_SCALE: [f64; D] = [2.0, 1.0, 1.0, 2.0, 2.0, 1.0, 0.2];
/// Load coupling per canonical feature (feature units per request/step).
pub const LOAD_COUPLING: [f64; D] = [0.2, 0.05, 0.05, 0.3, 0.25, 0.05, 0.005];
const LEVEL_RANGE: [(f64, f64); D] = [(20.0, 60.0), (30.0, 70.0), (5.0, 20.0), (10.0, 40.0), (10.0, 40.0), (5.0, 30.0), (0.5, 2.0)];
/// Propagated cells count as faulty above this deviation (innovation-scale units).
pub const PROPAGATION_FLOOR: f64 = 0.1;
pub const START_TIME: i64 = 1_700_000_000;
pub const STEP_SECONDS: i64 = 60;

const LATENCY: usize = 5;
const ERROR_RATE: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct TierCounts {
    pub gateway: usize,
    pub middle: usize,
    pub backend: usize,
}

impl Default for TierCounts {
    fn default() -> Self {
        Self { gateway: 2, middle: 6, backend: 4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Tier {
    Gateway,
    Middle,
    Backend,
}

/// Call graph; node indices follow the lexicographic order of `node_ids`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    node_ids: Vec<String>,
    tiers: Vec<Tier>,
    /// `(caller, callee)`, sorted.
    edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn tier(&self, node: usize) -> Tier {
        self.tiers[node]
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_ids.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    /// Edge list by service name, as written to the edge file.
    pub fn edge_list(&self) -> Vec<(String, String)> {
        self.edges.iter().map(|&(a, b)| (self.node_ids[a].clone(), self.node_ids[b].clone())).collect()
    }

    pub fn callees(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.0 == node).map(|e| e.1)
    }

    pub fn callers(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.1 == node).map(|e| e.0)
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.callees(node).count()
    }

    pub fn in_degree(&self, node: usize) -> usize {
        self.callers(node).count()
    }

    /// Shortest upstream hop count from `node` to every caller-side ancestor.
    fn upstream_hops(&self, node: usize) -> Vec<Option<usize>> {
        let mut hops = vec![None; self.len()];
        hops[node] = Some(0);
        let mut queue = VecDeque::from([node]);
        while let Some(v) = queue.pop_front() {
            let h = hops[v].unwrap_or(0);
            for c in self.callers(v) {
                if hops[c].is_none() {
                    hops[c] = Some(h + 1);
                    queue.push_back(c);
                }
            }
        }
        hops
    }
}

/// Wire a three-tier topology.
///
/// Middle service `m` is always called by gateway `m mod G` and by any
/// other gateway with probability 1/4; gateways beyond the middle count call
/// middle `g mod M`. Each middle calls between 1 and 3 distinct backends and
/// every backend left uncalled is attached to the least-loaded middle.
pub fn generate_topology(counts: TierCounts, seed: u64) -> Result<Topology> {
    let TierCounts { gateway: g, middle: m, backend: b } = counts;
    if g == 0 || m == 0 || b == 0 {
        return Err(Error::InvalidConfig("every tier needs at least one service".into()));
    }
    if b > 3 * m {
        return Err(Error::InvalidConfig(format!("{b} backends cannot be covered by {m} middle services calling at most 3 each")));
    }
    let mut rng = rng::stream(seed, rng::TAG_TOPOLOGY);
    // provisional indices: gateways, then middles, then backends
    let mut calls: Vec<(usize, usize)> = Vec::new();
    for mi in 0..m {
        for gi in 0..g {
            let forced = mi % g == gi || (gi >= m && gi % m == mi);
            if forced || rng.random::<f64>() < 0.25 {
                calls.push((gi, g + mi));
            }
        }
    }
    let mut out = vec![0usize; m];
    let mut covered = vec![false; b];
    for (mi, deg) in out.iter_mut().enumerate() {
        let k = rng.random_range(1..=3.min(b));
        for bi in index::sample(&mut rng, b, k).into_vec() {
            calls.push((g + mi, g + m + bi));
            covered[bi] = true;
        }
        *deg = k;
    }
    for (bi, _) in covered.iter().enumerate().filter(|(_, c)| !**c) {
        let (mi, _) = out.iter().enumerate().filter(|(_, &d)| d < 3).min_by_key(|(i, &d)| (d, *i)).ok_or_else(|| {
            Error::InvalidConfig("no middle service can take another backend".into())
        })?;
        calls.push((g + mi, g + m + bi));
        out[mi] += 1;
    }

    let mut named: Vec<(String, Tier, usize)> = (0..g)
        .map(|i| (format!("gw-{i:02}"), Tier::Gateway, i))
        .chain((0..m).map(|i| (format!("mid-{i:02}"), Tier::Middle, g + i)))
        .chain((0..b).map(|i| (format!("be-{i:02}"), Tier::Backend, g + m + i)))
        .collect();
    named.sort();
    let mut remap = vec![0; named.len()];
    for (new, (_, _, old)) in named.iter().enumerate() {
        remap[*old] = new;
    }
    let mut edges: Vec<(usize, usize)> = calls.into_iter().map(|(a, c)| (remap[a], remap[c])).collect();
    edges.sort_unstable();
    edges.dedup();
    Ok(Topology {
        node_ids: named.iter().map(|n| n.0.clone()).collect(),
        tiers: named.iter().map(|n| n.1).collect(),
        edges,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum LoadPhase {
    Steady,
    /// Multiply load by `multiplier` on `[start, start + len)`.
    Surge { start: usize, len: usize, multiplier: f64 },
    /// `1 + amplitude·sin(2π(t − start)/period)` from `start` on.
    Jitter { amplitude: f64, period: f64, start: usize },
}

impl LoadPhase {
    fn factor(&self, t: usize) -> f64 {
        match *self {
            LoadPhase::Steady => 1.0,
            LoadPhase::Surge { start, len, multiplier } => {
                if (start..start + len).contains(&t) {
                    multiplier
                } else {
                    1.0
                }
            }
            LoadPhase::Jitter { amplitude, period, start } => {
                if t < start {
                    1.0
                } else {
                    let phase = 2.0 * core::f64::consts::PI * (t - start) as f64 / period;
                    (1.0 + amplitude * libm::sin(phase)).max(0.0)
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            LoadPhase::Steady => Ok(()),
            LoadPhase::Surge { multiplier, .. } if !(multiplier >= 1.0 && multiplier.is_finite()) => {
                Err(Error::InvalidConfig("surge multiplier must be >= 1".into()))
            }
            LoadPhase::Jitter { amplitude, period, .. } if !(amplitude >= 0.0 && amplitude.is_finite() && period > 0.0) => {
                Err(Error::InvalidConfig("jitter needs amplitude >= 0 and period > 0".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Product of every phase factor at step `t`.
pub fn load_factor(schedule: &[LoadPhase], t: usize) -> f64 {
    schedule.iter().fold(1.0, |acc, p| acc * p.factor(t))
}

/// Surge over steps 200–260 at 3×, then jitter of amplitude 0.5 and period 20.
pub fn default_schedule() -> Vec<LoadPhase> {
    vec![
        LoadPhase::Surge { start: 200, len: 60, multiplier: 3.0 },
        LoadPhase::Jitter { amplitude: 0.5, period: 20.0, start: 260 },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum FaultKind {
    CpuSaturation,
    LatencySpike,
    ErrorBurst,
}

impl FaultKind {
    pub const ALL: [FaultKind; 3] = [FaultKind::CpuSaturation, FaultKind::LatencySpike, FaultKind::ErrorBurst];

    /// Deviation per unit intensity, in innovation-scale units.
    pub fn profile(self) -> [f64; D] {
        match self {
            FaultKind::CpuSaturation => [16.0, 4.0, 0.0, 0.0, 0.0, 12.0, 0.0],
            FaultKind::LatencySpike => [0.0, 0.0, 0.0, 0.0, 0.0, 16.0, 0.0],
            FaultKind::ErrorBurst => [0.0, 0.0, 0.0, 0.0, 0.0, 8.0, 16.0],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FaultKind::CpuSaturation => "cpu_saturation",
            FaultKind::LatencySpike => "latency_spike",
            FaultKind::ErrorBurst => "error_burst",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct FaultSpec {
    pub kind: FaultKind,
    pub target: String,
    pub start: usize,
    pub duration: usize,
    pub intensity: f64,
    #[cfg_attr(feature = "serde", serde(default))]
    pub propagate: bool,
}

/// Evenly spread random faults: one per equal segment of the run.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct RandomFaults {
    pub count: usize,
    pub intensity: f64,
    pub min_duration: usize,
    pub max_duration: usize,
    pub propagate: bool,
    /// Tiers whose services may be picked as targets. Backends by default:
    /// their faults surface at every caller above them.
    pub origin_tiers: Vec<Tier>,
}

impl Default for RandomFaults {
    fn default() -> Self {
        Self { count: 8, intensity: 2.0, min_duration: 20, max_duration: 40, propagate: true, origin_tiers: vec![Tier::Backend] }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ScenarioConfig {
    pub tiers: TierCounts,
    pub steps: usize,
    /// Requests per step entering each gateway.
    pub base_load: f64,
    pub load_schedule: Vec<LoadPhase>,
    /// Explicit faults, applied in addition to `random_faults`.
    pub faults: Vec<FaultSpec>,
    pub random_faults: Option<RandomFaults>,
    /// Observation noise in innovation-scale units.
    pub noise_sigma: f64,
    /// Upstream attenuation per hop.
    pub attenuation: f64,
    /// Upstream delay per hop, in steps.
    pub hop_delay: usize,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            tiers: TierCounts::default(),
            steps: 2000,
            base_load: 100.0,
            load_schedule: default_schedule(),
            faults: Vec::new(),
            random_faults: Some(RandomFaults::default()),
            noise_sigma: 0.2,
            attenuation: 0.5,
            hop_delay: 1,
            seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps < 10 {
            return Err(Error::InvalidConfig("scenario needs at least 10 steps".into()));
        }
        if !(self.base_load >= 0.0 && self.base_load.is_finite()) {
            return Err(Error::InvalidConfig("base_load must be finite and >= 0".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::InvalidConfig("noise_sigma must be finite and >= 0".into()));
        }
        if !(0.0..=1.0).contains(&self.attenuation) {
            return Err(Error::InvalidConfig("attenuation must lie in [0, 1]".into()));
        }
        for p in &self.load_schedule {
            p.validate()?;
        }
        for f in &self.faults {
            if !(f.intensity >= 0.0 && f.intensity.is_finite()) {
                return Err(Error::InvalidConfig("fault intensity must be finite and >= 0".into()));
            }
            if f.duration == 0 || f.start + f.duration > self.steps {
                return Err(Error::InvalidConfig(format!("fault on {} does not fit in the run", f.target)));
            }
        }
        if let Some(r) = &self.random_faults {
            if !(r.intensity >= 0.0 && r.intensity.is_finite()) || r.min_duration == 0 || r.min_duration > r.max_duration {
                return Err(Error::InvalidConfig("random faults need intensity >= 0 and 1 <= min_duration <= max_duration".into()));
            }
            if r.count > 0 && r.max_duration + 2 > self.steps / r.count {
                return Err(Error::InvalidConfig("random faults do not fit their segments".into()));
            }
            if r.count > 0 && r.origin_tiers.is_empty() {
                return Err(Error::InvalidConfig("random faults need at least one origin tier".into()));
            }
        }
        Ok(())
    }

    /// Set the intensity of every fault, explicit and random.
    pub fn set_intensity(&mut self, intensity: f64) {
        for f in &mut self.faults {
            f.intensity = intensity;
        }
        if let Some(r) = &mut self.random_faults {
            r.intensity = intensity;
        }
    }
}

/// Draw `cfg.count` faults, one per equal segment, cycling through kinds.
pub fn random_faults(topo: &Topology, steps: usize, cfg: &RandomFaults, seed: u64) -> Vec<FaultSpec> {
    let mut rng = rng::stream(seed, rng::TAG_FAULTS);
    let mut out = Vec::with_capacity(cfg.count);
    if cfg.count == 0 {
        return out;
    }
    let seg = steps / cfg.count;
    let offset = rng.random_range(0..FaultKind::ALL.len());
    for k in 0..cfg.count {
        let duration = rng.random_range(cfg.min_duration..=cfg.max_duration);
        let lo = k * seg + 1;
        let hi = (k + 1) * seg - duration - 1;
        let start = rng.random_range(lo..=hi.max(lo));
        let pool: Vec<usize> = (0..topo.len()).filter(|&v| cfg.origin_tiers.contains(&topo.tier(v))).collect();
        let target = pool[rng.random_range(0..pool.len())];
        out.push(FaultSpec {
            kind: FaultKind::ALL[(k + offset) % FaultKind::ALL.len()],
            target: topo.node_ids()[target].clone(),
            start,
            duration,
            intensity: cfg.intensity,
            propagate: cfg.propagate,
        });
    }
    out
}

/// Simulator output with the intermediate traces.
#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub panel: MetricPanel,
    /// Load per `[node][step]`.
    pub load: Vec<f64>,
    /// Injected pre-noise deviation per `[node][step][feature]`.
    pub deviation: Vec<f64>,
    /// Faults actually applied (explicit then random).
    pub faults: Vec<FaultSpec>,
}

/// Every fault of the scenario, explicit ones first.
pub fn scenario_faults(topo: &Topology, scenario: &ScenarioConfig) -> Vec<FaultSpec> {
    let mut faults = scenario.faults.clone();
    if let Some(r) = &scenario.random_faults {
        faults.extend(random_faults(topo, scenario.steps, r, scenario.seed));
    }
    faults
}

pub fn simulate(topo: &Topology, scenario: &ScenarioConfig) -> Result<MetricPanel> {
    simulate_trace(topo, scenario).map(|t| t.panel)
}

pub fn simulate_trace(topo: &Topology, scenario: &ScenarioConfig) -> Result<SimTrace> {
    scenario.validate()?;
    let (n, steps) = (topo.len(), scenario.steps);
    let faults = scenario_faults(topo, scenario);
    let targets = faults
        .iter()
        .map(|f| topo.index_of(&f.target).ok_or_else(|| Error::UnknownService(f.target.clone())))
        .collect::<Result<Vec<_>>>()?;

    // load, in topological (tier) order
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (topo.tier(i), i));
    let out_deg: Vec<usize> = (0..n).map(|i| topo.out_degree(i)).collect();
    let mut load = vec![0.0; n * steps];
    for t in 0..steps {
        let gw = scenario.base_load * load_factor(&scenario.load_schedule, t);
        for &v in &order {
            let l = if topo.tier(v) == Tier::Gateway {
                gw
            } else {
                topo.callers(v).map(|c| load[c * steps + t] / out_deg[c] as f64).sum()
            };
            load[v * steps + t] = l;
        }
    }

    // baselines
    let sim_seed = rng::derive(scenario.seed, rng::TAG_SIM);
    let mut rng = rng::rng_from(sim_seed);
    let unit = Normal::new(0.0, 1.0).map_err(|_| Error::InvalidConfig("normal".into()))?;
    let mut features = vec![0.0; n * steps * D];
    let stationary = 1.0 / libm::sqrt(1.0 - AR_COEFF * AR_COEFF);
    for v in 0..n {
        let level: Vec<f64> = LEVEL_RANGE.iter().map(|&(lo, hi)| rng.random_range(lo..hi)).collect();
        let mut ar: Vec<f64> = (0..D).map(|f| INNOVATION_SCALE[f] * stationary * unit.sample(&mut rng)).collect();
        for t in 0..steps {
            for f in 0..D {
                if t > 0 {
                    ar[f] = AR_COEFF * ar[f] + INNOVATION_SCALE[f] * unit.sample(&mut rng);
                }
                features[(v * steps + t) * D + f] = level[f] + LOAD_COUPLING[f] * load[v * steps + t] + ar[f];
            }
        }
    }

    // fault deviations and labels
    let mut deviation = vec![0.0; n * steps * D];
    let mut anomalous = vec![false; n * steps];
    for (fault, &target) in faults.iter().zip(&targets) {
        let profile = fault.kind.profile();
        let hops = if fault.propagate { topo.upstream_hops(target) } else { vec![None; n] };
        for v in 0..n {
            let (hop, scale) = match (v == target, hops[v]) {
                (true, _) => (0, 1.0),
                (false, Some(h)) => (h, libm::pow(scenario.attenuation, h as f64)),
                (false, None) => continue,
            };
            let start = fault.start + hop * scenario.hop_delay;
            for t in start..(start + fault.duration).min(steps) {
                let mut peak: f64 = 0.0;
                for f in 0..D {
                    if hop > 0 && f != LATENCY && f != ERROR_RATE {
                        continue;
                    }
                    let dev = fault.intensity * profile[f] * INNOVATION_SCALE[f] * scale;
                    deviation[(v * steps + t) * D + f] += dev;
                    peak = peak.max(libm::fabs(dev) / INNOVATION_SCALE[f]);
                }
                if hop == 0 || peak >= PROPAGATION_FLOOR {
                    anomalous[v * steps + t] = true;
                }
            }
        }
    }
    for (x, d) in features.iter_mut().zip(&deviation) {
        if *d != 0.0 {
            *x += d;
        }
    }

    if scenario.noise_sigma > 0.0 {
        let mut noise = rng::rng_from(rng::derive(sim_seed, 1));
        for (k, x) in features.iter_mut().enumerate() {
            *x += scenario.noise_sigma * INNOVATION_SCALE[k % D] * unit.sample(&mut noise);
        }
    }

    let labels = anomalous.into_iter().map(Label::from_flag).collect();
    let panel = MetricPanel::new(topo.node_ids().to_vec(), canonical_feature_names(), steps, START_TIME, STEP_SECONDS, features, labels)?;
    Ok(SimTrace { panel, load, deviation, faults })
}
