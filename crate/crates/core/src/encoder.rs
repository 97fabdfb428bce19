//! Node-time encoder: a per-node MLP maps each monitoring vector to a latent
//! vector, then `L` graph-convolution layers aggregate degree-normalized
//! neighbor states:
//!
//! ```text
//! h_i = f_θ(x_i)
//! z_i = σ( Σ_{j ∈ N(i)} (1 / c_ij) · h_j · W )
//! ```
//!
//! The sum is computed before the product with `W` (they commute because `W`
//! is shared by all edges). Hidden graph layers use the model activation; the
//! last one is always linear so embeddings can take either sign.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::ServiceGraph;
use crate::matrix::Matrix;
use crate::rng;

pub const MAX_GCN_LAYERS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Activation {
    #[default]
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Relu => v.max(0.0),
            Activation::Identity => v,
        }
    }

    /// Derivative from the pre-activation; relu'(0) = 0.
    #[inline]
    fn grad(self, pre: f64) -> f64 {
        match self {
            Activation::Relu => {
                if pre > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Relu => "relu",
            Activation::Identity => "identity",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ModelDims {
    pub d_in: usize,
    pub d_hid: usize,
    pub d_emb: usize,
    pub gcn_layers: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self { d_in: 7, d_hid: 32, d_emb: 32, gcn_layers: 3 }
    }
}

impl ModelDims {
    pub fn validate(&self) -> Result<()> {
        if self.d_in == 0 || self.d_hid == 0 || self.d_emb == 0 {
            return Err(Error::InvalidConfig("model dimensions must be >= 1".into()));
        }
        if self.gcn_layers > MAX_GCN_LAYERS {
            return Err(Error::InvalidConfig(alloc::format!("at most {MAX_GCN_LAYERS} graph layers")));
        }
        Ok(())
    }
}

/// Encoder architecture plus the neighborhood sampling cap.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ModelSpec {
    pub dims: ModelDims,
    pub activation: Activation,
    pub neighborhood_cap: usize,
}

impl Default for ModelSpec {
    fn default() -> Self {
        Self {
            dims: ModelDims::default(),
            activation: Activation::Relu,
            neighborhood_cap: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub dims: ModelDims,
    pub activation: Activation,
    /// Embedding MLP, `d_in → d_hid → d_emb`.
    pub embed: Vec<Dense>,
    /// One `d_emb × d_emb` matrix per graph layer.
    pub gcn: Vec<Matrix>,
}

impl ModelParams {
    pub fn zeros(dims: ModelDims, activation: Activation) -> Self {
        let widths = [dims.d_in, dims.d_hid, dims.d_emb];
        let embed = widths
            .windows(2)
            .map(|w| Dense { weight: Matrix::zeros(w[0], w[1]), bias: vec![0.0; w[1]] })
            .collect();
        let gcn = (0..dims.gcn_layers).map(|_| Matrix::zeros(dims.d_emb, dims.d_emb)).collect();
        Self { dims, activation, embed, gcn }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.dims, self.activation)
    }

    pub fn validate(&self) -> Result<()> {
        self.dims.validate()?;
        let widths = [self.dims.d_in, self.dims.d_hid, self.dims.d_emb];
        let shapes_ok = self.embed.len() == 2
            && self.embed.iter().zip(widths.windows(2)).all(|(l, w)| l.weight.shape() == (w[0], w[1]) && l.bias.len() == w[1])
            && self.gcn.len() == self.dims.gcn_layers
            && self.gcn.iter().all(|w| w.shape() == (self.dims.d_emb, self.dims.d_emb));
        if !shapes_ok {
            return Err(Error::DimensionMismatch("parameter shapes inconsistent with dims".into()));
        }
        if let Some((name, _)) = self.blocks().into_iter().find(|(_, b)| b.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidConfig(alloc::format!("non-finite parameter in `{name}`")));
        }
        Ok(())
    }

    /// Named parameter blocks in a fixed order.
    pub fn blocks(&self) -> Vec<(String, &[f64])> {
        let mut out = Vec::new();
        for (k, l) in self.embed.iter().enumerate() {
            out.push((alloc::format!("embed[{k}].weight"), l.weight.as_slice()));
            out.push((alloc::format!("embed[{k}].bias"), l.bias.as_slice()));
        }
        for (k, w) in self.gcn.iter().enumerate() {
            out.push((alloc::format!("gcn[{k}].weight"), w.as_slice()));
        }
        out
    }

    pub fn blocks_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        for l in &mut self.embed {
            out.push(l.weight.as_mut_slice());
            out.push(l.bias.as_mut_slice());
        }
        for w in &mut self.gcn {
            out.push(w.as_mut_slice());
        }
        out
    }

    pub fn num_params(&self) -> usize {
        self.blocks().iter().map(|(_, b)| b.len()).sum()
    }
}

/// Glorot-uniform weights, zero biases.
pub fn init_params(dims: ModelDims, activation: Activation, seed: u64) -> Result<ModelParams> {
    dims.validate()?;
    let mut params = ModelParams::zeros(dims, activation);
    let mut rng = rng::stream(seed, rng::TAG_INIT);
    let fill = |m: &mut Matrix, rng: &mut rand_chacha::ChaCha8Rng| {
        let bound = glorot_bound(m.rows(), m.cols());
        for v in m.as_mut_slice() {
            *v = rng.random_range(-bound..=bound);
        }
    };
    for l in &mut params.embed {
        fill(&mut l.weight, &mut rng);
    }
    for w in &mut params.gcn {
        fill(w, &mut rng);
    }
    Ok(params)
}

pub fn glorot_bound(fan_in: usize, fan_out: usize) -> f64 {
    libm::sqrt(6.0 / (fan_in + fan_out) as f64)
}

/// Per-time-step node embeddings `[num_nodes × d_emb]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFrame(pub Matrix);

impl EmbeddingFrame {
    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn row(&self, node: usize) -> &[f64] {
        self.0.row(node)
    }

    pub fn num_nodes(&self) -> usize {
        self.0.rows()
    }
}

fn dense_forward(x: &Matrix, layer: &Dense) -> Matrix {
    let mut out = x.matmul(&layer.weight);
    for r in 0..out.rows() {
        for (v, b) in out.row_mut(r).iter_mut().zip(&layer.bias) {
            *v += b;
        }
    }
    out
}

fn activate(m: &Matrix, act: Activation) -> Matrix {
    let mut out = m.clone();
    if act == Activation::Relu {
        out.as_mut_slice().iter_mut().for_each(|v| *v = act.apply(*v));
    }
    out
}

/// Apply the embedding MLP to a single monitoring vector.
pub fn embed(x: &[f64], params: &ModelParams) -> Result<Vec<f64>> {
    if x.len() != params.dims.d_in {
        return Err(Error::DimensionMismatch(alloc::format!("input has {} features, model expects {}", x.len(), params.dims.d_in)));
    }
    let m = Matrix::from_vec(1, x.len(), x.to_vec());
    Ok(embed_rows(&m, params)?.into_vec())
}

/// Row-wise embedding of a `[n × d_in]` matrix.
pub fn embed_rows(x: &Matrix, params: &ModelParams) -> Result<Matrix> {
    Ok(embed_cached(x, params)?.output)
}

struct EmbedCache {
    inputs: Vec<Matrix>,
    pre: Vec<Matrix>,
    output: Matrix,
}

fn embed_cached(x: &Matrix, params: &ModelParams) -> Result<EmbedCache> {
    if x.cols() != params.dims.d_in {
        return Err(Error::DimensionMismatch(alloc::format!("input has {} features, model expects {}", x.cols(), params.dims.d_in)));
    }
    let last = params.embed.len() - 1;
    let mut inputs = Vec::with_capacity(params.embed.len());
    let mut pre = Vec::with_capacity(params.embed.len());
    let mut cur = x.clone();
    for (k, layer) in params.embed.iter().enumerate() {
        let a = dense_forward(&cur, layer);
        let next = if k == last { a.clone() } else { activate(&a, params.activation) };
        inputs.push(cur);
        pre.push(a);
        cur = next;
    }
    Ok(EmbedCache { inputs, pre, output: cur })
}

/// Degree-normalized neighbor sum `S_i = Σ_{j ∈ N(i)} h_j / c_ij`.
///
/// Terms are added in lexicographic order of their values, so the result is
/// independent of node numbering.
fn aggregate(h: &Matrix, g: &ServiceGraph, neighborhoods: &[Vec<usize>]) -> Matrix {
    let d = h.cols();
    let mut out = Matrix::zeros(h.rows(), d);
    let mut terms: Vec<f64> = Vec::new();
    let mut order: Vec<usize> = Vec::new();
    for (i, nb) in neighborhoods.iter().enumerate() {
        terms.clear();
        for &j in nb {
            let inv = 1.0 / g.coeff_unchecked(i, j);
            terms.extend(h.row(j).iter().map(|v| v * inv));
        }
        order.clear();
        order.extend(0..nb.len());
        if nb.len() > 2 {
            order.sort_by(|&a, &b| cmp_rows(&terms[a * d..(a + 1) * d], &terms[b * d..(b + 1) * d]));
        }
        let row = out.row_mut(i);
        for &k in &order {
            for (o, t) in row.iter_mut().zip(&terms[k * d..(k + 1) * d]) {
                *o += t;
            }
        }
    }
    out
}

fn cmp_rows(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Equal
}

fn first_bad_row(m: &Matrix) -> Option<usize> {
    (0..m.rows()).find(|&r| m.row(r).iter().any(|v| !v.is_finite()))
}

/// One graph-convolution layer over the given (possibly sampled) neighborhoods.
pub fn gcn_layer(
    h: &Matrix,
    g: &ServiceGraph,
    weight: &Matrix,
    neighborhoods: &[Vec<usize>],
    activation: Activation,
) -> Result<Matrix> {
    Ok(gcn_layer_cached(h, g, weight, neighborhoods, activation)?.2)
}

fn gcn_layer_cached(
    h: &Matrix,
    g: &ServiceGraph,
    weight: &Matrix,
    neighborhoods: &[Vec<usize>],
    activation: Activation,
) -> Result<(Matrix, Matrix, Matrix)> {
    if h.rows() != g.len() || neighborhoods.len() != g.len() {
        return Err(Error::DimensionMismatch(alloc::format!("{} rows for a graph of {} nodes", h.rows(), g.len())));
    }
    if h.cols() != weight.rows() {
        return Err(Error::DimensionMismatch("layer input width vs weight rows".into()));
    }
    let agg = aggregate(h, g, neighborhoods);
    if let Some(node) = first_bad_row(&agg) {
        return Err(Error::NonFiniteNode { stage: "graph aggregation", node });
    }
    let pre = agg.matmul(weight);
    let out = activate(&pre, activation);
    if let Some(node) = first_bad_row(&out) {
        return Err(Error::NonFiniteNode { stage: "graph layer output", node });
    }
    Ok((agg, pre, out))
}

/// Per-layer neighborhoods for one forward pass.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborhoodPlan {
    pub layers: Vec<Vec<Vec<usize>>>,
}

impl NeighborhoodPlan {
    /// Fresh capped sample per layer; layer `l` uses seed `derive(seed, l)`.
    pub fn sample(g: &ServiceGraph, cap: usize, layers: usize, seed: u64) -> Result<Self> {
        let mut out = Vec::with_capacity(layers);
        for l in 0..layers {
            let layer_seed = rng::derive(seed, l as u64);
            let nbs = (0..g.len()).map(|i| g.sample_neighborhood(i, cap, layer_seed)).collect::<Result<Vec<_>>>()?;
            out.push(nbs);
        }
        Ok(Self { layers: out })
    }

    pub fn full(g: &ServiceGraph, layers: usize) -> Self {
        Self { layers: (0..layers).map(|_| g.full_neighborhoods()).collect() }
    }

    /// Drop each non-self neighbor independently with probability `p`.
    pub fn drop_edges<R: Rng>(&mut self, p: f64, rng: &mut R) {
        if p <= 0.0 {
            return;
        }
        for layer in &mut self.layers {
            for (i, nb) in layer.iter_mut().enumerate() {
                nb.retain(|&j| j == i || rng.random::<f64>() >= p);
            }
        }
    }
}

/// Everything the backward pass needs from one forward pass.
#[derive(Debug, Clone)]
pub(crate) struct ForwardCache {
    embed_inputs: Vec<Matrix>,
    embed_pre: Vec<Matrix>,
    gcn_inputs: Vec<Matrix>,
    gcn_agg: Vec<Matrix>,
    gcn_pre: Vec<Matrix>,
    plan: NeighborhoodPlan,
    pub(crate) output: Matrix,
}

fn layer_activation(params: &ModelParams, layer: usize) -> Activation {
    if layer + 1 == params.gcn.len() {
        Activation::Identity
    } else {
        params.activation
    }
}

pub(crate) fn forward_cached(x: &Matrix, g: &ServiceGraph, params: &ModelParams, plan: NeighborhoodPlan) -> Result<ForwardCache> {
    if x.rows() != g.len() {
        return Err(Error::DimensionMismatch(alloc::format!("{} input rows for a graph of {} nodes", x.rows(), g.len())));
    }
    if plan.layers.len() != params.gcn.len() {
        return Err(Error::DimensionMismatch("neighborhood plan depth vs graph layers".into()));
    }
    let emb = embed_cached(x, params)?;
    if let Some(node) = first_bad_row(&emb.output) {
        return Err(Error::NonFiniteNode { stage: "embedding", node });
    }
    let mut cur = emb.output;
    let mut gcn_inputs = Vec::with_capacity(params.gcn.len());
    let mut gcn_agg = Vec::with_capacity(params.gcn.len());
    let mut gcn_pre = Vec::with_capacity(params.gcn.len());
    for (l, w) in params.gcn.iter().enumerate() {
        let (agg, pre, out) = gcn_layer_cached(&cur, g, w, &plan.layers[l], layer_activation(params, l))?;
        gcn_inputs.push(cur);
        gcn_agg.push(agg);
        gcn_pre.push(pre);
        cur = out;
    }
    Ok(ForwardCache {
        embed_inputs: emb.inputs,
        embed_pre: emb.pre,
        gcn_inputs,
        gcn_agg,
        gcn_pre,
        plan,
        output: cur,
    })
}

/// Encode one time step: row-wise embedding followed by the graph layers,
/// each with a fresh capped neighborhood sample derived from `seed`.
pub fn forward(x: &Matrix, g: &ServiceGraph, params: &ModelParams, neighborhood_cap: usize, seed: u64) -> Result<EmbeddingFrame> {
    let plan = NeighborhoodPlan::sample(g, neighborhood_cap, params.gcn.len(), seed)?;
    forward_with_plan(x, g, params, plan)
}

pub fn forward_with_plan(x: &Matrix, g: &ServiceGraph, params: &ModelParams, plan: NeighborhoodPlan) -> Result<EmbeddingFrame> {
    Ok(EmbeddingFrame(forward_cached(x, g, params, plan)?.output))
}

/// Accumulate `∂L/∂θ` into `grads` given `∂L/∂Z` for the frame in `cache`.
pub(crate) fn backward(cache: &ForwardCache, g: &ServiceGraph, params: &ModelParams, d_out: &Matrix, grads: &mut ModelParams) {
    let mut d_cur = d_out.clone();
    for l in (0..params.gcn.len()).rev() {
        let act = layer_activation(params, l);
        let mut d_pre = d_cur;
        if act == Activation::Relu {
            for (d, p) in d_pre.as_mut_slice().iter_mut().zip(cache.gcn_pre[l].as_slice()) {
                *d *= act.grad(*p);
            }
        }
        grads.gcn[l].add_assign(&cache.gcn_agg[l].t_matmul(&d_pre));
        let d_agg = d_pre.matmul_t(&params.gcn[l]);
        let mut d_in = Matrix::zeros(cache.gcn_inputs[l].rows(), cache.gcn_inputs[l].cols());
        for (i, nb) in cache.plan.layers[l].iter().enumerate() {
            let src = d_agg.row(i);
            for &j in nb {
                let inv = 1.0 / g.coeff_unchecked(i, j);
                for (o, s) in d_in.row_mut(j).iter_mut().zip(src) {
                    *o += s * inv;
                }
            }
        }
        d_cur = d_in;
    }

    let last = params.embed.len() - 1;
    for k in (0..params.embed.len()).rev() {
        let mut d_pre = d_cur;
        if k != last && params.activation == Activation::Relu {
            for (d, p) in d_pre.as_mut_slice().iter_mut().zip(cache.embed_pre[k].as_slice()) {
                *d *= params.activation.grad(*p);
            }
        }
        let gl = &mut grads.embed[k];
        gl.weight.add_assign(&cache.embed_inputs[k].t_matmul(&d_pre));
        for r in 0..d_pre.rows() {
            for (b, d) in gl.bias.iter_mut().zip(d_pre.row(r)) {
                *b += d;
            }
        }
        if k > 0 {
            d_cur = d_pre.matmul_t(&params.embed[k].weight);
        } else {
            break;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, DirectionMode};
    use alloc::string::ToString;
    use alloc::vec;
    use rand::SeedableRng;

    fn dims(d_in: usize, d_hid: usize, d_emb: usize, l: usize) -> ModelDims {
        ModelDims { d_in, d_hid, d_emb, gcn_layers: l }
    }

    #[test]
    fn init_is_deterministic_and_shaped() {
        let a = init_params(dims(7, 32, 64, 2), Activation::Relu, 5).unwrap();
        let b = init_params(dims(7, 32, 64, 2), Activation::Relu, 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.embed[0].weight.shape(), (7, 32));
        assert_eq!(a.embed[1].weight.shape(), (32, 64));
        assert_eq!(a.gcn.len(), 2);
        assert!(a.gcn.iter().all(|w| w.shape() == (64, 64)));
        assert!(a.embed.iter().all(|l| l.bias.iter().all(|&b| b == 0.0)));
        let check = |m: &Matrix| {
            let bound = glorot_bound(m.rows(), m.cols());
            m.as_slice().iter().all(|w| w.abs() <= bound)
        };
        assert!(a.embed.iter().all(|l| check(&l.weight)) && a.gcn.iter().all(check));
        assert_ne!(a, init_params(dims(7, 32, 64, 2), Activation::Relu, 6).unwrap());
        a.validate().unwrap();
    }

    #[test]
    fn too_deep_is_rejected() {
        assert!(init_params(dims(2, 2, 2, 9), Activation::Relu, 0).is_err());
        assert!(init_params(dims(0, 2, 2, 1), Activation::Relu, 0).is_err());
    }

    #[test]
    fn zero_weights_embed_to_zero() {
        let p = ModelParams::zeros(dims(3, 4, 2, 1), Activation::Relu);
        assert_eq!(embed(&[1.0, -2.0, 3.0], &p).unwrap(), vec![0.0, 0.0]);
        assert!(embed(&[1.0], &p).is_err());
    }

    #[test]
    fn identity_configuration_reproduces_input() {
        let mut p = ModelParams::zeros(dims(3, 3, 3, 0), Activation::Identity);
        for l in &mut p.embed {
            l.weight = Matrix::identity(3);
        }
        let x = [0.5, -1.25, 3.0];
        assert_eq!(embed(&x, &p).unwrap(), x.to_vec());
    }

    #[test]
    fn relu_hidden_layer_clamps() {
        let mut p = ModelParams::zeros(dims(2, 2, 2, 0), Activation::Relu);
        p.embed[0].weight = Matrix::identity(2);
        p.embed[1].weight = Matrix::identity(2);
        assert_eq!(embed(&[-1.0, 2.0], &p).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn isolated_node_passes_through() {
        let g = ServiceGraph::build::<&str>(&[], &["solo"], DirectionMode::Symmetrize).unwrap();
        let h = Matrix::from_rows(&[vec![0.3, -0.7]]);
        let z = gcn_layer(&h, &g, &Matrix::identity(2), &g.full_neighborhoods(), Activation::Identity).unwrap();
        assert_eq!(z, h);
    }

    #[test]
    fn two_node_hand_evaluation() {
        let g = build_graph(&[("a", "b")], DirectionMode::Symmetrize).unwrap();
        let h = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0]]);
        let z = gcn_layer(&h, &g, &Matrix::identity(2), &g.full_neighborhoods(), Activation::Identity).unwrap();
        assert_eq!(z.row(0), &[1.0, 1.0]);
        assert_eq!(z.row(1), &[1.0, 1.0]);
    }

    #[test]
    fn relu_layer_is_nonnegative() {
        let g = build_graph(&[("a", "b"), ("b", "c")], DirectionMode::Symmetrize).unwrap();
        let p = init_params(dims(3, 3, 3, 1), Activation::Relu, 1).unwrap();
        let h = Matrix::from_rows(&[vec![1.0, -2.0, 0.5], vec![-3.0, 0.1, 2.0], vec![0.0, 4.0, -1.0]]);
        let z = gcn_layer(&h, &g, &p.gcn[0], &g.full_neighborhoods(), Activation::Relu).unwrap();
        assert!(z.as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn non_finite_is_reported_with_node() {
        let g = build_graph(&[("a", "b")], DirectionMode::Directed).unwrap();
        let h = Matrix::from_rows(&[vec![1.0], vec![f64::INFINITY]]);
        let err = gcn_layer(&h, &g, &Matrix::identity(1), &g.full_neighborhoods(), Activation::Identity).unwrap_err();
        assert_eq!(err, Error::NonFiniteNode { stage: "graph aggregation", node: 0 });
    }

    #[test]
    fn zero_layers_is_plain_embedding() {
        let g = build_graph(&[("a", "b")], DirectionMode::Symmetrize).unwrap();
        let p = init_params(dims(2, 4, 3, 0), Activation::Relu, 2).unwrap();
        let x = Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5]]);
        let z = forward(&x, &g, &p, 10, 0).unwrap();
        assert_eq!(z.0, embed_rows(&x, &p).unwrap());
    }

    #[test]
    fn forward_is_deterministic() {
        let edges: Vec<(String, String)> = (0..15).map(|k| ("hub".to_string(), alloc::format!("s{k:02}"))).collect();
        let g = build_graph(&edges, DirectionMode::Symmetrize).unwrap();
        let p = init_params(dims(2, 4, 3, 2), Activation::Relu, 2).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let x = Matrix::from_vec(g.len(), 2, (0..g.len() * 2).map(|_| rng.random::<f64>()).collect());
        assert_eq!(forward(&x, &g, &p, 4, 9).unwrap(), forward(&x, &g, &p, 4, 9).unwrap());
    }

    #[test]
    fn edge_drop_keeps_self_loops() {
        let g = build_graph(&[("a", "b"), ("b", "c"), ("a", "c")], DirectionMode::Symmetrize).unwrap();
        let mut plan = NeighborhoodPlan::full(&g, 2);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        plan.drop_edges(0.99, &mut rng);
        for layer in &plan.layers {
            for (i, nb) in layer.iter().enumerate() {
                assert!(nb.contains(&i));
            }
        }
    }
}
