use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svcdep_core::encoder::{forward_with_plan, init_params, NeighborhoodPlan};
use svcdep_core::graph::ServiceGraph;
use svcdep_core::{Activation, DirectionMode, Matrix, ModelDims, ModelParams};

/// Node `i` is named so that lexicographic order matches `pos[i]`.
fn graph_with_positions(n: usize, edges: &[(usize, usize)], pos: &[usize], mode: DirectionMode) -> ServiceGraph {
    let name = |i: usize| format!("n{:02}", pos[i]);
    let named: Vec<(String, String)> = edges.iter().map(|&(a, b)| (name(a), name(b))).collect();
    let nodes: Vec<String> = (0..n).map(name).collect();
    ServiceGraph::build(&named, &nodes, mode).unwrap()
}

fn random_params(rng: &mut ChaCha8Rng, dims: ModelDims, activation: Activation) -> ModelParams {
    let mut p = init_params(dims, activation, rng.random()).unwrap();
    for l in &mut p.embed {
        for b in &mut l.bias {
            *b = rng.random_range(-0.2..0.2);
        }
    }
    p
}

#[test]
fn forward_is_permutation_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..50 {
        let n = rng.random_range(1..=8);
        let edges: Vec<(usize, usize)> = (0..rng.random_range(0..=2 * n)).map(|_| (rng.random_range(0..n), rng.random_range(0..n))).collect();
        let mode = if case % 2 == 0 { DirectionMode::Symmetrize } else { DirectionMode::Directed };
        let layers = case % 4;
        let dims = ModelDims { d_in: 3, d_hid: 5, d_emb: 4, gcn_layers: layers };
        let params = random_params(&mut rng, dims, Activation::Relu);

        let identity: Vec<usize> = (0..n).collect();
        let mut perm = identity.clone();
        perm.shuffle(&mut rng);
        let g = graph_with_positions(n, &edges, &identity, mode);
        let gp = graph_with_positions(n, &edges, &perm, mode);

        let x = Matrix::from_vec(n, 3, (0..n * 3).map(|_| rng.random_range(-2.0..2.0)).collect());
        let mut xp = Matrix::zeros(n, 3);
        for (i, &pi) in perm.iter().enumerate() {
            xp.row_mut(pi).copy_from_slice(x.row(i));
        }
        let z = forward_with_plan(&x, &g, &params, NeighborhoodPlan::full(&g, layers)).unwrap();
        let zp = forward_with_plan(&xp, &gp, &params, NeighborhoodPlan::full(&gp, layers)).unwrap();
        for (i, &pi) in perm.iter().enumerate() {
            assert_eq!(z.row(i), zp.row(pi), "case {case}, node {i}");
        }
    }
}

#[test]
fn identity_activation_is_linear_in_the_input() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let edges = [(0, 1), (1, 2), (2, 3), (3, 0), (1, 4)];
    let g = graph_with_positions(5, &edges, &[0, 1, 2, 3, 4], DirectionMode::Symmetrize);
    for layers in 0..=3 {
        // zero biases, as initialized
        let params = init_params(ModelDims { d_in: 7, d_hid: 6, d_emb: 4, gcn_layers: layers }, Activation::Identity, 9).unwrap();
        let x = Matrix::from_vec(5, 7, (0..35).map(|_| rng.random_range(-3.0..3.0)).collect());
        let base = forward_with_plan(&x, &g, &params, NeighborhoodPlan::full(&g, layers)).unwrap();
        for a in [-2.5, 0.5, 3.0, 1e3] {
            let mut xa = x.clone();
            xa.scale(a);
            let za = forward_with_plan(&xa, &g, &params, NeighborhoodPlan::full(&g, layers)).unwrap();
            for (u, v) in za.0.as_slice().iter().zip(base.0.as_slice()) {
                let expect = a * v;
                assert!((u - expect).abs() <= 1e-12 * expect.abs().max(1e-300) + 1e-300, "{u} vs {expect}");
            }
        }
    }
}

#[test]
fn large_finite_inputs_stay_finite() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let edges = [(0, 1), (0, 2), (1, 3), (2, 3), (3, 4), (4, 5)];
    let g = graph_with_positions(6, &edges, &[0, 1, 2, 3, 4, 5], DirectionMode::Symmetrize);
    for layers in [0, 2, 4] {
        let params = init_params(ModelDims { d_in: 7, d_hid: 32, d_emb: 32, gcn_layers: layers }, Activation::Relu, 1).unwrap();
        for _ in 0..20 {
            let x = Matrix::from_vec(6, 7, (0..42).map(|_| if rng.random() { 1e6 } else { -1e6 } * rng.random::<f64>()).collect());
            let z = forward_with_plan(&x, &g, &params, NeighborhoodPlan::full(&g, layers)).unwrap();
            assert!(z.0.is_finite());
        }
        let extreme = Matrix::from_vec(6, 7, vec![1e6; 42]);
        assert!(forward_with_plan(&extreme, &g, &params, NeighborhoodPlan::full(&g, layers)).unwrap().0.is_finite());
    }
}
