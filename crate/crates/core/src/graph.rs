//! Service dependency graph: nodes are service instances, edges are observed
//! call relations. Every node carries a self-loop and the symmetric
//! normalization `c_ij = sqrt(deg(i) · deg(j))` used by graph convolution.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::index;

use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum DirectionMode {
    /// `src -> dst` only adds `dst` to the neighborhood of `src`, so a
    /// caller aggregates its callees and never the other way round.
    #[default]
    Directed,
    /// Every edge is stored in both directions.
    Symmetrize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ServiceGraph {
    node_ids: Vec<String>,
    adjacency: Vec<Vec<usize>>,
    mode: DirectionMode,
}

impl ServiceGraph {
    /// Build a graph from `(src, dst)` pairs plus optional extra nodes.
    ///
    /// Duplicate edges collapse, every node gets a self-loop and node indices
    /// follow lexicographic order of the ids.
    pub fn build<S: AsRef<str>>(
        edges: &[(S, S)],
        extra_nodes: &[S],
        mode: DirectionMode,
    ) -> Result<Self> {
        let mut ids: BTreeSet<&str> = BTreeSet::new();
        for (src, dst) in edges {
            let (src, dst) = (src.as_ref(), dst.as_ref());
            if src.is_empty() || dst.is_empty() {
                return Err(Error::EmptyNodeId);
            }
            ids.insert(src);
            ids.insert(dst);
        }
        for node in extra_nodes {
            let node = node.as_ref();
            if node.is_empty() {
                return Err(Error::EmptyNodeId);
            }
            ids.insert(node);
        }
        if ids.is_empty() {
            return Err(Error::EmptyGraph);
        }

        let node_ids: Vec<String> = ids.iter().map(|s| s.to_string()).collect();
        let index_of = |id: &str| node_ids.binary_search_by(|n| n.as_str().cmp(id)).ok();

        let mut sets: Vec<BTreeSet<usize>> = (0..node_ids.len()).map(|i| BTreeSet::from([i])).collect();
        for (src, dst) in edges {
            // Both ids were inserted above.
            let s = index_of(src.as_ref()).unwrap();
            let d = index_of(dst.as_ref()).unwrap();
            sets[s].insert(d);
            if mode == DirectionMode::Symmetrize {
                sets[d].insert(s);
            }
        }
        let adjacency = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        Ok(Self { node_ids, adjacency, mode })
    }

    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn mode(&self) -> DirectionMode {
        self.mode
    }

    pub fn node_ids(&self) -> &[String] {
        &self.node_ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.node_ids.binary_search_by(|n| n.as_str().cmp(id)).ok()
    }

    /// Sorted neighbor indices of `node`, self-loop included.
    pub fn adjacency(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adjacency[i].binary_search(&j).is_ok()
    }

    /// `c_ij` for a stored pair, `None` when `j` is not a neighbor of `i`.
    pub fn norm_coeff(&self, i: usize, j: usize) -> Option<f64> {
        self.has_edge(i, j).then(|| self.coeff_unchecked(i, j))
    }

    #[inline]
    pub(crate) fn coeff_unchecked(&self, i: usize, j: usize) -> f64 {
        libm::sqrt((self.degree(i) * self.degree(j)) as f64)
    }

    /// Sorted, deduplicated edge list with self-loops omitted.
    pub fn edge_dump(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (i, adj) in self.adjacency.iter().enumerate() {
            for &j in adj.iter().filter(|&&j| j != i) {
                out.push((self.node_ids[i].clone(), self.node_ids[j].clone()));
            }
        }
        out
    }

    /// Neighborhood of `node` capped at `cap` entries.
    ///
    /// Returns the full adjacency when it fits; otherwise the self-loop plus a
    /// uniform sample of `cap - 1` other neighbors, sorted. The sample is a
    /// pure function of `(seed ^ node, cap)`.
    pub fn sample_neighborhood(&self, node: usize, cap: usize, seed: u64) -> Result<Vec<usize>> {
        if node >= self.len() {
            return Err(Error::NodeOutOfRange { index: node, len: self.len() });
        }
        if cap == 0 {
            return Err(Error::InvalidConfig("neighborhood cap must be >= 1".into()));
        }
        let adj = &self.adjacency[node];
        if adj.len() <= cap {
            return Ok(adj.clone());
        }
        let others: Vec<usize> = adj.iter().copied().filter(|&j| j != node).collect();
        let mut rng = rng::rng_from(seed ^ node as u64);
        let mut picked: Vec<usize> =
            index::sample(&mut rng, others.len(), cap - 1).into_iter().map(|k| others[k]).collect();
        picked.push(node);
        picked.sort_unstable();
        Ok(picked)
    }

    /// Full (uncapped) neighborhoods for every node.
    pub fn full_neighborhoods(&self) -> Vec<Vec<usize>> {
        self.adjacency.clone()
    }
}

pub fn build_graph<S: AsRef<str>>(edges: &[(S, S)], mode: DirectionMode) -> Result<ServiceGraph> {
    ServiceGraph::build(edges, &[], mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use proptest::prelude::*;

    fn chain() -> ServiceGraph {
        build_graph(&[("A", "B"), ("B", "C")], DirectionMode::Symmetrize).unwrap()
    }

    #[test]
    fn minimal_symmetrized_pair() {
        let g = build_graph(&[("A", "B")], DirectionMode::Symmetrize).unwrap();
        assert_eq!(g.node_ids(), &["A", "B"]);
        assert_eq!(g.adjacency(0), &[0, 1]);
        assert_eq!(g.adjacency(1), &[0, 1]);
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(1), 2);
    }

    #[test]
    fn self_loop_collapses() {
        let g = build_graph(&[("A", "A")], DirectionMode::Symmetrize).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.adjacency(0), &[0]);
        assert_eq!(g.norm_coeff(0, 0), Some(1.0));
    }

    #[test]
    fn chain_coefficients() {
        let g = chain();
        assert_eq!(g.degree(1), 3);
        let c = g.norm_coeff(0, 1).unwrap();
        assert!((c - 6f64.sqrt()).abs() < 1e-15);
        assert!((c - 2.4495).abs() < 1e-4);
        assert_eq!(g.norm_coeff(0, 2), None);
    }

    #[test]
    fn directed_mode_keeps_orientation() {
        let g = build_graph(&[("A", "B")], DirectionMode::Directed).unwrap();
        assert_eq!(g.adjacency(0), &[0, 1]);
        assert_eq!(g.adjacency(1), &[1]);
    }

    #[test]
    fn duplicates_collapse_and_order_is_lexicographic() {
        let g = build_graph(&[("z", "a"), ("z", "a"), ("m", "z")], DirectionMode::Symmetrize).unwrap();
        assert_eq!(g.node_ids(), &["a", "m", "z"]);
        assert_eq!(g.adjacency(2), &[0, 1, 2]);
    }

    #[test]
    fn empty_input_is_rejected() {
        let none: [(&str, &str); 0] = [];
        assert_eq!(build_graph(&none, DirectionMode::Symmetrize), Err(Error::EmptyGraph));
        assert_eq!(build_graph(&[("", "x")], DirectionMode::Symmetrize), Err(Error::EmptyNodeId));
        // An explicit node list alone is enough.
        let g = ServiceGraph::build(&none, &["solo"], DirectionMode::Symmetrize).unwrap();
        assert_eq!(g.adjacency(0), &[0]);
    }

    fn star(leaves: usize) -> ServiceGraph {
        let edges: Vec<(String, String)> =
            (0..leaves).map(|k| ("hub".to_string(), alloc::format!("leaf{k:02}"))).collect();
        build_graph(&edges, DirectionMode::Symmetrize).unwrap()
    }

    #[test]
    fn sampling_under_cap_returns_full_adjacency() {
        let g = chain();
        assert_eq!(g.sample_neighborhood(0, 5, 1).unwrap(), g.adjacency(0));
    }

    #[test]
    fn sampling_over_cap_keeps_self_and_is_deterministic() {
        let g = star(20);
        let hub = g.index_of("hub").unwrap();
        assert_eq!(g.degree(hub), 21);
        let a = g.sample_neighborhood(hub, 10, 42).unwrap();
        assert_eq!(a.len(), 10);
        assert!(a.contains(&hub));
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a, g.sample_neighborhood(hub, 10, 42).unwrap());
    }

    #[test]
    fn sampling_rejects_bad_node() {
        let g = chain();
        assert!(matches!(g.sample_neighborhood(9, 3, 0), Err(Error::NodeOutOfRange { .. })));
    }

    fn arb_edges() -> impl Strategy<Value = Vec<(String, String)>> {
        prop::collection::vec((0u8..10, 0u8..10), 1..30).prop_map(|v| {
            v.into_iter()
                .map(|(a, b)| (alloc::format!("s{a}"), alloc::format!("s{b}")))
                .collect()
        })
    }

    proptest! {
        #[test]
        fn invariants_hold(edges in arb_edges(), directed in any::<bool>()) {
            let mode = if directed { DirectionMode::Directed } else { DirectionMode::Symmetrize };
            let g = build_graph(&edges, mode).unwrap();
            for i in 0..g.len() {
                let adj = g.adjacency(i);
                prop_assert_eq!(adj.iter().filter(|&&j| j == i).count(), 1);
                prop_assert!(adj.windows(2).all(|w| w[0] < w[1]));
                prop_assert_eq!(g.degree(i), adj.len());
                for &j in adj {
                    let c = g.norm_coeff(i, j).unwrap();
                    prop_assert!(c > 0.0);
                    prop_assert_eq!(c, g.coeff_unchecked(j, i));
                }
            }
            let rebuilt = ServiceGraph::build(&g.edge_dump(), g.node_ids(), mode).unwrap();
            prop_assert_eq!(&rebuilt, &g);
        }

        #[test]
        fn samples_are_subsets(edges in arb_edges(), cap in 1usize..6, seed in any::<u64>()) {
            let g = build_graph(&edges, DirectionMode::Symmetrize).unwrap();
            for i in 0..g.len() {
                let s = g.sample_neighborhood(i, cap, seed).unwrap();
                prop_assert!(s.len() <= cap.max(1));
                prop_assert!(s.contains(&i));
                prop_assert!(s.iter().all(|j| g.adjacency(i).contains(j)));
            }
        }
    }

    #[test]
    fn dump_omits_self_loops() {
        let g = chain();
        assert_eq!(
            g.edge_dump(),
            vec![
                ("A".to_string(), "B".to_string()),
                ("B".to_string(), "A".to_string()),
                ("B".to_string(), "C".to_string()),
                ("C".to_string(), "B".to_string()),
            ]
        );
    }
}
