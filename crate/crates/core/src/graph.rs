//! Structural synergy of weighted graphs: mean off-diagonal communicability
//! as a set function over the edges that survive a failure.

use nalgebra::DMatrix;
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};
use serde::Serialize;

use crate::engine::{backbone, BackboneConfig, BackboneSpectrum, SetFunction};
use crate::error::{Error, Result};
use crate::expm::{matrix_exponential, offdiagonal_sum_of_exp, DEFAULT_TOLERANCE};
use crate::subset::{SubsetMask, MAX_GROUND_SIZE};

/// Largest edge count accepted by the exhaustive edge-failure sweep.
pub const EXACT_EDGE_LIMIT: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Non-negatively weighted graph without self-loops or duplicate edges.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedGraph {
    num_nodes: usize,
    edges: Vec<Edge>,
    directed: bool,
}

impl WeightedGraph {
    pub fn new(num_nodes: usize, edges: Vec<Edge>, directed: bool) -> Result<Self> {
        if num_nodes == 0 {
            return Err(Error::InvalidGraph("graph needs at least one node".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for (i, e) in edges.iter().enumerate() {
            if e.u >= num_nodes || e.v >= num_nodes {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} ({},{}) references a node outside 0..{num_nodes}",
                    e.u, e.v
                )));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("edge {i} is a self-loop on node {}", e.u)));
            }
            if !e.w.is_finite() || e.w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} ({},{}) has weight {}; weights must be finite and non-negative",
                    e.u, e.v, e.w
                )));
            }
            let key = if directed || e.u < e.v { (e.u, e.v) } else { (e.v, e.u) };
            if !seen.insert(key) {
                return Err(Error::InvalidGraph(format!(
                    "edge {i} ({},{}) duplicates an earlier edge",
                    e.u, e.v
                )));
            }
        }
        Ok(Self {
            num_nodes,
            edges,
            directed,
        })
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.num_nodes, self.num_nodes);
        for e in &self.edges {
            m[(e.u, e.v)] = e.w;
            if !self.directed {
                m[(e.v, e.u)] = e.w;
            }
        }
        m
    }

    /// Same graph with nodes renamed by `perm[old] = new`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.num_nodes {
            return Err(Error::Argument("permutation length must equal node count".into()));
        }
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                u: perm[e.u],
                v: perm[e.v],
                w: e.w,
            })
            .collect();
        Self::new(self.num_nodes, edges, self.directed)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CommunicabilityResult {
    /// `e^M`.
    pub matrix: DMatrix<f64>,
    /// Mean of `e^M` over ordered pairs `i != j`.
    pub mean_offdiagonal: f64,
}

pub fn communicability(g: &WeightedGraph) -> Result<CommunicabilityResult> {
    let matrix = matrix_exponential(&g.adjacency(), DEFAULT_TOLERANCE)?;
    let n = g.num_nodes();
    let mean_offdiagonal = if n < 2 {
        0.0
    } else {
        (matrix.sum() - matrix.trace()) / (n * (n - 1)) as f64
    };
    Ok(CommunicabilityResult {
        matrix,
        mean_offdiagonal,
    })
}

/// Mean off-diagonal communicability of the graph keeping only the
/// surviving edges. Ground set = edge list order.
pub struct EdgeFailure<'a> {
    graph: &'a WeightedGraph,
    full: f64,
}

impl<'a> EdgeFailure<'a> {
    pub fn new(graph: &'a WeightedGraph) -> Result<Self> {
        if graph.edges.len() > MAX_GROUND_SIZE {
            return Err(Error::TooLarge {
                what: "edge-failure set functions (edges)",
                size: graph.edges.len(),
                limit: MAX_GROUND_SIZE,
            });
        }
        let mut f = Self { graph, full: 0.0 };
        f.full = f.value(SubsetMask::full(graph.edges.len())?)?;
        Ok(f)
    }

    pub fn full_value(&self) -> f64 {
        self.full
    }
}

impl SetFunction for EdgeFailure<'_> {
    fn ground_size(&self) -> usize {
        self.graph.edges.len()
    }

    fn label(&self) -> String {
        "mean off-diagonal communicability".into()
    }

    // e^M is block diagonal over the (weakly) connected components of the
    // survivor graph, so each component is exponentiated on its own.
    fn value(&self, survivors: SubsetMask) -> Result<f64> {
        let n = self.graph.num_nodes;
        if survivors.is_empty() || n < 2 {
            return Ok(0.0);
        }
        let edges = &self.graph.edges;
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for i in survivors.indices() {
            let (a, b) = (root(&mut parent, edges[i].u), root(&mut parent, edges[i].v));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        // local index of each node inside its component
        let mut component = vec![usize::MAX; n];
        let mut local = vec![0; n];
        let mut sizes: Vec<usize> = Vec::new();
        for v in 0..n {
            let r = root(&mut parent, v);
            if component[r] == usize::MAX {
                component[r] = sizes.len();
                sizes.push(0);
            }
            let c = component[r];
            component[v] = c;
            local[v] = sizes[c];
            sizes[c] += 1;
        }
        let mut blocks: Vec<Option<DMatrix<f64>>> = sizes
            .iter()
            .map(|&s| (s >= 2).then(|| DMatrix::zeros(s, s)))
            .collect();
        for i in survivors.indices() {
            let e = &edges[i];
            let m = blocks[component[e.u]].as_mut().expect("edge endpoints share a block");
            m[(local[e.u], local[e.v])] = e.w;
            if !self.graph.directed {
                m[(local[e.v], local[e.u])] = e.w;
            }
        }
        let total: f64 = blocks.iter().flatten().map(offdiagonal_sum_of_exp).sum();
        Ok(total / (n * (n - 1)) as f64)
    }

    fn loss(&self, failed: SubsetMask) -> Result<f64> {
        Ok(self.full - self.value(failed.complement())?)
    }
}

pub fn edge_failure_setfunction(g: &WeightedGraph) -> Result<EdgeFailure<'_>> {
    EdgeFailure::new(g)
}

/// Backbone of communicability under edge failures. Atoms sum to the
/// intact graph's mean off-diagonal communicability.
pub fn structural_synergy_backbone(
    g: &WeightedGraph,
    config: &BackboneConfig,
) -> Result<BackboneSpectrum> {
    let m = g.edges().len();
    if m == 0 {
        return Err(Error::Argument("structural synergy needs at least one edge".into()));
    }
    if config.strategy.is_exact() && m > EXACT_EDGE_LIMIT {
        return Err(Error::TooLarge {
            what: "exhaustive edge-failure sweeps (use sampling or annealing)",
            size: m,
            limit: EXACT_EDGE_LIMIT,
        });
    }
    backbone(&EdgeFailure::new(g)?, config)
}

/// Erdős–Rényi G(n, m) graph with exponentially distributed weights of
/// rate `lambda`.
pub fn random_graph(n: usize, m: usize, lambda: f64, seed: u64) -> Result<WeightedGraph> {
    let pairs = n * n.saturating_sub(1) / 2;
    if m > pairs {
        return Err(Error::Argument(format!("{m} edges do not fit in {n} nodes")));
    }
    let exp = Exp::new(lambda).map_err(|e| Error::Argument(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen: Vec<usize> = index::sample(&mut rng, pairs, m).into_vec();
    chosen.sort_unstable();
    let mut all = Vec::with_capacity(pairs);
    for u in 0..n {
        for v in u + 1..n {
            all.push((u, v));
        }
    }
    let edges = chosen
        .into_iter()
        .map(|i| Edge {
            u: all[i].0,
            v: all[i].1,
            w: exp.sample(&mut rng),
        })
        .collect();
    WeightedGraph::new(n, edges, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{verify_desiderata, AggregatorKind};
    use approx::assert_abs_diff_eq;

    fn edge(u: usize, v: usize, w: f64) -> Edge {
        Edge { u, v, w }
    }

    #[test]
    fn validation() {
        assert!(WeightedGraph::new(3, vec![edge(0, 0, 1.0)], false).is_err());
        assert!(WeightedGraph::new(3, vec![edge(0, 1, -1.0)], false).is_err());
        assert!(WeightedGraph::new(3, vec![edge(0, 3, 1.0)], false).is_err());
        assert!(WeightedGraph::new(3, vec![edge(0, 1, 1.0), edge(1, 0, 2.0)], false).is_err());
        assert!(WeightedGraph::new(3, vec![edge(0, 1, 1.0), edge(1, 0, 2.0)], true).is_ok());
    }

    #[test]
    fn empty_graph_has_zero_communicability() {
        let g = WeightedGraph::new(4, vec![], false).unwrap();
        assert_eq!(communicability(&g).unwrap().mean_offdiagonal, 0.0);
    }

    #[test]
    fn single_edge() {
        let g = WeightedGraph::new(2, vec![edge(0, 1, 1.0)], false).unwrap();
        assert_abs_diff_eq!(communicability(&g).unwrap().mean_offdiagonal, 1.0f64.sinh(), epsilon = 1e-12);
        let f = edge_failure_setfunction(&g).unwrap();
        let one = SubsetMask::full(1).unwrap();
        assert_eq!(f.value(one.complement()).unwrap(), 0.0);
        assert_abs_diff_eq!(f.loss(one).unwrap(), 1.0f64.sinh(), epsilon = 1e-12);
    }

    #[test]
    fn triangle_is_vertex_transitive() {
        let g = WeightedGraph::new(3, vec![edge(0, 1, 1.0), edge(1, 2, 1.0), edge(0, 2, 1.0)], false)
            .unwrap();
        let c = communicability(&g).unwrap();
        let off: Vec<f64> = (0..3)
            .flat_map(|i| (0..3).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|ij| c.matrix[ij])
            .collect();
        for v in &off {
            assert_abs_diff_eq!(*v, off[0], epsilon = 1e-12);
        }
        assert!(verify_desiderata(&edge_failure_setfunction(&g).unwrap()).unwrap().is_admissible());
    }

    #[test]
    fn failure_function_endpoints() {
        let g = random_graph(6, 7, 1.0, 9).unwrap();
        let f = edge_failure_setfunction(&g).unwrap();
        let full = SubsetMask::full(7).unwrap();
        assert_abs_diff_eq!(
            f.value(full).unwrap(),
            communicability(&g).unwrap().mean_offdiagonal,
            epsilon = 1e-12
        );
        assert_eq!(f.value(full.complement()).unwrap(), 0.0);
    }

    #[test]
    fn componentwise_value_matches_dense_exponential() {
        for directed in [false, true] {
            let base = random_graph(9, 12, 1.0, 21).unwrap();
            let g = WeightedGraph::new(9, base.edges().to_vec(), directed).unwrap();
            let f = edge_failure_setfunction(&g).unwrap();
            for bits in [1u64, 0b1011, 0x0f0, 0x555, 0xaaa, 0xfff] {
                let survivors = SubsetMask::from_bits(12, bits).unwrap();
                let kept = survivors.indices().map(|i| g.edges()[i]).collect();
                let sub = WeightedGraph::new(9, kept, directed).unwrap();
                let dense = communicability(&sub).unwrap().mean_offdiagonal;
                assert_abs_diff_eq!(f.value(survivors).unwrap(), dense, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn exact_cap_enforced() {
        let g = random_graph(10, 21, 1.0, 1).unwrap();
        let r = structural_synergy_backbone(&g, &BackboneConfig::exact(AggregatorKind::Min));
        assert!(matches!(r, Err(Error::TooLarge { .. })));
        let none = WeightedGraph::new(3, vec![], false).unwrap();
        assert!(structural_synergy_backbone(&none, &BackboneConfig::exact(AggregatorKind::Min)).is_err());
    }

    #[test]
    fn gnm_generator_is_seeded() {
        let a = random_graph(10, 19, 1.0, 4).unwrap();
        assert_eq!(a, random_graph(10, 19, 1.0, 4).unwrap());
        assert_eq!(a.edges().len(), 19);
        assert!(a.edges().iter().all(|e| e.w >= 0.0 && e.u < e.v));
    }
}
