//! Linear hypertrees and hyperforests.
//!
//! A linear hypertree is a connected r-uniform hypergraph in which any two
//! edges share at most one vertex and `|E| = (n - 1)/(r - 1)`; together these
//! force acyclicity. Forests relax connectivity: `|E| = (n - c)/(r - 1)`
//! with `c` components (isolated vertices count as components).
//!
//! A leaf is a degree-one vertex lying in a leaf-edge; a leaf-edge is an edge
//! with at least r-1 degree-one vertices. The leaf set of a matching of
//! leaf-edges collects exactly the leaves of its edges.

mod decompose;
mod split;

pub use decompose::{
    bare_paths, pendant_or_caterpillars, BarePath, Caterpillar, Decomposition, DecompositionCase,
    PendantStar,
};
pub use split::{replay_split, tree_split, SplitSequence, SplitStage};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::RGraph;
use crate::Result;

/// A validated linear hypertree or hyperforest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Hypertree {
    graph: RGraph,
    degrees: Vec<usize>,
    components: usize,
}

impl<'de> Deserialize<'de> for Hypertree {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let graph = RGraph::deserialize(de)?;
        Hypertree::from_graph(graph, true).map_err(serde::de::Error::custom)
    }
}

impl Hypertree {
    /// Validates `graph` as a hypertree (or hyperforest when `allow_forest`).
    /// Rejection reasons: non-linearity, wrong edge count for the component
    /// structure, or disconnectedness when a single tree is required.
    pub fn from_graph(graph: RGraph, allow_forest: bool) -> Result<Self> {
        let r = graph.r();
        let n = graph.n();
        // Linearity.
        let edges = graph.edges();
        for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let shared = intersect_sorted(&edges[i], &edges[j]).len();
                if shared > 1 {
                    return Err(Error::InvalidInput(format!(
                        "edges {:?} and {:?} share {shared} vertices; not linear",
                        edges[i], edges[j]
                    )));
                }
            }
        }
        // Components over all n vertices (isolated vertices included).
        let mut dsu: Vec<usize> = (0..n).collect();
        fn find(dsu: &mut Vec<usize>, x: usize) -> usize {
            let mut root = x;
            while dsu[root] != root {
                root = dsu[root];
            }
            let mut cur = x;
            while dsu[cur] != root {
                let next = dsu[cur];
                dsu[cur] = root;
                cur = next;
            }
            root
        }
        for e in edges {
            let a = find(&mut dsu, e[0]);
            for &v in &e[1..] {
                let b = find(&mut dsu, v);
                dsu[b] = a;
            }
        }
        let mut roots: Vec<usize> = (0..n).map(|v| find(&mut dsu, v)).collect();
        roots.sort_unstable();
        roots.dedup();
        let components = roots.len();
        if !allow_forest && components != 1 {
            return Err(Error::InvalidInput(format!(
                "{components} components; a hypertree must be connected"
            )));
        }
        if n < components || (n - components) % (r - 1) != 0 {
            return Err(Error::InvalidInput(format!(
                "vertex/component count ({n}, {components}) not compatible with r={r}"
            )));
        }
        let expected = (n - components) / (r - 1);
        if edges.len() != expected {
            return Err(Error::InvalidInput(format!(
                "{} edges, expected {expected} for an acyclic cover of {n} vertices in {components} components",
                edges.len()
            )));
        }
        let mut degrees = vec![0usize; n];
        for e in edges {
            for &v in e {
                degrees[v] += 1;
            }
        }
        Ok(Hypertree { graph, degrees, components })
    }

    pub fn graph(&self) -> &RGraph {
        &self.graph
    }

    pub fn r(&self) -> usize {
        self.graph.r()
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn edge(&self, idx: usize) -> &[usize] {
        &self.graph.edges()[idx]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn max_degree(&self) -> usize {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn is_connected(&self) -> bool {
        self.components == 1
    }

    /// Indices of edges with at least r-1 degree-one vertices.
    pub fn leaf_edges(&self) -> Vec<usize> {
        (0..self.edge_count()).filter(|&i| self.is_leaf_edge(i)).collect()
    }

    pub fn is_leaf_edge(&self, idx: usize) -> bool {
        let ones = self.edge(idx).iter().filter(|&&v| self.degrees[v] == 1).count();
        ones + 1 >= self.r()
    }

    /// Edge indices incident to `v`.
    pub fn incident(&self, v: usize) -> Vec<usize> {
        (0..self.edge_count()).filter(|&i| self.edge(i).binary_search(&v).is_ok()).collect()
    }
}

/// Validates that `edge_indices` form a matching of leaf-edges of `tree` and
/// returns its leaf set: the degree-one vertices of those edges, sorted.
pub fn matching_leaf_set(tree: &Hypertree, edge_indices: &[usize]) -> Result<Vec<usize>> {
    let mut seen = std::collections::BTreeSet::new();
    for &i in edge_indices {
        if i >= tree.edge_count() {
            return Err(Error::InvalidInput(format!("edge index {i} out of range")));
        }
        if !tree.is_leaf_edge(i) {
            return Err(Error::InvalidInput(format!("edge {:?} is not a leaf-edge", tree.edge(i))));
        }
        for &v in tree.edge(i) {
            if !seen.insert(v) {
                return Err(Error::InvalidInput(format!(
                    "edges are not a matching: vertex {v} repeats"
                )));
            }
        }
    }
    let mut leaves: Vec<usize> = edge_indices
        .iter()
        .flat_map(|&i| tree.edge(i).iter().copied())
        .filter(|&v| tree.degree(v) == 1)
        .collect();
    leaves.sort_unstable();
    Ok(leaves)
}

pub(crate) fn intersect_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loose_path(r: usize, len: usize) -> Hypertree {
        let n = (r - 1) * len + 1;
        let edges: Vec<Vec<usize>> =
            (0..len).map(|i| ((r - 1) * i..=(r - 1) * (i + 1)).collect()).collect();
        Hypertree::from_graph(RGraph::new(r, n, edges).unwrap(), false).unwrap()
    }

    #[test]
    fn accepts_loose_paths_and_stars() {
        let p = loose_path(3, 4);
        assert_eq!(p.edge_count(), 4);
        assert_eq!(p.leaf_edges(), vec![0, 3]);

        // Star: three edges through vertex 0.
        let star = RGraph::new(3, 7, vec![vec![0, 1, 2], vec![0, 3, 4], vec![0, 5, 6]]).unwrap();
        let star = Hypertree::from_graph(star, false).unwrap();
        assert_eq!(star.leaf_edges(), vec![0, 1, 2]);
        assert_eq!(star.degree(0), 3);
    }

    #[test]
    fn rejects_cycles_nonlinear_and_disconnected() {
        // Loose cycle: right edge count requires... a C_3^{(3)} has 6 vertices,
        // 3 edges, but (6-1)/2 is not integral, so it must be rejected.
        let c = RGraph::new(3, 6, vec![vec![0, 1, 2], vec![2, 3, 4], vec![0, 4, 5]]).unwrap();
        assert!(Hypertree::from_graph(c, false).is_err());

        // Two edges sharing two vertices: not linear.
        let bad = RGraph::new(3, 4, vec![vec![0, 1, 2], vec![0, 1, 3]]).unwrap();
        assert!(Hypertree::from_graph(bad, false).is_err());

        // Forest accepted only with the flag.
        let f = RGraph::new(3, 6, vec![vec![0, 1, 2]]).unwrap();
        assert!(Hypertree::from_graph(f.clone(), false).is_err());
        let f = Hypertree::from_graph(f, true).unwrap();
        assert_eq!(f.components(), 4); // one edge component + 3 isolated vertices
    }

    #[test]
    fn single_vertex_tree_is_fine() {
        let g = RGraph::new(2, 1, vec![]).unwrap();
        let t = Hypertree::from_graph(g, false).unwrap();
        assert_eq!(t.edge_count(), 0);
        assert!(t.leaf_edges().is_empty());
    }

    #[test]
    fn leaf_set_of_a_matching() {
        let p = loose_path(3, 4);
        // Edges 0 and 3 are disjoint leaf-edges; their leaves are the
        // degree-one vertices 0,1 and 8 (edge 0 = {0,1,2}) and 7,8 from {6,7,8}.
        let leaves = matching_leaf_set(&p, &[0, 3]).unwrap();
        assert_eq!(leaves, vec![0, 1, 7, 8]);
        // Adjacent edges 0,1 share vertex 2: not a matching.
        assert!(matching_leaf_set(&p, &[0, 1]).is_err());
        // Edge 1 is not a leaf-edge.
        assert!(matching_leaf_set(&p, &[1]).is_err());
    }
}
