//! Peeling a hypertree down to a small base forest.
//!
//! `tree_split` repeatedly strips structure off a tree until at most a
//! `mu` fraction of the edges remains, recording each strip so the tree can
//! be rebuilt from the base by replaying the stages in order. Two stage
//! kinds exist. A matching stage removes a maximal matching of leaf-edges
//! (one per attachment vertex). A path stage, used at most once and only
//! when leaf-edges have become scarce, removes vertex-disjoint bare paths of
//! three edges whose endpoints stay behind in the peeled forest.
//!
//! `replay_split` verifies a recorded split against the original tree:
//! the base is small enough, every matching stage adds a matching of
//! leaf-edges of the grown forest whose leaves are exactly the new vertices,
//! and the path stage adds anchored three-edge bare paths with fresh
//! interiors.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tree::decompose::{carve_runs, subforest_degrees, BarePath};
use crate::tree::Hypertree;
use crate::Result;

/// Matching stages become scarce when fewer than one edge in this many is a
/// leaf-edge; that is when the single path stage fires.
const LEAFY_RATIO: usize = 48;

/// Number of edges in each path-stage run.
const PATH_LEN: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SplitStage {
    /// Edge indices of a matching of leaf-edges, added in this stage.
    Matching { edges: Vec<usize> },
    /// Anchored bare paths of three edges, added in this stage.
    Paths { paths: Vec<BarePath> },
}

impl SplitStage {
    pub fn edge_indices(&self) -> Vec<usize> {
        match self {
            SplitStage::Matching { edges } => edges.clone(),
            SplitStage::Paths { paths } => {
                paths.iter().flat_map(|p| p.edges.iter().copied()).collect()
            }
        }
    }
}

/// A recorded peeling: `t0` is the base forest (edge indices into the
/// original tree), `stages` grow it back in order, `s` locates the path
/// stage among them when one fired.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSequence {
    pub t0: Vec<usize>,
    pub stages: Vec<SplitStage>,
    pub s: Option<usize>,
}

impl SplitSequence {
    pub fn stage_count(&self) -> usize {
        self.stages.len()
    }
}

/// Peels `tree` down to at most `mu * e(T)` edges and records the stages.
pub fn tree_split(tree: &Hypertree, mu: f64) -> Result<SplitSequence> {
    if !(0.0..1.0).contains(&mu) {
        return Err(Error::InvalidInput(format!("mu={mu} out of range [0,1)")));
    }
    let e_total = tree.edge_count();
    let target = (mu * e_total as f64).floor() as usize;
    let path_cap = target;

    let mut active = vec![true; tree.edge_count()];
    let mut count = e_total;
    let mut stages_rev: Vec<SplitStage> = Vec::new();
    let mut path_stage_done = false;

    while count > target {
        let deg = subforest_degrees(tree, &active);
        let leaf_edges = subforest_leaf_edges(tree, &active, &deg);
        let leafy = leaf_edges.len() * LEAFY_RATIO >= count;
        if !leafy && !path_stage_done {
            path_stage_done = true;
            let runs = carve_runs(tree, &active, &deg, PATH_LEN, true, path_cap);
            if !runs.is_empty() {
                for p in &runs {
                    for &i in &p.edges {
                        active[i] = false;
                        count -= 1;
                    }
                }
                stages_rev.push(SplitStage::Paths { paths: runs });
                continue;
            }
        }
        // Maximal matching of leaf-edges: the smallest-index edge per
        // attachment vertex; isolated edges have no attachment and all go.
        let mut taken = Vec::new();
        let mut used_centers = std::collections::BTreeSet::new();
        for &i in &leaf_edges {
            match tree.edge(i).iter().copied().find(|&w| deg[w] >= 2) {
                Some(c) => {
                    if used_centers.insert(c) {
                        taken.push(i);
                    }
                }
                None => taken.push(i),
            }
        }
        if taken.is_empty() {
            return Err(Error::Internal("nonempty forest without leaf-edges".into()));
        }
        for &i in &taken {
            active[i] = false;
            count -= 1;
        }
        stages_rev.push(SplitStage::Matching { edges: taken });
    }

    let t0: Vec<usize> = (0..e_total).filter(|&i| active[i]).collect();
    let s_rev_pos = stages_rev.iter().position(|st| matches!(st, SplitStage::Paths { .. }));
    let total = stages_rev.len();
    let stages: Vec<SplitStage> = stages_rev.into_iter().rev().collect();
    let s = s_rev_pos.map(|p| total - 1 - p);
    Ok(SplitSequence { t0, stages, s })
}

/// Leaf-edges of the subforest: active edges with at least r-1 vertices of
/// subforest degree one.
fn subforest_leaf_edges(tree: &Hypertree, active: &[bool], deg: &[usize]) -> Vec<usize> {
    let r = tree.r();
    (0..tree.edge_count())
        .filter(|&i| {
            active[i] && tree.edge(i).iter().filter(|&&w| deg[w] == 1).count() + 1 >= r
        })
        .collect()
}

/// Verifies a recorded split against `tree` and `mu`; errors carry the first
/// violated condition.
pub fn replay_split(tree: &Hypertree, split: &SplitSequence, mu: f64) -> Result<()> {
    let e_total = tree.edge_count();
    if split.t0.len() as f64 > mu * e_total as f64 {
        return Err(Error::InvalidInput(format!(
            "base forest keeps {} of {e_total} edges, above the mu={mu} budget",
            split.t0.len()
        )));
    }
    let path_positions: Vec<usize> = split
        .stages
        .iter()
        .enumerate()
        .filter(|(_, st)| matches!(st, SplitStage::Paths { .. }))
        .map(|(i, _)| i)
        .collect();
    if path_positions.len() > 1 {
        return Err(Error::InvalidInput("more than one path stage".into()));
    }
    if path_positions.first().copied() != split.s {
        return Err(Error::InvalidInput("path stage index does not match the stages".into()));
    }

    let mut active = vec![false; e_total];
    for &i in &split.t0 {
        if i >= e_total || active[i] {
            return Err(Error::InvalidInput(format!("bad base edge index {i}")));
        }
        active[i] = true;
    }

    for (pos, stage) in split.stages.iter().enumerate() {
        let before_deg = subforest_degrees(tree, &active);
        let added = stage.edge_indices();
        for &i in &added {
            if i >= e_total || active[i] {
                return Err(Error::InvalidInput(format!("stage {pos} re-adds edge {i}")));
            }
            active[i] = true;
        }
        let after_deg = subforest_degrees(tree, &active);
        match stage {
            SplitStage::Matching { edges } => {
                // A matching: added edges pairwise disjoint.
                let mut seen = std::collections::BTreeSet::new();
                for &i in edges {
                    for &w in tree.edge(i) {
                        if !seen.insert(w) {
                            return Err(Error::InvalidInput(format!(
                                "stage {pos}: added edges share vertex {w}"
                            )));
                        }
                    }
                }
                // Each added edge is a leaf-edge of the grown forest and the
                // new vertices are exactly the leaves of the matching.
                let r = tree.r();
                let mut leaves = Vec::new();
                for &i in edges {
                    let ones =
                        tree.edge(i).iter().filter(|&&w| after_deg[w] == 1).count();
                    if ones + 1 < r {
                        return Err(Error::InvalidInput(format!(
                            "stage {pos}: edge {i} is not a leaf-edge after adding"
                        )));
                    }
                    leaves.extend(
                        tree.edge(i).iter().copied().filter(|&w| after_deg[w] == 1),
                    );
                }
                leaves.sort_unstable();
                let mut fresh: Vec<usize> = (0..tree.n())
                    .filter(|&w| before_deg[w] == 0 && after_deg[w] > 0)
                    .collect();
                fresh.sort_unstable();
                if leaves != fresh {
                    return Err(Error::InvalidInput(format!(
                        "stage {pos}: new vertices differ from the matching leaf set"
                    )));
                }
            }
            SplitStage::Paths { paths } => {
                let mut seen = std::collections::BTreeSet::new();
                for p in paths {
                    if p.len() != PATH_LEN {
                        return Err(Error::InvalidInput(format!(
                            "stage {pos}: path of length {} (want {PATH_LEN})",
                            p.len()
                        )));
                    }
                    p.verify_in(tree, &active)?;
                    if before_deg[p.u] == 0 || before_deg[p.v] == 0 {
                        return Err(Error::InvalidInput(format!(
                            "stage {pos}: path endpoint not anchored in the peeled forest"
                        )));
                    }
                    for w in p.vertex_set(tree) {
                        if !seen.insert(w) {
                            return Err(Error::InvalidInput(format!(
                                "stage {pos}: paths share vertex {w}"
                            )));
                        }
                        if w != p.u && w != p.v && before_deg[w] != 0 {
                            return Err(Error::InvalidInput(format!(
                                "stage {pos}: interior vertex {w} already present"
                            )));
                        }
                    }
                }
            }
        }
    }

    if active.iter().any(|&b| !b) {
        return Err(Error::InvalidInput("stages do not rebuild the full tree".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::RGraph;

    fn tree_of(r: usize, n: usize, edges: Vec<Vec<usize>>) -> Hypertree {
        Hypertree::from_graph(RGraph::new(r, n, edges).unwrap(), false).unwrap()
    }

    fn loose_path_tree(r: usize, len: usize) -> Hypertree {
        let edges: Vec<Vec<usize>> =
            (0..len).map(|i| ((r - 1) * i..=(r - 1) * (i + 1)).collect()).collect();
        tree_of(r, (r - 1) * len + 1, edges)
    }

    #[test]
    fn splits_and_replays_a_long_path() {
        // A bare path is the leaf-poorest tree; long enough, it starves the
        // matching stages and the path stage must fire.
        let t = loose_path_tree(2, 120);
        let split = tree_split(&t, 0.1).unwrap();
        assert!(split.t0.len() <= 12);
        assert!(split.s.is_some());
        replay_split(&t, &split, 0.1).unwrap();
    }

    #[test]
    fn splits_and_replays_a_leafy_tree() {
        // A spider with many short legs peels by matchings alone.
        let mut edges = Vec::new();
        for leg in 0..6usize {
            let base = 1 + leg * 4;
            edges.push(vec![0, base]);
            edges.push(vec![base, base + 1]);
            edges.push(vec![base + 1, base + 2]);
            edges.push(vec![base + 2, base + 3]);
        }
        let t = tree_of(2, 25, edges);
        let split = tree_split(&t, 0.3).unwrap();
        assert!(split.t0.len() as f64 <= 0.3 * 24.0);
        replay_split(&t, &split, 0.3).unwrap();
    }

    #[test]
    fn three_uniform_tree_replays() {
        let t = loose_path_tree(3, 15);
        let split = tree_split(&t, 0.4).unwrap();
        replay_split(&t, &split, 0.4).unwrap();
        // Tampering is caught: drop an edge from the base.
        let mut bad = split.clone();
        if !bad.t0.is_empty() {
            bad.t0.pop();
            assert!(replay_split(&t, &bad, 0.4).is_err());
        } else {
            let mut st = bad.stages.pop().unwrap();
            if let SplitStage::Matching { edges } = &mut st {
                edges.pop();
            }
            bad.stages.push(st);
            assert!(replay_split(&t, &bad, 0.4).is_err());
        }
    }

    #[test]
    fn mu_zero_peels_everything() {
        let t = loose_path_tree(2, 9);
        let split = tree_split(&t, 0.0).unwrap();
        assert!(split.t0.is_empty());
        replay_split(&t, &split, 0.0).unwrap();
    }
}
