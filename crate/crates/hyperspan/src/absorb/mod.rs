//! Transversal factor patterns and the absorption tool chest.
//!
//! A factor pattern is a small r-graph on index set `0..t`. A transversal
//! copy of it picks one vertex from each of `t` host parts, pattern index i
//! landing in part i, so that every pattern edge maps to a host edge. A
//! transversal factor is a family of vertex-disjoint copies covering the
//! parts exactly. The submodules build the machinery that turns such copies
//! into absorbing structures: robust bipartite templates, per-set absorbers,
//! reachability diagnostics, absorbing-set assembly, and the perfect
//! matching pipeline.

pub mod absorber;
pub mod assemble;
pub mod pm;
pub mod reach;
pub mod template;

use crate::graph::{PartTuple, RGraph};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// A pattern r-graph on the index set `0..t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorPattern {
    pub f: RGraph,
    pub t: usize,
}

impl FactorPattern {
    /// Wrap an arbitrary pattern graph; its vertex count is the part count.
    pub fn new(f: RGraph) -> Result<Self> {
        if f.edge_count() == 0 {
            return Err(Error::InvalidInput("pattern graph has no edges".into()));
        }
        Ok(FactorPattern { t: f.n(), f })
    }

    /// The single-edge pattern: one r-edge on r parts.
    pub fn edge(r: usize) -> Result<Self> {
        FactorPattern::new(RGraph::new(r, r, vec![(0..r).collect()])?)
    }

    /// The loose cycle with `len` edges: consecutive edges share exactly one
    /// vertex, non-consecutive edges are disjoint, `len * (r-1)` vertices.
    pub fn loose_cycle(r: usize, len: usize) -> Result<Self> {
        if len < 3 {
            return Err(Error::InvalidInput(format!(
                "loose cycle needs at least 3 edges, got {len}"
            )));
        }
        let t = len * (r - 1);
        let edges = (0..len)
            .map(|i| (0..r).map(|j| (i * (r - 1) + j) % t).collect())
            .collect();
        FactorPattern::new(RGraph::new(r, t, edges)?)
    }

    pub fn r(&self) -> usize {
        self.f.r()
    }
}

/// Vertex-disjoint transversal copies of a pattern; in every copy, position
/// i holds the vertex drawn from part i.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransversalFactor {
    pub copies: Vec<Vec<usize>>,
}

impl TransversalFactor {
    /// All vertices across all copies, sorted.
    pub fn vertices(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self.copies.iter().flatten().copied().collect();
        all.sort_unstable();
        all
    }

    /// Copies rewritten as plain sorted host edges (only meaningful for the
    /// single-edge pattern, where a copy is an edge).
    pub fn to_edges(&self) -> Vec<Vec<usize>> {
        self.copies
            .iter()
            .map(|c| {
                let mut e = c.clone();
                e.sort_unstable();
                e
            })
            .collect()
    }

    /// Merge two factors over disjoint vertex sets.
    pub fn union(&self, other: &TransversalFactor) -> TransversalFactor {
        let mut copies = self.copies.clone();
        copies.extend(other.copies.iter().cloned());
        TransversalFactor { copies }
    }
}

/// Check that `factor` is a family of pairwise disjoint transversal copies
/// of `pat` in `g`: one vertex per part in index order, every pattern edge
/// an edge of the host. When `cover` is given, the copies must cover
/// exactly that vertex set.
pub fn verify_transversal_factor(
    g: &RGraph,
    parts: &PartTuple,
    pat: &FactorPattern,
    factor: &TransversalFactor,
    cover: Option<&[usize]>,
) -> Result<()> {
    if parts.len() != pat.t {
        return Err(Error::InvalidInput(format!(
            "pattern wants {} parts, got {}",
            pat.t,
            parts.len()
        )));
    }
    parts.check_labels(g.n())?;
    let mut seen = vec![false; g.n()];
    for copy in &factor.copies {
        if copy.len() != pat.t {
            return Err(Error::InvalidInput(format!(
                "copy {copy:?} does not have one vertex per part"
            )));
        }
        for (i, &v) in copy.iter().enumerate() {
            if !parts.parts()[i].contains(&v) {
                return Err(Error::InvalidInput(format!(
                    "copy vertex {v} is not in part {i}"
                )));
            }
            if seen[v] {
                return Err(Error::InvalidInput(format!(
                    "vertex {v} used by two copies"
                )));
            }
            seen[v] = true;
        }
        for pe in pat.f.edges() {
            let he: Vec<usize> = pe.iter().map(|&i| copy[i]).collect();
            if !g.is_edge(&he) {
                return Err(Error::InvalidInput(format!(
                    "copy {copy:?} misses host edge for pattern edge {pe:?}"
                )));
            }
        }
    }
    if let Some(want) = cover {
        let mut want: Vec<usize> = want.to_vec();
        want.sort_unstable();
        want.dedup();
        let got: Vec<usize> = (0..g.n()).filter(|&v| seen[v]).collect();
        if got != want {
            return Err(Error::InvalidInput(format!(
                "factor covers {} vertices, expected {}",
                got.len(),
                want.len()
            )));
        }
    }
    Ok(())
}

/// Exhaustive transversal-factor search over equal-size disjoint parts,
/// branching copy by copy with the lowest free vertex of part 0 pinned
/// first. Returns `None` when no factor exists; `budget` caps search nodes.
pub fn find_transversal_factor(
    g: &RGraph,
    parts: &PartTuple,
    pat: &FactorPattern,
    budget: u64,
) -> Result<Option<TransversalFactor>> {
    if parts.len() != pat.t {
        return Err(Error::InvalidInput(format!(
            "pattern wants {} parts, got {}",
            pat.t,
            parts.len()
        )));
    }
    parts.check_labels(g.n())?;
    if !parts.is_disjoint() {
        return Err(Error::InvalidInput("factor search needs disjoint parts".into()));
    }
    let size = parts.parts()[0].len();
    if parts.parts().iter().any(|p| p.len() != size) {
        return Err(Error::InvalidInput("factor search needs equal parts".into()));
    }
    if size == 0 {
        return Ok(Some(TransversalFactor::default()));
    }

    // Pattern edges keyed by their largest index: checkable as soon as the
    // copy prefix reaches that part.
    let mut closing: Vec<Vec<&Vec<usize>>> = vec![Vec::new(); pat.t];
    for pe in pat.f.edges() {
        let last = *pe.iter().max().expect("nonempty edge");
        closing[last].push(pe);
    }

    let mut used = vec![false; g.n()];
    let mut nodes = 0u64;
    let found = place_copies(
        g, parts, &closing, size, &mut used, &mut Vec::new(), budget, &mut nodes,
    )?;
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn place_copies(
    g: &RGraph,
    parts: &PartTuple,
    closing: &[Vec<&Vec<usize>>],
    remaining: usize,
    used: &mut [bool],
    done: &mut Vec<Vec<usize>>,
    budget: u64,
    nodes: &mut u64,
) -> Result<Option<TransversalFactor>> {
    if remaining == 0 {
        return Ok(Some(TransversalFactor { copies: done.clone() }));
    }
    // Pin the lowest free vertex of part 0: it must live in some copy, and
    // fixing it kills permutation symmetry between copies. The copy buffer
    // is owned by this frame; deeper copies must not clobber it, since the
    // loop in extend_copy revisits the prefix after a failed descent.
    let v0 = match parts.parts()[0].iter().copied().find(|&v| !used[v]) {
        Some(v) => v,
        None => return Ok(None),
    };
    let mut copy = vec![0usize; parts.len()];
    copy[0] = v0;
    used[v0] = true;
    let out = extend_copy(
        g, parts, closing, remaining, 1, used, &mut copy, done, budget, nodes,
    )?;
    used[v0] = false;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn extend_copy(
    g: &RGraph,
    parts: &PartTuple,
    closing: &[Vec<&Vec<usize>>],
    remaining: usize,
    depth: usize,
    used: &mut [bool],
    copy: &mut [usize],
    done: &mut Vec<Vec<usize>>,
    budget: u64,
    nodes: &mut u64,
) -> Result<Option<TransversalFactor>> {
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::GuardExceeded(format!(
            "factor search exceeded {budget} nodes"
        )));
    }
    if depth == copy.len() {
        done.push(copy.to_vec());
        let out = place_copies(
            g, parts, closing, remaining - 1, used, done, budget, nodes,
        )?;
        done.pop();
        return Ok(out);
    }
    for idx in 0..parts.parts()[depth].len() {
        let v = parts.parts()[depth][idx];
        if used[v] {
            continue;
        }
        copy[depth] = v;
        let ok = closing[depth].iter().all(|pe| {
            let he: Vec<usize> = pe.iter().map(|&i| copy[i]).collect();
            g.is_edge(&he)
        });
        if !ok {
            continue;
        }
        used[v] = true;
        let out = extend_copy(
            g, parts, closing, remaining, depth + 1, used, copy, done, budget, nodes,
        )?;
        used[v] = false;
        if out.is_some() {
            return Ok(out);
        }
    }
    Ok(None)
}

/// Restrict each part to the vertices of `keep`, preserving part order.
pub(crate) fn narrow_parts(parts: &PartTuple, keep: &[usize]) -> Result<PartTuple> {
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    let sets = parts
        .parts()
        .iter()
        .map(|p| {
            p.iter()
                .copied()
                .filter(|v| kept.binary_search(v).is_ok())
                .collect()
        })
        .collect();
    PartTuple::new(sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete_parts(r: usize, size: usize) -> (RGraph, PartTuple) {
        let n = r * size;
        let g = RGraph::complete(r, n).unwrap();
        let parts = PartTuple::new(
            (0..r).map(|i| (i * size..(i + 1) * size).collect()).collect(),
        )
        .unwrap();
        (g, parts)
    }

    #[test]
    fn patterns_have_expected_shape() {
        let e = FactorPattern::edge(3).unwrap();
        assert_eq!(e.t, 3);
        assert_eq!(e.f.edge_count(), 1);

        let c = FactorPattern::loose_cycle(3, 4).unwrap();
        assert_eq!(c.t, 8);
        assert_eq!(c.f.edge_count(), 4);
        // Consecutive edges share one vertex, opposite edges none.
        let edges = c.f.edges();
        let share = |a: &[usize], b: &[usize]| a.iter().filter(|v| b.contains(v)).count();
        assert_eq!(share(&edges[0], &edges[1]), 1);

        assert!(FactorPattern::loose_cycle(3, 2).is_err());
    }

    #[test]
    fn factor_search_covers_complete_hosts() {
        let (g, parts) = complete_parts(3, 4);
        let pat = FactorPattern::edge(3).unwrap();
        let factor = find_transversal_factor(&g, &parts, &pat, 1_000_000)
            .unwrap()
            .expect("complete host factors");
        assert_eq!(factor.copies.len(), 4);
        let all: Vec<usize> = (0..12).collect();
        verify_transversal_factor(&g, &parts, &pat, &factor, Some(&all)).unwrap();
    }

    #[test]
    fn factor_search_respects_missing_edges() {
        // Two parts of two vertices; only one crossing pair per matching is
        // present, so the factor must use exactly those edges.
        let g = RGraph::new(2, 4, vec![vec![0, 2], vec![1, 3]]).unwrap();
        let parts = PartTuple::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        let pat = FactorPattern::edge(2).unwrap();
        let factor = find_transversal_factor(&g, &parts, &pat, 10_000)
            .unwrap()
            .expect("unique factor");
        assert_eq!(factor.copies, vec![vec![0, 2], vec![1, 3]]);

        // Remove one edge: no factor remains.
        let g2 = RGraph::new(2, 4, vec![vec![0, 2]]).unwrap();
        assert!(find_transversal_factor(&g2, &parts, &pat, 10_000)
            .unwrap()
            .is_none());
    }

    #[test]
    fn loose_cycle_factor_on_complete_host() {
        // 6 parts of size 2 on a complete host: two disjoint cycle copies.
        let pat = FactorPattern::loose_cycle(3, 3).unwrap();
        let n = 12;
        let g = RGraph::complete(3, n).unwrap();
        let parts = PartTuple::new((0..6).map(|i| vec![2 * i, 2 * i + 1]).collect()).unwrap();
        let factor = find_transversal_factor(&g, &parts, &pat, 1_000_000)
            .unwrap()
            .expect("cycles fit");
        assert_eq!(factor.copies.len(), 2);
        let all: Vec<usize> = (0..n).collect();
        verify_transversal_factor(&g, &parts, &pat, &factor, Some(&all)).unwrap();
    }

    #[test]
    fn verifier_rejects_bad_factors() {
        let (g, parts) = complete_parts(3, 2);
        let pat = FactorPattern::edge(3).unwrap();
        // Two copies sharing a vertex.
        let bad = TransversalFactor {
            copies: vec![vec![0, 2, 4], vec![0, 3, 5]],
        };
        assert!(verify_transversal_factor(&g, &parts, &pat, &bad, None).is_err());
        // A copy out of its part.
        let bad = TransversalFactor { copies: vec![vec![2, 0, 4]] };
        assert!(verify_transversal_factor(&g, &parts, &pat, &bad, None).is_err());
    }
}
