//! Loose paths threaded through a sequence of parts.
//!
//! Given `1 + (r-1)L` disjoint parts, a linear path crossing them takes one
//! vertex per part in order: the i-th edge occupies parts `(r-1)(i-1)`
//! through `(r-1)i`, so consecutive edges share the junction vertex sitting
//! in the common part.
//!
//! Paths are built layer by layer, many in parallel: parts are first
//! trimmed to the smallest part size m, a maximal crossing matching fills
//! the first edge block, and each later block extends the surviving path
//! ends by another maximal matching whose first part is the set of live
//! ends. Every layer kills at most the restricted hole number of its block,
//! so at least `m - L * max-hole` paths survive the full run; under the
//! usual size hypothesis that is positive, and a stall (no survivors at
//! some block) is reported with the blocking block index as a hole-witness
//! hint.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{PartTuple, RGraph};
use crate::matching::find_matching;
use crate::Result;

/// One loose path: `vertices[j]` lies in part `j`; every window of r
/// vertices aligned to a block boundary is an edge. The endpoints are
/// `vertices[0]` and `vertices[last]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinearPath {
    pub vertices: Vec<usize>,
}

impl LinearPath {
    pub fn layers(&self, r: usize) -> usize {
        (self.vertices.len() - 1) / (r - 1)
    }

    /// The two designated endpoints.
    pub fn endpoints(&self) -> (usize, usize) {
        (self.vertices[0], *self.vertices.last().unwrap())
    }

    /// The edges of the path as sorted vertex sets.
    pub fn edges(&self, r: usize) -> Vec<Vec<usize>> {
        (0..self.layers(r))
            .map(|i| {
                let mut e = self.vertices[(r - 1) * i..=(r - 1) * (i + 1)].to_vec();
                e.sort_unstable();
                e
            })
            .collect()
    }

    pub fn verify(&self, g: &RGraph, parts: &PartTuple) -> Result<()> {
        let r = g.r();
        if self.vertices.len() != parts.len() {
            return Err(Error::InvalidInput(format!(
                "path of {} vertices over {} parts",
                self.vertices.len(),
                parts.len()
            )));
        }
        let mut sorted = self.vertices.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != self.vertices.len() {
            return Err(Error::InvalidInput("path repeats a vertex".into()));
        }
        for (j, &v) in self.vertices.iter().enumerate() {
            if !parts.parts()[j].contains(&v) {
                return Err(Error::InvalidInput(format!("vertex {v} not in part {j}")));
            }
        }
        for e in self.edges(r) {
            if !g.is_edge(&e) {
                return Err(Error::InvalidInput(format!("{e:?} is not an edge")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LinearPathSystem {
    pub paths: Vec<LinearPath>,
    pub layers: usize,
    /// Common part size after trimming.
    pub width: usize,
}

/// One crossing path from the first to the last part: the first survivor of
/// the parallel construction in [`find_linear_paths`]. A stall reports the
/// blocking block index.
pub fn find_linear_path(g: &RGraph, parts: &PartTuple) -> Result<LinearPath> {
    let sys = find_linear_paths(g, parts)?;
    sys.paths.into_iter().next().ok_or_else(|| Error::PipelineFailure {
        stage: "linear-path".into(),
        detail: "no survivor; block 1 produced an empty matching".into(),
    })
}

/// Threads vertex-disjoint loose paths through the disjoint `parts`
/// (their count must be `1 + (r-1)L`). Parts are trimmed to the minimum
/// size m in label order; the result carries at least `m - L * h` paths,
/// where h bounds the restricted hole numbers of the blocks. Losing every
/// path at some block is a stall and reported as a pipeline failure naming
/// the block.
pub fn find_linear_paths(g: &RGraph, parts: &PartTuple) -> Result<LinearPathSystem> {
    let r = g.r();
    parts.check_labels(g.n())?;
    if !parts.is_disjoint() {
        return Err(Error::InvalidInput("path parts must be disjoint".into()));
    }
    if parts.len() < r || (parts.len() - 1) % (r - 1) != 0 {
        return Err(Error::InvalidInput(format!(
            "{} parts cannot host whole edge blocks of arity {r}",
            parts.len()
        )));
    }
    let layers = (parts.len() - 1) / (r - 1);
    let width = parts.min_size();
    if width == 0 {
        return Err(Error::InvalidInput("empty part".into()));
    }
    let trimmed: Vec<Vec<usize>> =
        parts.parts().iter().map(|p| p[..width].to_vec()).collect();

    // Layer 1: a maximal crossing matching over the first block.
    let block: Vec<Vec<usize>> = trimmed[..r].to_vec();
    let first = find_matching(g, &PartTuple::new(block)?, None, 0)?;
    let mut paths: Vec<Vec<usize>> = first.matching.tuples;

    for layer in 1..layers {
        if paths.is_empty() {
            return Err(Error::PipelineFailure {
                stage: "linear-path".into(),
                detail: format!("all paths stalled before block {}", layer + 1),
            });
        }
        // Live ends sit in the junction part (r-1)*layer; the next block
        // runs through the following r-1 trimmed parts.
        let ends: Vec<usize> = paths.iter().map(|p| *p.last().unwrap()).collect();
        let mut block = vec![ends];
        for j in 0..r - 1 {
            block.push(trimmed[(r - 1) * layer + 1 + j].clone());
        }
        let step = find_matching(g, &PartTuple::new(block)?, None, 0)?;
        let by_end: std::collections::BTreeMap<usize, Vec<usize>> = step
            .matching
            .tuples
            .into_iter()
            .map(|t| (t[0], t[1..].to_vec()))
            .collect();
        paths.retain_mut(|p| {
            if let Some(ext) = by_end.get(p.last().unwrap()) {
                p.extend_from_slice(ext);
                true
            } else {
                false
            }
        });
    }
    if paths.is_empty() {
        return Err(Error::PipelineFailure {
            stage: "linear-path".into(),
            detail: format!("all paths stalled at block {layers}"),
        });
    }

    let system = LinearPathSystem {
        paths: paths.into_iter().map(|vertices| LinearPath { vertices }).collect(),
        layers,
        width,
    };
    let trimmed_tuple = PartTuple::new(trimmed)?;
    for p in &system.paths {
        p.verify(g, &trimmed_tuple)?;
    }
    Ok(system)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_host_loses_nothing() {
        let g = RGraph::complete(3, 15).unwrap();
        // Two layers: parts of sizes 3 at positions 0, 1+2, 3+4.
        let parts = PartTuple::new(vec![
            vec![0, 1, 2],
            vec![3, 4, 5],
            vec![6, 7, 8],
            vec![9, 10, 11],
            vec![12, 13, 14],
        ])
        .unwrap();
        let sys = find_linear_paths(&g, &parts).unwrap();
        assert_eq!(sys.layers, 2);
        assert_eq!(sys.paths.len(), 3);
        for p in &sys.paths {
            assert_eq!(p.vertices.len(), 5);
        }
        // Paths are vertex-disjoint.
        let mut all: Vec<usize> =
            sys.paths.iter().flat_map(|p| p.vertices.iter().copied()).collect();
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), total);

        // The single-path entry point picks a survivor with the right ends.
        let p = find_linear_path(&g, &parts).unwrap();
        let (u, v) = p.endpoints();
        assert!(u <= 2 && v >= 12);
    }

    #[test]
    fn unequal_parts_trim_to_the_smallest() {
        let g = RGraph::complete(2, 10).unwrap();
        let parts =
            PartTuple::new(vec![vec![0, 1], vec![2, 3, 4, 5], vec![6, 7, 8, 9]]).unwrap();
        let sys = find_linear_paths(&g, &parts).unwrap();
        assert_eq!(sys.width, 2);
        assert_eq!(sys.paths.len(), 2);
        for p in &sys.paths {
            assert_eq!(p.vertices.len(), 3);
        }
    }

    #[test]
    fn dead_ends_drop_paths_not_the_system() {
        // 2-uniform, two layers over parts {0,1}, {2,3}, {4,5}: vertex 3 has
        // no edge into {4,5}, so exactly one path survives to the end.
        let g = RGraph::new(2, 6, vec![vec![0, 2], vec![1, 3], vec![2, 4]]).unwrap();
        let parts = PartTuple::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let sys = find_linear_paths(&g, &parts).unwrap();
        assert_eq!(sys.paths.len(), 1);
        assert_eq!(sys.paths[0].vertices, vec![0, 2, 4]);
    }

    #[test]
    fn empty_first_block_is_a_stall() {
        let g = RGraph::new(2, 6, vec![vec![4, 5]]).unwrap();
        let parts = PartTuple::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        match find_linear_paths(&g, &parts) {
            Err(Error::PipelineFailure { detail, .. }) => {
                assert!(detail.contains("block"), "{detail}")
            }
            other => panic!("expected a stall, got {other:?}"),
        }
    }

    #[test]
    fn bad_part_counts_are_rejected() {
        let g = RGraph::complete(3, 8).unwrap();
        let parts = PartTuple::new(vec![vec![0, 1], vec![2, 3], vec![4, 5], vec![6, 7]]).unwrap();
        assert!(find_linear_paths(&g, &parts).is_err());
    }
}
