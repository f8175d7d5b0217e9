//! Edge absorbers grown as staged lattices.
//!
//! An absorber of a balanced transversal set S is a fresh body S' such that
//! both G[S'] and G[S + S'] factor into crossing edges. The body grows as a
//! lattice of r rows: row j starts at the j-th target vertex and gains one
//! vertex per layer, always in the next part around the cycle, restricted
//! to vertices keeping the row's completion degree above a staged
//! threshold. Each layer is closed by one crossing edge through the new
//! column; the closing edges form the body-only factor, the full rows the
//! joint factor.

use super::{verify_transversal_factor, FactorPattern, TransversalFactor};
use crate::graph::{PartTuple, RGraph};
use crate::matching::high_degree_subset;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Candidate closing edges tried per layer before backtracking.
const LAYER_WIDTH: usize = 24;

/// A verified absorber: both stored factors re-check against the host.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Absorber {
    /// Target vertices, indexed by part.
    pub target: Vec<usize>,
    /// Body vertices, sorted.
    pub body: Vec<usize>,
    /// Factor of the body and target together: the lattice rows.
    pub on_factor: TransversalFactor,
    /// Factor of the body alone: the layer closing edges.
    pub off_factor: TransversalFactor,
    /// Body size bound parameter: |body| <= k * parts.
    pub k: usize,
}

/// Grow up to `count` pairwise disjoint edge absorbers of the balanced set
/// `s`, avoiding `forbidden`. Fails when the very first absorber stalls;
/// once at least one absorber exists, a later stall returns the partial
/// family.
pub fn find_edge_absorbers(
    g: &RGraph,
    parts: &PartTuple,
    s: &[usize],
    forbidden: &[usize],
    count: usize,
) -> Result<Vec<Absorber>> {
    parts.check_against(g)?;
    if !parts.is_disjoint() {
        return Err(Error::InvalidInput("absorbers need disjoint parts".into()));
    }
    let size = parts.parts()[0].len();
    if parts.parts().iter().any(|p| p.len() != size) {
        return Err(Error::InvalidInput("absorbers need equal part sizes".into()));
    }
    let target = index_by_part(parts, s)?;
    if forbidden.iter().any(|v| s.contains(v)) {
        return Err(Error::InvalidInput("target overlaps the forbidden set".into()));
    }

    // Density floor derived from the worst crossing degree, in placement
    // counts relative to the part-size power.
    let eps = crossing_density(g, parts)?;

    let mut absorbers: Vec<Absorber> = Vec::new();
    for _ in 0..count {
        let mut avoid: Vec<usize> = forbidden.to_vec();
        for a in &absorbers {
            avoid.extend_from_slice(&a.body);
        }
        avoid.sort_unstable();
        avoid.dedup();
        match grow_one(g, parts, &target, &avoid, eps) {
            Ok(a) => absorbers.push(a),
            Err(e) if absorbers.is_empty() => return Err(e),
            Err(_) => break,
        }
    }
    Ok(absorbers)
}

/// One vertex per part, reindexed so position i sits in part i.
fn index_by_part(parts: &PartTuple, s: &[usize]) -> Result<Vec<usize>> {
    if s.len() != parts.len() {
        return Err(Error::InvalidInput(format!(
            "target has {} vertices for {} parts",
            s.len(),
            parts.len()
        )));
    }
    let mut out = vec![usize::MAX; parts.len()];
    for &v in s {
        let i = parts
            .parts()
            .iter()
            .position(|p| p.contains(&v))
            .ok_or_else(|| Error::InvalidInput(format!("target vertex {v} is in no part")))?;
        if out[i] != usize::MAX {
            return Err(Error::InvalidInput(format!(
                "target has two vertices in part {i}"
            )));
        }
        out[i] = v;
    }
    Ok(out)
}

/// Worst directed crossing degree over the part-size power, in [0, 1].
fn crossing_density(g: &RGraph, parts: &PartTuple) -> Result<f64> {
    let size = parts.parts()[0].len();
    let mut worst = u64::MAX;
    for (i, part) in parts.parts().iter().enumerate() {
        let others: Vec<Vec<usize>> = parts
            .parts()
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, p)| p.clone())
            .collect();
        for &v in part {
            worst = worst.min(g.directed_degree(v, &others)?);
        }
    }
    Ok(worst as f64 / (size as f64).powi(g.r() as i32 - 1))
}

/// Grow a single absorber avoiding `avoid`, backtracking over the closing
/// edge choices of every layer.
fn grow_one(
    g: &RGraph,
    parts: &PartTuple,
    target: &[usize],
    avoid: &[usize],
    eps: f64,
) -> Result<Absorber> {
    let r = g.r();
    let size = parts.parts()[0].len();
    let host = without_vertices(g, avoid)?;

    let mut rows: Vec<Vec<usize>> = target.iter().map(|&v| vec![v]).collect();
    let mut closings: Vec<Vec<usize>> = Vec::new();
    grow_layers(g, &host, parts, eps, size, 1, &mut rows, &mut closings)?;

    // Rows are edges by the final layer's degree filter; package them as
    // part-indexed copies.
    let on_copies: Vec<Vec<usize>> = rows
        .iter()
        .enumerate()
        .map(|(j, row)| {
            let mut copy = vec![0usize; r];
            for (l, &v) in row.iter().enumerate() {
                copy[(j + l) % r] = v;
            }
            copy
        })
        .collect();
    let mut body: Vec<usize> = rows.iter().flatten().copied().collect();
    body.retain(|v| !target.contains(v));
    body.sort_unstable();

    let pat = FactorPattern::edge(r)?;
    let on_factor = TransversalFactor { copies: on_copies };
    let off_factor = TransversalFactor { copies: closings };
    let mut covered = body.clone();
    covered.extend_from_slice(target);
    verify_transversal_factor(g, parts, &pat, &on_factor, Some(&covered))
        .map_err(|e| Error::Internal(format!("absorber joint factor failed: {e}")))?;
    verify_transversal_factor(g, parts, &pat, &off_factor, Some(&body))
        .map_err(|e| Error::Internal(format!("absorber body factor failed: {e}")))?;

    Ok(Absorber {
        target: target.to_vec(),
        body,
        on_factor,
        off_factor,
        k: r - 1,
    })
}

/// Recursive layer construction: compute the high-degree column sets, pick
/// a crossing edge through them, extend every row, recurse; backtrack over
/// up to LAYER_WIDTH closing candidates per layer.
#[allow(clippy::too_many_arguments)]
fn grow_layers(
    g: &RGraph,
    host: &RGraph,
    parts: &PartTuple,
    eps: f64,
    size: usize,
    layer: usize,
    rows: &mut Vec<Vec<usize>>,
    closings: &mut Vec<Vec<usize>>,
) -> Result<()> {
    let r = g.r();
    if layer == r {
        return Ok(());
    }
    let tau = threshold(eps, size, r, layer);

    // Column sets: the row from part j extends into part (j + layer) % r.
    let mut columns: Vec<Vec<usize>> = vec![Vec::new(); r];
    for (j, row) in rows.iter().enumerate() {
        let p = (j + layer) % r;
        let sub = high_degree_subset(host, parts, p, row, tau)?;
        let lattice: Vec<usize> = rows.iter().flatten().copied().collect();
        let mut members = sub.members;
        members.retain(|w| !lattice.contains(w));
        if members.is_empty() {
            return Err(Error::PipelineFailure {
                stage: "edge-absorber".into(),
                detail: format!(
                    "stall at layer {layer}: part {p} has no fresh candidates \
                     above threshold {tau}"
                ),
            });
        }
        columns[p] = members;
    }

    // Closing candidates: host edges crossing the column sets.
    let mut tried = 0usize;
    let mut stalled_for_want_of_edge = true;
    for e in host.edges() {
        if tried >= LAYER_WIDTH {
            break;
        }
        let Some(copy) = classify(parts, e) else { continue };
        if !copy
            .iter()
            .enumerate()
            .all(|(p, &v)| columns[p].contains(&v))
        {
            continue;
        }
        tried += 1;
        stalled_for_want_of_edge = false;
        for (j, row) in rows.iter_mut().enumerate() {
            row.push(copy[(j + layer) % r]);
        }
        closings.push(copy.clone());
        match grow_layers(g, host, parts, eps, size, layer + 1, rows, closings) {
            Ok(()) => return Ok(()),
            Err(Error::PipelineFailure { .. }) => {
                closings.pop();
                for row in rows.iter_mut() {
                    row.pop();
                }
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::PipelineFailure {
        stage: "edge-absorber".into(),
        detail: if stalled_for_want_of_edge {
            format!("stall at layer {layer}: no crossing edge closes the column sets")
        } else {
            format!("stall at layer {layer}: every closing candidate dead-ends later")
        },
    })
}

/// Staged degree threshold for extending an l-vertex row.
fn threshold(eps: f64, size: usize, r: usize, layer: usize) -> u64 {
    let scale = (size as f64).powi((r - layer - 1) as i32);
    let damp = 3f64.powi(layer as i32 + 1);
    ((eps * scale / damp).floor() as u64).max(1)
}

/// The edge as a part-indexed copy, or None if it does not cross.
fn classify(parts: &PartTuple, e: &[usize]) -> Option<Vec<usize>> {
    let mut copy = vec![usize::MAX; parts.len()];
    for &v in e {
        let i = parts.parts().iter().position(|p| p.contains(&v))?;
        if copy[i] != usize::MAX {
            return None;
        }
        copy[i] = v;
    }
    copy.iter().all(|&v| v != usize::MAX).then_some(copy)
}

/// The host with every edge touching `drop` removed.
fn without_vertices(g: &RGraph, drop: &[usize]) -> Result<RGraph> {
    let edges = g
        .edges()
        .iter()
        .filter(|e| e.iter().all(|v| !drop.contains(v)))
        .cloned()
        .collect();
    RGraph::new(g.r(), g.n(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::coin;

    fn complete_multipartite(r: usize, size: usize) -> (RGraph, PartTuple) {
        let n = r * size;
        let parts: Vec<Vec<usize>> =
            (0..r).map(|i| (i * size..(i + 1) * size).collect()).collect();
        let full = RGraph::complete(r, n).unwrap();
        let tuple = PartTuple::new(parts).unwrap();
        let edges = full
            .edges()
            .iter()
            .filter(|e| classify(&tuple, e).is_some())
            .cloned()
            .collect();
        (RGraph::new(r, n, edges).unwrap(), tuple)
    }

    #[test]
    fn complete_host_yields_disjoint_absorbers() {
        // Parts of 7: a target vertex plus three absorber bodies of two
        // vertices per part consume each part exactly.
        let (g, parts) = complete_multipartite(3, 7);
        let s = vec![0, 7, 14];
        let absorbers = find_edge_absorbers(&g, &parts, &s, &[], 3).unwrap();
        assert_eq!(absorbers.len(), 3);
        let mut all: Vec<usize> = Vec::new();
        for a in &absorbers {
            assert_eq!(a.body.len(), 6);
            assert_eq!(a.k, 2);
            assert!(a.body.iter().all(|v| !s.contains(v)));
            all.extend_from_slice(&a.body);
        }
        let before = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(before, all.len(), "bodies are pairwise disjoint");
    }

    #[test]
    fn empty_host_stalls_at_layer_one() {
        let g = RGraph::new(3, 9, vec![]).unwrap();
        let parts =
            PartTuple::new(vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]).unwrap();
        match find_edge_absorbers(&g, &parts, &[0, 3, 6], &[], 1) {
            Err(Error::PipelineFailure { detail, .. }) => {
                assert!(detail.contains("layer 1"), "detail: {detail}");
            }
            other => panic!("expected a stall, got {other:?}"),
        }
    }

    #[test]
    fn forbidden_vertices_stay_out() {
        let (g, parts) = complete_multipartite(3, 7);
        let s = vec![0, 7, 14];
        let forbidden = vec![1, 2, 8, 9, 15, 16];
        let absorbers = find_edge_absorbers(&g, &parts, &s, &forbidden, 2).unwrap();
        assert_eq!(absorbers.len(), 2);
        for a in &absorbers {
            assert!(a.body.iter().all(|v| !forbidden.contains(v)));
        }
    }

    #[test]
    fn random_dense_host_verifies_witnesses() {
        // A binomial 3-graph at p = 0.6 restricted to crossing triples of
        // three parts of 12, so five absorbers plus the target fit with a
        // vertex of slack per part.
        let r = 3;
        let size = 12;
        let n = r * size;
        let tuple = PartTuple::new(
            (0..r).map(|i| (i * size..(i + 1) * size).collect()).collect(),
        )
        .unwrap();
        let full = RGraph::complete(r, n).unwrap();
        let mut counter = 0u64;
        let edges: Vec<Vec<usize>> = full
            .edges()
            .iter()
            .filter(|e| {
                counter += 1;
                classify(&tuple, e).is_some() && coin(0xabcd, counter, 0.6)
            })
            .cloned()
            .collect();
        let g = RGraph::new(r, n, edges).unwrap();
        let s = vec![2, size + 3, 2 * size + 5];
        let absorbers = find_edge_absorbers(&g, &tuple, &s, &[], 5).unwrap();
        assert_eq!(absorbers.len(), 5, "dense host supports five absorbers");
        // Witness verification already ran inside the constructor; spot
        // check the shape again here.
        for a in &absorbers {
            assert_eq!(a.on_factor.copies.len(), 3);
            assert_eq!(a.off_factor.copies.len(), 2);
        }
    }
}
