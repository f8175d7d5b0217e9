//! Transversal loose-cycle factors and loose Hamilton cycles.
//!
//! A loose cycle visits its vertices once around: consecutive edges share
//! exactly one vertex and non-consecutive edges are disjoint, so a cycle of
//! `len` edges has `len * (r-1)` vertices.  The factor routine tiles a part
//! tuple with vertex-disjoint transversal cycles, one vertex per part: it
//! sets aside an absorbing set, covers the bulk with parallel linear paths
//! closed into cycles by one extra edge each, and hands the leftover to the
//! absorber; hosts too small for absorber zones fall back to a bounded
//! exhaustive search.  The Hamilton routine covers the whole host with a
//! single loose cycle by deleting a few short runs from the abstract cycle,
//! embedding the remaining linear forest almost-spanningly, and re-closing
//! each run through the exact set of host vertices left free.

use serde::{Deserialize, Serialize};

use crate::absorb::assemble::{assemble_absorbing_set, AbsorberSource};
use crate::absorb::{find_transversal_factor, verify_transversal_factor, FactorPattern, TransversalFactor};
use crate::error::Error;
use crate::graph::{PartTuple, RGraph};
use crate::path::find_linear_paths;
use crate::rng::{mix, rng};
use crate::span::almost::{embed_almost_spanning, find_three_path};
use crate::tree::Hypertree;
use crate::Result;

/// Node budget for the direct factor search fallback.
const FACTOR_BUDGET: u64 = 20_000_000;
/// Node budget for one closure search in the Hamilton pipeline.
const CLOSURE_BUDGET: u64 = 400_000;
/// Hosts this small go straight to the exhaustive Hamilton search.
const SMALL_HAM_N: usize = 12;
/// Node budget for the small-host exhaustive Hamilton search.
const SMALL_HAM_BUDGET: u64 = 20_000_000;
/// Whole-pipeline restarts for the Hamilton routine.
const HAM_ATTEMPTS: usize = 6;

/// A loose cycle listed once around: edge `i` is the window of `r` vertices
/// starting at position `(r-1) * i`, wrapping at the end.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LooseCycle {
    pub vertices: Vec<usize>,
}

impl LooseCycle {
    /// Number of edges for edge size `r`.
    pub fn len(&self, r: usize) -> usize {
        self.vertices.len() / (r - 1)
    }

    /// The edges as sorted vertex sets, in cycle order.
    pub fn edges(&self, r: usize) -> Vec<Vec<usize>> {
        let n = self.vertices.len();
        (0..self.len(r))
            .map(|i| {
                let mut e: Vec<usize> =
                    (0..r).map(|j| self.vertices[((r - 1) * i + j) % n]).collect();
                e.sort_unstable();
                e
            })
            .collect()
    }
}

/// Checks that `cycle` is a loose Hamilton cycle of `g`: every host vertex
/// appears exactly once, the vertex count is divisible by `r - 1` with at
/// least three edges, every window is a host edge, and consecutive edges
/// share exactly their junction.
pub fn verify_loose_cycle(g: &RGraph, cycle: &LooseCycle) -> Result<()> {
    let r = g.r();
    let n = g.n();
    if cycle.vertices.len() != n {
        return Err(Error::InvalidInput(format!(
            "cycle lists {} vertices, host has {n}",
            cycle.vertices.len()
        )));
    }
    if n % (r - 1) != 0 || n / (r - 1) < 3 {
        return Err(Error::InvalidInput(format!(
            "a loose Hamilton cycle needs n divisible by {} with at least 3 edges",
            r - 1
        )));
    }
    let mut seen = vec![false; n];
    for &v in &cycle.vertices {
        if v >= n || seen[v] {
            return Err(Error::InvalidInput(format!("vertex {v} repeated or out of range")));
        }
        seen[v] = true;
    }
    let edges = cycle.edges(r);
    for (i, e) in edges.iter().enumerate() {
        if !g.is_edge(e) {
            return Err(Error::InvalidInput(format!("window {i} = {e:?} is not a host edge")));
        }
        let next = &edges[(i + 1) % edges.len()];
        let shared = e.iter().filter(|v| next.binary_search(v).is_ok()).count();
        if shared != 1 {
            return Err(Error::InvalidInput(format!(
                "edges {i} and {} share {shared} vertices, expected 1",
                (i + 1) % edges.len()
            )));
        }
    }
    Ok(())
}

/// Tiles the part tuple with vertex-disjoint transversal loose cycles.
///
/// The parts must be disjoint, of one common size, and `(r-1) * len` many
/// for some cycle length `len >= 3`.  Every consecutive window of `r` parts
/// (an edge block) must satisfy the degree hypothesis: each vertex of the
/// block has at least `eps` times the product of the other block parts'
/// sizes crossing edges, and the block's crossing density is at least
/// `eps / 4`.  `alpha` bounds the leftover the closing stage may hand to
/// the absorbing set, as a fraction of the part size.
pub fn loose_cycle_factor(
    g: &RGraph,
    parts: &PartTuple,
    eps: f64,
    alpha: f64,
    seed: u64,
) -> Result<TransversalFactor> {
    let r = g.r();
    let k = parts.len();
    parts.check_labels(g.n())?;
    if !parts.is_disjoint() {
        return Err(Error::InvalidInput("parts must be disjoint".into()));
    }
    if k % (r - 1) != 0 || k / (r - 1) < 3 {
        return Err(Error::InvalidInput(format!(
            "need (r-1) * len parts with len >= 3, got {k} parts at r = {r}"
        )));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let t_len = k / (r - 1);
    let size = parts.parts()[0].len();
    if parts.parts().iter().any(|p| p.len() != size) {
        return Err(Error::InvalidInput("parts must share one size".into()));
    }
    let pat = FactorPattern::loose_cycle(r, t_len)?;
    if size == 0 {
        return Ok(TransversalFactor::default());
    }

    // Edge-block hypothesis: per-vertex degree and crossing density on
    // every window of r consecutive parts.
    let np = size as f64;
    for i in 0..t_len {
        let block: Vec<usize> = (0..r).map(|j| ((r - 1) * i + j) % k).collect();
        let tuple = PartTuple::new(block.iter().map(|&j| parts.parts()[j].clone()).collect())?;
        let crossings = g.crossing_count(&tuple)? as f64;
        if crossings < (eps / 4.0) * np.powi(r as i32) {
            return Err(Error::HypothesisRejected(format!(
                "edge block {i} has crossing density {:.4}, below eps/4 = {:.4}",
                crossings / np.powi(r as i32),
                eps / 4.0
            )));
        }
        for (bi, &j) in block.iter().enumerate() {
            let others: Vec<Vec<usize>> = block
                .iter()
                .enumerate()
                .filter(|&(bj, _)| bj != bi)
                .map(|(_, &jj)| parts.parts()[jj].clone())
                .collect();
            for &v in &parts.parts()[j] {
                let d = g.directed_degree(v, &others)? as f64;
                if d + 1e-9 < eps * np.powi(r as i32 - 1) {
                    return Err(Error::HypothesisRejected(format!(
                        "vertex {v} has degree {d} into edge block {i}, below {:.1}",
                        eps * np.powi(r as i32 - 1)
                    )));
                }
            }
        }
    }

    match absorber_route(g, parts, &pat, alpha, seed) {
        Ok(factor) => {
            let cover: Vec<usize> = parts.parts().iter().flatten().copied().collect();
            verify_transversal_factor(g, parts, &pat, &factor, Some(&cover))
                .map_err(|e| Error::Internal(format!("factor failed its own check: {e}")))?;
            Ok(factor)
        }
        Err(
            Error::PipelineFailure { .. }
            | Error::Precondition(_)
            | Error::InvalidInput(_)
            | Error::GuardExceeded(_),
        ) => {
            let found = find_transversal_factor(g, parts, &pat, FACTOR_BUDGET)?;
            match found {
                Some(factor) => {
                    let cover: Vec<usize> = parts.parts().iter().flatten().copied().collect();
                    verify_transversal_factor(g, parts, &pat, &factor, Some(&cover))
                        .map_err(|e| {
                            Error::Internal(format!("factor failed its own check: {e}"))
                        })?;
                    Ok(factor)
                }
                None => Err(Error::PipelineFailure {
                    stage: "exhaustive".into(),
                    detail: "no transversal loose-cycle factor exists".into(),
                }),
            }
        }
        Err(e) => Err(e),
    }
}

/// The scaling route: absorbing set, then rounds of parallel linear paths
/// closed into cycles, then leftover absorption.
fn absorber_route(
    g: &RGraph,
    parts: &PartTuple,
    pat: &FactorPattern,
    alpha: f64,
    seed: u64,
) -> Result<TransversalFactor> {
    let r = g.r();
    let k = parts.len();
    let size = parts.parts()[0].len();
    let set = assemble_absorbing_set(
        g,
        parts,
        pat,
        (alpha * size as f64 / g.n() as f64).min(0.05),
        0.95,
        AbsorberSource::default(),
        mix(seed, 0x6162_73_63),
    )?;
    let mut taken = vec![false; g.n()];
    for &v in &set.vertices {
        taken[v] = true;
    }

    // Path tuple order: parts r-1, ..., k-1, then part 0.  A path through
    // those parts plus one closing edge through parts 1, ..., r-2 is one
    // transversal cycle copy.
    let order: Vec<usize> = (r - 1..k).chain(std::iter::once(0)).collect();
    let mut copies: Vec<Vec<usize>> = Vec::new();
    loop {
        let free_parts: Vec<Vec<usize>> = order
            .iter()
            .map(|&j| parts.parts()[j].iter().copied().filter(|&v| !taken[v]).collect())
            .collect();
        if free_parts.iter().any(Vec::is_empty) {
            break;
        }
        let tuple = PartTuple::new(free_parts)?;
        let system = match find_linear_paths(g, &tuple) {
            Ok(s) => s,
            Err(Error::PipelineFailure { .. }) => break,
            Err(e) => return Err(e),
        };
        if system.paths.is_empty() {
            break;
        }
        // Reserve all system vertices, then release the paths that fail to
        // close; closing edges must avoid every reserved vertex.
        for path in &system.paths {
            for &v in &path.vertices {
                taken[v] = true;
            }
        }
        let mut closed_any = false;
        for path in &system.paths {
            let w0 = path.vertices[0];
            let wl = *path.vertices.last().unwrap();
            let closing = g
                .incident_edges(wl)
                .find(|e| {
                    e.contains(&w0)
                        && e.iter().all(|&v| {
                            v == w0 || v == wl || {
                                !taken[v]
                                    && (1..r - 1)
                                        .any(|j| parts.parts()[j].binary_search(&v).is_ok())
                            }
                        })
                        && (1..r - 1).all(|j| {
                            e.iter()
                                .filter(|&&v| parts.parts()[j].binary_search(&v).is_ok())
                                .count()
                                == 1
                        })
                })
                .cloned();
            match closing {
                Some(ref e) => {
                    let mut copy = vec![usize::MAX; k];
                    copy[0] = wl;
                    for (s, &v) in path.vertices.iter().enumerate().take(k - r + 1) {
                        copy[r - 1 + s] = v;
                    }
                    for &v in e {
                        if v == w0 || v == wl {
                            continue;
                        }
                        let j = (1..r - 1)
                            .find(|&j| parts.parts()[j].binary_search(&v).is_ok())
                            .expect("closing vertex lost its part");
                        copy[j] = v;
                        taken[v] = true;
                    }
                    if copy.contains(&usize::MAX) {
                        return Err(Error::Internal("cycle copy left a part unfilled".into()));
                    }
                    copies.push(copy);
                    closed_any = true;
                }
                None => {
                    for &v in &path.vertices {
                        taken[v] = false;
                    }
                }
            }
        }
        if !closed_any {
            break;
        }
    }

    // Whatever remains outside the absorbing set is the leftover.
    let in_set: std::collections::BTreeSet<usize> = set.vertices.iter().copied().collect();
    let leftover: Vec<usize> = parts
        .parts()
        .iter()
        .flatten()
        .copied()
        .filter(|&v| !taken[v] && !in_set.contains(&v))
        .collect();
    let absorbed = set.absorb(g, &leftover)?;
    let mut factor = TransversalFactor { copies };
    factor.copies.extend(absorbed.copies);
    factor.copies.sort();
    Ok(factor)
}

/// Finds a loose Hamilton cycle of the host.
///
/// Preconditions: `n` divisible by `r - 1` with at least three edges worth
/// of vertices, and the degree hypothesis `(r-1)! * min_deg >= eps *
/// n^(r-1)`.  Small hosts go straight to the exhaustive search; larger ones
/// run the delete-embed-reclose pipeline and fail honestly if every attempt
/// stalls.
pub fn loose_hamilton(g: &RGraph, eps: f64, seed: u64) -> Result<LooseCycle> {
    let r = g.r();
    let n = g.n();
    if n % (r - 1) != 0 {
        return Err(Error::Precondition(format!(
            "n = {n} is not divisible by r - 1 = {}",
            r - 1
        )));
    }
    let e_c = n / (r - 1);
    if e_c < 3 {
        return Err(Error::Precondition(format!(
            "need at least 3 edges around the cycle, got {e_c}"
        )));
    }
    let fact: f64 = (1..r).map(|x| x as f64).product();
    let min_deg = (0..n).map(|v| g.degree(&[v])).min().unwrap_or(0);
    if fact * min_deg as f64 + 1e-9 < eps * (n as f64).powi(r as i32 - 1) {
        return Err(Error::HypothesisRejected(format!(
            "host minimum degree {min_deg} is below the eps={eps} bound"
        )));
    }

    if n <= SMALL_HAM_N {
        return match exhaustive_loose_hamilton(g, SMALL_HAM_BUDGET)? {
            Some(c) => Ok(c),
            None => Err(Error::PipelineFailure {
                stage: "exhaustive".into(),
                detail: "no loose Hamilton cycle exists".into(),
            }),
        };
    }

    let mut last_err: Option<Error> = None;
    for attempt in 0..HAM_ATTEMPTS {
        match hamilton_attempt(g, eps, mix(seed, attempt as u64)) {
            Ok(cycle) => {
                verify_loose_cycle(g, &cycle)
                    .map_err(|e| Error::Internal(format!("cycle failed its own check: {e}")))?;
                return Ok(cycle);
            }
            Err(e @ Error::PipelineFailure { .. }) => {
                last_err = Some(e);
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::PipelineFailure {
        stage: "hamilton".into(),
        detail: "all attempts exhausted".into(),
    }))
}

/// One delete-embed-reclose pass.
fn hamilton_attempt(g: &RGraph, eps: f64, seed: u64) -> Result<LooseCycle> {
    let r = g.r();
    let n = g.n();
    let e_c = n / (r - 1);
    // Delete well-separated runs of three consecutive edges; each removes
    // 3(r-1)-1 interior vertices and is re-closed through exactly that many
    // free host vertices later.
    let d = (e_c / 4).max(1);
    let gap = e_c / d;
    debug_assert!(gap >= 4);
    let run_starts: Vec<usize> = (0..d).map(|i| i * gap).collect();
    let mut edge_deleted = vec![false; e_c];
    for &s in &run_starts {
        for o in 0..3 {
            edge_deleted[s + o] = true;
        }
    }

    // Abstract cycle positions 0..n; the forest keeps every position not
    // strictly interior to a deleted run.  Run boundaries always touch a
    // kept edge because runs are never circularly adjacent (gap >= 4 and at
    // least one kept edge before the wrap).
    let mut is_interior = vec![false; n];
    for &s in &run_starts {
        let start_pos = (r - 1) * s;
        let end_pos = ((r - 1) * (s + 3)) % n;
        for off in 1..3 * (r - 1) {
            let p = (start_pos + off) % n;
            debug_assert!(p != end_pos);
            is_interior[p] = true;
        }
    }
    let forest_pos: Vec<usize> = (0..n).filter(|&p| !is_interior[p]).collect();
    let mut compact = vec![usize::MAX; n];
    for (c, &p) in forest_pos.iter().enumerate() {
        compact[p] = c;
    }
    let forest_edges: Vec<Vec<usize>> = (0..e_c)
        .filter(|&i| !edge_deleted[i])
        .map(|i| (0..r).map(|j| compact[((r - 1) * i + j) % n]).collect())
        .collect();
    let n_f = forest_pos.len();
    let forest = Hypertree::from_graph(RGraph::new(r, n_f, forest_edges)?, true)?;
    let eta = (n - n_f) as f64 / n as f64;

    let run = embed_almost_spanning(g, &forest, eta, eps, seed, None)?;
    let mut position_of = vec![usize::MAX; n];
    for (c, &p) in forest_pos.iter().enumerate() {
        position_of[p] = run.embedding.map[c];
    }
    let mut used = vec![false; n];
    for &h in &run.embedding.map {
        used[h] = true;
    }

    // Re-close each run through the exact free vertices.
    let mut order = run_starts.clone();
    let mut chooser = rng(seed, 0x636c_6f73);
    use rand::seq::SliceRandom;
    order.shuffle(&mut chooser);
    for &s in &order {
        let start_pos = (r - 1) * s;
        let end_pos = ((r - 1) * (s + 3)) % n;
        let fu = position_of[start_pos];
        let fv = position_of[end_pos];
        let allow: Vec<bool> = (0..n).map(|v| !used[v]).collect();
        let mut budget = CLOSURE_BUDGET;
        let found = find_three_path(g, fu, fv, &allow, None, &mut budget).ok_or_else(|| {
            Error::PipelineFailure {
                stage: "closure".into(),
                detail: format!("no free three-edge path closes the run at edge {s}"),
            }
        })?;
        let w1 = found[0].iter().copied().find(|v| found[1].contains(v)).unwrap();
        let w2 = found[1].iter().copied().find(|v| found[2].contains(v)).unwrap();
        position_of[(start_pos + (r - 1)) % n] = w1;
        position_of[(start_pos + 2 * (r - 1)) % n] = w2;
        used[w1] = true;
        used[w2] = true;
        let fills = [
            (&found[0], [fu, w1]),
            (&found[1], [w1, w2]),
            (&found[2], [w2, fv]),
        ];
        for (o, (he, ends)) in fills.iter().enumerate() {
            let mut fresh: Vec<usize> =
                he.iter().copied().filter(|v| !ends.contains(v)).collect();
            fresh.sort_unstable();
            for (q, &hv) in fresh.iter().enumerate() {
                let p = (start_pos + o * (r - 1) + 1 + q) % n;
                if position_of[p] != usize::MAX {
                    return Err(Error::Internal("closure overwrote a position".into()));
                }
                position_of[p] = hv;
                used[hv] = true;
            }
        }
    }
    if position_of.contains(&usize::MAX) {
        return Err(Error::Internal("cycle positions left unfilled".into()));
    }
    Ok(LooseCycle { vertices: position_of })
}

/// Bounded exhaustive search for a loose Hamilton cycle: chains edges from
/// every host edge through vertex 0, branching on the outgoing junction.
/// `Ok(None)` is a definitive no; exceeding `budget` is an error.
pub fn exhaustive_loose_hamilton(g: &RGraph, budget: u64) -> Result<Option<LooseCycle>> {
    let r = g.r();
    let n = g.n();
    if n % (r - 1) != 0 {
        return Err(Error::InvalidInput(format!(
            "n = {n} is not divisible by r - 1 = {}",
            r - 1
        )));
    }
    let t = n / (r - 1);
    if t < 3 {
        return Ok(None);
    }
    let mut nodes = 0u64;
    let starts: Vec<Vec<usize>> = g.incident_edges(0).map(|e| e.to_vec()).collect();
    for e1 in &starts {
        // j0 is the junction where the last edge will re-attach.
        for &j0 in e1 {
            let mut used = vec![false; n];
            for &v in e1 {
                used[v] = true;
            }
            let mut chain = vec![e1.clone()];
            let mut junctions = vec![j0];
            if extend_chain(g, t, &mut chain, &mut junctions, &mut used, budget, &mut nodes)? {
                return Ok(Some(decode_chain(&chain, &junctions, r)));
            }
        }
    }
    Ok(None)
}

/// Depth-first chain extension; junctions[i] joins chain[i-1] to chain[i],
/// junctions[0] joins the final edge back to chain[0].
fn extend_chain(
    g: &RGraph,
    t: usize,
    chain: &mut Vec<Vec<usize>>,
    junctions: &mut Vec<usize>,
    used: &mut Vec<bool>,
    budget: u64,
    nodes: &mut u64,
) -> Result<bool> {
    if chain.len() == t {
        return Ok(used.iter().all(|&u| u));
    }
    let last = chain.last().unwrap().clone();
    let incoming = *junctions.last().unwrap();
    let closing = chain.len() == t - 1;
    let wrap = junctions[0];
    for &out in &last {
        // The outgoing junction: any vertex of the last edge except the one
        // we came in through (for the first edge, except the wrap vertex).
        if out == incoming && chain.len() > 1 {
            continue;
        }
        if chain.len() == 1 && out == wrap {
            continue;
        }
        for e in g.incident_edges(out) {
            *nodes += 1;
            if *nodes > budget {
                return Err(Error::GuardExceeded(format!(
                    "hamilton search exceeded {budget} nodes"
                )));
            }
            // A non-closing edge uses out plus fresh vertices; the closing
            // edge uses out, the wrap junction, and fresh vertices.
            let valid = if closing {
                let fresh: Vec<usize> =
                    e.iter().copied().filter(|&v| v != out && v != wrap).collect();
                e.contains(&wrap)
                    && out != wrap
                    && fresh.len() == g.r() - 2
                    && fresh.iter().all(|&v| !used[v])
            } else {
                e.iter().all(|&v| v == out || !used[v])
            };
            if !valid {
                continue;
            }
            for &v in e {
                if v != out && v != wrap {
                    used[v] = true;
                }
            }
            chain.push(e.to_vec());
            junctions.push(out);
            if extend_chain(g, t, chain, junctions, used, budget, nodes)? {
                return Ok(true);
            }
            junctions.pop();
            chain.pop();
            for &v in e {
                if v != out && v != wrap {
                    used[v] = false;
                }
            }
        }
    }
    Ok(false)
}

/// Lays the chained edges out as a positional vertex list.
fn decode_chain(chain: &[Vec<usize>], junctions: &[usize], r: usize) -> LooseCycle {
    let t = chain.len();
    let n = t * (r - 1);
    let mut vertices = vec![usize::MAX; n];
    for (i, e) in chain.iter().enumerate() {
        let j_in = junctions[i];
        let j_out = junctions[(i + 1) % t];
        vertices[(r - 1) * i] = j_in;
        let mut passengers: Vec<usize> =
            e.iter().copied().filter(|&v| v != j_in && v != j_out).collect();
        passengers.sort_unstable();
        for (q, &v) in passengers.iter().enumerate() {
            vertices[(r - 1) * i + 1 + q] = v;
        }
    }
    LooseCycle { vertices }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    fn complete_blocks(r: usize, k: usize, size: usize, p: u64, seed: u64) -> (RGraph, PartTuple) {
        // k parts of `size`; every window of r consecutive parts gets its
        // crossing edges with probability p percent.
        let n = k * size;
        let parts: Vec<Vec<usize>> =
            (0..k).map(|j| (j * size..(j + 1) * size).collect()).collect();
        let mut chooser = rng(seed, 7);
        let mut edges = Vec::new();
        for i in 0..k / (r - 1) {
            let block: Vec<usize> = (0..r).map(|j| ((r - 1) * i + j) % k).collect();
            let mut pick = vec![0usize; r];
            fn rec(
                r: usize,
                d: usize,
                block: &[usize],
                parts: &[Vec<usize>],
                pick: &mut Vec<usize>,
                out: &mut Vec<Vec<usize>>,
                chooser: &mut impl RngCore,
                p: u64,
            ) {
                if d == r {
                    if chooser.next_u64() % 100 < p {
                        let mut e = pick.clone();
                        e.sort_unstable();
                        out.push(e);
                    }
                    return;
                }
                for &v in &parts[block[d]] {
                    pick[d] = v;
                    rec(r, d + 1, block, parts, pick, out, chooser, p);
                }
            }
            rec(r, 0, &block, &parts, &mut pick, &mut edges, &mut chooser, p);
        }
        edges.sort();
        edges.dedup();
        (RGraph::new(r, n, edges).unwrap(), PartTuple::new(parts).unwrap())
    }

    #[test]
    fn complete_blocks_factor_exactly() {
        // r = 3, 6 parts of size 4: every copy is a loose 3-cycle.
        let (g, parts) = complete_blocks(3, 6, 4, 100, 1);
        let factor = loose_cycle_factor(&g, &parts, 0.5, 0.5, 3).unwrap();
        assert_eq!(factor.copies.len(), 4);
        let pat = FactorPattern::loose_cycle(3, 3).unwrap();
        let cover: Vec<usize> = (0..g.n()).collect();
        verify_transversal_factor(&g, &parts, &pat, &factor, Some(&cover)).unwrap();
    }

    #[test]
    fn dense_random_blocks_factor() {
        let (g, parts) = complete_blocks(3, 6, 6, 85, 5);
        let factor = loose_cycle_factor(&g, &parts, 0.3, 0.5, 9).unwrap();
        assert_eq!(factor.copies.len(), 6);
    }

    #[test]
    fn empty_block_is_rejected() {
        let (g, parts) = complete_blocks(3, 6, 4, 100, 1);
        // Delete every edge of the block starting at part 2.
        let keep: Vec<Vec<usize>> = g
            .edges()
            .iter()
            .filter(|e| {
                !(e.iter().any(|&v| (8..12).contains(&v))
                    && e.iter().any(|&v| (12..16).contains(&v))
                    && e.iter().any(|&v| (16..20).contains(&v)))
            })
            .cloned()
            .collect();
        let g2 = RGraph::new(3, g.n(), keep).unwrap();
        let err = loose_cycle_factor(&g2, &parts, 0.5, 0.5, 3).unwrap_err();
        assert!(matches!(err, Error::HypothesisRejected(_)), "got {err:?}");
    }

    #[test]
    fn absorber_route_carries_a_bigger_pairwise_instance() {
        // r = 2, 6 parts of size 12: ordinary 6-cycles, dense blocks.
        let (g, parts) = complete_blocks(2, 6, 12, 90, 11);
        let factor = loose_cycle_factor(&g, &parts, 0.4, 0.5, 13).unwrap();
        assert_eq!(factor.copies.len(), 12);
        let pat = FactorPattern::loose_cycle(2, 6).unwrap();
        let cover: Vec<usize> = (0..g.n()).collect();
        verify_transversal_factor(&g, &parts, &pat, &factor, Some(&cover)).unwrap();
    }

    #[test]
    fn hamilton_on_the_small_complete_host() {
        let g = RGraph::complete(3, 8).unwrap();
        let c = loose_hamilton(&g, 0.5, 1).unwrap();
        verify_loose_cycle(&g, &c).unwrap();
        assert_eq!(c.edges(3).len(), 4);
    }

    #[test]
    fn hamilton_via_the_pipeline_route() {
        let mut chooser = rng(3, 0);
        let n = 24;
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    if chooser.next_u64() % 100 < 80 {
                        edges.push(vec![a, b, c]);
                    }
                }
            }
        }
        let g = RGraph::new(3, n, edges).unwrap();
        let c = loose_hamilton(&g, 0.4, 2).unwrap();
        verify_loose_cycle(&g, &c).unwrap();
    }

    #[test]
    fn indivisible_host_is_rejected() {
        let g = RGraph::complete(3, 9).unwrap();
        let err = loose_hamilton(&g, 0.5, 1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn exhaustive_agrees_with_an_obvious_no() {
        // 2-uniform path: no Hamilton cycle.
        let g = RGraph::new(2, 4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();
        assert!(exhaustive_loose_hamilton(&g, 1_000_000).unwrap().is_none());
        // A 4-cycle: exactly one, found.
        let g2 =
            RGraph::new(2, 4, vec![vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]).unwrap();
        let c = exhaustive_loose_hamilton(&g2, 1_000_000).unwrap().unwrap();
        verify_loose_cycle(&g2, &c).unwrap();
    }
}
