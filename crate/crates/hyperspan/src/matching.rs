//! Crossing matchings over part tuples.
//!
//! A crossing matching over disjoint parts (V_0, ..., V_{r-1}) is a set of
//! vertex-disjoint edges, each placed with exactly one vertex in every part.
//! A maximal one leaves the same number of vertices uncovered in every part,
//! and the uncovered remainders span no crossing edge; their common size is
//! therefore at most the restricted hole number of the tuple.
//!
//! When high directed degrees into an auxiliary tuple (U_1, ..., U_{r-1})
//! are available, the leftover of the first part can be matched on through
//! the U parts, which may overlap each other: each completion edge takes one
//! uncovered vertex of V_0 and fresh vertices u_i in U_i. A full transversal
//! factor (a crossing matching covering everything) is found by exhaustive
//! backtracking within a node budget.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{PartTuple, RGraph};
use crate::Result;

/// A set of vertex-disjoint placed edges: `tuples[k][i]` lies in part `i`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossingMatching {
    pub tuples: Vec<Vec<usize>>,
}

impl CrossingMatching {
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// All matched vertices, sorted.
    pub fn covered(&self) -> Vec<usize> {
        let mut vs: Vec<usize> = self.tuples.iter().flatten().copied().collect();
        vs.sort_unstable();
        vs
    }

    /// The matched edges as plain sorted vertex sets.
    pub fn edges(&self) -> Vec<Vec<usize>> {
        self.tuples
            .iter()
            .map(|t| {
                let mut e = t.clone();
                e.sort_unstable();
                e
            })
            .collect()
    }

    /// Checks placement in `parts`, edge membership in `g`, and disjointness.
    pub fn verify(&self, g: &RGraph, parts: &PartTuple) -> Result<()> {
        let mut used = std::collections::BTreeSet::new();
        for t in &self.tuples {
            if t.len() != parts.len() {
                return Err(Error::InvalidInput(format!(
                    "tuple of arity {} over {} parts",
                    t.len(),
                    parts.len()
                )));
            }
            for (i, &v) in t.iter().enumerate() {
                if !parts.parts()[i].contains(&v) {
                    return Err(Error::InvalidInput(format!("vertex {v} not in part {i}")));
                }
                if !used.insert(v) {
                    return Err(Error::InvalidInput(format!("vertex {v} matched twice")));
                }
            }
            let mut e = t.clone();
            e.sort_unstable();
            if !g.is_edge(&e) {
                return Err(Error::InvalidInput(format!("{e:?} is not an edge")));
            }
        }
        Ok(())
    }
}

/// The two matching phases plus what they missed. `matching` is the maximal
/// crossing matching over the V parts; `completion` holds the edges that
/// route leftover V_0 vertices through the U tuple. A non-`None` shortfall
/// explains why full coverage was not reached (degree below threshold, or
/// more leftovers than the completion budget); the partial result stands.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatchingResult {
    #[serde(rename = "Mprime")]
    pub matching: CrossingMatching,
    #[serde(rename = "Mdoubleprime")]
    pub completion: CrossingMatching,
    pub uncovered: Vec<usize>,
    pub shortfall: Option<String>,
}

impl MatchingResult {
    /// Both phases as one edge list (completion tuples are ordered
    /// (v, u_1, ..., u_{r-1}), not by the V parts).
    pub fn all_edges(&self) -> Vec<Vec<usize>> {
        let mut es = self.matching.edges();
        es.extend(self.completion.edges());
        es
    }
}

/// Finds a maximal crossing matching over the disjoint `parts`: edges are
/// scanned in canonical order and placed whenever all their vertices are
/// free (a single pass is maximal), then bounded single-swap passes try to
/// re-route one matched edge to cover one more V_0 vertex.
///
/// With `u_parts = Some(U)`, up to `m_star` vertices of V_0 left uncovered
/// are matched through U = (U_1, ..., U_{r-1}): equal-size parts of common
/// size m, disjoint from the V parts but free to overlap each other. A
/// completion for v is guaranteed whenever its directed degree into U is at
/// least (r-1)^2 * m^{r-2} * m_star, since earlier completions can consume
/// at most (r-1)(m_star - 1) vertices of U, each killing at most
/// (r-1) * m^{r-2} tuples. Vertices below the threshold stay uncovered and
/// are reported in `shortfall` rather than failing the call.
pub fn find_matching(
    g: &RGraph,
    parts: &PartTuple,
    u_parts: Option<&PartTuple>,
    m_star: usize,
) -> Result<MatchingResult> {
    let r = g.r();
    if parts.len() != r {
        return Err(Error::InvalidInput(format!(
            "need {r} parts for a crossing matching, got {}",
            parts.len()
        )));
    }
    parts.check_against(g)?;
    if !parts.is_disjoint() {
        return Err(Error::InvalidInput("matching parts must be disjoint".into()));
    }
    if parts.parts()[1..].iter().any(|p| p.len() < parts.parts()[0].len()) {
        return Err(Error::InvalidInput("first part must be no larger than the rest".into()));
    }
    let mut in_part = vec![usize::MAX; g.n()];
    for (i, p) in parts.parts().iter().enumerate() {
        for &v in p {
            in_part[v] = i;
        }
    }
    let mut free = vec![true; g.n()];
    let mut matching = CrossingMatching::default();
    for e in g.edges() {
        if e.iter().any(|&v| in_part[v] == usize::MAX || !free[v]) {
            continue;
        }
        if let Some(tuple) = place(e, &in_part, r) {
            for &v in &tuple {
                free[v] = false;
            }
            matching.tuples.push(tuple);
        }
    }
    augment_by_swaps(g, parts, &in_part, &mut free, &mut matching);

    let mut uncovered: Vec<usize> =
        parts.parts()[0].iter().copied().filter(|&v| free[v]).collect();

    let mut completion = CrossingMatching::default();
    let mut shortfall = None;
    if let Some(u_tuple) = u_parts {
        shortfall =
            complete(g, parts, u_tuple, m_star, &mut completion, &mut uncovered)?;
    }
    Ok(MatchingResult { matching, completion, uncovered, shortfall })
}

/// Places the vertices of `e` one per part, if possible. Parts are disjoint,
/// so the assignment is forced: each vertex goes to its own part, and the
/// placement exists exactly when the parts hit by `e` are pairwise distinct.
fn place(e: &[usize], in_part: &[usize], r: usize) -> Option<Vec<usize>> {
    let mut tuple = vec![usize::MAX; r];
    for &v in e {
        let i = in_part[v];
        if tuple[i] != usize::MAX {
            return None;
        }
        tuple[i] = v;
    }
    tuple.iter().all(|&v| v != usize::MAX).then_some(tuple)
}

/// Bounded local search: for an uncovered v in V_0, release one matched
/// tuple and try to place crossing edges through both v and the released
/// tuple's V_0 vertex on the freed pool. Each success covers one more V_0
/// vertex; two passes are plenty at the scales the matching bound cares
/// about, and maximality is preserved because every swap re-places both
/// touched V_0 vertices.
fn augment_by_swaps(
    g: &RGraph,
    parts: &PartTuple,
    in_part: &[usize],
    free: &mut [bool],
    matching: &mut CrossingMatching,
) {
    for _pass in 0..2 {
        let mut improved = false;
        let uncovered: Vec<usize> =
            parts.parts()[0].iter().copied().filter(|&v| free[v]).collect();
        for v in uncovered {
            if !free[v] {
                continue;
            }
            for k in 0..matching.tuples.len() {
                let old = matching.tuples[k].clone();
                for &w in &old {
                    free[w] = true;
                }
                if let Some((a, b)) = replace_pair(g, v, old[0], in_part, free) {
                    matching.tuples[k] = a;
                    matching.tuples.push(b);
                    improved = true;
                    break;
                }
                for &w in &old {
                    free[w] = false;
                }
            }
        }
        if !improved {
            break;
        }
    }
}

/// Attempts to place two disjoint crossing edges through `v` and `w` (both
/// in part 0) on the current free pool; commits the placement on success.
fn replace_pair(
    g: &RGraph,
    v: usize,
    w: usize,
    in_part: &[usize],
    free: &mut [bool],
) -> Option<(Vec<usize>, Vec<usize>)> {
    let r = g.r();
    for e in g.incident_edges(v) {
        if e.iter().any(|&x| in_part[x] == usize::MAX || !free[x]) {
            continue;
        }
        let Some(first) = place(e, in_part, r) else {
            continue;
        };
        if first[0] != v {
            continue;
        }
        for &x in &first {
            free[x] = false;
        }
        for f in g.incident_edges(w) {
            if f.iter().any(|&x| in_part[x] == usize::MAX || !free[x]) {
                continue;
            }
            if let Some(second) = place(f, in_part, r) {
                if second[0] == w {
                    for &x in &second {
                        free[x] = false;
                    }
                    return Some((first, second));
                }
            }
        }
        for &x in &first {
            free[x] = true;
        }
    }
    None
}

/// The completion phase: matches uncovered V_0 vertices through the U parts.
/// Returns the shortfall note (None when everything got covered).
fn complete(
    g: &RGraph,
    parts: &PartTuple,
    u_tuple: &PartTuple,
    m_star: usize,
    completion: &mut CrossingMatching,
    uncovered: &mut Vec<usize>,
) -> Result<Option<String>> {
    let r = g.r();
    if u_tuple.len() != r - 1 {
        return Err(Error::InvalidInput(format!(
            "completion tuple needs {} parts, got {}",
            r - 1,
            u_tuple.len()
        )));
    }
    u_tuple.check_labels(g.n())?;
    let m = u_tuple.parts()[0].len();
    if m == 0 || u_tuple.parts().iter().any(|p| p.len() != m) {
        return Err(Error::InvalidInput("U parts must share one nonzero size".into()));
    }
    let taken: std::collections::BTreeSet<usize> =
        parts.parts().iter().flatten().copied().collect();
    if u_tuple.parts().iter().flatten().any(|v| taken.contains(v)) {
        return Err(Error::InvalidInput("completion parts must avoid the matched parts".into()));
    }
    let threshold =
        (r as u64 - 1).pow(2) * (m as u64).saturating_pow(r as u32 - 2) * m_star as u64;

    let mut used = std::collections::BTreeSet::new();
    let mut still = Vec::new();
    let mut notes = Vec::new();
    for &v in uncovered.iter() {
        if completion.len() == m_star {
            notes.push(format!("completion budget m*={m_star} exhausted at vertex {v}"));
            still.push(v);
            continue;
        }
        let d = g.directed_degree(v, u_tuple.parts())?;
        if d < threshold {
            notes.push(format!(
                "vertex {v} has directed degree {d} into U, below {threshold}"
            ));
            still.push(v);
            continue;
        }
        let slot = find_completion_edge(g, v, u_tuple, &used).ok_or_else(|| {
            Error::Internal(format!("completion degree promised an edge at {v}, none found"))
        })?;
        for &u in &slot {
            used.insert(u);
        }
        let mut tuple = vec![v];
        tuple.extend(slot);
        completion.tuples.push(tuple);
    }
    *uncovered = still;
    Ok(if notes.is_empty() { None } else { Some(notes.join("; ")) })
}

/// First placement of an edge at `v` into the U parts avoiding `used`,
/// scanning edges in canonical order.
fn find_completion_edge(
    g: &RGraph,
    v: usize,
    u_tuple: &PartTuple,
    used: &std::collections::BTreeSet<usize>,
) -> Option<Vec<usize>> {
    for e in g.incident_edges(v) {
        let rest: Vec<usize> = e.iter().copied().filter(|&w| w != v).collect();
        if rest.len() != e.len() - 1 {
            continue; // v repeats only if e does not contain v exactly once
        }
        if rest.iter().any(|w| used.contains(w)) {
            continue;
        }
        if let Some(assignment) = assign_overlapping(&rest, u_tuple.parts()) {
            return Some(assignment);
        }
    }
    None
}

/// Injectively assigns `rest` (distinct vertices) to the possibly
/// overlapping parts, one per part, by backtracking. Returns the vertices
/// in part order.
fn assign_overlapping(rest: &[usize], parts: &[Vec<usize>]) -> Option<Vec<usize>> {
    fn rec(
        rest: &[usize],
        parts: &[Vec<usize>],
        taken: &mut Vec<bool>,
        out: &mut Vec<usize>,
    ) -> bool {
        let slot = out.len();
        if slot == parts.len() {
            return true;
        }
        for (j, &w) in rest.iter().enumerate() {
            if !taken[j] && parts[slot].binary_search(&w).is_ok() {
                taken[j] = true;
                out.push(w);
                if rec(rest, parts, taken, out) {
                    return true;
                }
                out.pop();
                taken[j] = false;
            }
        }
        false
    }
    if rest.len() != parts.len() {
        return None;
    }
    let mut taken = vec![false; rest.len()];
    let mut out = Vec::with_capacity(parts.len());
    rec(rest, parts, &mut taken, &mut out).then_some(out)
}

/// The part-`i` vertices whose joint degree with a base set clears a
/// threshold, together with the averaging lower bound on how many there
/// must be.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HighDegreeSubset {
    pub members: Vec<usize>,
    pub threshold: u64,
    /// (d(base) - (t-1) * n_cap) / (n_cap^{r-|base|-1} - t + 1) with n_cap
    /// the largest part size; only meaningful when the denominator is
    /// positive, otherwise vacuous and reported as 0.
    pub lower_bound: i128,
}

/// Collects every w in part `i` of the partition such that at least `t`
/// crossing edges contain base + w. A crossing edge takes one vertex from
/// every part. Since each crossing edge through `base` meets part `i` in
/// exactly one vertex, d(base) = sum_w d(base + w), and averaging gives the
/// stored lower bound; falling below it is an arithmetic bug, not an input
/// condition, so it aborts with an internal error.
pub fn high_degree_subset(
    g: &RGraph,
    parts: &PartTuple,
    i: usize,
    base: &[usize],
    t: u64,
) -> Result<HighDegreeSubset> {
    let r = g.r();
    if parts.len() != r {
        return Err(Error::InvalidInput(format!("need the full {r}-partition", )));
    }
    parts.check_labels(g.n())?;
    if !parts.is_disjoint() {
        return Err(Error::InvalidInput("partition parts must be disjoint".into()));
    }
    if i >= r {
        return Err(Error::InvalidInput(format!("part index {i} out of range")));
    }
    if base.is_empty() || base.len() >= r {
        return Err(Error::InvalidInput(format!(
            "base must have 1..{} vertices, got {}",
            r - 1,
            base.len()
        )));
    }
    let mut part_of = vec![usize::MAX; g.n()];
    for (j, p) in parts.parts().iter().enumerate() {
        for &v in p {
            part_of[v] = j;
        }
    }
    let mut seen_parts = std::collections::BTreeSet::new();
    for &b in base {
        if b >= g.n() || part_of[b] == usize::MAX {
            return Err(Error::InvalidInput(format!("base vertex {b} is outside the partition")));
        }
        if part_of[b] == i {
            return Err(Error::InvalidInput(format!("base vertex {b} sits in part {i}")));
        }
        if !seen_parts.insert(part_of[b]) {
            return Err(Error::InvalidInput("base vertices must occupy distinct parts".into()));
        }
    }

    // Count crossing edges through base, and through base + w per w.
    let mut per_w: std::collections::BTreeMap<usize, u64> = std::collections::BTreeMap::new();
    let mut d_base: u64 = 0;
    for e in g.edges() {
        if !is_crossing(e, &part_of, r) {
            continue;
        }
        if !base.iter().all(|b| e.binary_search(b).is_ok()) {
            continue;
        }
        d_base += 1;
        for &v in e {
            if part_of[v] == i {
                *per_w.entry(v).or_insert(0) += 1;
            }
        }
    }
    let members: Vec<usize> = parts.parts()[i]
        .iter()
        .copied()
        .filter(|w| per_w.get(w).copied().unwrap_or(0) >= t)
        .collect();

    let n_cap = parts.parts().iter().map(Vec::len).max().unwrap_or(0) as i128;
    let depth = (r - base.len() - 1) as u32;
    let cap = n_cap.saturating_pow(depth);
    let denominator = cap - t as i128 + 1;
    let lower_bound = if denominator <= 0 {
        0 // vacuous: the threshold exceeds what any single w could carry
    } else {
        (d_base as i128 - (t as i128 - 1) * n_cap).div_euclid(denominator)
    };
    if (members.len() as i128) < lower_bound {
        return Err(Error::Internal(format!(
            "high-degree subset of size {} violates its counting bound {}",
            members.len(),
            lower_bound
        )));
    }
    Ok(HighDegreeSubset { members, threshold: t, lower_bound })
}

/// True when `e` takes exactly one vertex from each of the `r` parts.
fn is_crossing(e: &[usize], part_of: &[usize], r: usize) -> bool {
    let mut hit = vec![false; r];
    for &v in e {
        let p = part_of[v];
        if p == usize::MAX || hit[p] {
            return false;
        }
        hit[p] = true;
    }
    true
}

/// A crossing perfect matching over equal disjoint parts, by backtracking
/// over the first part in label order. `budget` caps explored nodes.
pub fn transversal_factor(
    g: &RGraph,
    parts: &PartTuple,
    budget: u64,
) -> Result<CrossingMatching> {
    let r = g.r();
    if parts.len() != r {
        return Err(Error::InvalidInput(format!("need {r} parts, got {}", parts.len())));
    }
    parts.check_labels(g.n())?;
    if !parts.is_disjoint() {
        return Err(Error::InvalidInput("factor parts must be disjoint".into()));
    }
    let size = parts.parts()[0].len();
    if parts.parts().iter().any(|p| p.len() != size) {
        return Err(Error::InvalidInput("factor parts must have equal sizes".into()));
    }
    let mut free: Vec<std::collections::BTreeSet<usize>> =
        parts.parts().iter().map(|p| p.iter().copied().collect()).collect();
    let mut chosen: Vec<Vec<usize>> = Vec::with_capacity(size);
    let mut nodes = 0u64;
    if search_factor(g, &mut free, &mut chosen, size, &mut nodes, budget) {
        return Ok(CrossingMatching { tuples: chosen });
    }
    if nodes >= budget {
        return Err(Error::GuardExceeded(format!(
            "transversal factor search exceeded {budget} nodes"
        )));
    }
    Err(Error::PipelineFailure {
        stage: "transversal-factor".into(),
        detail: "no crossing perfect matching over the given parts".into(),
    })
}

fn search_factor(
    g: &RGraph,
    free: &mut Vec<std::collections::BTreeSet<usize>>,
    chosen: &mut Vec<Vec<usize>>,
    size: usize,
    nodes: &mut u64,
    budget: u64,
) -> bool {
    if chosen.len() == size {
        return true;
    }
    *nodes += 1;
    if *nodes >= budget {
        return false;
    }
    // Branch on the smallest free vertex of part 0.
    let v = *free[0].iter().next().unwrap();
    for e in g.incident_edges(v) {
        if let Some(tuple) = place_free(&e, v, free) {
            for (i, &w) in tuple.iter().enumerate() {
                free[i].remove(&w);
            }
            chosen.push(tuple.clone());
            if search_factor(g, free, chosen, size, nodes, budget) {
                return true;
            }
            chosen.pop();
            for (i, &w) in tuple.iter().enumerate() {
                free[i].insert(w);
            }
        }
        if *nodes >= budget {
            return false;
        }
    }
    false
}

/// Places edge `e` (which contains `v`) with `v` in part 0 and the rest on
/// free vertices of the other parts, if the parts it meets are distinct.
fn place_free(
    e: &[usize],
    v: usize,
    free: &[std::collections::BTreeSet<usize>],
) -> Option<Vec<usize>> {
    let r = free.len();
    let mut tuple = vec![usize::MAX; r];
    tuple[0] = v;
    for &w in e {
        if w == v {
            continue;
        }
        let mut placed = false;
        for (i, f) in free.iter().enumerate().skip(1) {
            if tuple[i] == usize::MAX && f.contains(&w) {
                tuple[i] = w;
                placed = true;
                break;
            }
        }
        if !placed {
            return None;
        }
    }
    tuple.iter().all(|&w| w != usize::MAX).then_some(tuple)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(parts: Vec<Vec<usize>>) -> PartTuple {
        PartTuple::new(parts).unwrap()
    }

    #[test]
    fn complete_host_matches_every_part_vertex() {
        let g = RGraph::complete(3, 9).unwrap();
        let parts = tuple(vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]);
        let res = find_matching(&g, &parts, None, 0).unwrap();
        res.matching.verify(&g, &parts).unwrap();
        assert_eq!(res.matching.len(), 3);
        assert!(res.uncovered.is_empty());
        assert!(res.shortfall.is_none());
    }

    #[test]
    fn parts_lose_equally_and_leftover_spans_no_edge() {
        // Only two disjoint crossing edges exist; the third slot of each part
        // stays uncovered in every part.
        let g = RGraph::new(
            3,
            9,
            vec![vec![0, 3, 6], vec![1, 4, 7], vec![0, 4, 6], vec![1, 3, 7]],
        )
        .unwrap();
        let parts = tuple(vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]);
        let res = find_matching(&g, &parts, None, 0).unwrap();
        res.matching.verify(&g, &parts).unwrap();
        assert_eq!(res.matching.len(), 2);
        assert_eq!(res.uncovered, vec![2]);
    }

    #[test]
    fn swap_augmentation_recovers_a_greedy_miss() {
        // Greedy takes {0,2,4} first (canonical order) and strands vertex 1,
        // whose only edge reuses 2 and 4. Swapping {0,2,4} for {0,3,5} and
        // {1,2,4} covers everything.
        let g = RGraph::new(3, 6, vec![vec![0, 2, 4], vec![0, 3, 5], vec![1, 2, 4]]).unwrap();
        let parts = tuple(vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        let res = find_matching(&g, &parts, None, 0).unwrap();
        res.matching.verify(&g, &parts).unwrap();
        assert_eq!(res.matching.len(), 2);
        assert!(res.uncovered.is_empty());
    }

    #[test]
    fn completion_covers_the_rest_through_overlapping_pools() {
        // Parts carry no crossing edge at all, so vertex 1 stays uncovered,
        // but it reaches the shared U pool {6..11} densely enough to clear
        // the completion threshold (2^2 * 6 * 1 = 24 against degree 30).
        let mut edges = Vec::new();
        for a in 6usize..12 {
            for b in a + 1..12 {
                edges.push(vec![1, a, b]);
            }
        }
        let g = RGraph::new(3, 12, edges).unwrap();
        let parts = tuple(vec![vec![1], vec![2, 3], vec![4, 5]]);
        let pool: Vec<usize> = (6..12).collect();
        let u = tuple(vec![pool.clone(), pool]);
        let res = find_matching(&g, &parts, Some(&u), 1).unwrap();
        assert!(res.uncovered.is_empty());
        assert!(res.shortfall.is_none());
        assert!(res.matching.is_empty());
        assert_eq!(res.completion.len(), 1);
        assert_eq!(res.completion.tuples[0][0], 1);
    }

    #[test]
    fn completion_below_threshold_reports_a_shortfall() {
        // Pool degree of vertex 1 is zero: the threshold cannot hold, so the
        // vertex stays uncovered and the result says why.
        let g = RGraph::new(3, 9, vec![vec![0, 6, 7]]).unwrap();
        let parts = tuple(vec![vec![0, 1], vec![2, 3], vec![4, 5]]);
        let u = tuple(vec![vec![6, 7, 8], vec![6, 7, 8]]);
        let res = find_matching(&g, &parts, Some(&u), 2).unwrap();
        assert!(res.shortfall.is_some());
        assert!(res.uncovered.contains(&1));
    }

    #[test]
    fn high_degree_subset_counts_and_bounds() {
        // Complete 3-partite host with parts of size 4: every crossing edge
        // exists, so d(base + w) = 4 for each w in the opposite part, and
        // the averaging bound (16 - 3*4) / (4 - 4 + 1) = 4 is tight.
        let mut edges = Vec::new();
        for a in 0..4usize {
            for b in 4..8usize {
                for c in 8..12usize {
                    edges.push(vec![a, b, c]);
                }
            }
        }
        let g = RGraph::new(3, 12, edges).unwrap();
        let parts = tuple(vec![(0..4).collect(), (4..8).collect(), (8..12).collect()]);
        let hs = high_degree_subset(&g, &parts, 1, &[0], 4).unwrap();
        assert_eq!(hs.members, vec![4, 5, 6, 7]);
        assert_eq!(hs.lower_bound, 4);

        // Threshold above the per-w capacity: empty members, vacuous bound.
        let hs2 = high_degree_subset(&g, &parts, 1, &[0], 16).unwrap();
        assert!(hs2.members.is_empty());
        assert_eq!(hs2.lower_bound, 0);

        // Two-dimensional count: base of one vertex in a 2-graph is the
        // plain neighborhood.
        let g2 = RGraph::new(2, 4, vec![vec![0, 2], vec![0, 3], vec![1, 2]]).unwrap();
        let parts2 = tuple(vec![vec![0, 1], vec![2, 3]]);
        let hs3 = high_degree_subset(&g2, &parts2, 1, &[0], 1).unwrap();
        assert_eq!(hs3.members, vec![2, 3]);
    }

    #[test]
    fn transversal_factor_on_complete_and_sparse_hosts() {
        let g = RGraph::complete(3, 9).unwrap();
        let parts = tuple(vec![vec![0, 1, 2], vec![3, 4, 5], vec![6, 7, 8]]);
        let f = transversal_factor(&g, &parts, 10_000).unwrap();
        f.verify(&g, &parts).unwrap();
        assert_eq!(f.len(), 3);

        // Remove everything at vertex 0 except one edge; backtracking must
        // still find the factor through it.
        let edges: Vec<Vec<usize>> = RGraph::complete(3, 9)
            .unwrap()
            .edges()
            .iter()
            .filter(|e| !e.contains(&0) || *e == &vec![0, 5, 8])
            .cloned()
            .collect();
        let g2 = RGraph::new(3, 9, edges).unwrap();
        let f2 = transversal_factor(&g2, &parts, 100_000).unwrap();
        f2.verify(&g2, &parts).unwrap();
        assert!(f2.tuples.iter().any(|t| t == &vec![0, 5, 8]));

        // No crossing edge at all: honest failure.
        let g3 = RGraph::new(3, 9, vec![vec![0, 1, 2]]).unwrap();
        assert!(transversal_factor(&g3, &parts, 10_000).is_err());
    }
}
