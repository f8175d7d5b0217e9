//! r-partite hole numbers with certificates.
//!
//! A hole of size `t` is a tuple of sets `X_1, ..., X_r` (one per edge slot,
//! each of size `t`, not necessarily disjoint) whose ordered crossing count
//! is zero. The hole number is the largest such `t`. A restriction confines
//! `X_i` to the i-th part of a given tuple; the `disjoint` flag additionally
//! requires the chosen sets to be pairwise disjoint.
//!
//! The exact solver scans candidate sizes starting from a greedy certificate
//! and decides each size with a depth-first search that enumerates the first
//! r-1 sets and closes with the maximal valid last set. The innermost two
//! levels use precomputed per-vertex conflict masks so membership of the
//! final set is an O(1) mask operation per search node. Vertex counts are
//! guarded (bitmask arithmetic requires n <= 64).

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{binomial, PartTuple, RGraph};
use crate::rng;
use crate::Result;
use rand::seq::SliceRandom;
use rand::Rng;

/// Witness for a hole of size `t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HoleCertificate {
    pub t: usize,
    pub sets: Vec<Vec<usize>>,
}

impl HoleCertificate {
    /// Checks the certificate against a graph: set count and sizes, pool
    /// membership under `restriction`, disjointness when required, and a
    /// zero crossing count.
    pub fn verify(
        &self,
        g: &RGraph,
        restriction: Option<&PartTuple>,
        disjoint: bool,
    ) -> Result<()> {
        if self.sets.len() != g.r() {
            return Err(Error::InvalidInput(format!(
                "certificate has {} sets, expected r={}",
                self.sets.len(),
                g.r()
            )));
        }
        for (i, s) in self.sets.iter().enumerate() {
            if s.len() != self.t {
                return Err(Error::InvalidInput(format!(
                    "certificate set {i} has size {}, expected t={}",
                    s.len(),
                    self.t
                )));
            }
            if let Some(res) = restriction {
                let pool = &res.parts()[i];
                if let Some(&v) = s.iter().find(|v| pool.binary_search(v).is_err()) {
                    return Err(Error::InvalidInput(format!(
                        "certificate vertex {v} is outside restriction part {i}"
                    )));
                }
            }
        }
        let tuple = PartTuple::new(self.sets.clone())?;
        if disjoint && !tuple.is_disjoint() {
            return Err(Error::InvalidInput("certificate sets are not pairwise disjoint".into()));
        }
        let crossing = g.crossing_count(&tuple)?;
        if crossing != 0 {
            return Err(Error::InvalidInput(format!(
                "certificate is crossed by {crossing} ordered tuples"
            )));
        }
        Ok(())
    }
}

/// Two-sided hole estimate. `lower` always carries a verified certificate
/// (possibly the empty one at t=0); `exact` marks when `lower == upper` was
/// proven by exhaustive search.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HoleBound {
    pub lower: usize,
    pub upper: usize,
    pub exact: bool,
    pub certificate: HoleCertificate,
}

/// Options for the exact solver.
#[derive(Debug, Clone)]
pub struct ExactOptions {
    /// Hard guard on the vertex count (bitmask arithmetic and cost control).
    pub max_n: usize,
    /// Require the sets to be pairwise disjoint.
    pub disjoint: bool,
}

impl Default for ExactOptions {
    fn default() -> Self {
        ExactOptions { max_n: 14, disjoint: false }
    }
}

/// Exact hole number with certificate.
pub fn hole_exact(
    g: &RGraph,
    restriction: Option<&PartTuple>,
    opts: &ExactOptions,
) -> Result<(usize, HoleCertificate)> {
    if g.n() > opts.max_n {
        return Err(Error::GuardExceeded(format!(
            "exact hole search on n={} exceeds max_n={}",
            g.n(),
            opts.max_n
        )));
    }
    if opts.max_n > 64 {
        return Err(Error::GuardExceeded("exact hole search supports n <= 64".into()));
    }
    if let Some(res) = restriction {
        res.check_against(g)?;
    }
    let search = Search::new(g, restriction, opts.disjoint);
    let cap = search.capacity();

    // Greedy certificate first: the scan then starts where it matters.
    let greedy = search.greedy();
    let mut best_t = greedy.first().map_or(0, Vec::len).min(cap);
    let mut best = greedy;
    let mut t = best_t + 1;
    while t <= cap {
        match search.exists(t) {
            Some(sets) => {
                best_t = t;
                best = sets;
                t += 1;
            }
            None => break,
        }
    }
    let cert = HoleCertificate { t: best_t, sets: best };
    cert.verify(g, restriction, opts.disjoint)
        .map_err(|e| Error::Internal(format!("exact hole produced a bad certificate: {e}")))?;
    Ok((best_t, cert))
}

/// Options for the heuristic.
#[derive(Debug, Clone)]
pub struct HeuristicOptions {
    /// Total move budget across restarts.
    pub budget: usize,
    pub disjoint: bool,
    /// When the estimated cost of refuting `lower + 1` exhaustively fits this
    /// many search nodes, run the refutation and tighten the upper bound.
    pub refute_nodes: usize,
}

impl Default for HeuristicOptions {
    fn default() -> Self {
        HeuristicOptions { budget: 20_000, disjoint: false, refute_nodes: 2_000_000 }
    }
}

/// Randomized lower bound via grow/swap/restart local search, plus a cheap
/// upper bound. Deterministic per seed.
pub fn hole_heuristic(
    g: &RGraph,
    restriction: Option<&PartTuple>,
    opts: &HeuristicOptions,
    seed: u64,
) -> Result<HoleBound> {
    if let Some(res) = restriction {
        res.check_against(g)?;
    }
    if g.n() > 64 {
        return Err(Error::GuardExceeded("hole heuristic supports n <= 64".into()));
    }
    let search = Search::new(g, restriction, opts.disjoint);
    let cap = search.capacity();

    let mut best: Vec<Vec<usize>> = search.greedy();
    let mut moves_left = opts.budget as i64;
    let mut restart = 0u64;
    while moves_left > 0 && best.first().map_or(0, Vec::len) < cap {
        let mut r = rng::rng(seed, restart);
        let used = search.local_search(&mut r, &mut moves_left, best.first().map_or(0, Vec::len));
        if let Some(sets) = used {
            if sets.first().map_or(0, Vec::len) > best.first().map_or(0, Vec::len) {
                best = sets;
            }
        }
        restart += 1;
    }
    let lower = best.first().map_or(0, Vec::len);
    let cert = HoleCertificate { t: lower, sets: best };
    cert.verify(g, restriction, opts.disjoint)
        .map_err(|e| Error::Internal(format!("heuristic produced a bad certificate: {e}")))?;

    let mut upper = cap;
    let mut exact = lower == cap;
    if !exact && search.exists_cost(lower + 1) <= opts.refute_nodes as u128 {
        if search.exists(lower + 1).is_none() {
            upper = lower;
            exact = true;
        }
    }
    Ok(HoleBound { lower, upper, exact, certificate: cert })
}

/// Shared search state: pools as bitmasks plus the edge list.
struct Search<'a> {
    g: &'a RGraph,
    pools: Vec<u64>,
    disjoint: bool,
}

impl<'a> Search<'a> {
    fn new(g: &'a RGraph, restriction: Option<&PartTuple>, disjoint: bool) -> Self {
        let pools: Vec<u64> = match restriction {
            Some(res) => res
                .parts()
                .iter()
                .map(|p| p.iter().fold(0u64, |m, &v| m | (1 << v)))
                .collect(),
            None => {
                let full = if g.n() == 64 { u64::MAX } else { (1u64 << g.n()) - 1 };
                vec![full; g.r()]
            }
        };
        Search { g, pools, disjoint }
    }

    /// Largest size any hole could have: the smallest pool, adjusted for
    /// disjointness (r disjoint sets of size t need r*t distinct vertices).
    fn capacity(&self) -> usize {
        let min_pool = self.pools.iter().map(|p| p.count_ones() as usize).min().unwrap_or(0);
        if self.disjoint {
            let union: u64 = self.pools.iter().fold(0, |a, &b| a | b);
            min_pool.min(union.count_ones() as usize / self.g.r())
        } else {
            min_pool
        }
    }

    /// Estimated node count of `exists(t)`: the product of the enumerated
    /// combination counts, saturating.
    fn exists_cost(&self, t: usize) -> u128 {
        let mut acc: u128 = self.g.edge_count().max(1) as u128;
        for pool in &self.pools[..self.pools.len() - 1] {
            let c = binomial(pool.count_ones() as usize, t) as u128;
            acc = acc.saturating_mul(c.max(1));
            if acc > u64::MAX as u128 {
                return acc;
            }
        }
        acc
    }

    /// True iff adding `v` to slot `i` keeps the tuple hole (no edge becomes
    /// placeable). `sets` are the current masks.
    fn addable(&self, sets: &[u64], i: usize, v: usize) -> bool {
        let mut probe: Vec<u64> = sets.to_vec();
        probe[i] = 1 << v;
        for e in self.g.incident_edges(v) {
            if placements_mask(e, &probe) > 0 {
                return false;
            }
        }
        true
    }

    fn blocked_in_other_sets(&self, sets: &[u64], i: usize, v: usize) -> bool {
        self.disjoint && sets.iter().enumerate().any(|(j, &m)| j != i && m & (1 << v) != 0)
    }

    /// Deterministic greedy hole: grow all slots round-robin with the
    /// smallest viable vertex until some slot gets stuck.
    fn greedy(&self) -> Vec<Vec<usize>> {
        let r = self.g.r();
        let mut sets = vec![0u64; r];
        let mut rounds: Vec<Vec<usize>> = vec![Vec::new(); r];
        'outer: loop {
            let mut added = Vec::with_capacity(r);
            for i in 0..r {
                let mut found = None;
                for v in 0..self.g.n() {
                    let bit = 1u64 << v;
                    if self.pools[i] & bit == 0 || sets[i] & bit != 0 {
                        continue;
                    }
                    if self.blocked_in_other_sets(&sets, i, v) {
                        continue;
                    }
                    if self.addable(&sets, i, v) {
                        found = Some(v);
                        break;
                    }
                }
                match found {
                    Some(v) => {
                        sets[i] |= 1 << v;
                        added.push((i, v));
                    }
                    None => {
                        // Roll back the incomplete round and stop.
                        for (j, v) in added {
                            sets[j] &= !(1u64 << v);
                        }
                        break 'outer;
                    }
                }
            }
            for &(i, v) in &added {
                rounds[i].push(v);
            }
        }
        rounds
    }

    /// One local-search run: random start, grow rounds with swaps on
    /// stagnation. Returns the best tuple seen in this run if it beats
    /// `target`, and decrements `moves_left` per attempted move.
    fn local_search(
        &self,
        r: &mut impl Rng,
        moves_left: &mut i64,
        target: usize,
    ) -> Option<Vec<Vec<usize>>> {
        let rr = self.g.r();
        let n = self.g.n();
        let mut sets = vec![0u64; rr];
        let mut lists: Vec<Vec<usize>> = vec![Vec::new(); rr];
        let mut order: Vec<usize> = (0..n).collect();
        let mut stagnant = 0usize;
        let mut best: Option<Vec<Vec<usize>>> = None;
        while *moves_left > 0 && stagnant < 60 {
            *moves_left -= 1;
            // Try to grow every slot by one vertex.
            let mut grown = Vec::with_capacity(rr);
            let mut ok = true;
            for i in 0..rr {
                order.shuffle(r);
                let mut found = None;
                for &v in &order {
                    let bit = 1u64 << v;
                    if self.pools[i] & bit == 0 || sets[i] & bit != 0 {
                        continue;
                    }
                    if self.blocked_in_other_sets(&sets, i, v) {
                        continue;
                    }
                    if self.addable(&sets, i, v) {
                        found = Some(v);
                        break;
                    }
                }
                match found {
                    Some(v) => {
                        sets[i] |= 1 << v;
                        grown.push((i, v));
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                for (i, v) in grown {
                    lists[i].push(v);
                }
                stagnant = 0;
                if lists[0].len() > target && lists[0].len() > best.as_ref().map_or(0, |b| b[0].len())
                {
                    best = Some(lists.clone());
                }
                continue;
            }
            // Roll back the partial round, then perturb one slot.
            for (i, v) in grown {
                sets[i] &= !(1u64 << v);
            }
            stagnant += 1;
            if lists.iter().all(|l| l.is_empty()) {
                break;
            }
            let i = r.gen_range(0..rr);
            if lists[i].is_empty() {
                continue;
            }
            let k = r.gen_range(0..lists[i].len());
            let out = lists[i].swap_remove(k);
            sets[i] &= !(1u64 << out);
            order.shuffle(r);
            for &v in &order {
                let bit = 1u64 << v;
                if v == out || self.pools[i] & bit == 0 || sets[i] & bit != 0 {
                    continue;
                }
                if self.blocked_in_other_sets(&sets, i, v) {
                    continue;
                }
                if self.addable(&sets, i, v) {
                    sets[i] |= bit;
                    lists[i].push(v);
                    break;
                }
            }
            if lists[i].len() < lists.iter().map(Vec::len).min().unwrap_or(0) + 1 {
                // Swap failed outright: trim every slot to the shortest length
                // so the state stays a valid equal-size prefix.
                let min_len = lists.iter().map(Vec::len).min().unwrap_or(0);
                for (j, l) in lists.iter_mut().enumerate() {
                    while l.len() > min_len {
                        let v = l.pop().unwrap();
                        sets[j] &= !(1u64 << v);
                    }
                }
            }
        }
        best
    }

    /// Decides whether a hole of size exactly `t` exists; returns the sets.
    fn exists(&self, t: usize) -> Option<Vec<Vec<usize>>> {
        let r = self.g.r();
        if t == 0 {
            return Some(vec![Vec::new(); r]);
        }
        if self.pools.iter().any(|p| (p.count_ones() as usize) < t) {
            return None;
        }
        let mut chosen: Vec<u64> = vec![0; r];
        self.enumerate(0, t, &mut chosen)
    }

    /// Depth-first over slots `0..r-2`; the slot `r-2` enumeration uses
    /// per-vertex conflict masks and slot `r-1` is closed greedily.
    fn enumerate(&self, level: usize, t: usize, chosen: &mut Vec<u64>) -> Option<Vec<Vec<usize>>> {
        let r = self.g.r();
        if level + 2 >= r || r == 2 {
            return self.inner_two_levels(t, chosen);
        }
        let forbidden = self.taken_mask(chosen, level);
        let pool: Vec<usize> = mask_vertices(self.pools[level] & !forbidden);
        let mut stack: Vec<usize> = Vec::with_capacity(t);
        self.combo_dfs(&pool, t, 0, &mut stack, &mut |sel: &[usize]| {
            chosen[level] = sel.iter().fold(0u64, |m, &v| m | (1 << v));
            let res = self.enumerate(level + 1, t, chosen);
            chosen[level] = 0;
            res
        })
    }

    /// Handles the last two slots: enumerate slot `r-2` with incremental
    /// conflict masks, close slot `r-1` with the maximal valid set.
    fn inner_two_levels(&self, t: usize, chosen: &[u64]) -> Option<Vec<Vec<usize>>> {
        let r = self.g.r();
        let pen = r - 2; // penultimate slot index; for r=2 this is slot 0
        let taken_pen = self.taken_mask(chosen, pen);
        let pen_pool: Vec<usize> = mask_vertices(self.pools[pen] & !taken_pen);
        if pen_pool.len() < t {
            return None;
        }

        // conflict[w]: last-slot vertices ruled out once w joins slot pen.
        let mut conflict = vec![0u64; self.g.n()];
        let prefix: Vec<u64> = chosen[..pen].to_vec();
        for e in self.g.edges() {
            for (wi, &w) in e.iter().enumerate() {
                if self.pools[pen] & (1 << w) == 0 {
                    continue;
                }
                for (ui, &u) in e.iter().enumerate() {
                    if ui == wi {
                        continue;
                    }
                    let rest: Vec<usize> =
                        e.iter().enumerate().filter(|&(i, _)| i != wi && i != ui).map(|(_, &v)| v).collect();
                    if prefix.is_empty() || placements_mask(&rest, &prefix) > 0 {
                        conflict[w] |= 1 << u;
                    }
                }
            }
        }

        let base_last = self.pools[r - 1];
        let mut stack_conf: Vec<u64> = vec![0];
        let mut stack_sel: Vec<usize> = Vec::with_capacity(t);
        let need_disjoint = self.disjoint;
        let chosen_all = self.taken_mask(chosen, r); // everything already placed

        fn rec(
            pool: &[usize],
            start: usize,
            t: usize,
            conflict: &[u64],
            stack_sel: &mut Vec<usize>,
            stack_conf: &mut Vec<u64>,
            base_last: u64,
            chosen_all: u64,
            need_disjoint: bool,
            chosen_prefix: &[u64],
        ) -> Option<Vec<Vec<usize>>> {
            if stack_sel.len() == t {
                let pen_mask = stack_sel.iter().fold(0u64, |m, &v| m | (1 << v));
                let mut allowed = base_last & !stack_conf.last().unwrap();
                if need_disjoint {
                    allowed &= !(chosen_all | pen_mask);
                }
                if (allowed.count_ones() as usize) < t {
                    return None;
                }
                let last: Vec<usize> = mask_vertices(allowed).into_iter().take(t).collect();
                let mut sets: Vec<Vec<usize>> =
                    chosen_prefix.iter().map(|&m| mask_vertices(m)).collect();
                sets.push(stack_sel.clone());
                sets.push(last);
                return Some(sets);
            }
            let remaining_needed = t - stack_sel.len();
            if pool.len() - start < remaining_needed {
                return None;
            }
            for idx in start..=pool.len() - remaining_needed {
                let v = pool[idx];
                stack_sel.push(v);
                stack_conf.push(stack_conf.last().unwrap() | conflict[v]);
                if let Some(hit) = rec(
                    pool,
                    idx + 1,
                    t,
                    conflict,
                    stack_sel,
                    stack_conf,
                    base_last,
                    chosen_all,
                    need_disjoint,
                    chosen_prefix,
                ) {
                    return Some(hit);
                }
                stack_sel.pop();
                stack_conf.pop();
            }
            None
        }

        rec(
            &pen_pool,
            0,
            t,
            &conflict,
            &mut stack_sel,
            &mut stack_conf,
            base_last,
            chosen_all,
            need_disjoint,
            &chosen[..pen],
        )
    }

    /// Union of chosen masks below `level` when disjointness is on.
    fn taken_mask(&self, chosen: &[u64], level: usize) -> u64 {
        if !self.disjoint {
            return 0;
        }
        chosen[..level.min(chosen.len())].iter().fold(0, |a, &b| a | b)
    }

    /// Generic combination DFS used by the outer levels.
    fn combo_dfs(
        &self,
        pool: &[usize],
        t: usize,
        start: usize,
        stack: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> Option<Vec<Vec<usize>>>,
    ) -> Option<Vec<Vec<usize>>> {
        if stack.len() == t {
            return visit(stack);
        }
        let needed = t - stack.len();
        if pool.len() - start < needed {
            return None;
        }
        for idx in start..=pool.len() - needed {
            stack.push(pool[idx]);
            if let Some(hit) = self.combo_dfs(pool, t, idx + 1, stack, visit) {
                return Some(hit);
            }
            stack.pop();
        }
        None
    }
}

/// Number of injective placements of `verts` into mask slots.
fn placements_mask(verts: &[usize], masks: &[u64]) -> u64 {
    fn rec(verts: &[usize], masks: &[u64], pos: usize, used: &mut u64) -> u64 {
        if pos == masks.len() {
            return 1;
        }
        let mut total = 0;
        for (i, &v) in verts.iter().enumerate() {
            if *used & (1 << i) == 0 && masks[pos] & (1u64 << v) != 0 {
                *used |= 1 << i;
                total += rec(verts, masks, pos + 1, used);
                *used &= !(1 << i);
            }
        }
        total
    }
    if verts.len() < masks.len() {
        return 0;
    }
    // Placement uses exactly masks.len() of the vertices; when more vertices
    // than slots are supplied the extras must not exist. Callers pass slices
    // with len == masks.len(); guard for safety.
    if verts.len() != masks.len() {
        return 0;
    }
    let mut used = 0u64;
    rec(verts, masks, 0, &mut used)
}

fn mask_vertices(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        let v = m.trailing_zeros() as usize;
        out.push(v);
        m &= m - 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(g: &RGraph) -> usize {
        hole_exact(g, None, &ExactOptions::default()).unwrap().0
    }

    #[test]
    fn empty_graph_hole_is_everything() {
        let g = RGraph::new(3, 7, vec![]).unwrap();
        assert_eq!(exact(&g), 7);
    }

    #[test]
    fn complete_graph_hole_is_arity_minus_one() {
        // Overlapping sets dodge edges by repetition: with every set equal to
        // one common (r-1)-set, a placement would need r distinct vertices
        // drawn from r-1, so t = r-1 is always a hole. Size-r sets admit a
        // transversal of distinct vertices, an edge of the complete graph.
        let g = RGraph::complete(2, 5).unwrap();
        assert_eq!(exact(&g), 1);
        let g3 = RGraph::complete(3, 6).unwrap();
        assert_eq!(exact(&g3), 2);
    }

    #[test]
    fn two_disjoint_triangles_have_hole_three() {
        let g = RGraph::new(
            2,
            6,
            vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![3, 4], vec![4, 5], vec![3, 5]],
        )
        .unwrap();
        assert_eq!(exact(&g), 3);
    }

    #[test]
    fn restriction_changes_the_answer() {
        // Path 0-1-2: unrestricted hole {0,2} x {0,2} has size 2.
        let g = RGraph::new(2, 3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(exact(&g), 2);
        let res = PartTuple::new(vec![vec![0, 1], vec![1, 2]]).unwrap();
        let (t, cert) = hole_exact(&g, Some(&res), &ExactOptions::default()).unwrap();
        assert_eq!(t, 1);
        cert.verify(&g, Some(&res), false).unwrap();
    }

    #[test]
    fn disjoint_flag_shrinks_holes() {
        // Empty graph on 5 vertices: overlapping holes reach 5, disjoint ones
        // floor(5/2) = 2 per side.
        let g = RGraph::new(2, 5, vec![]).unwrap();
        let opts = ExactOptions { disjoint: true, ..ExactOptions::default() };
        let (t, cert) = hole_exact(&g, None, &opts).unwrap();
        assert_eq!(t, 2);
        cert.verify(&g, None, true).unwrap();
    }

    #[test]
    fn heuristic_certificate_verifies_and_bounds_order() {
        let g = RGraph::new(
            2,
            6,
            vec![vec![0, 1], vec![1, 2], vec![0, 2], vec![3, 4], vec![4, 5], vec![3, 5]],
        )
        .unwrap();
        let hb = hole_heuristic(&g, None, &HeuristicOptions::default(), 11).unwrap();
        assert!(hb.lower <= hb.upper);
        hb.certificate.verify(&g, None, false).unwrap();
        assert_eq!(hb.lower, 3); // small instance: local search finds the optimum
        assert!(hb.exact);
    }

    #[test]
    fn heuristic_is_deterministic_per_seed() {
        let g = RGraph::complete(3, 9).unwrap();
        let a = hole_heuristic(&g, None, &HeuristicOptions::default(), 5).unwrap();
        let b = hole_heuristic(&g, None, &HeuristicOptions::default(), 5).unwrap();
        assert_eq!(serde_json::to_string(&a.certificate).unwrap(), serde_json::to_string(&b.certificate).unwrap());
        assert_eq!((a.lower, a.upper, a.exact), (b.lower, b.upper, b.exact));
    }

    #[test]
    fn guard_rejects_large_n() {
        let g = RGraph::new(2, 20, vec![]).unwrap();
        assert!(matches!(
            hole_exact(&g, None, &ExactOptions::default()),
            Err(Error::GuardExceeded(_))
        ));
    }
}
