//! Reachability diagnostics for interchangeable vertices.
//!
//! Two vertices of one part are reachable when, given any bounded blocker
//! set, some small connector set S forms transversal factors with either
//! endpoint. Checking all blockers is exponential, so these routines sample
//! blockers with recorded seeds: a passing run yields per-trial witnesses,
//! a failing one surrenders the first blocking sample. Nothing here is a
//! prover; composition of witnesses, however, is verified exactly.

use super::{verify_transversal_factor, FactorPattern, TransversalFactor};
use crate::graph::{PartTuple, RGraph};
use crate::rng::{mix, rng};
use crate::{Error, Result};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Search-node budget per sampled blocker.
const TRIAL_BUDGET: u64 = 400_000;
/// Node budget for one v-side factor probe.
const V_SIDE_BUDGET: u64 = TRIAL_BUDGET / 4;
/// Flat charge per v-side probe against the trial budget, bounding how many
/// u-side factors get probed before the trial gives up.
const V_SIDE_FEE: u64 = TRIAL_BUDGET / 64;

/// A connector set with verified factors toward both endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachWitness {
    pub u: usize,
    pub v: usize,
    /// Connector vertices, disjoint from both endpoints; |s| <= k*t - 1.
    pub s: Vec<usize>,
    /// Factor covering s plus u.
    pub factor_u: TransversalFactor,
    /// Factor covering s plus v.
    pub factor_v: TransversalFactor,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReachOutcome {
    /// One witness per sampled blocker.
    Reached(Vec<ReachWitness>),
    /// The first sampled blocker with no connector.
    Refuted(Vec<usize>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachReport {
    pub outcome: ReachOutcome,
    pub trials: usize,
    pub m: usize,
    pub k: usize,
    pub seed: u64,
}

impl ReachReport {
    pub fn reached(&self) -> bool {
        matches!(self.outcome, ReachOutcome::Reached(_))
    }
}

/// Sampled semi-decision of reachability between `u` and `v`: for `trials`
/// seeded blockers W with at most `m` vertices per part, search a connector
/// S of at most `k*t - 1` vertices whose union with either endpoint carries
/// a transversal factor.
#[allow(clippy::too_many_arguments)]
pub fn check_reachable(
    g: &RGraph,
    parts: &PartTuple,
    pat: &FactorPattern,
    u: usize,
    v: usize,
    m: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<ReachReport> {
    let _ = SearchCtx::new(g, parts, pat)?;
    let pu = part_of(parts, u)?;
    let pv = part_of(parts, v)?;
    if pu != pv {
        return Err(Error::InvalidInput(format!(
            "endpoints {u} and {v} live in different parts {pu} and {pv}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidInput("reachability needs k >= 1".into()));
    }

    let mut witnesses = Vec::with_capacity(trials);
    for trial in 0..trials {
        let w = sample_blocker(g.n(), parts, &[u, v], m, mix(seed, trial as u64));
        match connector(g, parts, pat, u, v, pu, k, &w)? {
            Some(witness) => witnesses.push(witness),
            None => {
                return Ok(ReachReport {
                    outcome: ReachOutcome::Refuted(w),
                    trials: trial + 1,
                    m,
                    k,
                    seed,
                })
            }
        }
    }
    Ok(ReachReport {
        outcome: ReachOutcome::Reached(witnesses),
        trials,
        m,
        k,
        seed,
    })
}

/// Compose witnesses sharing a pivot: a chain from `w1.u` to `w1.v == w2.u`
/// to `w2.v` becomes a single witness with added budgets. Both composed
/// factors are re-verified against the host.
pub fn transitivity_compose(
    g: &RGraph,
    parts: &PartTuple,
    pat: &FactorPattern,
    w1: &ReachWitness,
    w2: &ReachWitness,
) -> Result<ReachWitness> {
    if w1.v != w2.u {
        return Err(Error::InvalidInput(format!(
            "chains do not share a pivot: {} ends the first, {} starts the second",
            w1.v, w2.u
        )));
    }
    let pivot = w1.v;
    for &x in &w2.s {
        if w1.s.contains(&x) {
            return Err(Error::InvalidInput(format!(
                "connector sets overlap at vertex {x}"
            )));
        }
    }
    if w2.s.contains(&w1.u) || w1.s.contains(&w2.v) || w1.s.contains(&pivot) || w2.s.contains(&pivot)
    {
        return Err(Error::InvalidInput(
            "an endpoint lies inside the other chain's connector".into(),
        ));
    }

    let mut s: Vec<usize> = w1.s.iter().chain(w2.s.iter()).copied().collect();
    s.push(pivot);
    s.sort_unstable();

    let factor_u = w1.factor_u.union(&w2.factor_u);
    let factor_v = w1.factor_v.union(&w2.factor_v);
    let k = w1.k + w2.k;

    let mut cover_u = s.clone();
    cover_u.push(w1.u);
    cover_u.sort_unstable();
    verify_transversal_factor(g, parts, pat, &factor_u, Some(&cover_u))?;
    let mut cover_v = s.clone();
    cover_v.push(w2.v);
    cover_v.sort_unstable();
    verify_transversal_factor(g, parts, pat, &factor_v, Some(&cover_v))?;

    Ok(ReachWitness {
        u: w1.u,
        v: w2.v,
        s,
        factor_u,
        factor_v,
        k,
    })
}

/// Sampled diagnostic for merging a closed set `u1` with a candidate set
/// `u2` in the same part: per trial, it checks the merge hypothesis (two
/// disjoint copies avoiding a sampled blocker, one pinned inside `u1`, one
/// through a sampled `u2` vertex, with counterpart pairs reachable) and,
/// separately, the concluded reachability of sampled pairs of the union at
/// the degraded budget (m - 10kt, 6kt). Pass rates are reported; nothing is
/// proven.
#[allow(clippy::too_many_arguments)]
pub fn merge_closed_check(
    g: &RGraph,
    parts: &PartTuple,
    pat: &FactorPattern,
    u1: &[usize],
    u2: &[usize],
    m: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<MergeClosedReport> {
    if u1.is_empty() || u2.is_empty() {
        return Err(Error::InvalidInput("both vertex sets must be nonempty".into()));
    }
    let pi = part_of(parts, u1[0])?;
    for &x in u1.iter().chain(u2.iter()) {
        if part_of(parts, x)? != pi {
            return Err(Error::InvalidInput(format!(
                "vertex {x} is outside part {pi}"
            )));
        }
    }
    if u1.iter().any(|x| u2.contains(x)) {
        return Err(Error::InvalidInput("the sets overlap".into()));
    }
    let t = pat.t;
    let m_out = m.saturating_sub(10 * k * t);
    let k_out = 6 * k * t;

    let mut report = MergeClosedReport {
        hypothesis_trials: trials,
        hypothesis_passes: 0,
        conclusion_trials: trials,
        conclusion_passes: 0,
        m,
        k,
        m_concluded: m_out,
        k_concluded: k_out,
        notes: Vec::new(),
    };

    for trial in 0..trials {
        let tseed = mix(seed, 0x6d65_7267 ^ trial as u64);
        // Hypothesis: sample v in u2 and a blocker, then hunt the two
        // pinned copies and reachable counterparts.
        let v = u2[(mix(tseed, 1) as usize) % u2.len()];
        let w = sample_blocker(g.n(), parts, &[v], m, mix(tseed, 2));
        match hypothesis_trial(g, parts, pat, u1, v, pi, &w, m, k, mix(tseed, 3))? {
            Ok(()) => report.hypothesis_passes += 1,
            Err(note) => report.notes.push(format!("hypothesis trial {trial}: {note}")),
        }

        // Conclusion: a sampled pair of the union at the degraded budget.
        let union: Vec<usize> = u1.iter().chain(u2.iter()).copied().collect();
        let x = union[(mix(tseed, 4) as usize) % union.len()];
        let y = union[(mix(tseed, 5) as usize) % union.len()];
        if x == y {
            report.conclusion_passes += 1;
        } else {
            match check_reachable(g, parts, pat, x, y, m_out, k_out, 1, mix(tseed, 6)) {
                Ok(rep) if rep.reached() => report.conclusion_passes += 1,
                Ok(_) => report
                    .notes
                    .push(format!("conclusion trial {trial}: pair ({x}, {y}) not reached")),
                Err(Error::GuardExceeded(msg)) => report.notes.push(format!(
                    "conclusion trial {trial}: pair ({x}, {y}) search truncated: {msg}"
                )),
                Err(e) => return Err(e),
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeClosedReport {
    pub hypothesis_trials: usize,
    pub hypothesis_passes: usize,
    pub conclusion_trials: usize,
    pub conclusion_passes: usize,
    pub m: usize,
    pub k: usize,
    pub m_concluded: usize,
    pub k_concluded: usize,
    pub notes: Vec<String>,
}

/// One hypothesis trial; Ok(Err(reason)) distinguishes a clean miss from a
/// structural error.
#[allow(clippy::too_many_arguments)]
fn hypothesis_trial(
    g: &RGraph,
    parts: &PartTuple,
    pat: &FactorPattern,
    u1: &[usize],
    v: usize,
    pi: usize,
    w: &[usize],
    m: usize,
    k: usize,
    seed: u64,
) -> Result<std::result::Result<(), String>> {
    let mut ctx = SearchCtx::new(g, parts, pat)?;
    for &x in w {
        ctx.blocked[x] = true;
    }
    // Copy through v first.
    let mut used = vec![false; g.n()];
    let copies_v = ctx.copies_through(pi, v, &mut used, 64)?;
    if copies_v.is_empty() {
        return Ok(Err(format!("no transversal copy through {v} avoids the blocker")));
    }
    for copy_v in &copies_v {
        for &x in copy_v {
            used[x] = true;
        }
        // Pinned copy with its part-pi vertex inside u1, disjoint from the
        // v-copy.
        for &a in u1 {
            if ctx.blocked[a] || used[a] {
                continue;
            }
            let found = ctx.copies_through(pi, a, &mut used, 8)?;
            for copy_a in &found {
                // Counterpart reachability, one sampled blocker each; a
                // truncated search counts as a miss, not an error.
                let mut all = true;
                for j in 0..pat.t {
                    if j == pi {
                        continue;
                    }
                    let reached = match check_reachable(
                        g,
                        parts,
                        pat,
                        copy_a[j],
                        copy_v[j],
                        m,
                        k,
                        1,
                        mix(seed, j as u64),
                    ) {
                        Ok(rep) => rep.reached(),
                        Err(Error::GuardExceeded(_)) => false,
                        Err(e) => return Err(e),
                    };
                    if !reached {
                        all = false;
                        break;
                    }
                }
                if all {
                    return Ok(Ok(()));
                }
            }
        }
        for &x in copy_v {
            used[x] = false;
        }
    }
    Ok(Err("no disjoint pinned pair with reachable counterparts".into()))
}

/// Find a connector for one sampled blocker. Enumerates factors on the
/// u side (k copies, the first through u), then asks for a factor on the
/// same connector with v swapped in.
fn connector(
    g: &RGraph,
    parts: &PartTuple,
    pat: &FactorPattern,
    u: usize,
    v: usize,
    pu: usize,
    k: usize,
    w: &[usize],
) -> Result<Option<ReachWitness>> {
    let mut ctx = SearchCtx::new(g, parts, pat)?;
    for &x in w {
        ctx.blocked[x] = true;
    }
    if v != u {
        ctx.blocked[v] = true;
    }

    let mut used = vec![false; g.n()];
    let mut acc: Vec<Vec<usize>> = Vec::new();
    let mut out: Option<ReachWitness> = None;
    ctx.factors_through(pu, u, k, &mut used, &mut acc, &mut |ctx, copies| {
        let factor_u = TransversalFactor { copies: copies.to_vec() };
        let mut s = factor_u.vertices();
        s.retain(|&x| x != u);
        if u == v {
            out = Some(ReachWitness {
                u,
                v,
                s,
                factor_v: factor_u.clone(),
                factor_u,
                k,
            });
            return Ok(true);
        }
        // The v side reuses the connector exactly. Each probe draws down
        // the shared trial budget, so a u-side factor stream over a
        // hopeless v cannot grind unbounded; a probe that exhausts its own
        // share is just a miss.
        ctx.charge(V_SIDE_FEE)?;
        let mut keep = s.clone();
        keep.push(v);
        let narrowed = super::narrow_parts(ctx.parts, &keep)?;
        match super::find_transversal_factor(ctx.g, &narrowed, ctx.pat, V_SIDE_BUDGET) {
            Ok(Some(factor_v)) => {
                out = Some(ReachWitness { u, v, s, factor_u, factor_v, k });
                Ok(true)
            }
            Ok(None) | Err(Error::GuardExceeded(_)) => Ok(false),
            Err(e) => Err(e),
        }
    })?;
    Ok(out)
}

fn part_of(parts: &PartTuple, v: usize) -> Result<usize> {
    parts
        .parts()
        .iter()
        .position(|p| p.contains(&v))
        .ok_or_else(|| Error::InvalidInput(format!("vertex {v} is in no part")))
}

/// Deterministic blocker sample: up to `m` vertices per part, never the
/// protected vertices.
fn sample_blocker(
    n: usize,
    parts: &PartTuple,
    protect: &[usize],
    m: usize,
    seed: u64,
) -> Vec<usize> {
    let _ = n;
    let mut r = rng(seed, 0x626c_6f63);
    let mut w = Vec::new();
    for part in parts.parts() {
        let mut pool: Vec<usize> = part
            .iter()
            .copied()
            .filter(|x| !protect.contains(x))
            .collect();
        pool.shuffle(&mut r);
        pool.truncate(m);
        w.extend(pool);
    }
    w.sort_unstable();
    w
}

/// Shared copy/factor enumeration over blocked vertices.
struct SearchCtx<'a> {
    g: &'a RGraph,
    parts: &'a PartTuple,
    pat: &'a FactorPattern,
    /// Pattern edges keyed by their largest index.
    closing: Vec<Vec<Vec<usize>>>,
    blocked: Vec<bool>,
    nodes: u64,
}

impl<'a> SearchCtx<'a> {
    fn new(g: &'a RGraph, parts: &'a PartTuple, pat: &'a FactorPattern) -> Result<Self> {
        if parts.len() != pat.t {
            return Err(Error::InvalidInput(format!(
                "pattern wants {} parts, got {}",
                pat.t,
                parts.len()
            )));
        }
        parts.check_labels(g.n())?;
        if !parts.is_disjoint() {
            return Err(Error::InvalidInput("reachability needs disjoint parts".into()));
        }
        let mut closing: Vec<Vec<Vec<usize>>> = vec![Vec::new(); pat.t];
        for pe in pat.f.edges() {
            let last = *pe.iter().max().expect("nonempty edge");
            closing[last].push(pe.clone());
        }
        Ok(SearchCtx {
            g,
            parts,
            pat,
            closing,
            blocked: vec![false; g.n()],
            nodes: 0,
        })
    }

    fn spend(&mut self) -> Result<()> {
        self.charge(1)
    }

    fn charge(&mut self, cost: u64) -> Result<()> {
        self.nodes = self.nodes.saturating_add(cost);
        if self.nodes > TRIAL_BUDGET {
            return Err(Error::GuardExceeded(format!(
                "reachability search exceeded {TRIAL_BUDGET} nodes"
            )));
        }
        Ok(())
    }

    /// Collect up to `cap` transversal copies with position `pin_part`
    /// equal to `pin`, avoiding blocked and used vertices.
    fn copies_through(
        &mut self,
        pin_part: usize,
        pin: usize,
        used: &mut [bool],
        cap: usize,
    ) -> Result<Vec<Vec<usize>>> {
        let mut acc = Vec::new();
        let mut copy = vec![usize::MAX; self.pat.t];
        self.extend(pin_part, pin, &mut copy, 0, used, &mut |_, c, _| {
            acc.push(c.to_vec());
            Ok(acc.len() >= cap)
        })?;
        Ok(acc)
    }

    /// Enumerate factors of `k` disjoint copies, the first pinned through
    /// (`pin_part`, `pin`); the visitor returns true to stop. Copies after
    /// the first carry strictly increasing part-0 vertices, killing
    /// permutation symmetry.
    fn factors_through(
        &mut self,
        pin_part: usize,
        pin: usize,
        k: usize,
        used: &mut [bool],
        acc: &mut Vec<Vec<usize>>,
        visit: &mut dyn FnMut(&mut Self, &[Vec<usize>]) -> Result<bool>,
    ) -> Result<bool> {
        if acc.len() == k {
            return visit(self, acc);
        }
        let pins: Vec<(usize, usize)> = if acc.is_empty() {
            vec![(pin_part, pin)]
        } else {
            let floor = if acc.len() == 1 { 0 } else { acc.last().expect("nonempty")[0] + 1 };
            self.parts.parts()[0]
                .iter()
                .copied()
                .filter(|&x| x >= floor && !used[x] && !self.blocked[x])
                .map(|x| (0, x))
                .collect()
        };
        for (pp, pv) in pins {
            let mut copy = vec![usize::MAX; self.pat.t];
            // On copy completion the visitor recurses for the remaining
            // copies; `used` still marks the finished copy there.
            let done = self.extend(pp, pv, &mut copy, 0, used, &mut |ctx, c, used2| {
                acc.push(c.to_vec());
                let out = ctx.factors_through(pin_part, pin, k, used2, acc, visit);
                acc.pop();
                out
            })?;
            if done {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Depth-first placement of a single copy. The visitor sees the filled
    /// copy with its vertices still flagged in `used`, and returns true to
    /// stop the whole enumeration.
    fn extend(
        &mut self,
        pin_part: usize,
        pin: usize,
        copy: &mut Vec<usize>,
        depth: usize,
        used: &mut [bool],
        visit: &mut dyn FnMut(&mut Self, &[usize], &mut [bool]) -> Result<bool>,
    ) -> Result<bool> {
        self.spend()?;
        if depth == self.pat.t {
            return visit(self, copy, used);
        }
        if depth == pin_part {
            if used[pin] || self.blocked[pin] {
                return Ok(false);
            }
            copy[depth] = pin;
            if !self.copy_edges_ok(copy, depth) {
                return Ok(false);
            }
            used[pin] = true;
            let out = self.extend(pin_part, pin, copy, depth + 1, used, visit);
            used[pin] = false;
            return out;
        }
        for idx in 0..self.parts.parts()[depth].len() {
            let x = self.parts.parts()[depth][idx];
            if used[x] || self.blocked[x] {
                continue;
            }
            copy[depth] = x;
            if !self.copy_edges_ok(copy, depth) {
                continue;
            }
            used[x] = true;
            let out = self.extend(pin_part, pin, copy, depth + 1, used, visit)?;
            used[x] = false;
            if out {
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn copy_edges_ok(&self, copy: &[usize], depth: usize) -> bool {
        self.closing[depth].iter().all(|pe| {
            let he: Vec<usize> = pe.iter().map(|&i| copy[i]).collect();
            self.g.is_edge(&he)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete_host(r: usize, size: usize) -> (RGraph, PartTuple) {
        let n = r * size;
        let g = RGraph::complete(r, n).unwrap();
        let parts = PartTuple::new(
            (0..r).map(|i| (i * size..(i + 1) * size).collect()).collect(),
        )
        .unwrap();
        (g, parts)
    }

    #[test]
    fn complete_host_reaches_with_witnesses() {
        let (g, parts) = complete_host(3, 5);
        let pat = FactorPattern::edge(3).unwrap();
        let rep = check_reachable(&g, &parts, &pat, 0, 1, 1, 1, 3, 9).unwrap();
        assert!(rep.reached());
        if let ReachOutcome::Reached(ws) = &rep.outcome {
            assert_eq!(ws.len(), 3);
            for w in ws {
                assert_eq!(w.s.len(), 2);
                verify_transversal_factor(&g, &parts, &pat, &w.factor_u, None).unwrap();
                verify_transversal_factor(&g, &parts, &pat, &w.factor_v, None).unwrap();
            }
        }
    }

    #[test]
    fn isolated_vertex_is_refuted() {
        // Vertex 1 lies in no edge: the v side can never factor.
        let (full, parts) = complete_host(3, 4);
        let edges: Vec<Vec<usize>> = full
            .edges()
            .iter()
            .filter(|e| !e.contains(&1))
            .cloned()
            .collect();
        let g = RGraph::new(3, 12, edges).unwrap();
        let pat = FactorPattern::edge(3).unwrap();
        let rep = check_reachable(&g, &parts, &pat, 0, 1, 1, 1, 2, 4).unwrap();
        assert!(!rep.reached());
        assert!(matches!(rep.outcome, ReachOutcome::Refuted(_)));
    }

    #[test]
    fn identical_endpoints_take_one_copy() {
        let (g, parts) = complete_host(3, 4);
        let pat = FactorPattern::edge(3).unwrap();
        let rep = check_reachable(&g, &parts, &pat, 2, 2, 1, 1, 1, 5).unwrap();
        if let ReachOutcome::Reached(ws) = &rep.outcome {
            assert_eq!(ws[0].factor_u, ws[0].factor_v);
            assert_eq!(ws[0].factor_u.copies.len(), 1);
        } else {
            panic!("expected witnesses");
        }
    }

    #[test]
    fn composition_verifies_and_adds_budgets() {
        let (g, parts) = complete_host(3, 8);
        let pat = FactorPattern::edge(3).unwrap();
        // Build two manual chains sharing pivot 1: connectors live on
        // disjoint vertex ranges of the complete host.
        let w1 = ReachWitness {
            u: 0,
            v: 1,
            s: vec![8, 16],
            factor_u: TransversalFactor { copies: vec![vec![0, 8, 16]] },
            factor_v: TransversalFactor { copies: vec![vec![1, 8, 16]] },
            k: 1,
        };
        let w2 = ReachWitness {
            u: 1,
            v: 2,
            s: vec![9, 17],
            factor_u: TransversalFactor { copies: vec![vec![1, 9, 17]] },
            factor_v: TransversalFactor { copies: vec![vec![2, 9, 17]] },
            k: 1,
        };
        let c = transitivity_compose(&g, &parts, &pat, &w1, &w2).unwrap();
        assert_eq!((c.u, c.v, c.k), (0, 2, 2));
        assert_eq!(c.s, vec![1, 8, 9, 16, 17]);
        assert!(c.s.len() <= c.k * pat.t - 1);

        // Overlapping connectors are rejected.
        let w2_bad = ReachWitness { s: vec![8, 17], ..w2 };
        assert!(transitivity_compose(&g, &parts, &pat, &w1, &w2_bad).is_err());
    }

    #[test]
    fn merge_check_passes_on_complete_and_reports_failures() {
        // Parts of 14: the concluded budget asks for 6kt = 12 disjoint
        // copies, which needs 13 part vertices next to the avoided endpoint.
        let (g, parts) = complete_host(2, 14);
        let pat = FactorPattern::edge(2).unwrap();
        let u1: Vec<usize> = (0..4).collect();
        let u2: Vec<usize> = (4..6).collect();
        let rep = merge_closed_check(&g, &parts, &pat, &u1, &u2, 2, 1, 2, 3).unwrap();
        assert_eq!(rep.hypothesis_passes, rep.hypothesis_trials);
        assert_eq!(rep.conclusion_passes, rep.conclusion_trials);

        // Isolate u2: hypothesis trials must fail and say so.
        let edges: Vec<Vec<usize>> = g
            .edges()
            .iter()
            .filter(|e| !e.contains(&4) && !e.contains(&5))
            .cloned()
            .collect();
        let g2 = RGraph::new(2, 28, edges).unwrap();
        let rep2 = merge_closed_check(&g2, &parts, &pat, &u1, &u2, 2, 1, 2, 3).unwrap();
        assert_eq!(rep2.hypothesis_passes, 0);
        assert!(!rep2.notes.is_empty());
    }
}
