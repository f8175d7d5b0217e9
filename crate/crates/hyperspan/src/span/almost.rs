//! Almost-spanning tree embedding through a random reservoir.
//!
//! The embedder splits the guest forest into a small starter forest plus a
//! sequence of leaf-matching and short-path growth stages, then replays that
//! sequence inside the host.  A random reservoir of host vertices is set
//! aside up front: matching stages that cannot be finished by a crossing
//! matching alone are completed greedily through the reservoir, and path
//! stages route entirely through it.  A per-stage budget ledger caps how much
//! of the reservoir each stage may consume, so one bad stage cannot starve
//! the rest of the run.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::{PartTuple, RGraph};
use crate::matching::find_matching;
use crate::rng::{mix, rng};
use crate::tree::{tree_split, BarePath, Hypertree, SplitSequence, SplitStage};
use crate::Result;

use super::{partial_map_note, EmbedRun, Embedding, SideConstraints};

/// Share of the slack `eta * n` reserved for the reservoir.
const RESERVOIR_SHARE: f64 = 0.5;
/// Fraction of the reservoir degree bound a vertex must meet (health check).
const R2_FACTOR: f64 = 0.5;
/// Sampled vertex pairs for the reservoir connectivity check.
const R3_SAMPLES: usize = 10;
/// Node budget for one three-edge path search.
const THREE_PATH_BUDGET: u64 = 200_000;
/// Full restarts with a fresh reservoir before giving up.
const ATTEMPTS: usize = 5;
/// Fresh part redraws inside a single matching stage.
const STAGE_DRAWS: usize = 3;
/// Peel ratio handed to the splitter.
const SPLIT_MU: f64 = 0.3;
/// Cap on the completion part size (keeps the degree threshold attainable).
const U_TRIM: usize = 12;
/// Default per-stage reservoir budget coefficient.
const DEFAULT_STAGE_ALPHA: f64 = 0.05;

/// One row of the reservoir budget ledger.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    /// Stage index (0 = starter forest; growth stages count from 1).
    pub stage: usize,
    /// Human-readable stage label.
    pub label: String,
    /// Reservoir vertices consumed by this stage.
    pub consumed: usize,
    /// Running total of consumed reservoir vertices.
    pub cumulative: usize,
    /// Cap on the running total after this stage.
    pub budget: usize,
}

/// A validated random reservoir plus its budget ledger.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reservoir {
    /// Sorted reservoir vertex labels.
    pub members: Vec<usize>,
    /// Per-stage consumption rows, filled in as the run progresses.
    pub ledger: Vec<LedgerEntry>,
}

impl Reservoir {
    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.members.binary_search(&v).is_ok()
    }
}

/// Draws a reservoir and checks it: exact size with both sides represented
/// when side constraints are present (R1), every host vertex keeps a healthy
/// degree into it (R2), and sampled vertex pairs are joined by a three-edge
/// path routed through it (R3).  Returns the reservoir or a note saying
/// which check failed.
fn draw_reservoir(
    g: &RGraph,
    size: usize,
    eps: f64,
    y_mask: Option<&[bool]>,
    seed: u64,
) -> std::result::Result<Reservoir, String> {
    let n = g.n();
    let r = g.r();
    let mut chooser = rng(seed, 0x7265_7376);
    let members: Vec<usize> = match y_mask {
        None => {
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(&mut chooser);
            all.truncate(size);
            all
        }
        Some(y) => {
            // Stratified draw: keep the reservoir's side mix close to the
            // host's so both sides stay usable for completions.
            let mut ys: Vec<usize> = (0..n).filter(|&v| y[v]).collect();
            let mut xs: Vec<usize> = (0..n).filter(|&v| !y[v]).collect();
            ys.shuffle(&mut chooser);
            xs.shuffle(&mut chooser);
            let want_y = ((size as f64) * (ys.len() as f64) / (n as f64)).round() as usize;
            let want_y = want_y.clamp(1.min(size), ys.len()).min(size);
            let mut picked: Vec<usize> = ys.into_iter().take(want_y).collect();
            picked.extend(xs.into_iter().take(size - picked.len()));
            picked
        }
    };
    let mut members = members;
    members.sort_unstable();
    if members.len() != size {
        return Err(format!("reservoir draw produced {} of {} vertices", members.len(), size));
    }
    if let Some(y) = y_mask {
        let in_y = members.iter().filter(|&&v| y[v]).count();
        let in_x = members.len() - in_y;
        let floor = (members.len() / (4 * r)).max(1);
        if in_y < floor.min(members.len()) || in_x < floor.min(members.len()) {
            return Err(format!(
                "reservoir sides unbalanced: {in_x} on one side, {in_y} on the other"
            ));
        }
    }

    // R2: ordered degree of every vertex into r-1 copies of the reservoir.
    // The base discounts the vertex itself and injectivity, so members of
    // small reservoirs are judged fairly. Below 2(r-1) members the bound is
    // vacuous at best and unsatisfiable at worst (there is no room for r-1
    // distinct partners), so it is only enforced for larger reservoirs;
    // exact-fit spanning instances legitimately run with a sliver.
    if size >= 2 * (r - 1) {
        let sets: Vec<Vec<usize>> = vec![members.clone(); r - 1];
        let base = (size as f64 - (r as f64 - 1.0)).max(1.0);
        let need = R2_FACTOR * eps * base.powi(r as i32 - 1);
        for v in 0..n {
            let d = g.directed_degree(v, &sets).map_err(|e| e.to_string())? as f64;
            if d < need {
                return Err(format!(
                    "vertex {v} has reservoir degree {d} below the health bound {need:.1}"
                ));
            }
        }
    }

    // R3: sampled pairs must be joined by a three-edge path inside the
    // reservoir.  Skipped when the reservoir cannot hold such a path.
    if size >= 3 * (r - 1) - 1 && n >= 2 {
        let mut allow = vec![false; n];
        for &v in &members {
            allow[v] = true;
        }
        let mut pair_rng = rng(seed, 0x7061_6972);
        let pool: Vec<usize> = match y_mask {
            Some(y) => (0..n).filter(|&v| !y[v]).collect(),
            None => (0..n).collect(),
        };
        if pool.len() >= 2 {
            for _ in 0..R3_SAMPLES {
                let a = pool[(pair_rng.next_u64() % pool.len() as u64) as usize];
                let b = pool[(pair_rng.next_u64() % pool.len() as u64) as usize];
                if a == b {
                    continue;
                }
                let mut open = allow.clone();
                open[a] = false;
                open[b] = false;
                let mut budget = THREE_PATH_BUDGET;
                if find_three_path(g, a, b, &open, None, &mut budget).is_none() {
                    return Err(format!(
                        "no three-edge reservoir path between sampled vertices {a} and {b}"
                    ));
                }
            }
        }
    }

    Ok(Reservoir { members, ledger: Vec::new() })
}

/// Side requirements for one three-edge path search.
#[derive(Debug, Clone)]
pub(crate) struct ThreeSides {
    /// Host-side mask: `true` marks the second vertex class.
    pub y_host: Vec<bool>,
    /// Required side of the two junction vertices.
    pub junction_y: [bool; 2],
    /// Required second-class count among the free interior of each edge.
    pub fresh_y: [usize; 3],
}

/// Finds a three-edge loose path from `from` to `to` whose interior vertices
/// all satisfy `allow`.  Consecutive edges share exactly one vertex and
/// non-consecutive edges are disjoint.  Returns the edges in path order.
pub(crate) fn find_three_path(
    g: &RGraph,
    from: usize,
    to: usize,
    allow: &[bool],
    sides: Option<&ThreeSides>,
    budget: &mut u64,
) -> Option<[Vec<usize>; 3]> {
    let interior_ok = |e: &[usize], keep: &[usize], junctions: &[usize]| -> bool {
        e.iter().all(|&v| keep.contains(&v) || junctions.contains(&v) || allow[v])
    };
    let side_ok = |e: &[usize], idx: usize, keep: &[usize], junctions: &[usize]| -> bool {
        let Some(s) = sides else { return true };
        let fresh_y = e
            .iter()
            .filter(|&&v| !keep.contains(&v) && !junctions.contains(&v) && s.y_host[v])
            .count();
        fresh_y == s.fresh_y[idx]
    };
    let junction_side = |w: usize, which: usize| -> bool {
        match sides {
            Some(s) => s.y_host[w] == s.junction_y[which],
            None => true,
        }
    };
    for e1 in g.incident_edges(from) {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        if e1.contains(&to) || !interior_ok(e1, &[from], &[]) || !side_ok(e1, 0, &[from], &[]) {
            continue;
        }
        for &w1 in e1 {
            if w1 == from || !junction_side(w1, 0) {
                continue;
            }
            for e2 in g.incident_edges(w1) {
                if *budget == 0 {
                    return None;
                }
                *budget -= 1;
                // Middle edge: meets e1 exactly at w1, avoids the endpoints.
                if e2.iter().any(|&v| v != w1 && e1.contains(&v)) {
                    continue;
                }
                if e2.contains(&from) || e2.contains(&to) {
                    continue;
                }
                if !interior_ok(e2, &[], &[w1]) || !side_ok(e2, 1, &[], &[w1]) {
                    continue;
                }
                for &w2 in e2 {
                    if w2 == w1 || !junction_side(w2, 1) {
                        continue;
                    }
                    for e3 in g.incident_edges(w2) {
                        if *budget == 0 {
                            return None;
                        }
                        *budget -= 1;
                        if !e3.contains(&to) {
                            continue;
                        }
                        // Last edge: meets e2 exactly at w2, avoids e1.
                        if e3.iter().any(|&v| v != w2 && e2.contains(&v)) {
                            continue;
                        }
                        if e3.iter().any(|&v| v != to && e1.contains(&v)) {
                            continue;
                        }
                        if !interior_ok(e3, &[to], &[w2]) || !side_ok(e3, 2, &[to], &[w2]) {
                            continue;
                        }
                        return Some([e1.to_vec(), e2.to_vec(), e3.to_vec()]);
                    }
                }
            }
        }
    }
    None
}

/// Embeds an almost-spanning hyperforest into the host.
///
/// Preconditions: the guest has the same edge size as the host, occupies at
/// most a `(1 - eta)` fraction of the host vertices, and the host satisfies
/// the minimum-degree hypothesis `(r-1)! * min_deg >= eps * n^(r-1)`.  Side
/// constraints, when given, force marked guest vertices onto marked host
/// vertices and all others off them.
pub fn embed_almost_spanning(
    g: &RGraph,
    guest: &Hypertree,
    eta: f64,
    eps: f64,
    seed: u64,
    sides: Option<&SideConstraints>,
) -> Result<EmbedRun> {
    almost_with_alpha(g, guest, eta, eps, DEFAULT_STAGE_ALPHA, seed, sides)
}

/// Worker state for one embedding attempt.
struct Attempt<'a> {
    g: &'a RGraph,
    guest: &'a Hypertree,
    reservoir: Reservoir,
    /// map[guest vertex] -> host vertex.
    map: Vec<Option<usize>>,
    /// Host vertices already carrying a guest vertex.
    used: Vec<bool>,
    /// Host vertices inside the reservoir.
    in_r: Vec<bool>,
    /// Guest-side mask (second class), all false without constraints.
    b_guest: Vec<bool>,
    /// Host-side mask (second class), all false without constraints.
    y_host: Vec<bool>,
    sided: bool,
    consumed: usize,
    budget_base: usize,
    stages: Vec<String>,
    seed: u64,
}

impl<'a> Attempt<'a> {
    fn host_free(&self, v: usize) -> bool {
        !self.used[v] && !self.in_r[v]
    }

    /// Free non-reservoir host vertices on the requested side.
    fn free_pool(&self, want_y: Option<bool>) -> Vec<usize> {
        (0..self.g.n())
            .filter(|&v| self.host_free(v))
            .filter(|&v| match want_y {
                None => true,
                Some(y) => self.y_host[v] == y,
            })
            .collect()
    }

    fn reservoir_free(&self) -> Vec<usize> {
        self.reservoir.members.iter().copied().filter(|&v| !self.used[v]).collect()
    }

    fn place(&mut self, guest_v: usize, host_v: usize) -> Result<()> {
        if self.map[guest_v].is_some() || self.used[host_v] {
            return Err(Error::Internal(format!(
                "double placement of guest {guest_v} on host {host_v}"
            )));
        }
        if self.sided && self.b_guest[guest_v] != self.y_host[host_v] {
            return Err(Error::Internal(format!(
                "side mismatch placing guest {guest_v} on host {host_v}"
            )));
        }
        self.map[guest_v] = Some(host_v);
        self.used[host_v] = true;
        if self.in_r[host_v] {
            self.consumed += 1;
        }
        Ok(())
    }

    /// Greedy placement of one guest edge.  Anchors are the already-mapped
    /// vertices; every host edge containing their images is tried in turn and
    /// the fresh vertices are matched side-for-side.  `use_reservoir` opens
    /// reservoir vertices to the fresh slots.
    fn greedy_edge(&mut self, edge: &[usize], use_reservoir: bool) -> Result<bool> {
        let anchors: Vec<usize> = edge.iter().copied().filter(|&v| self.map[v].is_some()).collect();
        let fresh: Vec<usize> = edge.iter().copied().filter(|&v| self.map[v].is_none()).collect();
        let images: Vec<usize> = anchors.iter().map(|&v| self.map[v].unwrap()).collect();
        let fresh_b: Vec<usize> = fresh.iter().copied().filter(|&v| self.b_guest[v]).collect();
        let fresh_a: Vec<usize> = fresh.iter().copied().filter(|&v| !self.b_guest[v]).collect();
        let slot_free = |s: &Self, v: usize| -> bool {
            if s.used[v] {
                return false;
            }
            if s.in_r[v] && !use_reservoir {
                return false;
            }
            true
        };
        let candidates: Vec<Vec<usize>> = match images.first() {
            Some(&img) => self.g.incident_edges(img).map(|e| e.to_vec()).collect(),
            None => self.g.edges().to_vec(),
        };
        for host_edge in candidates {
            if images.iter().any(|&img| !host_edge.contains(&img)) {
                continue;
            }
            let open: Vec<usize> =
                host_edge.iter().copied().filter(|&v| !images.contains(&v)).collect();
            if open.len() != fresh.len() || open.iter().any(|&v| !slot_free(self, v)) {
                continue;
            }
            let open_y: Vec<usize> = open.iter().copied().filter(|&v| self.y_host[v]).collect();
            let open_x: Vec<usize> = open.iter().copied().filter(|&v| !self.y_host[v]).collect();
            if open_y.len() != fresh_b.len() {
                continue;
            }
            for (&gv, &hv) in fresh_b.iter().zip(open_y.iter()) {
                self.place(gv, hv)?;
            }
            for (&gv, &hv) in fresh_a.iter().zip(open_x.iter()) {
                self.place(gv, hv)?;
            }
            return Ok(true);
        }
        Ok(false)
    }

    /// Places the starter forest by BFS over its edges: an edge touching the
    /// placed set always goes next, so every edge has at most one anchor.
    fn place_base(&mut self, t0: &[usize]) -> Result<()> {
        let mut done = vec![false; t0.len()];
        for _ in 0..t0.len() {
            let next = (0..t0.len()).filter(|&i| !done[i]).find(|&i| {
                self.guest.edge(t0[i]).iter().any(|&v| self.map[v].is_some())
            });
            let next = match next {
                Some(i) => i,
                None => match done.iter().position(|&d| !d) {
                    Some(i) => i,
                    None => break,
                },
            };
            done[next] = true;
            let edge = self.guest.edge(t0[next]).to_vec();
            if !self.greedy_edge(&edge, false)? {
                return Err(Error::PipelineFailure {
                    stage: "starter forest".into(),
                    detail: format!(
                        "no host edge fits starter edge {edge:?}; {}",
                        partial_map_note(&self.map)
                    ),
                });
            }
        }
        self.stages.push(format!("stage 0 (starter forest): {} edges placed", t0.len()));
        Ok(())
    }

    /// Budget cap after `stage_no` stages given `extra` path allowances.
    fn budget_cap(&self, stage_no: usize, extra: usize) -> usize {
        self.budget_base * stage_no + extra
    }

    /// One leaf-matching growth stage.  Edges with an anchor and a uniform
    /// side pattern go through the crossing-matching finder with the
    /// reservoir as completion fuel; the rest are placed greedily.
    fn place_matching_stage(
        &mut self,
        stage_no: usize,
        edges: &[usize],
        path_extra: usize,
        seed_stage: u64,
    ) -> Result<()> {
        let r_g = self.guest.r();
        let mut batch: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut loose: Vec<usize> = Vec::new();
        for &ei in edges {
            let edge = self.guest.edge(ei);
            let anchors: Vec<usize> =
                edge.iter().copied().filter(|&v| self.map[v].is_some()).collect();
            let fresh: Vec<usize> =
                edge.iter().copied().filter(|&v| self.map[v].is_none()).collect();
            let fresh_b = fresh.iter().filter(|&&v| self.b_guest[v]).count();
            let conforming = anchors.len() == 1
                && !self.b_guest[anchors[0]]
                && (!self.sided || fresh_b == 1);
            if conforming {
                batch.push((anchors[0], fresh));
            } else {
                loose.push(ei);
            }
        }

        let mut via_matching = 0usize;
        let mut via_completion = 0usize;
        if !batch.is_empty() {
            let m = batch.len();
            let anchor_images: Vec<usize> =
                batch.iter().map(|(a, _)| self.map[*a].unwrap()).collect();
            let mut placed = false;
            let mut last_note = String::new();
            for draw in 0..STAGE_DRAWS {
                let draw_seed = mix(seed_stage, draw as u64);
                // Oversized fresh parts give the crossing matching slack, so
                // the budgeted reservoir completion stays a rare fallback.
                let roomy = m + (m / 2).max(2);
                let parts = match self
                    .draw_parts(m, roomy, r_g, draw_seed)
                    .or_else(|| self.draw_parts(m, m, r_g, draw_seed))
                {
                    Some(p) => p,
                    None => {
                        last_note = "not enough free host vertices for fresh parts".into();
                        break;
                    }
                };
                let mut tuple_parts: Vec<Vec<usize>> = vec![anchor_images.clone()];
                tuple_parts.extend(parts.iter().cloned());
                let v_tuple = PartTuple::new(tuple_parts)?;
                let (u_tuple, m_star) = self.completion_fuel(stage_no, r_g, path_extra)?;
                let result = find_matching(self.g, &v_tuple, u_tuple.as_ref(), m_star)?;
                if !result.uncovered.is_empty() {
                    last_note = format!(
                        "{} of {} anchors uncovered on draw {}",
                        result.uncovered.len(),
                        m,
                        draw
                    );
                    continue;
                }
                // Decode: slot 0 names the anchor, the rest are fresh slots.
                let decoded: Vec<(Vec<usize>, bool)> = result
                    .matching
                    .tuples
                    .iter()
                    .map(|t| (t.clone(), false))
                    .chain(result.completion.tuples.iter().map(|t| (t.clone(), true)))
                    .collect();
                for (t, is_completion) in decoded {
                    let anchor_img = t[0];
                    let bi = batch
                        .iter()
                        .position(|(a, _)| self.map[*a] == Some(anchor_img))
                        .ok_or_else(|| {
                            Error::Internal("matched tuple names an unknown anchor".into())
                        })?;
                    let fresh = batch[bi].1.clone();
                    self.assign_fresh(&fresh, &t[1..])?;
                    if is_completion {
                        via_completion += 1;
                    } else {
                        via_matching += 1;
                    }
                }
                placed = true;
                break;
            }
            if !placed {
                return Err(Error::PipelineFailure {
                    stage: format!("growth stage {stage_no}"),
                    detail: format!("{last_note}; {}", partial_map_note(&self.map)),
                });
            }
        }

        let mut via_greedy = 0usize;
        for ei in loose {
            let edge = self.guest.edge(ei).to_vec();
            if !self.greedy_edge(&edge, false)? {
                return Err(Error::PipelineFailure {
                    stage: format!("growth stage {stage_no}"),
                    detail: format!(
                        "no host edge fits stage edge {edge:?}; {}",
                        partial_map_note(&self.map)
                    ),
                });
            }
            via_greedy += 1;
        }

        self.stages.push(format!(
            "stage {stage_no} (matching): {} edges ({via_matching} crossing, {via_completion} reservoir, {via_greedy} greedy)",
            edges.len()
        ));
        self.push_ledger(stage_no, "matching", path_extra);
        Ok(())
    }

    /// Draws `r_g - 1` disjoint fresh parts of size `size >= m` from the free
    /// pool, side-aware: with constraints the last part is second-class.
    fn draw_parts(
        &self,
        m: usize,
        size: usize,
        r_g: usize,
        seed_draw: u64,
    ) -> Option<Vec<Vec<usize>>> {
        debug_assert!(size >= m);
        let mut chooser = rng(seed_draw, 0x7061_7274);
        if !self.sided {
            let mut pool = self.free_pool(None);
            if pool.len() < (r_g - 1) * size {
                return None;
            }
            pool.shuffle(&mut chooser);
            Some((0..r_g - 1).map(|j| pool[j * size..(j + 1) * size].to_vec()).collect())
        } else {
            let mut pool_x = self.free_pool(Some(false));
            let mut pool_y = self.free_pool(Some(true));
            if pool_x.len() < (r_g - 2) * size || pool_y.len() < size {
                return None;
            }
            pool_x.shuffle(&mut chooser);
            pool_y.shuffle(&mut chooser);
            let mut parts: Vec<Vec<usize>> =
                (0..r_g - 2).map(|j| pool_x[j * size..(j + 1) * size].to_vec()).collect();
            parts.push(pool_y[..size].to_vec());
            Some(parts)
        }
    }

    /// Builds the completion tuple (equal-size reservoir parts) and the
    /// completion allowance for this stage.
    fn completion_fuel(
        &self,
        stage_no: usize,
        r_g: usize,
        path_extra: usize,
    ) -> Result<(Option<PartTuple>, usize)> {
        let free_r = self.reservoir_free();
        let cap = self.budget_cap(stage_no, path_extra);
        let left = cap.saturating_sub(self.consumed);
        let allow = left / (r_g - 1).max(1);
        if allow == 0 || free_r.is_empty() {
            return Ok((None, 0));
        }
        // Small equal parts keep the completion degree threshold within
        // reach; the guarantee scales with the U part size.
        let trim = |mut vs: Vec<usize>, k: usize| {
            vs.truncate(k);
            vs
        };
        let parts: Vec<Vec<usize>> = if !self.sided {
            let m_u = free_r.len().min(U_TRIM);
            vec![trim(free_r, m_u); r_g - 1]
        } else {
            let ys: Vec<usize> = free_r.iter().copied().filter(|&v| self.y_host[v]).collect();
            let xs: Vec<usize> = free_r.iter().copied().filter(|&v| !self.y_host[v]).collect();
            let m_u = if r_g == 2 { ys.len() } else { xs.len().min(ys.len()) }.min(U_TRIM);
            if m_u == 0 {
                return Ok((None, 0));
            }
            let mut parts: Vec<Vec<usize>> = vec![trim(xs, m_u); r_g - 2];
            parts.push(trim(ys, m_u));
            parts
        };
        Ok((Some(PartTuple::new(parts)?), allow))
    }

    /// Maps fresh guest vertices onto the host slots of one tuple, matching
    /// sides: the second-class guest vertex takes the last slot.
    fn assign_fresh(&mut self, fresh: &[usize], slots: &[usize]) -> Result<()> {
        if fresh.len() != slots.len() {
            return Err(Error::Internal("tuple arity mismatch while decoding".into()));
        }
        if !self.sided {
            let mut fs = fresh.to_vec();
            fs.sort_unstable();
            for (gv, &hv) in fs.into_iter().zip(slots.iter()) {
                self.place(gv, hv)?;
            }
            return Ok(());
        }
        let mut fs_a: Vec<usize> = fresh.iter().copied().filter(|&v| !self.b_guest[v]).collect();
        fs_a.sort_unstable();
        let fs_b: Vec<usize> = fresh.iter().copied().filter(|&v| self.b_guest[v]).collect();
        let slots_x: Vec<usize> = slots.iter().copied().filter(|&v| !self.y_host[v]).collect();
        let slots_y: Vec<usize> = slots.iter().copied().filter(|&v| self.y_host[v]).collect();
        if fs_a.len() != slots_x.len() || fs_b.len() != slots_y.len() {
            return Err(Error::Internal("side mismatch while decoding tuple".into()));
        }
        for (gv, &hv) in fs_a.into_iter().zip(slots_x.iter()) {
            self.place(gv, hv)?;
        }
        for (gv, &hv) in fs_b.into_iter().zip(slots_y.iter()) {
            self.place(gv, hv)?;
        }
        Ok(())
    }

    /// One short-path growth stage: each guest path of three edges is routed
    /// between its mapped endpoints through free reservoir vertices.
    fn place_path_stage(
        &mut self,
        stage_no: usize,
        paths: &[BarePath],
        path_extra: usize,
    ) -> Result<()> {
        let r_g = self.guest.r();
        for path in paths {
            let (pu, pv) = (path.u, path.v);
            let (fu, fv) = match (self.map[pu], self.map[pv]) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Internal(format!(
                        "path endpoints {pu},{pv} not yet placed at stage {stage_no}"
                    )))
                }
            };
            let mut allow = vec![false; self.g.n()];
            for &v in &self.reservoir.members {
                if !self.used[v] {
                    allow[v] = true;
                }
            }
            let sides_req = self.path_sides(path)?;
            let mut budget = THREE_PATH_BUDGET;
            let found = find_three_path(self.g, fu, fv, &allow, sides_req.as_ref(), &mut budget);
            let host_edges = found.ok_or_else(|| Error::PipelineFailure {
                stage: format!("growth stage {stage_no}"),
                detail: format!(
                    "no reservoir path between host {fu} and {fv}; {}",
                    partial_map_note(&self.map)
                ),
            })?;
            self.map_path(path, fu, fv, &host_edges)?;
        }
        self.stages.push(format!(
            "stage {stage_no} (paths): {} short paths routed through the reservoir",
            paths.len()
        ));
        let extra = path_extra + paths.len() * (3 * (r_g - 1) - 1);
        self.push_ledger(stage_no, "paths", extra);
        Ok(())
    }

    /// Side requirements for routing one guest path, or None when unsided.
    fn path_sides(&self, path: &BarePath) -> Result<Option<ThreeSides>> {
        if !self.sided {
            return Ok(None);
        }
        let tree = self.guest;
        let juncs = path.junctions(tree);
        if juncs.len() != 2 {
            return Err(Error::Internal("three-edge path without two junctions".into()));
        }
        let ordered = self.ordered_path_edges(path)?;
        let mut fresh_y = [0usize; 3];
        let ends = [path.u, path.v];
        for (i, e) in ordered.iter().enumerate() {
            fresh_y[i] = tree
                .edge(*e)
                .iter()
                .filter(|&&v| !ends.contains(&v) && !juncs.contains(&v) && self.b_guest[v])
                .count();
        }
        // Junctions in path order: first joins edges 0 and 1.
        let j0 = tree
            .edge(ordered[0])
            .iter()
            .copied()
            .find(|v| tree.edge(ordered[1]).contains(v))
            .ok_or_else(|| Error::Internal("path edges do not chain".into()))?;
        let j1 = tree
            .edge(ordered[1])
            .iter()
            .copied()
            .find(|v| tree.edge(ordered[2]).contains(v))
            .ok_or_else(|| Error::Internal("path edges do not chain".into()))?;
        Ok(Some(ThreeSides {
            y_host: self.y_host.clone(),
            junction_y: [self.b_guest[j0], self.b_guest[j1]],
            fresh_y,
        }))
    }

    /// The path's guest edges ordered from `u` to `v`.
    fn ordered_path_edges(&self, path: &BarePath) -> Result<[usize; 3]> {
        if path.edges.len() != 3 {
            return Err(Error::Internal(format!(
                "expected a three-edge path, got {} edges",
                path.edges.len()
            )));
        }
        let tree = self.guest;
        let first = path
            .edges
            .iter()
            .copied()
            .find(|&e| tree.edge(e).contains(&path.u))
            .ok_or_else(|| Error::Internal("path start edge missing".into()))?;
        let last = path
            .edges
            .iter()
            .copied()
            .find(|&e| tree.edge(e).contains(&path.v))
            .ok_or_else(|| Error::Internal("path end edge missing".into()))?;
        let mid = path
            .edges
            .iter()
            .copied()
            .find(|&e| e != first && e != last)
            .ok_or_else(|| Error::Internal("path middle edge missing".into()))?;
        Ok([first, mid, last])
    }

    /// Writes the vertex map for one routed path.
    fn map_path(
        &mut self,
        path: &BarePath,
        fu: usize,
        fv: usize,
        host_edges: &[Vec<usize>; 3],
    ) -> Result<()> {
        let tree = self.guest;
        let ordered = self.ordered_path_edges(path)?;
        let w1 = host_edges[0]
            .iter()
            .copied()
            .find(|v| host_edges[1].contains(v))
            .ok_or_else(|| Error::Internal("host path edges do not chain".into()))?;
        let w2 = host_edges[1]
            .iter()
            .copied()
            .find(|v| host_edges[2].contains(v))
            .ok_or_else(|| Error::Internal("host path edges do not chain".into()))?;
        let gj1 = tree
            .edge(ordered[0])
            .iter()
            .copied()
            .find(|v| tree.edge(ordered[1]).contains(v))
            .ok_or_else(|| Error::Internal("guest path edges do not chain".into()))?;
        let gj2 = tree
            .edge(ordered[1])
            .iter()
            .copied()
            .find(|v| tree.edge(ordered[2]).contains(v))
            .ok_or_else(|| Error::Internal("guest path edges do not chain".into()))?;
        self.place(gj1, w1)?;
        self.place(gj2, w2)?;
        let anchors = [
            (ordered[0], vec![path.u, gj1], vec![fu, w1]),
            (ordered[1], vec![gj1, gj2], vec![w1, w2]),
            (ordered[2], vec![gj2, path.v], vec![w2, fv]),
        ];
        for (ge, g_anchor, h_anchor) in anchors {
            let g_fresh: Vec<usize> =
                tree.edge(ge).iter().copied().filter(|v| !g_anchor.contains(v)).collect();
            let h_fresh: Vec<usize> = host_edges[anchors_index(ge, &ordered)]
                .iter()
                .copied()
                .filter(|v| !h_anchor.contains(v))
                .collect();
            self.assign_fresh(&g_fresh, &h_fresh)?;
        }
        Ok(())
    }

    fn push_ledger(&mut self, stage_no: usize, label: &str, extra: usize) {
        let cumulative = self.consumed;
        let prior: usize = self.reservoir.ledger.iter().map(|e| e.consumed).sum();
        self.reservoir.ledger.push(LedgerEntry {
            stage: stage_no,
            label: label.to_string(),
            consumed: cumulative - prior,
            cumulative,
            budget: self.budget_cap(stage_no, extra),
        });
    }

    /// Places guest vertices in no edge at all, preferring non-reservoir
    /// hosts of the matching side.
    fn place_isolated(&mut self) -> Result<()> {
        let lonely: Vec<usize> = (0..self.guest.n()).filter(|&v| self.map[v].is_none()).collect();
        for gv in lonely {
            let want = self.b_guest[gv];
            let pick = (0..self.g.n())
                .find(|&h| self.host_free(h) && self.y_host[h] == want)
                .or_else(|| (0..self.g.n()).find(|&h| !self.used[h] && self.y_host[h] == want));
            match pick {
                Some(h) => self.place(gv, h)?,
                None => {
                    return Err(Error::PipelineFailure {
                        stage: "leftover vertices".into(),
                        detail: format!("no free host slot for guest vertex {gv}"),
                    })
                }
            }
        }
        Ok(())
    }
}

/// Index of guest edge `ge` inside the ordered triple.
fn anchors_index(ge: usize, ordered: &[usize; 3]) -> usize {
    ordered.iter().position(|&e| e == ge).unwrap()
}

/// Almost-spanning embedding with an explicit per-stage budget coefficient.
pub(crate) fn almost_with_alpha(
    g: &RGraph,
    guest: &Hypertree,
    eta: f64,
    eps: f64,
    alpha: f64,
    seed: u64,
    sides: Option<&SideConstraints>,
) -> Result<EmbedRun> {
    let n = g.n();
    let r = g.r();
    if guest.r() != r {
        return Err(Error::Precondition(format!(
            "guest edges have {} vertices, host edges {}",
            guest.r(),
            r
        )));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidInput("eta must lie strictly between 0 and 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    if (guest.n() as f64) > (1.0 - eta) * n as f64 + 1e-6 {
        return Err(Error::Precondition(format!(
            "guest has {} vertices, above the almost-spanning cap {:.1}",
            guest.n(),
            (1.0 - eta) * n as f64
        )));
    }
    let factorial: f64 = (1..r).map(|k| k as f64).product();
    let min_deg = (0..n).map(|v| g.degree(&[v])).min().unwrap_or(0);
    if factorial * min_deg as f64 + 1e-9 < eps * (n as f64).powi(r as i32 - 1) {
        return Err(Error::HypothesisRejected(format!(
            "host minimum degree {min_deg} is below the eps={eps} bound"
        )));
    }
    let (b_guest, y_host) = match sides {
        Some(s) => {
            let (b, y) = s.masks(guest.n(), n);
            for e in 0..guest.edge_count() {
                let count = guest.edge(e).iter().filter(|&&v| b[v]).count();
                if count > r - 1 {
                    return Err(Error::InvalidInput(
                        "a guest edge lies entirely in the second class".into(),
                    ));
                }
            }
            (b, y)
        }
        None => (vec![false; guest.n()], vec![false; n]),
    };

    let size = (((eta * n as f64) * RESERVOIR_SHARE).ceil() as usize)
        .max(4 * (r - 1))
        .min(n.saturating_sub(guest.n()))
        .max(1);
    let budget_base = ((r as f64 * alpha * n as f64).ceil() as usize).max(r - 1);
    let split = tree_split(guest, SPLIT_MU)?;

    let mut last_err: Option<Error> = None;
    for attempt in 0..ATTEMPTS {
        let seed_a = mix(seed, attempt as u64);
        let reservoir = match draw_reservoir(
            g,
            size,
            eps,
            sides.is_some().then_some(y_host.as_slice()),
            seed_a,
        ) {
            Ok(rv) => rv,
            Err(note) => {
                last_err = Some(Error::PipelineFailure {
                    stage: "reservoir".into(),
                    detail: note,
                });
                continue;
            }
        };
        let mut in_r = vec![false; n];
        for &v in &reservoir.members {
            in_r[v] = true;
        }
        let mut attempt_state = Attempt {
            g,
            guest,
            reservoir,
            map: vec![None; guest.n()],
            used: vec![false; n],
            in_r,
            b_guest: b_guest.clone(),
            y_host: y_host.clone(),
            sided: sides.is_some(),
            consumed: 0,
            budget_base,
            stages: Vec::new(),
            seed: seed_a,
        };
        match run_stages(&mut attempt_state, &split) {
            Ok(()) => {
                let map: Vec<usize> = attempt_state.map.iter().map(|m| m.unwrap()).collect();
                let embedding = Embedding {
                    guest: guest.graph().clone(),
                    host: g.clone(),
                    map,
                    sides: sides.cloned(),
                };
                let report = super::verify_embedding(&embedding);
                if !report.ok {
                    return Err(Error::Internal(format!(
                        "embedding failed self-check: {}",
                        report.violations.join("; ")
                    )));
                }
                let ledger = attempt_state.reservoir.ledger.clone();
                return Ok(EmbedRun { embedding, stages: attempt_state.stages, ledger });
            }
            Err(e @ Error::PipelineFailure { .. }) => {
                last_err = Some(e);
                continue;
            }
            Err(e) => return Err(e),
        }
    }
    Err(last_err.unwrap_or_else(|| Error::PipelineFailure {
        stage: "almost-spanning".into(),
        detail: "all attempts exhausted".into(),
    }))
}

/// Replays the split sequence inside the host for one attempt.
fn run_stages(at: &mut Attempt<'_>, split: &SplitSequence) -> Result<()> {
    at.place_base(&split.t0)?;
    let mut path_extra = 0usize;
    let r_g = at.guest.r();
    for (i, stage) in split.stages.iter().enumerate() {
        let stage_no = i + 1;
        match stage {
            SplitStage::Matching { edges } => {
                let seed_stage = mix(at.seed, 0x6d61_7463 ^ stage_no as u64);
                at.place_matching_stage(stage_no, edges, path_extra, seed_stage)?;
            }
            SplitStage::Paths { paths } => {
                at.place_path_stage(stage_no, paths, path_extra)?;
                path_extra += paths.len() * (3 * (r_g - 1) - 1);
            }
        }
    }
    at.place_isolated()?;
    let placed: BTreeSet<usize> = at.map.iter().flatten().copied().collect();
    if placed.len() != at.guest.n() {
        return Err(Error::Internal("vertex map is not injective after all stages".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Hypertree;

    fn loose_path_tree(r: usize, edges: usize) -> Hypertree {
        let step = r - 1;
        let n = edges * step + 1;
        let es: Vec<Vec<usize>> =
            (0..edges).map(|i| (i * step..i * step + r).collect()).collect();
        let g = RGraph::new(r, n, es).unwrap();
        Hypertree::from_graph(g, false).unwrap()
    }

    #[test]
    fn embeds_small_tree_into_complete_host() {
        let guest = loose_path_tree(3, 4); // 9 vertices
        let host = RGraph::complete(3, 20).unwrap();
        let run = embed_almost_spanning(&host, &guest, 0.3, 0.8, 7, None).unwrap();
        let report = super::super::verify_embedding(&run.embedding);
        assert!(report.ok, "violations: {:?}", report.violations);
        assert!(!report.spanning);
        assert!(!run.stages.is_empty());
    }

    #[test]
    fn embeds_into_random_host() {
        let mut chooser = rng(99, 1);
        let n = 36;
        let mut edges = Vec::new();
        for a in 0..n {
            for b in (a + 1)..n {
                for c in (b + 1)..n {
                    if chooser.next_u64() % 100 < 55 {
                        edges.push(vec![a, b, c]);
                    }
                }
            }
        }
        let host = RGraph::new(3, n, edges).unwrap();
        let guest = loose_path_tree(3, 7); // 15 vertices <= 0.5 * 36
        let run = embed_almost_spanning(&host, &guest, 0.5, 0.2, 11, None).unwrap();
        assert!(super::super::verify_embedding(&run.embedding).ok);
        // Ledger rows never exceed their budgets.
        for row in &run.ledger {
            assert!(row.cumulative <= row.budget, "ledger overdraft: {row:?}");
        }
    }

    #[test]
    fn oversized_guest_is_rejected() {
        let guest = loose_path_tree(3, 9); // 19 vertices
        let host = RGraph::complete(3, 20).unwrap();
        let err = embed_almost_spanning(&host, &guest, 0.3, 0.8, 7, None).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn sparse_host_is_rejected() {
        let guest = loose_path_tree(3, 2);
        let host = RGraph::new(3, 12, vec![vec![0, 1, 2]]).unwrap();
        let err = embed_almost_spanning(&host, &guest, 0.3, 0.5, 7, None).unwrap_err();
        assert!(matches!(err, Error::HypothesisRejected(_)));
    }

    #[test]
    fn runs_are_deterministic() {
        let guest = loose_path_tree(3, 5);
        let host = RGraph::complete(3, 24).unwrap();
        let a = embed_almost_spanning(&host, &guest, 0.4, 0.8, 21, None).unwrap();
        let b = embed_almost_spanning(&host, &guest, 0.4, 0.8, 21, None).unwrap();
        assert_eq!(a.embedding.map, b.embedding.map);
        assert_eq!(a.stages, b.stages);
    }

    #[test]
    fn three_path_finder_respects_allowed_set() {
        let host = RGraph::complete(3, 12).unwrap();
        let mut allow = vec![false; 12];
        for v in 2..9 {
            allow[v] = true;
        }
        let mut budget = 10_000;
        let path = find_three_path(&host, 0, 1, &allow, None, &mut budget).unwrap();
        let w1 = path[0].iter().copied().find(|v| path[1].contains(v)).unwrap();
        let w2 = path[1].iter().copied().find(|v| path[2].contains(v)).unwrap();
        assert!(path[0].contains(&0) && path[2].contains(&1));
        assert_ne!(w1, w2);
        // Interiors all lie in the allowed window.
        for (i, e) in path.iter().enumerate() {
            for &v in e {
                if (i == 0 && v == 0) || (i == 2 && v == 1) {
                    continue;
                }
                assert!(allow[v], "interior vertex {v} outside the allowed set");
            }
        }
    }
}
