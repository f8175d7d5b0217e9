//! Assembly of reusable absorbing sets.
//!
//! An absorbing set A is a small vertex set prepared so that any balanced
//! leftover within capacity can be swallowed: G[A ∪ leftover] carries a
//! transversal factor, whatever the leftover is. The layout per part is a
//! zone of m anchors plus f spare vertices, and m gadget bodies on fresh
//! vertices. Absorption spends exactly f zone vertices per part on fan
//! copies through the leftover and on padding copies inside the zones; the
//! m survivors are then matched to gadgets, whose precomputed witness
//! factors cover every anchor-or-spare choice. The witness cube makes the
//! structure robust: no matter which zone vertices the fans consume, the
//! surviving assignment is already verified.

use super::absorber::find_edge_absorbers;
use super::{
    find_transversal_factor, narrow_parts, verify_transversal_factor, FactorPattern,
    TransversalFactor,
};
use crate::graph::{PartTuple, RGraph};
use crate::rng::rng;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// Assembly attempts before giving up.
const ATTEMPTS: u64 = 5;
/// Search-node budget for one witness lookup.
const WITNESS_BUDGET: u64 = 200_000;
/// Search-node budget for the fan-and-padding backtracking.
const ABSORB_BUDGET: u64 = 500_000;

/// How gadget bodies and their witnesses are produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AbsorberSource {
    /// Bodies of `k` fresh pattern copies per gadget; witnesses found by
    /// the bounded factor search. Larger `k` buys robustness on sparser
    /// hosts at `k` extra vertices per part per gadget.
    FreshCopies { k: usize },
    /// Bodies grown as staged degree lattices (single-edge patterns only);
    /// witnesses are row substitutions. `eps` is the crossing-density
    /// floor the host must clear.
    Lattice { eps: f64 },
}

impl Default for AbsorberSource {
    fn default() -> Self {
        AbsorberSource::FreshCopies { k: 1 }
    }
}

impl AbsorberSource {
    /// Body vertices per part per gadget.
    fn body_width(&self, t: usize) -> usize {
        match *self {
            AbsorberSource::FreshCopies { k } => k,
            AbsorberSource::Lattice { .. } => t - 1,
        }
    }
}

/// Zone of one part: anchors are owned by gadgets in index order, spares
/// are interchangeable absorption currency.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Zone {
    pub anchors: Vec<usize>,
    pub spares: Vec<usize>,
}

/// One verified absorption of a zone combo by a gadget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessEntry {
    /// One zone vertex per part: the gadget's own anchor or any spare.
    pub combo: Vec<usize>,
    /// Factor covering exactly the combo and the gadget body.
    pub factor: TransversalFactor,
}

/// A gadget: fresh body vertices plus the witness cube that absorbs any
/// surviving combo.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Gadget {
    /// The gadget's own anchor per part.
    pub anchors: Vec<usize>,
    /// Body vertices, sorted, disjoint from every zone.
    pub body: Vec<usize>,
    /// Factor covering the body alone, kept for audits.
    pub off_factor: TransversalFactor,
    /// Lattice rows covering body plus anchors, with the part-j anchor at
    /// position j of copy j; absent for fresh-copy bodies.
    pub rows: Option<TransversalFactor>,
    /// Witness entries sorted by combo.
    pub witnesses: Vec<WitnessEntry>,
}

/// An assembled absorbing set with its full replay state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingSet {
    pub pattern: FactorPattern,
    pub parts: PartTuple,
    pub gamma: f64,
    pub eta: f64,
    /// Per-part leftover the set can absorb.
    pub capacity: usize,
    /// Gadget count; also the per-part anchor count.
    pub gadget_count: usize,
    /// Spare vertices per part.
    pub spares_per_part: usize,
    pub zones: Vec<Zone>,
    pub gadgets: Vec<Gadget>,
    /// All vertices of the set, sorted.
    pub vertices: Vec<usize>,
    pub source: AbsorberSource,
    pub seed: u64,
}

impl AbsorbingSet {
    pub fn size(&self) -> usize {
        self.vertices.len()
    }

    /// Swallow a balanced leftover: returns a transversal factor covering
    /// exactly the set plus the leftover. Deterministic given the set.
    pub fn absorb(&self, g: &RGraph, leftover: &[usize]) -> Result<TransversalFactor> {
        let t = self.pattern.t;
        let mut lam = vec![0usize; t];
        let mut seen = leftover.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != leftover.len() {
            return Err(Error::InvalidInput("leftover repeats a vertex".into()));
        }
        for &u in leftover {
            if self.vertices.binary_search(&u).is_ok() {
                return Err(Error::InvalidInput(format!(
                    "leftover vertex {u} is inside the absorbing set"
                )));
            }
            lam[part_of(&self.parts, u)?] += 1;
        }
        let lambda = lam[0];
        if lam.iter().any(|&c| c != lambda) {
            return Err(Error::InvalidInput(format!(
                "leftover is not balanced: per-part counts {lam:?}"
            )));
        }
        if lambda > self.capacity {
            return Err(Error::InvalidInput(format!(
                "leftover of {lambda} per part exceeds capacity {}",
                self.capacity
            )));
        }

        // Fans spend t-1 zone vertices per leftover vertex; padding copies
        // spend one per part each, topping consumption to exactly f.
        let pads = self.spares_per_part - (t - 1) * lambda;
        let mut fans: Vec<(usize, usize)> = Vec::with_capacity(leftover.len());
        for &u in &seen {
            fans.push((u, part_of(&self.parts, u)?));
        }

        let avail: Vec<Vec<usize>> = self
            .zones
            .iter()
            .map(|z| {
                let mut v = z.anchors.clone();
                v.extend_from_slice(&z.spares);
                v.sort_unstable();
                v
            })
            .collect();
        let closing = closing_lists(&self.pattern);
        let mut search = FanSearch {
            g,
            closing: &closing,
            avail: &avail,
            used: vec![false; g.n()],
            nodes: 0,
        };
        let mut copies: Vec<Vec<usize>> = Vec::new();
        let found = search.place_fans(&fans, 0, pads, &mut copies)?;
        if !found {
            return Err(Error::PipelineFailure {
                stage: "absorb-fans".into(),
                detail: format!(
                    "no fan and padding arrangement spends exactly {} zone vertices per part",
                    self.spares_per_part
                ),
            });
        }

        // Survivors: exactly one combo slot per gadget per part. Surviving
        // anchors serve their own gadgets; gadgets whose anchor was spent
        // take the surviving spares in sorted order.
        let m = self.gadget_count;
        let mut combos = vec![vec![0usize; t]; m];
        for i in 0..t {
            let zone = &self.zones[i];
            let mut free_spares: Vec<usize> = zone
                .spares
                .iter()
                .copied()
                .filter(|&v| !search.used[v])
                .collect();
            free_spares.sort_unstable();
            let mut next_spare = free_spares.into_iter();
            for (j, combo) in combos.iter_mut().enumerate() {
                combo[i] = if !search.used[zone.anchors[j]] {
                    zone.anchors[j]
                } else {
                    next_spare.next().ok_or_else(|| {
                        Error::Internal("zone consumption left too few survivors".into())
                    })?
                };
            }
            if next_spare.next().is_some() {
                return Err(Error::Internal(
                    "zone consumption left too many survivors".into(),
                ));
            }
        }

        let mut factor = TransversalFactor { copies };
        for (j, combo) in combos.iter().enumerate() {
            let gadget = &self.gadgets[j];
            let idx = gadget
                .witnesses
                .binary_search_by(|e| e.combo.as_slice().cmp(combo.as_slice()))
                .map_err(|_| {
                    Error::Internal(format!("witness cube misses combo {combo:?}"))
                })?;
            factor = factor.union(&gadget.witnesses[idx].factor);
        }

        let mut cover = self.vertices.clone();
        cover.extend_from_slice(&seen);
        cover.sort_unstable();
        verify_transversal_factor(g, &self.parts, &self.pattern, &factor, Some(&cover))?;
        Ok(factor)
    }
}

/// Build a reusable absorbing set of size at most `eta * n` able to absorb
/// any balanced leftover of up to `floor(gamma * n)` vertices per part.
/// Random zone and body placement retries under fresh sub-seeds; every
/// witness is verified during assembly and a full empty-leftover
/// absorption is rehearsed before the set is returned.
pub fn assemble_absorbing_set(
    g: &RGraph,
    parts: &PartTuple,
    pattern: &FactorPattern,
    gamma: f64,
    eta: f64,
    source: AbsorberSource,
    seed: u64,
) -> Result<AbsorbingSet> {
    let t = pattern.t;
    if parts.len() != t {
        return Err(Error::InvalidInput(format!(
            "pattern wants {t} parts, got {}",
            parts.len()
        )));
    }
    parts.check_labels(g.n())?;
    if !parts.is_disjoint() {
        return Err(Error::InvalidInput("absorbing sets need disjoint parts".into()));
    }
    if !(gamma >= 0.0 && gamma.is_finite()) || !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "bad absorption parameters gamma={gamma}, eta={eta}"
        )));
    }
    if let AbsorberSource::FreshCopies { k } = source {
        if k == 0 {
            return Err(Error::InvalidInput("fresh-copy bodies need k >= 1".into()));
        }
    }
    if let AbsorberSource::Lattice { eps } = source {
        if pattern.f.edge_count() != 1 || pattern.t != pattern.r() {
            return Err(Error::InvalidInput(
                "lattice bodies are defined for single-edge patterns only".into(),
            ));
        }
        let density = crossing_density(g, parts)?;
        if density < eps {
            return Err(Error::Precondition(format!(
                "host crossing density {density:.4} is below the lattice floor {eps}"
            )));
        }
    }

    let n = g.n();
    let capacity = (gamma * n as f64).floor() as usize;
    let f = (t - 1) * capacity;
    let width = source.body_width(t);
    let part_budget = parts.min_size();
    let eta_budget = (eta * n as f64 / t as f64).floor() as usize;
    let budget = part_budget.min(eta_budget);
    if budget <= f {
        return Err(Error::Precondition(format!(
            "capacity {capacity} demands {f} spares per part, but only {budget} \
             vertices per part fit within the parts and the eta bound"
        )));
    }
    let m_budget = (budget - f) / (1 + width);
    if m_budget == 0 {
        return Err(Error::Precondition(format!(
            "no room for a gadget: {budget} per-part vertices minus {f} spares \
             cannot host an anchor plus a width-{width} body"
        )));
    }
    let m = m_budget.min((capacity + 1).max(2));

    let mut last = String::from("no attempt ran");
    for attempt in 0..ATTEMPTS {
        match attempt_assembly(
            g, parts, pattern, gamma, eta, source, seed, capacity, f, m, attempt,
        )? {
            Ok(set) => return Ok(set),
            Err(detail) => last = format!("attempt {attempt}: {detail}"),
        }
    }
    Err(Error::PipelineFailure {
        stage: "absorbing-set".into(),
        detail: last,
    })
}

/// One seeded assembly attempt; Ok(Err(reason)) is a clean retryable miss.
#[allow(clippy::too_many_arguments)]
fn attempt_assembly(
    g: &RGraph,
    parts: &PartTuple,
    pattern: &FactorPattern,
    gamma: f64,
    eta: f64,
    source: AbsorberSource,
    seed: u64,
    capacity: usize,
    f: usize,
    m: usize,
    attempt: u64,
) -> Result<std::result::Result<AbsorbingSet, String>> {
    let t = pattern.t;
    let mut r = rng(seed, 0x6162_736f ^ attempt);

    let mut pools: Vec<Vec<usize>> = parts.parts().to_vec();
    for pool in &mut pools {
        pool.shuffle(&mut r);
    }
    let mut zones = Vec::with_capacity(t);
    for pool in &mut pools {
        let anchors: Vec<usize> = pool.drain(..m).collect();
        let mut spares: Vec<usize> = pool.drain(..f).collect();
        spares.sort_unstable();
        zones.push(Zone { anchors, spares });
    }

    // Gadget bodies on fresh vertices, one gadget at a time.
    let mut gadgets: Vec<Gadget> = Vec::with_capacity(m);
    for j in 0..m {
        let anchors: Vec<usize> = zones.iter().map(|z| z.anchors[j]).collect();
        let built = match source {
            AbsorberSource::FreshCopies { k } => fresh_body(g, pattern, &mut pools, k),
            AbsorberSource::Lattice { .. } => {
                lattice_body(g, parts, &anchors, &zones, &gadgets, &mut pools)
            }
        }?;
        let (body, off_factor, rows) = match built {
            Ok(b) => b,
            Err(detail) => return Ok(Err(format!("gadget {j}: {detail}"))),
        };
        gadgets.push(Gadget {
            anchors,
            body,
            off_factor,
            rows,
            witnesses: Vec::new(),
        });
    }

    // The witness cube: every anchor-or-spare combo of every gadget.
    for j in 0..m {
        match witness_cube(g, parts, pattern, &zones, &gadgets[j], source)? {
            Ok(ws) => gadgets[j].witnesses = ws,
            Err(detail) => return Ok(Err(format!("gadget {j}: {detail}"))),
        }
    }

    let mut vertices: Vec<usize> = Vec::new();
    for z in &zones {
        vertices.extend_from_slice(&z.anchors);
        vertices.extend_from_slice(&z.spares);
    }
    for gadget in &gadgets {
        vertices.extend_from_slice(&gadget.body);
    }
    vertices.sort_unstable();

    let set = AbsorbingSet {
        pattern: pattern.clone(),
        parts: parts.clone(),
        gamma,
        eta,
        capacity,
        gadget_count: m,
        spares_per_part: f,
        zones,
        gadgets,
        vertices,
        source,
        seed,
    };

    // Rehearse the empty absorption: padding must spend every spare.
    match set.absorb(g, &[]) {
        Ok(_) => Ok(Ok(set)),
        Err(Error::PipelineFailure { detail, .. }) => {
            Ok(Err(format!("rehearsal absorption failed: {detail}")))
        }
        Err(e) => Err(e),
    }
}

type BodyResult =
    Result<std::result::Result<(Vec<usize>, TransversalFactor, Option<TransversalFactor>), String>>;

/// Carve k disjoint pattern copies out of the fresh pools.
fn fresh_body(
    g: &RGraph,
    pattern: &FactorPattern,
    pools: &mut [Vec<usize>],
    k: usize,
) -> BodyResult {
    let t = pattern.t;
    let closing = closing_lists(pattern);
    let mut copies: Vec<Vec<usize>> = Vec::with_capacity(k);
    let mut taken = vec![Vec::new(); t];
    for _ in 0..k {
        let mut copy = vec![usize::MAX; t];
        let found = fill_fresh_copy(g, &closing, pools, &taken, &mut copy, 0);
        match found {
            Some(c) => {
                for (i, &v) in c.iter().enumerate() {
                    taken[i].push(v);
                }
                copies.push(c);
            }
            None => {
                return Ok(Err(
                    "no fresh pattern copy fits the remaining pool".to_string()
                ))
            }
        }
    }
    for (pool, got) in pools.iter_mut().zip(&taken) {
        pool.retain(|v| !got.contains(v));
    }
    let mut body: Vec<usize> = copies.iter().flatten().copied().collect();
    body.sort_unstable();
    Ok(Ok((body, TransversalFactor { copies }, None)))
}

/// First-fit placement of one copy over the fresh pools.
fn fill_fresh_copy(
    g: &RGraph,
    closing: &[Vec<Vec<usize>>],
    pools: &[Vec<usize>],
    taken: &[Vec<usize>],
    copy: &mut Vec<usize>,
    pos: usize,
) -> Option<Vec<usize>> {
    if pos == pools.len() {
        return Some(copy.clone());
    }
    for &v in &pools[pos] {
        if taken[pos].contains(&v) {
            continue;
        }
        copy[pos] = v;
        if !closing[pos].iter().all(|pe| {
            let he: Vec<usize> = pe.iter().map(|&i| copy[i]).collect();
            g.is_edge(&he)
        }) {
            continue;
        }
        if let Some(c) = fill_fresh_copy(g, closing, pools, taken, copy, pos + 1) {
            return Some(c);
        }
    }
    None
}

/// Grow one staged-lattice body targeted at the gadget's anchor tuple.
fn lattice_body(
    g: &RGraph,
    parts: &PartTuple,
    anchors: &[usize],
    zones: &[Zone],
    gadgets: &[Gadget],
    pools: &mut [Vec<usize>],
) -> BodyResult {
    let mut forbidden: Vec<usize> = Vec::new();
    for (i, z) in zones.iter().enumerate() {
        for &a in &z.anchors {
            if a != anchors[i] {
                forbidden.push(a);
            }
        }
        forbidden.extend_from_slice(&z.spares);
    }
    for gadget in gadgets {
        forbidden.extend_from_slice(&gadget.body);
    }
    forbidden.sort_unstable();
    forbidden.dedup();
    match find_edge_absorbers(g, parts, anchors, &forbidden, 1) {
        Ok(mut found) if !found.is_empty() => {
            let a = found.remove(0);
            for pool in pools.iter_mut() {
                pool.retain(|v| !a.body.contains(v));
            }
            Ok(Ok((a.body, a.off_factor, Some(a.on_factor))))
        }
        Ok(_) => Ok(Err("lattice growth returned no absorber".to_string())),
        Err(Error::PipelineFailure { detail, .. }) => Ok(Err(detail)),
        Err(e) => Err(e),
    }
}

type CubeResult = Result<std::result::Result<Vec<WitnessEntry>, String>>;

/// Verify a witness for every combo of the gadget's cube.
fn witness_cube(
    g: &RGraph,
    parts: &PartTuple,
    pattern: &FactorPattern,
    zones: &[Zone],
    gadget: &Gadget,
    source: AbsorberSource,
) -> CubeResult {
    let t = pattern.t;
    let choices: Vec<Vec<usize>> = (0..t)
        .map(|i| {
            let mut c = vec![gadget.anchors[i]];
            c.extend_from_slice(&zones[i].spares);
            c
        })
        .collect();
    let mut entries = Vec::new();
    let mut idx = vec![0usize; t];
    loop {
        let combo: Vec<usize> = (0..t).map(|i| choices[i][idx[i]]).collect();
        let witness = match source {
            AbsorberSource::FreshCopies { .. } => {
                let mut keep = gadget.body.clone();
                keep.extend_from_slice(&combo);
                let narrowed = narrow_parts(parts, &keep)?;
                match find_transversal_factor(g, &narrowed, pattern, WITNESS_BUDGET) {
                    Ok(found) => found,
                    Err(Error::GuardExceeded(_)) => None,
                    Err(e) => return Err(e),
                }
            }
            AbsorberSource::Lattice { .. } => plug_rows(g, gadget, &combo),
        };
        match witness {
            Some(factor) => {
                let mut cover = gadget.body.clone();
                cover.extend_from_slice(&combo);
                cover.sort_unstable();
                verify_transversal_factor(g, parts, pattern, &factor, Some(&cover)).map_err(
                    |e| Error::Internal(format!("unverifiable witness for {combo:?}: {e}")),
                )?;
                entries.push(WitnessEntry { combo, factor });
            }
            None => {
                return Ok(Err(format!(
                    "no witness factor absorbs combo {combo:?}"
                )))
            }
        }
        let mut p = 0;
        loop {
            idx[p] += 1;
            if idx[p] < choices[p].len() {
                break;
            }
            idx[p] = 0;
            p += 1;
            if p == t {
                entries.sort_by(|a, b| a.combo.cmp(&b.combo));
                return Ok(Ok(entries));
            }
        }
    }
}

/// Substitute the combo into the lattice rows: row j hosts the anchor of
/// part j at position j, so plugging swaps one vertex per row. Every
/// plugged row must still induce the pattern in the host.
fn plug_rows(g: &RGraph, gadget: &Gadget, combo: &[usize]) -> Option<TransversalFactor> {
    let rows = gadget.rows.as_ref()?;
    let mut copies = rows.copies.clone();
    for (j, copy) in copies.iter_mut().enumerate() {
        copy[j] = combo[j];
        if !g.is_edge(copy) {
            return None;
        }
    }
    Some(TransversalFactor { copies })
}

/// Pattern edges keyed by their largest index, checkable as soon as a copy
/// prefix reaches that position.
fn closing_lists(pattern: &FactorPattern) -> Vec<Vec<Vec<usize>>> {
    let mut cl: Vec<Vec<Vec<usize>>> = vec![Vec::new(); pattern.t];
    for pe in pattern.f.edges() {
        let last = *pe.iter().max().expect("nonempty edge");
        cl[last].push(pe.clone());
    }
    cl
}

fn part_of(parts: &PartTuple, v: usize) -> Result<usize> {
    parts
        .parts()
        .iter()
        .position(|p| p.contains(&v))
        .ok_or_else(|| Error::InvalidInput(format!("vertex {v} is in no part")))
}

/// Minimum crossing-degree density over all vertices, in edge counts per
/// product of the other parts' sizes.
fn crossing_density(g: &RGraph, parts: &PartTuple) -> Result<f64> {
    let mut worst = f64::INFINITY;
    for (i, part) in parts.parts().iter().enumerate() {
        let others: Vec<Vec<usize>> = parts
            .parts()
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, p)| p.clone())
            .collect();
        let denom: f64 = others.iter().map(|p| p.len() as f64).product();
        for &v in part {
            let d = g.directed_degree(v, &others)? as f64;
            worst = worst.min(d / denom);
        }
    }
    Ok(worst)
}

/// Joint backtracking over fan copies and padding copies.
struct FanSearch<'a> {
    g: &'a RGraph,
    closing: &'a [Vec<Vec<usize>>],
    avail: &'a [Vec<usize>],
    used: Vec<bool>,
    nodes: u64,
}

impl FanSearch<'_> {
    fn spend(&mut self) -> Result<()> {
        self.nodes += 1;
        if self.nodes > ABSORB_BUDGET {
            return Err(Error::PipelineFailure {
                stage: "absorb-fans".into(),
                detail: format!("fan search exceeded {ABSORB_BUDGET} nodes"),
            });
        }
        Ok(())
    }

    fn place_fans(
        &mut self,
        fans: &[(usize, usize)],
        idx: usize,
        pads: usize,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<bool> {
        if idx == fans.len() {
            return self.place_pads(pads, 0, out);
        }
        let (u, pu) = fans[idx];
        let mut copy = vec![usize::MAX; self.avail.len()];
        self.fill(Some((pu, u)), &mut copy, 0, 0, &mut |s, c, out2| {
            out2.push(c.to_vec());
            let done = s.place_fans(fans, idx + 1, pads, out2)?;
            if !done {
                out2.pop();
            }
            Ok(done)
        }, out)
    }

    fn place_pads(&mut self, pads: usize, floor: usize, out: &mut Vec<Vec<usize>>) -> Result<bool> {
        if pads == 0 {
            return Ok(true);
        }
        let mut copy = vec![usize::MAX; self.avail.len()];
        self.fill(None, &mut copy, 0, floor, &mut |s, c, out2| {
            out2.push(c.to_vec());
            let next_floor = s.avail[0]
                .iter()
                .position(|&v| v == c[0])
                .map_or(0, |p| p + 1);
            let done = s.place_pads(pads - 1, next_floor, out2)?;
            if !done {
                out2.pop();
            }
            Ok(done)
        }, out)
    }

    /// Fill one copy from the zones; `pin` overrides one position with an
    /// outside vertex. `floor` restricts part-0 choices to indexes at or
    /// above it (padding symmetry cut).
    fn fill(
        &mut self,
        pin: Option<(usize, usize)>,
        copy: &mut Vec<usize>,
        pos: usize,
        floor: usize,
        then: &mut dyn FnMut(&mut Self, &[usize], &mut Vec<Vec<usize>>) -> Result<bool>,
        out: &mut Vec<Vec<usize>>,
    ) -> Result<bool> {
        self.spend()?;
        if pos == self.avail.len() {
            return then(self, copy, out);
        }
        if let Some((pp, pv)) = pin {
            if pos == pp {
                copy[pos] = pv;
                if !self.edges_ok(copy, pos) {
                    return Ok(false);
                }
                return self.fill(pin, copy, pos + 1, floor, then, out);
            }
        }
        let start = if pos == 0 && pin.is_none() { floor } else { 0 };
        for i in start..self.avail[pos].len() {
            let v = self.avail[pos][i];
            if self.used[v] {
                continue;
            }
            copy[pos] = v;
            if !self.edges_ok(copy, pos) {
                continue;
            }
            self.used[v] = true;
            let done = self.fill(pin, copy, pos + 1, floor, then, out)?;
            self.used[v] = false;
            if done {
                self.used[v] = true;
                return Ok(true);
            }
        }
        Ok(false)
    }

    fn edges_ok(&self, copy: &[usize], pos: usize) -> bool {
        self.closing[pos].iter().all(|pe| {
            let he: Vec<usize> = pe.iter().map(|&i| copy[i]).collect();
            self.g.is_edge(&he)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{coin, mix};

    fn tripartite(size: usize) -> PartTuple {
        PartTuple::new(
            (0..3)
                .map(|i| (i * size..(i + 1) * size).collect())
                .collect(),
        )
        .unwrap()
    }

    /// Random 3-graph: every triple tossed independently.
    fn random_host(n: usize, p: f64, seed: u64) -> RGraph {
        let mut edges = Vec::new();
        let mut counter = 0u64;
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    counter += 1;
                    if coin(seed, counter, p) {
                        edges.push(vec![a, b, c]);
                    }
                }
            }
        }
        RGraph::new(3, n, edges).unwrap()
    }

    /// Balanced sample of `lambda` vertices per part outside the set.
    fn sample_leftover(set: &AbsorbingSet, lambda: usize, seed: u64) -> Vec<usize> {
        let mut out = Vec::new();
        for part in set.parts.parts() {
            let free: Vec<usize> = part
                .iter()
                .copied()
                .filter(|v| set.vertices.binary_search(v).is_err())
                .collect();
            assert!(
                free.len() >= lambda,
                "part has only {} free vertices, cannot sample {lambda}",
                free.len()
            );
            let mut picked = Vec::new();
            let mut ctr = 0u64;
            while picked.len() < lambda {
                let v = free[(mix(seed, ctr) as usize) % free.len()];
                ctr += 1;
                if !picked.contains(&v) {
                    picked.push(v);
                }
            }
            out.extend(picked);
        }
        out.sort_unstable();
        out
    }

    #[test]
    fn greedy_parameters_are_rejected() {
        let g = RGraph::complete(3, 24).unwrap();
        let parts = tripartite(8);
        let pat = FactorPattern::edge(3).unwrap();
        let err = assemble_absorbing_set(
            &g,
            &parts,
            &pat,
            0.5,
            0.1,
            AbsorberSource::default(),
            1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "got {err:?}");

        // Degenerate knobs are caught up front.
        assert!(assemble_absorbing_set(
            &g,
            &parts,
            &pat,
            0.1,
            0.9,
            AbsorberSource::FreshCopies { k: 0 },
            1
        )
        .is_err());
        let cyc = FactorPattern::loose_cycle(3, 3).unwrap();
        let parts6 = PartTuple::new((0..6).map(|i| (i * 4..(i + 1) * 4).collect()).collect())
            .unwrap();
        assert!(assemble_absorbing_set(
            &g,
            &parts6,
            &cyc,
            0.05,
            0.9,
            AbsorberSource::Lattice { eps: 0.1 },
            1
        )
        .is_err());
    }

    #[test]
    fn complete_host_assembles_and_absorbs() {
        let g = RGraph::complete(3, 45).unwrap();
        let parts = tripartite(15);
        let pat = FactorPattern::edge(3).unwrap();
        let set = assemble_absorbing_set(
            &g,
            &parts,
            &pat,
            0.05,
            0.95,
            AbsorberSource::default(),
            7,
        )
        .unwrap();
        assert_eq!(set.capacity, 2);
        assert_eq!(set.spares_per_part, 4);
        assert_eq!(set.gadget_count, 3);
        assert_eq!(set.size(), 3 * (2 * 3 + 4));
        assert!(set.size() as f64 <= 0.95 * 45.0);

        // Full-capacity absorption, plus the empty one.
        let leftover = sample_leftover(&set, 2, 100);
        let factor = set.absorb(&g, &leftover).unwrap();
        assert_eq!(factor.copies.len(), (set.size() + leftover.len()) / 3);
        set.absorb(&g, &[]).unwrap();

        // Independent route: the bounded search also factors G[A + S'].
        let mut keep = set.vertices.clone();
        keep.extend_from_slice(&leftover);
        let narrowed = narrow_parts(&parts, &keep).unwrap();
        let found = find_transversal_factor(&g, &narrowed, &pat, 5_000_000)
            .unwrap()
            .expect("oracle factor");
        verify_transversal_factor(&g, &parts, &pat, &found, Some(&{
            let mut k = keep.clone();
            k.sort_unstable();
            k
        }))
        .unwrap();
    }

    #[test]
    fn absorb_validates_its_leftover() {
        let g = RGraph::complete(3, 45).unwrap();
        let parts = tripartite(15);
        let pat = FactorPattern::edge(3).unwrap();
        let set = assemble_absorbing_set(
            &g,
            &parts,
            &pat,
            0.05,
            0.95,
            AbsorberSource::default(),
            7,
        )
        .unwrap();

        // Over capacity.
        let big = sample_leftover(&set, 3, 3);
        assert!(set.absorb(&g, &big).is_err());
        // Unbalanced.
        let mut unbalanced = sample_leftover(&set, 2, 4);
        unbalanced.pop();
        assert!(set.absorb(&g, &unbalanced).is_err());
        // Touching the set.
        let mut touching = sample_leftover(&set, 1, 5);
        touching[0] = set.vertices[0];
        assert!(set.absorb(&g, &touching).is_err());
    }

    #[test]
    fn dense_random_host_absorbs_sampled_sets() {
        let g = random_host(45, 0.5, 0xdeed);
        let parts = tripartite(15);
        let pat = FactorPattern::edge(3).unwrap();
        let set = assemble_absorbing_set(
            &g,
            &parts,
            &pat,
            0.023,
            0.95,
            AbsorberSource::FreshCopies { k: 4 },
            21,
        )
        .unwrap();
        assert_eq!(set.capacity, 1);
        assert_eq!(set.spares_per_part, 2);

        for trial in 0..20 {
            let lambda = usize::from(trial % 4 != 0);
            let leftover = sample_leftover(&set, lambda, mix(500, trial as u64));
            let factor = set.absorb(&g, &leftover).unwrap();
            assert_eq!(factor.copies.len(), (set.size() + leftover.len()) / 3);
        }
    }

    #[test]
    fn lattice_source_builds_on_complete_host() {
        let g = RGraph::complete(3, 60).unwrap();
        let parts = tripartite(20);
        let pat = FactorPattern::edge(3).unwrap();
        let set = assemble_absorbing_set(
            &g,
            &parts,
            &pat,
            0.04,
            0.95,
            AbsorberSource::Lattice { eps: 0.2 },
            13,
        )
        .unwrap();
        assert_eq!(set.capacity, 2);
        assert_eq!(set.spares_per_part, 4);
        assert!(set.gadgets.iter().all(|gd| gd.rows.is_some()));

        let leftover = sample_leftover(&set, 2, 900);
        let factor = set.absorb(&g, &leftover).unwrap();
        assert_eq!(factor.copies.len(), (set.size() + leftover.len()) / 3);

        // A sparse host fails the density floor.
        let sparse = RGraph::new(3, 60, vec![vec![0, 20, 40]]).unwrap();
        let err = assemble_absorbing_set(
            &sparse,
            &parts,
            &pat,
            0.04,
            0.95,
            AbsorberSource::Lattice { eps: 0.2 },
            13,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "got {err:?}");
    }
}
