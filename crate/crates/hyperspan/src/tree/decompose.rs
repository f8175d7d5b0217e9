//! Structural decompositions of hypertrees.
//!
//! Two extraction routines drive the spanning-tree pipeline. `bare_paths`
//! carves vertex-disjoint bare paths of a prescribed length out of a tree
//! with few leaf-edges: a bare path is a loose path whose internal vertices
//! meet no edges outside the path. `pendant_or_caterpillars` removes either
//! a family of isomorphic pendant stars or a family of isomorphic
//! caterpillars, leaving a forest behind; which case fires depends on
//! whether enough pendant stars survive an isomorphism-class filter.
//!
//! Both routines work on maximal chains of "clean" edges: edges that contain
//! no vertex of degree three or more and at most two vertices of degree two.
//! Runs are cut from each chain with one-edge gaps so that distinct runs
//! never touch, and run endpoints are junction vertices anchored to the
//! surviving part of the tree whenever one exists.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::tree::{intersect_sorted, Hypertree};
use crate::Result;

/// A loose path inside a hypertree, listed as consecutive edge indices with
/// its two endpoint vertices. Internal vertices are every vertex of the run
/// except `u` and `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarePath {
    pub edges: Vec<usize>,
    pub u: usize,
    pub v: usize,
}

impl BarePath {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// All vertices covered by the run, sorted.
    pub fn vertex_set(&self, tree: &Hypertree) -> Vec<usize> {
        let mut vs: Vec<usize> =
            self.edges.iter().flat_map(|&i| tree.edge(i).iter().copied()).collect();
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Vertices strictly inside the run: everything except the endpoints.
    pub fn interior(&self, tree: &Hypertree) -> Vec<usize> {
        self.vertex_set(tree).into_iter().filter(|&w| w != self.u && w != self.v).collect()
    }

    /// Junction vertices between consecutive run edges, in path order.
    pub fn junctions(&self, tree: &Hypertree) -> Vec<usize> {
        self.edges
            .windows(2)
            .map(|w| intersect_sorted(tree.edge(w[0]), tree.edge(w[1]))[0])
            .collect()
    }

    /// Checks that the run is a bare path of the subforest selected by
    /// `active`: consecutive edges share exactly one vertex, non-consecutive
    /// edges are disjoint, the endpoints sit in the first and last edge, and
    /// internal vertices meet no active edge outside the run.
    pub fn verify_in(&self, tree: &Hypertree, active: &[bool]) -> Result<()> {
        if self.edges.is_empty() {
            return Err(Error::InvalidInput("empty path".into()));
        }
        for &i in &self.edges {
            if i >= tree.edge_count() || !active[i] {
                return Err(Error::InvalidInput(format!("edge {i} not in the subforest")));
            }
        }
        let k = self.edges.len();
        for a in 0..k {
            for b in a + 1..k {
                let shared = intersect_sorted(tree.edge(self.edges[a]), tree.edge(self.edges[b]));
                let want = usize::from(b == a + 1);
                if shared.len() != want {
                    return Err(Error::InvalidInput(format!(
                        "edges {a} and {b} of the run share {} vertices, expected {want}",
                        shared.len()
                    )));
                }
            }
        }
        let in_first = tree.edge(self.edges[0]).contains(&self.u);
        let in_last = tree.edge(self.edges[k - 1]).contains(&self.v);
        if !in_first || !in_last || self.u == self.v {
            return Err(Error::InvalidInput("endpoints misplaced".into()));
        }
        for (pos, &i) in self.edges.iter().enumerate() {
            if pos > 0 && tree.edge(i).contains(&self.u) {
                return Err(Error::InvalidInput("endpoint u is internal".into()));
            }
            if pos + 1 < k && tree.edge(i).contains(&self.v) {
                return Err(Error::InvalidInput("endpoint v is internal".into()));
            }
        }
        let run: std::collections::BTreeSet<usize> = self.edges.iter().copied().collect();
        for w in self.interior(tree) {
            for j in tree.incident(w) {
                if active[j] && !run.contains(&j) {
                    return Err(Error::InvalidInput(format!(
                        "internal vertex {w} meets edge {j} outside the run"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Degrees of the subforest selected by `active`.
pub(crate) fn subforest_degrees(tree: &Hypertree, active: &[bool]) -> Vec<usize> {
    let mut deg = vec![0usize; tree.n()];
    for i in 0..tree.edge_count() {
        if active[i] {
            for &v in tree.edge(i) {
                deg[v] += 1;
            }
        }
    }
    deg
}

/// Maximal chains of clean edges in the subforest, each as an ordered list
/// of edge indices, plus the outward attachment vertex (a degree-two
/// junction into a surviving non-chain edge) at either end when one exists.
struct Chain {
    edges: Vec<usize>,
    left_attach: Option<usize>,
    right_attach: Option<usize>,
}

fn build_chains(tree: &Hypertree, active: &[bool], deg: &[usize]) -> Vec<Chain> {
    let m_all = tree.edge_count();
    let mut clean = vec![false; m_all];
    for i in 0..m_all {
        if !active[i] {
            continue;
        }
        let mut twos = 0;
        let mut ok = true;
        for &v in tree.edge(i) {
            match deg[v] {
                0 | 1 => {}
                2 => twos += 1,
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        clean[i] = ok && twos <= 2;
    }
    // Active incident edges per vertex; only needed around degree-two vertices.
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); tree.n()];
    for i in 0..m_all {
        if active[i] {
            for &v in tree.edge(i) {
                incident[v].push(i);
            }
        }
    }
    // Two clean edges link when they share a degree-two vertex.
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); m_all];
    for i in 0..m_all {
        if !clean[i] {
            continue;
        }
        for &v in tree.edge(i) {
            if deg[v] == 2 {
                let j = incident[v].iter().copied().find(|&j| j != i).unwrap();
                if clean[j] {
                    neighbors[i].push(j);
                }
            }
        }
    }
    let mut chains = Vec::new();
    let mut visited = vec![false; m_all];
    for start in 0..m_all {
        if !clean[start] || visited[start] || neighbors[start].len() > 1 {
            continue;
        }
        let mut seq = vec![start];
        visited[start] = true;
        let mut prev = usize::MAX;
        let mut cur = start;
        while let Some(&next) = neighbors[cur].iter().find(|&&j| j != prev && !visited[j]) {
            visited[next] = true;
            seq.push(next);
            prev = cur;
            cur = next;
        }
        let attach = |end: usize, inward: Option<usize>| -> Option<usize> {
            let mut best = None;
            for &v in tree.edge(end) {
                if deg[v] != 2 {
                    continue;
                }
                let other = incident[v].iter().copied().find(|&j| j != end).unwrap();
                if clean[other] {
                    continue; // in-chain link
                }
                if Some(v) == inward {
                    continue;
                }
                best = match best {
                    None => Some(v),
                    Some(b) => Some(std::cmp::min(b, v)),
                };
            }
            best
        };
        let (la, ra) = if seq.len() == 1 {
            // One clean edge: split its outward junctions between the ends.
            let mut outs: Vec<usize> = tree
                .edge(seq[0])
                .iter()
                .copied()
                .filter(|&v| {
                    deg[v] == 2
                        && !clean[incident[v].iter().copied().find(|&j| j != seq[0]).unwrap()]
                })
                .collect();
            outs.sort_unstable();
            (outs.first().copied(), if outs.len() > 1 { outs.last().copied() } else { None })
        } else {
            let first_junction =
                intersect_sorted(tree.edge(seq[0]), tree.edge(seq[1])).first().copied();
            let last = seq.len() - 1;
            let last_junction =
                intersect_sorted(tree.edge(seq[last - 1]), tree.edge(seq[last])).first().copied();
            (attach(seq[0], first_junction), attach(seq[last], last_junction))
        };
        chains.push(Chain { edges: seq, left_attach: la, right_attach: ra });
    }
    chains
}

fn junction_of(tree: &Hypertree, a: usize, b: usize) -> usize {
    intersect_sorted(tree.edge(a), tree.edge(b))[0]
}

/// Cuts length-`m` runs out of every chain, leaving a one-edge gap between
/// consecutive runs so that runs are pairwise vertex-disjoint. With
/// `require_anchored` both endpoints of every run are junctions into edges
/// that stay behind; otherwise chain-end runs may end in degree-one vertices.
pub(crate) fn carve_runs(
    tree: &Hypertree,
    active: &[bool],
    deg: &[usize],
    m: usize,
    require_anchored: bool,
    cap: usize,
) -> Vec<BarePath> {
    let chains = build_chains(tree, active, deg);
    let mut out = Vec::new();
    for ch in &chains {
        let k = ch.edges.len();
        let lo = if require_anchored && ch.left_attach.is_none() { 1 } else { 0 };
        let hi = if require_anchored && ch.right_attach.is_none() { k.saturating_sub(1) } else { k };
        let mut start = lo;
        while start + m <= hi && out.len() < cap {
            let end = start + m - 1;
            let u = if start > 0 {
                junction_of(tree, ch.edges[start - 1], ch.edges[start])
            } else {
                ch.left_attach.unwrap_or_else(|| free_endpoint(tree, deg, &ch.edges, start, None))
            };
            let v = if end + 1 < k {
                junction_of(tree, ch.edges[end], ch.edges[end + 1])
            } else {
                ch.right_attach
                    .unwrap_or_else(|| free_endpoint(tree, deg, &ch.edges, end, Some(u)))
            };
            if u != v {
                out.push(BarePath { edges: ch.edges[start..=end].to_vec(), u, v });
            }
            start += m + 1;
        }
        if out.len() == cap {
            break;
        }
    }
    out
}

/// Picks an endpoint inside the chain edge at `pos` when no outward junction
/// exists there: a degree-one vertex away from the in-chain junction.
fn free_endpoint(
    tree: &Hypertree,
    deg: &[usize],
    chain: &[usize],
    pos: usize,
    avoid: Option<usize>,
) -> usize {
    let e = tree.edge(chain[pos]);
    let inward = if chain.len() == 1 {
        None
    } else if pos == 0 {
        Some(junction_of(tree, chain[0], chain[1]))
    } else {
        Some(junction_of(tree, chain[pos - 1], chain[pos]))
    };
    e.iter()
        .copied()
        .filter(|&w| deg[w] <= 1 && Some(w) != inward && Some(w) != avoid)
        .max_by_key(|&w| if avoid.is_some() { w } else { usize::MAX - w })
        .expect("clean chain-end edge always keeps a degree-one vertex")
}

/// Extracts pairwise vertex-disjoint bare paths of exactly `m` edges.
/// On trees whose leaf-edge count is at most `e(T)/(12(m+1))` the number of
/// returned paths is at least `e(T)/(4m)`.
pub fn bare_paths(tree: &Hypertree, m: usize) -> Result<Vec<BarePath>> {
    if m == 0 {
        return Err(Error::InvalidInput("path length must be positive".into()));
    }
    let active = vec![true; tree.edge_count()];
    let deg = tree.degrees().to_vec();
    let paths = carve_runs(tree, &active, &deg, m, false, usize::MAX);
    for p in &paths {
        p.verify_in(tree, &active)?;
    }
    Ok(paths)
}

/// A pendant star: a center edge together with every leaf-edge hanging off
/// its non-root vertices. The root is the vertex through which the star
/// attaches to the rest of the tree; `spine[j]` carries `leaf_edges[j]`
/// pendant edges, and the spine is ordered by decreasing pendant count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PendantStar {
    pub center: usize,
    pub root: usize,
    pub spine: Vec<usize>,
    pub leaf_edges: Vec<Vec<usize>>,
}

impl PendantStar {
    /// Vertices removed with the star: everything except the root.
    pub fn removed_vertices(&self, tree: &Hypertree) -> Vec<usize> {
        let mut vs: Vec<usize> = tree.edge(self.center).to_vec();
        for group in &self.leaf_edges {
            for &i in group {
                vs.extend_from_slice(tree.edge(i));
            }
        }
        vs.sort_unstable();
        vs.dedup();
        vs.retain(|&w| w != self.root);
        vs
    }

    pub fn edge_indices(&self) -> Vec<usize> {
        let mut es = vec![self.center];
        es.extend(self.leaf_edges.iter().flatten().copied());
        es.sort_unstable();
        es
    }

    pub fn signature(&self) -> Vec<usize> {
        self.leaf_edges.iter().map(Vec::len).collect()
    }
}

/// A caterpillar: a central bare path plus every leaf-edge hanging off its
/// internal vertices. `spine` lists the internal vertices in path order from
/// `path.u` to `path.v`, passengers of each edge before the junction that
/// follows them; `leaf_edges[j]` are the pendant edges at `spine[j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caterpillar {
    pub path: BarePath,
    pub spine: Vec<usize>,
    pub leaf_edges: Vec<Vec<usize>>,
}

impl Caterpillar {
    /// Vertices removed with the caterpillar: all internal path vertices and
    /// all pendant leaves. The endpoints stay behind.
    pub fn removed_vertices(&self, tree: &Hypertree) -> Vec<usize> {
        let mut vs = self.path.vertex_set(tree);
        for group in &self.leaf_edges {
            for &i in group {
                vs.extend_from_slice(tree.edge(i));
            }
        }
        vs.sort_unstable();
        vs.dedup();
        vs.retain(|&w| w != self.path.u && w != self.path.v);
        vs
    }

    pub fn edge_indices(&self) -> Vec<usize> {
        let mut es = self.path.edges.clone();
        es.extend(self.leaf_edges.iter().flatten().copied());
        es.sort_unstable();
        es
    }

    pub fn signature(&self) -> Vec<usize> {
        self.leaf_edges.iter().map(Vec::len).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecompositionCase {
    PendantStars,
    Caterpillars,
}

/// Result of `pendant_or_caterpillars`: a family of pairwise vertex-disjoint,
/// pairwise isomorphic substructures, the signature they share, and whether
/// the family is large enough for the case that produced it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Decomposition {
    pub case: DecompositionCase,
    pub stars: Vec<PendantStar>,
    pub caterpillars: Vec<Caterpillar>,
    pub signature: Vec<usize>,
    pub bound: f64,
    pub bound_met: bool,
}

impl Decomposition {
    pub fn family_size(&self) -> usize {
        match self.case {
            DecompositionCase::PendantStars => self.stars.len(),
            DecompositionCase::Caterpillars => self.caterpillars.len(),
        }
    }

    /// Vertices removed when the family is deleted from the tree.
    pub fn removed_vertices(&self, tree: &Hypertree) -> Vec<usize> {
        let mut vs: Vec<usize> = match self.case {
            DecompositionCase::PendantStars => {
                self.stars.iter().flat_map(|s| s.removed_vertices(tree)).collect()
            }
            DecompositionCase::Caterpillars => {
                self.caterpillars.iter().flat_map(|c| c.removed_vertices(tree)).collect()
            }
        };
        vs.sort_unstable();
        vs.dedup();
        vs
    }

    /// Edge indices removed with the family.
    pub fn removed_edges(&self) -> Vec<usize> {
        let mut es: Vec<usize> = match self.case {
            DecompositionCase::PendantStars => {
                self.stars.iter().flat_map(|s| s.edge_indices()).collect()
            }
            DecompositionCase::Caterpillars => {
                self.caterpillars.iter().flat_map(|c| c.edge_indices()).collect()
            }
        };
        es.sort_unstable();
        es.dedup();
        es
    }
}

/// Splits off either pendant stars or caterpillars with central path length
/// Both candidate families with their class signatures and size bounds.
struct FamilyChoices {
    star_sig: Vec<usize>,
    stars: Vec<PendantStar>,
    star_bound: f64,
    star_ok: bool,
    cat_sig: Vec<usize>,
    caterpillars: Vec<Caterpillar>,
    cat_bound: f64,
    cat_ok: bool,
}

fn families(tree: &Hypertree, t: usize, max_deg: usize) -> Result<FamilyChoices> {
    if !tree.is_connected() {
        return Err(Error::Precondition("decomposition expects a connected tree".into()));
    }
    if t == 0 || max_deg == 0 || tree.max_degree() > max_deg {
        return Err(Error::Precondition(format!(
            "bad parameters: t={t}, max_deg={max_deg}, tree max degree {}",
            tree.max_degree()
        )));
    }
    let r = tree.r();
    let m_all = tree.edge_count();
    let leaf: Vec<bool> = (0..m_all).map(|i| tree.is_leaf_edge(i)).collect();
    let core: Vec<bool> = leaf.iter().map(|&b| !b).collect();
    if core.iter().all(|&b| !b) {
        return Err(Error::Precondition(
            "every edge is a leaf-edge; nothing to decompose".into(),
        ));
    }
    let core_deg = subforest_degrees(tree, &core);
    // Pendant edges hanging at a vertex, sorted by edge index.
    let pendants_at = |w: usize| -> Vec<usize> {
        tree.incident(w).into_iter().filter(|&j| leaf[j]).collect()
    };

    // Case one: stars seeded by leaf-edges of the core. A core leaf-edge has
    // at most one vertex of core degree two or more; that vertex is the root.
    let mut stars: Vec<PendantStar> = Vec::new();
    let mut used_roots = std::collections::BTreeSet::new();
    for i in 0..m_all {
        if !core[i] {
            continue;
        }
        let ones = tree.edge(i).iter().filter(|&&w| core_deg[w] <= 1).count();
        if ones + 1 < r {
            continue;
        }
        let root = tree
            .edge(i)
            .iter()
            .copied()
            .find(|&w| core_deg[w] >= 2)
            .unwrap_or_else(|| tree.edge(i)[0]);
        if !used_roots.insert(root) {
            continue;
        }
        let mut zs: Vec<(usize, Vec<usize>)> = tree
            .edge(i)
            .iter()
            .copied()
            .filter(|&w| w != root)
            .map(|w| (w, pendants_at(w)))
            .collect();
        zs.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
        if zs.iter().all(|(_, p)| p.is_empty()) {
            continue; // trivial star: nothing pendant to absorb
        }
        let spine: Vec<usize> = zs.iter().map(|(w, _)| *w).collect();
        let leaf_edges: Vec<Vec<usize>> = zs.into_iter().map(|(_, p)| p).collect();
        stars.push(PendantStar { center: i, root, spine, leaf_edges });
    }
    let (star_sig, star_family) = largest_class(stars, PendantStar::signature);

    // Case two: caterpillars seeded by bare paths of the core.
    let runs = carve_runs(tree, &core, &core_deg, t, false, usize::MAX);
    let mut caterpillars: Vec<Caterpillar> = Vec::new();
    for run in runs {
        let cat = assemble_caterpillar(tree, &core_deg, run, &pendants_at)?;
        caterpillars.push(canonical_flip(tree, &core_deg, cat, &pendants_at)?);
    }
    let (cat_sig, cat_family) = largest_class(caterpillars, Caterpillar::signature);

    let n = tree.n() as f64;
    let scale = (r * r * (t + 1) * max_deg) as f64;
    let star_bound = n / (12.0 * scale);
    let cat_bound = n / (4.0 * scale);
    let star_ok = !star_family.is_empty() && star_family.len() as f64 >= star_bound;
    let cat_ok = !cat_family.is_empty() && cat_family.len() as f64 >= cat_bound;

    let pick_stars = if star_ok {
        true
    } else if cat_ok {
        false
    } else {
        // Neither bound met: keep the family that comes closer to its bound.
        let star_ratio =
            if star_family.is_empty() { 0.0 } else { star_family.len() as f64 / star_bound };
        let cat_ratio =
            if cat_family.is_empty() { 0.0 } else { cat_family.len() as f64 / cat_bound };
        star_ratio >= cat_ratio
    };
    let d = if pick_stars {
        Decomposition {
            case: DecompositionCase::PendantStars,
            stars: star_family,
            caterpillars: Vec::new(),
            signature: star_sig,
            bound: star_bound,
            bound_met: star_ok,
        }
    } else {
        Decomposition {
            case: DecompositionCase::Caterpillars,
            stars: Vec::new(),
            caterpillars: cat_family,
            signature: cat_sig,
            bound: cat_bound,
            bound_met: cat_ok,
        }
    };
    if d.family_size() == 0 {
        return Err(Error::PipelineFailure {
            stage: "decompose".into(),
            detail: "no pendant stars and no caterpillars found".into(),
        });
    }
    Ok(d)
}

/// Groups items by signature and returns the most populous class; ties break
/// toward the lexicographically smallest signature.
fn largest_class<T, F: Fn(&T) -> Vec<usize>>(items: Vec<T>, sig: F) -> (Vec<usize>, Vec<T>) {
    let mut classes: std::collections::BTreeMap<Vec<usize>, Vec<T>> =
        std::collections::BTreeMap::new();
    for it in items {
        classes.entry(sig(&it)).or_default().push(it);
    }
    classes
        .into_iter()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .unwrap_or_default()
}

/// Builds the caterpillar over a core run: spine in path order, passengers of
/// each edge sorted by decreasing pendant count before the junction that ends
/// the edge. Every non-core edge at an internal vertex must be a leaf-edge.
fn assemble_caterpillar(
    tree: &Hypertree,
    core_deg: &[usize],
    run: BarePath,
    pendants_at: &dyn Fn(usize) -> Vec<usize>,
) -> Result<Caterpillar> {
    let junctions = run.junctions(tree);
    let mut spine = Vec::new();
    let mut left = run.u;
    for (pos, &i) in run.edges.iter().enumerate() {
        let right = junctions.get(pos).copied().unwrap_or(run.v);
        let mut passengers: Vec<(usize, usize)> = tree
            .edge(i)
            .iter()
            .copied()
            .filter(|&w| w != left && w != right)
            .map(|w| (w, pendants_at(w).len()))
            .collect();
        passengers.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        spine.extend(passengers.into_iter().map(|(w, _)| w));
        if pos + 1 < run.edges.len() {
            spine.push(right);
        }
        left = right;
    }
    let leaf_edges: Vec<Vec<usize>> = spine.iter().map(|&w| pendants_at(w)).collect();
    for (w, group) in spine.iter().zip(&leaf_edges) {
        if tree.incident(*w).len() != core_deg[*w] + group.len() {
            return Err(Error::Internal(format!(
                "internal vertex {w} carries a non-pendant edge outside the core run"
            )));
        }
    }
    Ok(Caterpillar { path: run, spine, leaf_edges })
}

/// Replaces the caterpillar by its reversal when the reversed signature is
/// lexicographically smaller, so isomorphic caterpillars read identically.
fn canonical_flip(
    tree: &Hypertree,
    core_deg: &[usize],
    cat: Caterpillar,
    pendants_at: &dyn Fn(usize) -> Vec<usize>,
) -> Result<Caterpillar> {
    let sig = cat.signature();
    let rev: Vec<usize> = sig.iter().rev().copied().collect();
    if rev < sig {
        let flipped = BarePath {
            edges: cat.path.edges.iter().rev().copied().collect(),
            u: cat.path.v,
            v: cat.path.u,
        };
        assemble_caterpillar(tree, core_deg, flipped, pendants_at)
    } else {
        Ok(cat)
    }
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
    fn carves_gapped_runs_from_a_loose_path() {
        let t = loose_path_tree(3, 12);
        let paths = bare_paths(&t, 3).unwrap();
        assert_eq!(paths.len(), 3); // floor(13/4)
        // Pairwise vertex-disjoint.
        let mut all = Vec::new();
        for p in &paths {
            assert_eq!(p.len(), 3);
            all.extend(p.vertex_set(&t));
        }
        let total = all.len();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), total);
    }

    #[test]
    fn run_count_beats_quarter_bound_on_leaf_light_trees() {
        for len in [24usize, 30, 41] {
            let t = loose_path_tree(2, len);
            let m = 6;
            let paths = bare_paths(&t, m).unwrap();
            assert!(paths.len() * 4 * m >= len, "{} runs on {len} edges", paths.len());
        }
    }

    #[test]
    fn double_star_yields_a_pendant_star() {
        // Edge {0,1} with three pendant leaves on each side.
        let edges = vec![
            vec![0, 1],
            vec![0, 2],
            vec![0, 3],
            vec![0, 4],
            vec![1, 5],
            vec![1, 6],
            vec![1, 7],
        ];
        let t = tree_of(2, 8, edges);
        let d = pendant_or_caterpillars(&t, 3, 4).unwrap();
        assert_eq!(d.case, DecompositionCase::PendantStars);
        assert_eq!(d.stars.len(), 1);
        let s = &d.stars[0];
        assert_eq!(s.signature(), vec![3]);
        // Root 0 stays, vertex 1 and its pendants go.
        let removed = s.removed_vertices(&t);
        assert_eq!(removed, vec![1, 5, 6, 7]);
        assert!(d.bound_met);
    }

    #[test]
    fn pendant_path_prefers_end_stars() {
        // A 2-uniform path 0..=20 with pendant leaves at two interior
        // vertices. Pruning leaf edges leaves the core path 1..=19 whose
        // two end edges seed isomorphic one-pendant stars; at this scale
        // two stars clear the star bound, so stars win the preference.
        let mut edges: Vec<Vec<usize>> = (0..20).map(|i| vec![i, i + 1]).collect();
        edges.push(vec![5, 21]);
        edges.push(vec![9, 22]);
        let t = tree_of(2, 23, edges);
        let d = pendant_or_caterpillars(&t, 3, 3).unwrap();
        assert_eq!(d.case, DecompositionCase::PendantStars);
        assert!(d.bound_met);
        assert_eq!(d.stars.len(), 2);
        assert_eq!(d.signature, vec![1]);
        let removed: Vec<Vec<usize>> =
            d.stars.iter().map(|s| s.removed_vertices(&t)).collect();
        assert_eq!(removed, vec![vec![0, 1], vec![19, 20]]);
    }

    #[test]
    fn long_bare_path_yields_caterpillars() {
        // On a 1200-edge path only two end stars exist, far below the star
        // bound, so the core carves into gapped three-edge caterpillars.
        let edges: Vec<Vec<usize>> = (0..1200).map(|i| vec![i, i + 1]).collect();
        let t = tree_of(2, 1201, edges);
        let d = pendant_or_caterpillars(&t, 3, 2).unwrap();
        assert_eq!(d.case, DecompositionCase::Caterpillars);
        assert!(d.bound_met);
        assert_eq!(d.caterpillars.len(), 299);
        for c in &d.caterpillars {
            assert_eq!(c.signature(), d.signature);
            assert_eq!(c.path.len(), 3);
        }
        // Removed vertex sets are pairwise disjoint and avoid endpoints.
        let mut seen = std::collections::BTreeSet::new();
        for c in &d.caterpillars {
            for w in c.removed_vertices(&t) {
                assert!(seen.insert(w));
                assert_ne!(w, c.path.u);
                assert_ne!(w, c.path.v);
            }
        }
    }

    #[test]
    fn star_guest_is_rejected_nothing_to_prune() {
        let star = tree_of(3, 7, vec![vec![0, 1, 2], vec![0, 3, 4], vec![0, 5, 6]]);
        assert!(matches!(
            pendant_or_caterpillars(&star, 3, 3),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn three_uniform_broom_keeps_root() {
        // Core edge {0,1,2}; pendants {1,3,4},{1,5,6},{2,7,8}; plus a second
        // core edge {0,9,10} with pendant {9,11,12} so vertex 0 has core
        // degree two and the star roots at 0.
        let edges = vec![
            vec![0, 1, 2],
            vec![1, 3, 4],
            vec![1, 5, 6],
            vec![2, 7, 8],
            vec![0, 9, 10],
            vec![9, 11, 12],
        ];
        let t = tree_of(3, 13, edges);
        let d = pendant_or_caterpillars(&t, 3, 3).unwrap();
        assert_eq!(d.case, DecompositionCase::PendantStars);
        // The two core edges both leaf the core; roots must differ, and each
        // star roots at its core-degree-two vertex 0.
        for s in &d.stars {
            assert_eq!(s.root, 0);
        }
        assert_eq!(d.stars.len(), 1);
        assert_eq!(d.signature, vec![2, 1]);
    }
}
