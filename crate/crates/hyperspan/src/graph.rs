//! Canonical r-uniform hypergraphs and part tuples.
//!
//! Vertices are dense labels `0..n`. Canonical form: every edge is sorted
//! ascending, the edge list is sorted lexicographically, and duplicates are
//! rejected. Two graphs are equal iff their canonical serializations are
//! byte-equal, which the derived `Eq` on the canonical representation gives.
//!
//! Crossing counts follow the ordered-tuple convention: `crossing_count`
//! counts tuples `(x_1, ..., x_r)` with `x_i` in the i-th part whose
//! underlying set is an edge, so one edge can contribute several tuples when
//! parts overlap.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::Error;
use crate::Result;

/// An r-uniform hypergraph in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct RGraph {
    r: usize,
    n: usize,
    edges: Vec<Vec<usize>>,
}

// Deserialization routes through `new` so foreign JSON is canonicalized and
// validated rather than trusted.
impl<'de> Deserialize<'de> for RGraph {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            r: usize,
            n: usize,
            edges: Vec<Vec<usize>>,
        }
        let raw = Raw::deserialize(de)?;
        RGraph::new(raw.r, raw.n, raw.edges).map_err(serde::de::Error::custom)
    }
}

impl RGraph {
    /// Builds a graph, canonicalizing the edge list. Rejects arity mismatches,
    /// repeated vertices inside an edge, labels `>= n`, and duplicate edges.
    pub fn new(r: usize, n: usize, edges: Vec<Vec<usize>>) -> Result<Self> {
        if r < 2 {
            return Err(Error::InvalidInput(format!("uniformity r={r} must be at least 2")));
        }
        let mut canon: Vec<Vec<usize>> = Vec::with_capacity(edges.len());
        for mut e in edges {
            if e.len() != r {
                return Err(Error::InvalidInput(format!(
                    "edge {:?} has {} vertices, expected r={r}",
                    e,
                    e.len()
                )));
            }
            e.sort_unstable();
            if e.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidInput(format!("edge {e:?} repeats a vertex")));
            }
            if *e.last().unwrap() >= n {
                return Err(Error::InvalidInput(format!("edge {e:?} uses a label >= n={n}")));
            }
            canon.push(e);
        }
        canon.sort_unstable();
        if canon.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidInput("duplicate edge".into()));
        }
        Ok(RGraph { r, n, edges: canon })
    }

    /// Complete r-uniform graph on `n` vertices.
    pub fn complete(r: usize, n: usize) -> Result<Self> {
        let mut edges = Vec::new();
        let mut cur: Vec<usize> = (0..r).collect();
        if r <= n {
            loop {
                edges.push(cur.clone());
                // Next r-combination in lexicographic order.
                let mut i = r;
                loop {
                    if i == 0 {
                        return RGraph::new(r, n, edges);
                    }
                    i -= 1;
                    if cur[i] != i + n - r {
                        break;
                    }
                }
                cur[i] += 1;
                for j in i + 1..r {
                    cur[j] = cur[j - 1] + 1;
                }
            }
        }
        RGraph::new(r, n, edges)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Vec<usize>] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Membership test on the canonical edge list. `e` may be unsorted.
    pub fn is_edge(&self, e: &[usize]) -> bool {
        let mut key = e.to_vec();
        key.sort_unstable();
        self.edges.binary_search(&key).is_ok()
    }

    /// Number of edges containing every vertex of `s` (unordered degree).
    /// `s` may have any size up to r; repeated vertices are collapsed.
    pub fn degree(&self, s: &[usize]) -> usize {
        let mut key = s.to_vec();
        key.sort_unstable();
        key.dedup();
        if key.len() > self.r {
            return 0;
        }
        self.edges
            .iter()
            .filter(|e| key.iter().all(|v| e.binary_search(v).is_ok()))
            .count()
    }

    /// Minimum k-wise codegree: the smallest `degree(S)` over all k-subsets
    /// `S` of the vertex set. Counts via the k-subsets that actually appear
    /// in edges, so the cost is `O(|E| * C(r, k))`, not `O(C(n, k))`.
    pub fn min_codegree(&self, k: usize) -> Result<usize> {
        if k == 0 || k >= self.r {
            return Err(Error::InvalidInput(format!(
                "codegree order k={k} must satisfy 1 <= k < r={}",
                self.r
            )));
        }
        if self.n < k {
            return Err(Error::InvalidInput(format!("k={k} exceeds n={}", self.n)));
        }
        let mut counts: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        for e in &self.edges {
            for sub in combinations(e, k) {
                *counts.entry(sub).or_insert(0) += 1;
            }
        }
        let total = binomial(self.n, k);
        if counts.len() < total {
            return Ok(0); // some k-set touches no edge
        }
        Ok(counts.values().copied().min().unwrap_or(0))
    }

    /// Ordered crossing count `e(X_1, ..., X_r)`: the number of tuples
    /// `(x_1, ..., x_r)` with `x_i` in `parts[i]` whose set is an edge.
    /// Parts may overlap and need not be disjoint.
    pub fn crossing_count(&self, parts: &PartTuple) -> Result<u64> {
        parts.check_against(self)?;
        let masks: Vec<Vec<bool>> = parts
            .parts()
            .iter()
            .map(|p| {
                let mut m = vec![false; self.n];
                for &v in p {
                    m[v] = true;
                }
                m
            })
            .collect();
        let mut total = 0u64;
        for e in &self.edges {
            total += count_placements(e, &masks);
        }
        Ok(total)
    }

    /// Ordered degree of `v` into `(Y_1, ..., Y_{r-1})`: the number of tuples
    /// `(y_1, ..., y_{r-1})`, `y_i` in `Y_i`, with `{v, y_1, ..., y_{r-1}}`
    /// an edge. Sets may repeat; tuples never reuse a vertex.
    pub fn directed_degree(&self, v: usize, sets: &[Vec<usize>]) -> Result<u64> {
        if sets.len() != self.r - 1 {
            return Err(Error::InvalidInput(format!(
                "directed degree takes r-1={} sets, got {}",
                self.r - 1,
                sets.len()
            )));
        }
        let masks: Vec<Vec<bool>> = sets
            .iter()
            .map(|p| {
                let mut m = vec![false; self.n];
                for &u in p {
                    m[u] = true;
                }
                m
            })
            .collect();
        let mut total = 0u64;
        for e in self.edges.iter().filter(|e| e.binary_search(&v).is_ok()) {
            let rest: Vec<usize> = e.iter().copied().filter(|&u| u != v).collect();
            total += count_placements(&rest, &masks);
        }
        Ok(total)
    }

    /// Ordered degree of a whole set: the number of tuples placing the
    /// vertices of `e \ base` one per set, over edges `e` containing `base`.
    /// Takes `r - |base|` sets; they may overlap.
    pub fn directed_degree_set(&self, base: &[usize], sets: &[Vec<usize>]) -> Result<u64> {
        let mut key = base.to_vec();
        key.sort_unstable();
        key.dedup();
        if key.len() != base.len() || key.is_empty() {
            return Err(Error::InvalidInput("base must be distinct and nonempty".into()));
        }
        if key.iter().any(|&v| v >= self.n) {
            return Err(Error::InvalidInput("base vertex out of range".into()));
        }
        if base.len() + sets.len() != self.r {
            return Err(Error::InvalidInput(format!(
                "base of {} needs {} sets, got {}",
                base.len(),
                self.r - base.len(),
                sets.len()
            )));
        }
        let masks: Vec<Vec<bool>> = sets
            .iter()
            .map(|p| {
                let mut m = vec![false; self.n];
                for &u in p {
                    m[u] = true;
                }
                m
            })
            .collect();
        let mut total = 0u64;
        for e in &self.edges {
            if key.iter().all(|v| e.binary_search(v).is_ok()) {
                let rest: Vec<usize> =
                    e.iter().copied().filter(|u| key.binary_search(u).is_err()).collect();
                total += count_placements(&rest, &masks);
            }
        }
        Ok(total)
    }

    /// Edges incident to `v`.
    pub fn incident_edges(&self, v: usize) -> impl Iterator<Item = &Vec<usize>> {
        self.edges.iter().filter(move |e| e.binary_search(&v).is_ok())
    }

    /// Restriction to a part tuple: keeps exactly the crossing edges (edges
    /// placeable with one vertex per part) on the union of the parts.
    pub fn restrict(&self, parts: &PartTuple) -> Result<Restriction> {
        parts.check_against(self)?;
        let masks: Vec<Vec<bool>> = parts
            .parts()
            .iter()
            .map(|p| {
                let mut m = vec![false; self.n];
                for &v in p {
                    m[v] = true;
                }
                m
            })
            .collect();
        let mut vertex_map: Vec<usize> = parts.parts().iter().flatten().copied().collect();
        vertex_map.sort_unstable();
        vertex_map.dedup();
        let mut old_to_new = vec![usize::MAX; self.n];
        for (new, &old) in vertex_map.iter().enumerate() {
            old_to_new[old] = new;
        }
        let mut edges = Vec::new();
        for e in &self.edges {
            if count_placements(e, &masks) > 0 {
                edges.push(e.iter().map(|&v| old_to_new[v]).collect());
            }
        }
        let graph = RGraph::new(self.r, vertex_map.len(), edges)?;
        Ok(Restriction { graph, vertex_map })
    }

    /// Serializes to the plain text format: a `r n m` header followed by one
    /// line of r space-separated labels per edge, in canonical order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.r, self.n, self.edges.len());
        for e in &self.edges {
            let words: Vec<String> = e.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", words.join(" "));
        }
        out
    }

    /// Parses the plain text format accepted by [`RGraph::to_text`].
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty graph text".into()))?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|w| w.parse::<usize>().map_err(|_| Error::InvalidInput(format!("bad header `{header}`"))))
            .collect::<Result<_>>()?;
        if head.len() != 3 {
            return Err(Error::InvalidInput(format!("header `{header}` is not `r n m`")));
        }
        let (r, n, m) = (head[0], head[1], head[2]);
        let mut edges = Vec::with_capacity(m);
        for line in lines.take(m) {
            let e: Vec<usize> = line
                .split_whitespace()
                .map(|w| w.parse::<usize>().map_err(|_| Error::InvalidInput(format!("bad edge line `{line}`"))))
                .collect::<Result<_>>()?;
            edges.push(e);
        }
        if edges.len() != m {
            return Err(Error::InvalidInput(format!("expected {m} edges, found {}", edges.len())));
        }
        RGraph::new(r, n, edges)
    }
}

/// Result of restricting a graph to a part tuple. `vertex_map[new] = old`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Restriction {
    pub graph: RGraph,
    pub vertex_map: Vec<usize>,
}

/// An ordered tuple of vertex subsets. Parts may overlap unless an operation
/// states otherwise; each part is kept sorted and duplicate-free.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartTuple {
    parts: Vec<Vec<usize>>,
}

impl<'de> Deserialize<'de> for PartTuple {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            parts: Vec<Vec<usize>>,
        }
        let raw = Raw::deserialize(de)?;
        PartTuple::new(raw.parts).map_err(serde::de::Error::custom)
    }
}

impl PartTuple {
    pub fn new(parts: Vec<Vec<usize>>) -> Result<Self> {
        let mut canon = Vec::with_capacity(parts.len());
        for mut p in parts {
            p.sort_unstable();
            p.dedup();
            canon.push(p);
        }
        Ok(PartTuple { parts: canon })
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.parts.iter().map(Vec::len).collect()
    }

    pub fn min_size(&self) -> usize {
        self.parts.iter().map(Vec::len).min().unwrap_or(0)
    }

    /// True iff the parts are pairwise disjoint.
    pub fn is_disjoint(&self) -> bool {
        let mut seen = std::collections::BTreeSet::new();
        for p in &self.parts {
            for &v in p {
                if !seen.insert(v) {
                    return false;
                }
            }
        }
        true
    }

    /// Validates labels against `g` and the part count against `g.r()`.
    pub fn check_against(&self, g: &RGraph) -> Result<()> {
        if self.parts.len() != g.r() {
            return Err(Error::InvalidInput(format!(
                "part tuple has {} parts, expected r={}",
                self.parts.len(),
                g.r()
            )));
        }
        self.check_labels(g.n())
    }

    /// Validates labels only (any number of parts).
    pub fn check_labels(&self, n: usize) -> Result<()> {
        for p in &self.parts {
            if let Some(&v) = p.iter().find(|&&v| v >= n) {
                return Err(Error::InvalidInput(format!("part label {v} out of range (n={n})")));
            }
        }
        Ok(())
    }
}

/// Number of injective placements of the vertices of `e` into the parts
/// described by `masks` (one vertex per part, all of `e` used). `e` and
/// `masks` must have equal length.
fn count_placements(e: &[usize], masks: &[Vec<bool>]) -> u64 {
    debug_assert_eq!(e.len(), masks.len());
    fn rec(e: &[usize], masks: &[Vec<bool>], pos: usize, used: &mut [bool]) -> u64 {
        if pos == masks.len() {
            return 1;
        }
        let mut total = 0;
        for (i, &v) in e.iter().enumerate() {
            if !used[i] && masks[pos][v] {
                used[i] = true;
                total += rec(e, masks, pos + 1, used);
                used[i] = false;
            }
        }
        total
    }
    let mut used = vec![false; e.len()];
    rec(e, masks, 0, &mut used)
}

/// All k-subsets of a sorted slice, in lexicographic order.
pub(crate) fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc.min(usize::MAX as u128) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> RGraph {
        RGraph::new(2, 3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap()
    }

    #[test]
    fn canonical_form_is_idempotent_and_order_free() {
        let a = RGraph::new(3, 5, vec![vec![4, 2, 0], vec![1, 2, 3]]).unwrap();
        let b = RGraph::new(3, 5, vec![vec![1, 2, 3], vec![0, 2, 4]]).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.edges(), &[vec![0, 2, 4], vec![1, 2, 3]]);
    }

    #[test]
    fn rejects_malformed_edges() {
        assert!(RGraph::new(3, 5, vec![vec![0, 1]]).is_err());
        assert!(RGraph::new(3, 5, vec![vec![0, 1, 1]]).is_err());
        assert!(RGraph::new(3, 5, vec![vec![0, 1, 5]]).is_err());
        assert!(RGraph::new(3, 5, vec![vec![0, 1, 2], vec![2, 1, 0]]).is_err());
        assert!(RGraph::new(1, 5, vec![]).is_err());
    }

    #[test]
    fn handshake_identity() {
        let g = RGraph::complete(3, 6).unwrap();
        let total: usize = (0..6).map(|v| g.degree(&[v])).sum();
        assert_eq!(total, 3 * g.edge_count());
    }

    #[test]
    fn degree_and_codegree_on_complete() {
        let g = RGraph::complete(3, 6).unwrap();
        assert_eq!(g.degree(&[0]), binomial(5, 2));
        assert_eq!(g.degree(&[0, 1]), 4);
        assert_eq!(g.min_codegree(1).unwrap(), binomial(5, 2));
        assert_eq!(g.min_codegree(2).unwrap(), 4);
        let empty = RGraph::new(3, 6, vec![]).unwrap();
        assert_eq!(empty.min_codegree(2).unwrap(), 0);
    }

    #[test]
    fn crossing_counts_overlapping_parts() {
        // Triangle with X1 = X2 = {0,1}: ordered pairs (0,1) and (1,0).
        let g = triangle();
        let parts = PartTuple::new(vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(g.crossing_count(&parts).unwrap(), 2);
        // Disjoint singletons on an edge: exactly one placement.
        let parts = PartTuple::new(vec![vec![0], vec![1]]).unwrap();
        assert_eq!(g.crossing_count(&parts).unwrap(), 1);
        // Non-edge pair in a 3-uniform graph.
        let h = RGraph::new(3, 4, vec![vec![0, 1, 2]]).unwrap();
        let parts = PartTuple::new(vec![vec![0], vec![1], vec![3]]).unwrap();
        assert_eq!(h.crossing_count(&parts).unwrap(), 0);
    }

    #[test]
    fn directed_degree_matches_crossing_count() {
        let g = RGraph::complete(3, 7).unwrap();
        let sets = vec![vec![1, 2, 3], vec![3, 4, 5]];
        let d = g.directed_degree(0, &sets).unwrap();
        let parts = PartTuple::new(vec![vec![0], vec![1, 2, 3], vec![3, 4, 5]]).unwrap();
        assert_eq!(d, g.crossing_count(&parts).unwrap());
    }

    #[test]
    fn restriction_keeps_crossing_edges_and_labels() {
        let g = RGraph::new(3, 6, vec![vec![0, 1, 2], vec![1, 2, 3], vec![3, 4, 5]]).unwrap();
        let parts = PartTuple::new(vec![vec![0, 3], vec![1, 4], vec![2, 5]]).unwrap();
        let res = g.restrict(&parts).unwrap();
        assert_eq!(res.vertex_map, vec![0, 1, 2, 3, 4, 5]);
        // All three edges place one vertex per part ({1,2,3} as 3|1|2).
        assert_eq!(res.graph.edge_count(), 3);
        let parts = PartTuple::new(vec![vec![0], vec![1], vec![2]]).unwrap();
        let res = g.restrict(&parts).unwrap();
        assert_eq!(res.vertex_map, vec![0, 1, 2]);
        assert_eq!(res.graph.edges(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn text_roundtrip() {
        let g = RGraph::new(3, 6, vec![vec![0, 1, 2], vec![1, 2, 3], vec![3, 4, 5]]).unwrap();
        let text = g.to_text();
        assert!(text.starts_with("3 6 3\n"));
        assert_eq!(RGraph::from_text(&text).unwrap(), g);
    }

    #[test]
    fn json_roundtrip() {
        let g = triangle();
        let js = serde_json::to_string(&g).unwrap();
        assert!(js.contains("\"r\":2"));
        let back: RGraph = serde_json::from_str(&js).unwrap();
        assert_eq!(back, g);
    }
}
