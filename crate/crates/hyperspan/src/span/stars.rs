//! Star packings over a part tuple via vertex splitting.
//!
//! Given parts `(V_1, ..., V_r)` and a demand `f(v)` for every center
//! `v` in `V_1` with total demand `|V_2| = ... = |V_r|`, the packer finds
//! vertex-disjoint stars: the star at `v` consists of `f(v)` host edges
//! through `v`, each meeting every other part exactly once, and together
//! the stars use every vertex of `V_2, ..., V_r` exactly once.  The search
//! splits each center into `f(v)` clones and asks the perfect-matching
//! pipeline for a matching of the split graph; a matching there is exactly
//! a star packing here.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::absorb::pm::perfect_matching;
use crate::error::Error;
use crate::graph::{PartTuple, RGraph};
use crate::Result;

/// A verified star packing: `stars[i]` holds the `f(v)` edges of the star
/// at `centers[i].0`, whose demand was `centers[i].1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarAssignment {
    pub centers: Vec<(usize, usize)>,
    pub stars: Vec<Vec<Vec<usize>>>,
}

impl StarAssignment {
    /// Checks the packing from scratch: demands met exactly, every edge a
    /// host edge through its center meeting each part once, and the parts
    /// `V_2, ..., V_r` covered exactly once overall.
    pub fn verify(&self, g: &RGraph, parts: &PartTuple, f: &BTreeMap<usize, usize>) -> Result<()> {
        if self.centers.len() != self.stars.len() {
            return Err(Error::InvalidInput("centers and stars disagree in length".into()));
        }
        let listed: BTreeMap<usize, usize> = self.centers.iter().copied().collect();
        if &listed != f {
            return Err(Error::InvalidInput("listed demands disagree with f".into()));
        }
        let mut part_of = vec![usize::MAX; g.n()];
        for (j, p) in parts.parts().iter().enumerate() {
            for &v in p {
                part_of[v] = j;
            }
        }
        let mut seen = vec![false; g.n()];
        for ((&(center, demand), star), _) in
            self.centers.iter().zip(self.stars.iter()).zip(0..)
        {
            if star.len() != demand {
                return Err(Error::InvalidInput(format!(
                    "star at {center} has {} edges, demand {demand}",
                    star.len()
                )));
            }
            for e in star {
                if !g.is_edge(e) {
                    return Err(Error::InvalidInput(format!("{e:?} is not a host edge")));
                }
                if !e.contains(&center) {
                    return Err(Error::InvalidInput(format!(
                        "edge {e:?} misses its center {center}"
                    )));
                }
                let mut hit = vec![0usize; parts.len()];
                for &v in e {
                    if part_of[v] == usize::MAX {
                        return Err(Error::InvalidInput(format!(
                            "edge vertex {v} lies outside the parts"
                        )));
                    }
                    hit[part_of[v]] += 1;
                    if v != center {
                        if seen[v] {
                            return Err(Error::InvalidInput(format!(
                                "vertex {v} used by two star edges"
                            )));
                        }
                        seen[v] = true;
                    }
                }
                if hit.iter().any(|&c| c != 1) {
                    return Err(Error::InvalidInput(format!(
                        "edge {e:?} does not meet every part exactly once"
                    )));
                }
            }
        }
        for p in &parts.parts()[1..] {
            if let Some(&v) = p.iter().find(|&&v| !seen[v]) {
                return Err(Error::InvalidInput(format!("part vertex {v} left uncovered")));
            }
        }
        Ok(())
    }
}

/// Packs vertex-disjoint stars with the demanded sizes.
///
/// Preconditions: the parts are disjoint with `parts.len() == r`, the parts
/// `V_2, ..., V_r` share one size equal to the total demand, `f` names
/// exactly the vertices of `V_1` with every demand positive, and every part
/// vertex has crossing degree at least `eps` times the product of the other
/// parts' sizes.  `alpha` is handed to the matching pipeline as its leftover
/// ceiling.
pub fn embed_stars(
    g: &RGraph,
    parts: &PartTuple,
    f: &BTreeMap<usize, usize>,
    eps: f64,
    alpha: f64,
    seed: u64,
) -> Result<StarAssignment> {
    let r = g.r();
    parts.check_against(g)?;
    if !parts.is_disjoint() {
        return Err(Error::InvalidInput("parts must be disjoint".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    let centers: Vec<usize> = parts.parts()[0].clone();
    let keyed: Vec<usize> = f.keys().copied().collect();
    if keyed != centers {
        return Err(Error::InvalidInput(
            "demand keys must be exactly the first part's vertices".into(),
        ));
    }
    if f.values().any(|&d| d == 0) {
        return Err(Error::InvalidInput("every demand must be positive".into()));
    }
    let total: usize = f.values().sum();
    let class_size = parts.parts().get(1).map(Vec::len).unwrap_or(0);
    if parts.parts()[1..].iter().any(|p| p.len() != class_size) || class_size != total {
        return Err(Error::InvalidInput(format!(
            "parts 2..r must share size {total} (the total demand)"
        )));
    }
    if class_size == 0 {
        return Ok(StarAssignment { centers: Vec::new(), stars: Vec::new() });
    }

    // Crossing-degree hypothesis, per part: each vertex must see an eps
    // fraction of the product of the other parts' sizes.
    let mut part_of = vec![usize::MAX; g.n()];
    for (j, p) in parts.parts().iter().enumerate() {
        for &v in p {
            part_of[v] = j;
        }
    }
    let crossing: Vec<Vec<usize>> = g
        .edges()
        .iter()
        .filter(|e| {
            let mut hit = vec![0usize; r];
            for &v in e.iter() {
                if part_of[v] == usize::MAX {
                    return false;
                }
                hit[part_of[v]] += 1;
            }
            hit.iter().all(|&c| c == 1)
        })
        .cloned()
        .collect();
    let sizes = parts.sizes();
    for (j, p) in parts.parts().iter().enumerate() {
        let others: f64 =
            sizes.iter().enumerate().filter(|&(k, _)| k != j).map(|(_, &s)| s as f64).product();
        for &v in p {
            let d = crossing.iter().filter(|e| e.contains(&v)).count();
            if (d as f64) + 1e-9 < eps * others {
                return Err(Error::HypothesisRejected(format!(
                    "vertex {v} has crossing degree {d}, below eps * {others:.0} = {:.1}",
                    eps * others
                )));
            }
        }
    }

    // Vertex splitting: center v becomes f(v) consecutive clones, then the
    // other parts' vertices are relabeled after the clone block.
    let mut clone_of_center: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut next = 0usize;
    for &c in &centers {
        let block: Vec<usize> = (next..next + f[&c]).collect();
        next += f[&c];
        clone_of_center.insert(c, block);
    }
    let mut new_label: BTreeMap<usize, usize> = BTreeMap::new();
    let mut old_label: Vec<usize> = vec![usize::MAX; next];
    for p in &parts.parts()[1..] {
        for &v in p {
            new_label.insert(v, next + new_label.len());
            old_label.push(v);
        }
    }
    let n_split = next + (r - 1) * class_size;
    let mut split_edges: Vec<Vec<usize>> = Vec::new();
    for e in &crossing {
        let center = *e.iter().find(|&&v| part_of[v] == 0).unwrap();
        let rest: Vec<usize> = e.iter().copied().filter(|&v| v != center).collect();
        for &cl in &clone_of_center[&center] {
            let mut se = vec![cl];
            se.extend(rest.iter().map(|v| new_label[v]));
            split_edges.push(se);
        }
    }
    let split = RGraph::new(r, n_split, split_edges)?;

    // The split graph's own minimum degree sets the pipeline's hypothesis
    // parameter; the honest rejection already happened above.
    let min_deg = (0..n_split).map(|v| split.degree(&[v])).min().unwrap_or(0);
    let fact: f64 = (1..r).map(|k| k as f64).product();
    let eps_split =
        (0.99 * fact * min_deg as f64 / (n_split as f64).powi(r as i32 - 1)).min(1.0);
    if !(eps_split > 0.0) {
        return Err(Error::HypothesisRejected(
            "a split vertex has no crossing edge at all".into(),
        ));
    }
    let pm = perfect_matching(&split, eps_split, alpha, 0.05, 0.95, seed)?;

    // Decode: each matching edge contains exactly one clone.
    let mut stars: Vec<Vec<Vec<usize>>> = vec![Vec::new(); centers.len()];
    let center_index: BTreeMap<usize, usize> =
        centers.iter().copied().enumerate().map(|(i, c)| (c, i)).collect();
    for me in &pm.edges {
        let clones: Vec<usize> = me.iter().copied().filter(|&v| v < next).collect();
        if clones.len() != 1 {
            return Err(Error::Internal(format!(
                "split matching edge {me:?} holds {} clones, expected 1",
                clones.len()
            )));
        }
        let center = centers
            .iter()
            .copied()
            .find(|c| clone_of_center[c].contains(&clones[0]))
            .ok_or_else(|| Error::Internal("clone without a center".into()))?;
        let mut edge: Vec<usize> = me
            .iter()
            .copied()
            .filter(|&v| v >= next)
            .map(|v| old_label[v])
            .collect();
        edge.push(center);
        edge.sort_unstable();
        stars[center_index[&center]].push(edge);
    }
    for star in &mut stars {
        star.sort();
    }
    let out = StarAssignment {
        centers: centers.iter().map(|&c| (c, f[&c])).collect(),
        stars,
    };
    out.verify(g, parts, f)
        .map_err(|e| Error::Internal(format!("star packing failed its own check: {e}")))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn complete_multipartite(r: usize, sizes: &[usize]) -> RGraph {
        let n: usize = sizes.iter().sum();
        let mut bounds = vec![0usize];
        for &s in sizes {
            bounds.push(bounds.last().unwrap() + s);
        }
        let mut edges = Vec::new();
        let mut pick = vec![0usize; r];
        fn rec(
            r: usize,
            j: usize,
            bounds: &[usize],
            pick: &mut Vec<usize>,
            edges: &mut Vec<Vec<usize>>,
        ) {
            if j == r {
                let mut e = pick.clone();
                e.sort_unstable();
                edges.push(e);
                return;
            }
            for v in bounds[j]..bounds[j + 1] {
                pick[j] = v;
                rec(r, j + 1, bounds, pick, edges);
            }
        }
        rec(r, 0, &bounds, &mut pick, &mut edges);
        RGraph::new(r, n, edges).unwrap()
    }

    #[test]
    fn single_center_takes_the_whole_class() {
        // One center with demand 4 over complete 3-partite parts 1/4/4.
        let g = complete_multipartite(3, &[1, 4, 4]);
        let parts = PartTuple::new(vec![
            vec![0],
            (1..5).collect(),
            (5..9).collect(),
        ])
        .unwrap();
        let f: BTreeMap<usize, usize> = [(0usize, 4usize)].into_iter().collect();
        let out = embed_stars(&g, &parts, &f, 0.5, 0.9, 3).unwrap();
        assert_eq!(out.stars.len(), 1);
        assert_eq!(out.stars[0].len(), 4);
        out.verify(&g, &parts, &f).unwrap();
    }

    #[test]
    fn mixed_demands_on_a_bipartite_host() {
        // r = 2: two centers with demands 2 and 1 over a 3-vertex class.
        let g = complete_multipartite(2, &[2, 3]);
        let parts = PartTuple::new(vec![vec![0, 1], vec![2, 3, 4]]).unwrap();
        let f: BTreeMap<usize, usize> = [(0, 2), (1, 1)].into_iter().collect();
        let out = embed_stars(&g, &parts, &f, 0.5, 0.9, 5).unwrap();
        out.verify(&g, &parts, &f).unwrap();
        assert_eq!(out.stars[0].len(), 2);
        assert_eq!(out.stars[1].len(), 1);
    }

    #[test]
    fn demand_total_must_match_class_size() {
        let g = complete_multipartite(3, &[1, 4, 4]);
        let parts = PartTuple::new(vec![
            vec![0],
            (1..5).collect(),
            (5..9).collect(),
        ])
        .unwrap();
        let f: BTreeMap<usize, usize> = [(0usize, 3usize)].into_iter().collect();
        let err = embed_stars(&g, &parts, &f, 0.5, 0.9, 3).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn missing_crossing_degree_is_rejected() {
        // Center 0 has no edge into the classes at all.
        let mut g = complete_multipartite(3, &[2, 2, 2]);
        let edges: Vec<Vec<usize>> =
            g.edges().iter().filter(|e| !e.contains(&0)).cloned().collect();
        g = RGraph::new(3, 6, edges).unwrap();
        let parts =
            PartTuple::new(vec![vec![0, 1], vec![2, 3], vec![4, 5]]).unwrap();
        let f: BTreeMap<usize, usize> = [(0, 1), (1, 1)].into_iter().collect();
        let err = embed_stars(&g, &parts, &f, 0.5, 0.9, 3).unwrap_err();
        assert!(matches!(err, Error::HypothesisRejected(_)));
    }

    #[test]
    fn bigger_random_instance_packs() {
        use crate::rng::rng;
        use rand::RngCore;
        // 6 centers, demands summing to 12, over a dense random 3-partite host.
        let sizes = [6usize, 12, 12];
        let n: usize = sizes.iter().sum();
        let mut chooser = rng(17, 0);
        let mut edges = Vec::new();
        for a in 0..6 {
            for b in 6..18 {
                for c in 18..30 {
                    if chooser.next_u64() % 100 < 85 {
                        edges.push(vec![a, b, c]);
                    }
                }
            }
        }
        let g = RGraph::new(3, n, edges).unwrap();
        let parts = PartTuple::new(vec![
            (0..6).collect(),
            (6..18).collect(),
            (18..30).collect(),
        ])
        .unwrap();
        let f: BTreeMap<usize, usize> =
            [(0, 2), (1, 2), (2, 2), (3, 2), (4, 2), (5, 2)].into_iter().collect();
        let out = embed_stars(&g, &parts, &f, 0.5, 0.9, 11).unwrap();
        out.verify(&g, &parts, &f).unwrap();
    }
}
