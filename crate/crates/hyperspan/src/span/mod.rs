//! Spanning pipelines: embeddings of hyperforests and hypertrees into
//! dense hosts, star packings, transversal loose-cycle factors, loose
//! Hamilton cycles, and the rainbow reduction.
//!
//! The central artifact is the [`Embedding`]: an injective vertex map
//! carrying every guest edge onto a host edge, optionally respecting a
//! two-sided vertex split (guest side B into host side Y, the rest into X).
//! [`verify_embedding`] is the single trusted validator; every pipeline
//! output must pass it, and violations are reported as return values, not
//! errors. Pipelines return an [`EmbedRun`] bundling the embedding with a
//! human-readable stage log and the reservoir consumption ledger.

pub mod almost;
pub mod cycle;
pub mod stars;

pub use almost::{embed_almost_spanning, LedgerEntry, Reservoir};
pub use cycle::{
    exhaustive_loose_hamilton, loose_cycle_factor, loose_hamilton, verify_loose_cycle, LooseCycle,
};
pub use stars::{embed_stars, StarAssignment};

use serde::{Deserialize, Serialize};

use crate::graph::RGraph;

/// A two-sided placement constraint: guest vertices listed in `guest_b`
/// must map into `host_y`; all other guest vertices must map into the
/// complement of `host_y`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideConstraints {
    pub guest_b: Vec<usize>,
    pub host_y: Vec<usize>,
}

impl SideConstraints {
    /// Membership masks (guest-side B, host-side Y) sized to the graphs.
    pub(crate) fn masks(&self, guest_n: usize, host_n: usize) -> (Vec<bool>, Vec<bool>) {
        let mut b = vec![false; guest_n];
        for &v in &self.guest_b {
            if v < guest_n {
                b[v] = true;
            }
        }
        let mut y = vec![false; host_n];
        for &v in &self.host_y {
            if v < host_n {
                y[v] = true;
            }
        }
        (b, y)
    }
}

/// An injective vertex map from a guest onto a host, edge-preserving by
/// contract and checked by [`verify_embedding`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Embedding {
    pub guest: RGraph,
    pub host: RGraph,
    /// `map[v]` is the host image of guest vertex `v`.
    pub map: Vec<usize>,
    pub sides: Option<SideConstraints>,
}

impl Embedding {
    /// Host image of a guest edge, sorted.
    pub fn image(&self, guest_edge: &[usize]) -> Vec<usize> {
        let mut img: Vec<usize> = guest_edge.iter().map(|&v| self.map[v]).collect();
        img.sort_unstable();
        img
    }
}

/// Verdict of the embedding validator. `spanning` records whether the map
/// covers every host vertex; `ok` means no violation was found.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub ok: bool,
    pub spanning: bool,
    pub violations: Vec<String>,
}

/// Checks injectivity, per-edge host membership (recounted from scratch),
/// the spanning flag, and side constraints when present. Violations are
/// return values; the function itself never fails.
pub fn verify_embedding(e: &Embedding) -> EmbeddingReport {
    let mut violations = Vec::new();
    let gn = e.guest.n();
    let hn = e.host.n();
    if e.map.len() != gn {
        violations.push(format!("map covers {} of {gn} guest vertices", e.map.len()));
        return EmbeddingReport { ok: false, spanning: false, violations };
    }
    let mut hit = vec![false; hn];
    for (v, &img) in e.map.iter().enumerate() {
        if img >= hn {
            violations.push(format!("guest vertex {v} maps to {img}, outside the host"));
        } else if hit[img] {
            violations.push(format!("host vertex {img} is the image of two guest vertices"));
        } else {
            hit[img] = true;
        }
    }
    if violations.is_empty() {
        for edge in e.guest.edges() {
            let img = e.image(edge);
            if !e.host.is_edge(&img) {
                violations.push(format!("guest edge {edge:?} maps to non-edge {img:?}"));
            }
        }
    }
    if let Some(sides) = &e.sides {
        let (b, y) = sides.masks(gn, hn);
        for (v, &img) in e.map.iter().enumerate() {
            if img < hn && b[v] != y[img] {
                let (want, got) = if b[v] { ("Y", "X") } else { ("X", "Y") };
                violations.push(format!(
                    "guest vertex {v} belongs to side {want} but lands on the {got} side at {img}"
                ));
            }
        }
    }
    let spanning = gn == hn && violations.is_empty();
    EmbeddingReport { ok: violations.is_empty(), spanning, violations }
}

/// A pipeline outcome: the embedding plus a stage log and the reservoir
/// consumption ledger (empty when the pipeline used no reservoir).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbedRun {
    pub embedding: Embedding,
    pub stages: Vec<String>,
    pub ledger: Vec<LedgerEntry>,
}

/// Renders a partial vertex map for stage failure diagnostics.
pub(crate) fn partial_map_note(map: &[Option<usize>]) -> String {
    let placed: Vec<String> = map
        .iter()
        .enumerate()
        .filter_map(|(v, img)| img.map(|i| format!("{v}->{i}")))
        .collect();
    let total = map.len();
    format!("partial embedding ({} of {total} vertices): [{}]", placed.len(), placed.join(", "))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_embedding_passes() {
        let g = RGraph::new(3, 6, vec![vec![0, 1, 2], vec![2, 3, 4], vec![0, 4, 5]]).unwrap();
        let e = Embedding { guest: g.clone(), host: g, map: (0..6).collect(), sides: None };
        let rep = verify_embedding(&e);
        assert!(rep.ok, "{:?}", rep.violations);
        assert!(rep.spanning);
    }

    #[test]
    fn collisions_and_missing_edges_are_violations() {
        let guest = RGraph::new(2, 3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let host = RGraph::new(2, 4, vec![vec![0, 1], vec![1, 2], vec![2, 3]]).unwrap();

        // Two guest vertices on one host vertex.
        let e = Embedding {
            guest: guest.clone(),
            host: host.clone(),
            map: vec![0, 1, 1],
            sides: None,
        };
        let rep = verify_embedding(&e);
        assert!(!rep.ok);
        assert!(rep.violations.iter().any(|v| v.contains("two guest vertices")));

        // Injective but an edge image is absent: {0,2} is not a host edge.
        let e = Embedding { guest, host, map: vec![0, 2, 1], sides: None };
        let rep = verify_embedding(&e);
        assert!(!rep.ok);
        assert!(rep.violations.iter().any(|v| v.contains("non-edge")));
        assert!(!rep.spanning);
    }

    #[test]
    fn side_constraints_are_enforced() {
        let guest = RGraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let host = RGraph::new(2, 4, vec![vec![0, 2], vec![0, 3], vec![1, 2]]).unwrap();
        let sides = SideConstraints { guest_b: vec![1], host_y: vec![2, 3] };

        let good = Embedding {
            guest: guest.clone(),
            host: host.clone(),
            map: vec![0, 2],
            sides: Some(sides.clone()),
        };
        assert!(verify_embedding(&good).ok);

        // Vertex 1 (side B) landing on host 0 (side X) violates the split.
        let bad = Embedding { guest, host, map: vec![2, 0], sides: Some(sides) };
        let rep = verify_embedding(&bad);
        assert!(!rep.ok);
        assert!(rep.violations.iter().any(|v| v.contains("side")));
    }

    #[test]
    fn non_spanning_pass_is_reported() {
        let guest = RGraph::new(2, 2, vec![vec![0, 1]]).unwrap();
        let host = RGraph::complete(2, 5).unwrap();
        let e = Embedding { guest, host, map: vec![3, 1], sides: None };
        let rep = verify_embedding(&e);
        assert!(rep.ok);
        assert!(!rep.spanning);
    }
}
