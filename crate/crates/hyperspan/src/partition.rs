//! Seeded vertex partitions and degree concentration checks.
//!
//! `random_partition` deals the vertex set into parts of prescribed sizes
//! that must exhaust it exactly. `check_degree_concentration` then certifies
//! that every vertex keeps, toward every tuple of parts with repetitions
//! allowed, at least a `factor` fraction of the directed degree promised by
//! the minimum-degree hypothesis. Degrees here count ordered placements, so
//! an edge through `v` contributes up to `(r-1)!` per tuple.

use crate::graph::{PartTuple, RGraph};
use crate::rng::rng;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

/// A seeded partition of the vertex set into parts of prescribed sizes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionPlan {
    pub sizes: Vec<usize>,
    pub seed: u64,
    /// Sorted, pairwise disjoint parts covering `0..n`.
    pub parts: Vec<Vec<usize>>,
}

impl PartitionPlan {
    /// Bundle the parts at `picks` (repeats allowed) into a tuple for
    /// crossing-count queries.
    pub fn tuple(&self, picks: &[usize]) -> Result<PartTuple> {
        let mut sets = Vec::with_capacity(picks.len());
        for &i in picks {
            let part = self
                .parts
                .get(i)
                .ok_or_else(|| Error::InvalidInput(format!("no part {i} in plan")))?;
            sets.push(part.clone());
        }
        PartTuple::new(sets)
    }

    /// Number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// True when the plan has no parts.
    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }
}

/// Partition `0..n` uniformly at random into parts of the given sizes.
///
/// The sizes must be positive and sum to exactly `n`; callers that want a
/// reserve pool ask for it as an explicit trailing part.
pub fn random_partition(n: usize, sizes: &[usize], seed: u64) -> Result<PartitionPlan> {
    if sizes.is_empty() {
        return Err(Error::InvalidInput("need at least one part size".into()));
    }
    if sizes.iter().any(|&s| s == 0) {
        return Err(Error::InvalidInput("part sizes must be positive".into()));
    }
    let total: usize = sizes.iter().sum();
    if total != n {
        return Err(Error::InvalidInput(format!(
            "part sizes sum to {total}, expected the vertex count {n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng(seed, 0x7061_7274));
    let mut parts = Vec::with_capacity(sizes.len());
    let mut at = 0;
    for &s in sizes {
        let mut part = order[at..at + s].to_vec();
        part.sort_unstable();
        parts.push(part);
        at += s;
    }
    Ok(PartitionPlan {
        sizes: sizes.to_vec(),
        seed,
        parts,
    })
}

/// One measured vertex/tuple pair. `signature` lists part indices, in
/// order, with repetitions; `ratio` is the placement count relative to
/// `eps` times the tuple's size product, so it fails when below `factor`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationRecord {
    pub vertex: usize,
    pub signature: Vec<usize>,
    pub placements: u64,
    pub threshold: f64,
    pub ratio: f64,
}

/// Outcome of a concentration sweep over all part tuples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub ok: bool,
    pub eps: f64,
    pub factor: f64,
    /// Minimum number of edges through a single vertex.
    pub min_degree_edges: u64,
    /// The same minimum counted as ordered placements: `(r-1)!` per edge.
    pub min_degree_placements: u64,
    /// Record with the smallest ratio seen, if any tuple was measured.
    pub worst: Option<ConcentrationRecord>,
    /// Every record whose ratio fell below `factor`.
    pub failures: Vec<ConcentrationRecord>,
}

/// Check that every vertex sees every `(r-1)`-tuple of parts, repetitions
/// allowed, with at least `factor * eps * prod |Y_i|` ordered placements.
///
/// The hypothesis is that every vertex has at least `eps * n^(r-1)` ordered
/// placements overall, that is `eps * n^(r-1) / (r-1)!` edges. A host below
/// that floor is rejected outright rather than reported as a concentration
/// failure, since the promise being tested never applied to it.
pub fn check_degree_concentration(
    g: &RGraph,
    plan: &PartitionPlan,
    eps: f64,
    factor: f64,
) -> Result<ConcentrationReport> {
    if !eps.is_finite() || eps <= 0.0 {
        return Err(Error::InvalidInput("eps must be positive".into()));
    }
    if !factor.is_finite() || factor <= 0.0 {
        return Err(Error::InvalidInput("factor must be positive".into()));
    }
    if plan.is_empty() {
        return Err(Error::InvalidInput("plan has no parts".into()));
    }
    for part in &plan.parts {
        PartTuple::new(vec![part.clone()])?.check_labels(g.n())?;
    }

    let r = g.r();
    let n = g.n();
    let fact: u64 = (1..r as u64).product();
    let mut min_edges = u64::MAX;
    let mut min_vertex = 0;
    for v in 0..n {
        let d = g.degree(&[v]) as u64;
        if d < min_edges {
            min_edges = d;
            min_vertex = v;
        }
    }
    let floor = eps * (n as f64).powi(r as i32 - 1);
    if ((min_edges * fact) as f64) < floor {
        return Err(Error::HypothesisRejected(format!(
            "vertex {min_vertex} has {min_edges} edges ({} placements), \
             below the floor of eps * n^(r-1) = {floor:.2}",
            min_edges * fact
        )));
    }

    let t = plan.len();
    let mut report = ConcentrationReport {
        ok: true,
        eps,
        factor,
        min_degree_edges: min_edges,
        min_degree_placements: min_edges * fact,
        worst: None,
        failures: Vec::new(),
    };

    // Odometer over all t^(r-1) signatures with repetition.
    let mut signature = vec![0usize; r - 1];
    loop {
        let sets: Vec<Vec<usize>> = signature.iter().map(|&j| plan.parts[j].clone()).collect();
        let product: f64 = sets.iter().map(|s| s.len() as f64).product();
        let scale = eps * product;
        for v in 0..n {
            let placements = g.directed_degree(v, &sets)?;
            let ratio = if scale > 0.0 {
                placements as f64 / scale
            } else {
                f64::INFINITY
            };
            let record = ConcentrationRecord {
                vertex: v,
                signature: signature.clone(),
                placements,
                threshold: factor * scale,
                ratio,
            };
            if report.worst.as_ref().is_none_or(|w| ratio < w.ratio) {
                report.worst = Some(record.clone());
            }
            if ratio < factor {
                report.ok = false;
                report.failures.push(record);
            }
        }
        // Advance the odometer; done when every digit wraps.
        let mut pos = r - 1;
        loop {
            if pos == 0 {
                return Ok(report);
            }
            pos -= 1;
            signature[pos] += 1;
            if signature[pos] < t {
                break;
            }
            signature[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_is_deterministic_and_disjoint() {
        let a = random_partition(20, &[5, 5, 10], 9).unwrap();
        let b = random_partition(20, &[5, 5, 10], 9).unwrap();
        assert_eq!(a, b);
        let c = random_partition(20, &[5, 5, 10], 10).unwrap();
        assert_ne!(a.parts, c.parts);

        assert_eq!(a.sizes, vec![5, 5, 10]);
        let mut seen = vec![false; 20];
        for (part, &want) in a.parts.iter().zip(&a.sizes) {
            assert_eq!(part.len(), want);
            assert!(part.windows(2).all(|w| w[0] < w[1]));
            for &v in part {
                assert!(!seen[v], "vertex {v} dealt twice");
                seen[v] = true;
            }
        }
        assert!(seen.iter().all(|&s| s), "every vertex is dealt");
    }

    #[test]
    fn partition_rejects_bad_sizes() {
        assert!(random_partition(10, &[6, 5], 1).is_err());
        assert!(random_partition(10, &[6, 3], 1).is_err());
        assert!(random_partition(10, &[10, 0], 1).is_err());
        assert!(random_partition(10, &[], 1).is_err());
    }

    #[test]
    fn complete_host_concentrates() {
        let g = RGraph::complete(3, 12).unwrap();
        let plan = random_partition(12, &[4, 4, 4], 3).unwrap();
        let rep = check_degree_concentration(&g, &plan, 0.5, 0.5).unwrap();
        assert!(rep.ok, "failures: {:?}", rep.failures);
        assert_eq!(rep.min_degree_edges, 55);
        assert_eq!(rep.min_degree_placements, 110);
        // Worst case: v inside the doubled part, 3 * 2 placements against
        // an expectation of eps * 16.
        let worst = rep.worst.unwrap();
        assert!((worst.ratio - 0.75).abs() < 1e-9, "ratio {}", worst.ratio);
        assert_eq!(worst.signature[0], worst.signature[1]);
        assert!(plan.parts[worst.signature[0]].contains(&worst.vertex));
    }

    #[test]
    fn sparse_host_is_rejected_up_front() {
        let g = RGraph::new(3, 6, vec![vec![0, 1, 2]]).unwrap();
        let plan = random_partition(6, &[3, 3], 1).unwrap();
        match check_degree_concentration(&g, &plan, 0.1, 0.5) {
            Err(Error::HypothesisRejected(_)) => {}
            other => panic!("expected hypothesis rejection, got {other:?}"),
        }
    }

    #[test]
    fn starved_tuple_is_reported_not_fatal() {
        // Complete bipartite pair graph: degrees meet the floor, yet no
        // placements land inside a single side.
        let mut edges = Vec::new();
        for a in 0..4 {
            for b in 4..8 {
                edges.push(vec![a, b]);
            }
        }
        let g = RGraph::new(2, 8, edges).unwrap();
        let plan = PartitionPlan {
            sizes: vec![4, 4],
            seed: 0,
            parts: vec![vec![0, 1, 2, 3], vec![4, 5, 6, 7]],
        };
        let rep = check_degree_concentration(&g, &plan, 0.4, 0.5).unwrap();
        assert!(!rep.ok);
        assert_eq!(rep.worst.as_ref().unwrap().ratio, 0.0);
        assert!(rep
            .failures
            .iter()
            .any(|f| f.vertex == 0 && f.signature == vec![0] && f.placements == 0));
        // Cross tuples still pass: 4 placements against 0.5 * 0.4 * 4.
        assert!(rep
            .failures
            .iter()
            .all(|f| plan.parts[f.signature[0]].contains(&f.vertex)));
    }

    #[test]
    fn plan_tuple_duplicates_parts_on_demand() {
        let plan = random_partition(9, &[3, 3, 3], 7).unwrap();
        let tuple = plan.tuple(&[1, 1, 2]).unwrap();
        assert_eq!(tuple.parts()[0], tuple.parts()[1]);
        assert!(plan.tuple(&[3]).is_err());
    }
}
