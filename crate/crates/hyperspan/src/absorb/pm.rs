//! Perfect matchings through absorption.
//!
//! The pipeline: check the degree hypothesis, consult the hole heuristic,
//! split the vertices into a random balanced partition, assemble an
//! absorbing set, run the maximal crossing matching on the rest, and
//! absorb the bounded balanced leftover. Small instances and pipeline
//! failures fall to a bounded exhaustive search, which is definitive when
//! it completes: it reports no-matching only after exhausting the tree.

use super::assemble::{assemble_absorbing_set, AbsorberSource};
use super::FactorPattern;
use crate::graph::{PartTuple, RGraph};
use crate::hole::{hole_heuristic, HeuristicOptions};
use crate::matching::find_matching;
use crate::partition::random_partition;
use crate::rng::mix;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Instances this small go straight to the exhaustive search.
pub const SMALL_N: usize = 15;
/// Node budget for the small-instance search (definitive at that scale).
const SMALL_BUDGET: u64 = 50_000_000;
/// Node budget for the fallback on pipeline failures.
const FALLBACK_BUDGET: u64 = 20_000_000;
/// The hole heuristic only speaks for hosts this small.
const HOLE_CONSULT_MAX_N: usize = 64;

/// A verified perfect matching: disjoint edges covering every vertex.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerfectMatching {
    pub edges: Vec<Vec<usize>>,
}

impl PerfectMatching {
    /// Check the full contract against the host: every edge present,
    /// pairwise disjoint, union covering all of V, count n/r.
    pub fn verify(&self, g: &RGraph) -> Result<()> {
        if self.edges.len() * g.r() != g.n() {
            return Err(Error::InvalidInput(format!(
                "{} edges cannot cover {} vertices",
                self.edges.len(),
                g.n()
            )));
        }
        let mut seen = vec![false; g.n()];
        for e in &self.edges {
            if !g.is_edge(e) {
                return Err(Error::InvalidInput(format!("{e:?} is not a host edge")));
            }
            for &v in e {
                if seen[v] {
                    return Err(Error::InvalidInput(format!("vertex {v} covered twice")));
                }
                seen[v] = true;
            }
        }
        Ok(())
    }
}

/// Find a perfect matching of the host. `eps` is the degree-hypothesis
/// level, `alpha` the hole-number ceiling (a certified hole of size at
/// least `alpha * n` rejects the instance), `gamma` the absorption
/// capacity, and `eta` the absorbing-set size allowance. Hosts with at
/// most 15 vertices skip straight to the exhaustive search; pipeline
/// failures on larger hosts fall back to it under a node budget.
pub fn perfect_matching(
    g: &RGraph,
    eps: f64,
    alpha: f64,
    gamma: f64,
    eta: f64,
    seed: u64,
) -> Result<PerfectMatching> {
    let r = g.r();
    let n = g.n();
    if n % r != 0 {
        return Err(Error::Precondition(format!(
            "a perfect matching needs {r} to divide {n}"
        )));
    }
    if n == 0 {
        return Ok(PerfectMatching { edges: Vec::new() });
    }
    if n <= SMALL_N {
        return match exhaustive_pm(g, SMALL_BUDGET)? {
            Some(edges) => finish(g, edges),
            None => Err(Error::PipelineFailure {
                stage: "exhaustive".into(),
                detail: "the graph has no perfect matching".into(),
            }),
        };
    }

    // Degree hypothesis: every vertex needs eps * n^(r-1) ordered
    // placements, i.e. (r-1)! times its edge degree.
    let min_deg = (0..n).map(|v| g.degree(&[v])).min().unwrap_or(0);
    let fact: f64 = (1..r).map(|i| i as f64).product();
    let need = eps * (n as f64).powi(r as i32 - 1);
    if (min_deg as f64) * fact < need {
        return Err(Error::HypothesisRejected(format!(
            "minimum degree {min_deg} gives {:.1} ordered placements per vertex, \
             below eps * n^(r-1) = {need:.1}",
            min_deg as f64 * fact
        )));
    }

    // Hole consult: a certified large hole defeats the theorem's bound.
    if n <= HOLE_CONSULT_MAX_N {
        let bound = hole_heuristic(g, None, &HeuristicOptions::default(), mix(seed, 0x686f_6c65))?;
        if bound.lower as f64 >= alpha * n as f64 {
            return Err(Error::Precondition(format!(
                "certified hole of size {} defeats the ceiling alpha * n = {:.1}",
                bound.lower,
                alpha * n as f64
            )));
        }
    }

    match run_pipeline(g, gamma, eta, seed) {
        Ok(pm) => Ok(pm),
        Err(e @ (Error::PipelineFailure { .. } | Error::Precondition(_))) => {
            let cause = match &e {
                Error::PipelineFailure { stage, detail } => format!("stage {stage}: {detail}"),
                other => other.to_string(),
            };
            match exhaustive_pm(g, FALLBACK_BUDGET) {
                Ok(Some(edges)) => finish(g, edges),
                Ok(None) => Err(Error::PipelineFailure {
                    stage: "exhaustive".into(),
                    detail: format!(
                        "no perfect matching exists; the pipeline had already failed ({cause})"
                    ),
                }),
                Err(Error::GuardExceeded(msg)) => Err(Error::GuardExceeded(format!(
                    "{msg}; the pipeline failed first ({cause})"
                ))),
                Err(other) => Err(other),
            }
        }
        Err(e) => Err(e),
    }
}

/// The absorption pipeline for hosts that passed the hypotheses.
fn run_pipeline(g: &RGraph, gamma: f64, eta: f64, seed: u64) -> Result<PerfectMatching> {
    let r = g.r();
    let n = g.n();
    let plan = random_partition(n, &vec![n / r; r], mix(seed, 0x7061_7254))?;
    let all: Vec<usize> = (0..r).collect();
    let parts = plan.tuple(&all)?;
    let pat = FactorPattern::edge(r)?;
    let set = assemble_absorbing_set(
        g,
        &parts,
        &pat,
        gamma,
        eta,
        AbsorberSource::default(),
        mix(seed, 0x6162_7365),
    )?;

    // Maximal crossing matching on the remainder, then the balanced
    // leftover goes to the absorbing set.
    let rem: Vec<Vec<usize>> = parts
        .parts()
        .iter()
        .map(|p| {
            p.iter()
                .copied()
                .filter(|v| set.vertices.binary_search(v).is_err())
                .collect()
        })
        .collect();
    let rem_tuple = PartTuple::new(rem)?;
    let found = find_matching(g, &rem_tuple, None, 0)?;
    let mut matched = vec![false; n];
    for v in found.matching.covered() {
        matched[v] = true;
    }
    let leftover_parts: Vec<Vec<usize>> = rem_tuple
        .parts()
        .iter()
        .map(|p| p.iter().copied().filter(|&v| !matched[v]).collect())
        .collect();
    let worst = leftover_parts.iter().map(Vec::len).max().unwrap_or(0);
    if worst > set.capacity {
        let hole_tuple = PartTuple::new(leftover_parts.clone())?;
        let crossings = g.crossing_count(&hole_tuple)?;
        let shape: Vec<usize> = leftover_parts.iter().map(Vec::len).collect();
        let hole_note = if crossings == 0 {
            format!("the uncovered tuple of sizes {shape:?} is crossing-free (a partite hole)")
        } else {
            format!("the uncovered tuple of sizes {shape:?} still has {crossings} crossings")
        };
        return Err(Error::PipelineFailure {
            stage: "greedy-matching".into(),
            detail: format!(
                "matching left {worst} vertices in some part, over capacity {}; {hole_note}",
                set.capacity
            ),
        });
    }

    let leftover: Vec<usize> = leftover_parts.into_iter().flatten().collect();
    let absorbed = set.absorb(g, &leftover)?;
    let mut edges = found.matching.edges();
    edges.extend(absorbed.to_edges());
    finish(g, edges)
}

/// Canonicalize and verify a finished matching.
fn finish(g: &RGraph, mut edges: Vec<Vec<usize>>) -> Result<PerfectMatching> {
    for e in &mut edges {
        e.sort_unstable();
    }
    edges.sort();
    let pm = PerfectMatching { edges };
    pm.verify(g)
        .map_err(|e| Error::Internal(format!("constructed matching failed verification: {e}")))?;
    Ok(pm)
}

/// Bounded depth-first matching search, branching on the lowest uncovered
/// vertex. Completing the tree without a matching is a definitive no.
pub(crate) fn exhaustive_pm(g: &RGraph, budget: u64) -> Result<Option<Vec<Vec<usize>>>> {
    if g.n() % g.r() != 0 {
        return Ok(None);
    }
    let mut used = vec![false; g.n()];
    let mut out = Vec::with_capacity(g.n() / g.r());
    let mut nodes = 0u64;
    if pm_dfs(g, &mut used, &mut out, budget, &mut nodes)? {
        Ok(Some(out))
    } else {
        Ok(None)
    }
}

fn pm_dfs(
    g: &RGraph,
    used: &mut [bool],
    out: &mut Vec<Vec<usize>>,
    budget: u64,
    nodes: &mut u64,
) -> Result<bool> {
    *nodes += 1;
    if *nodes > budget {
        return Err(Error::GuardExceeded(format!(
            "exhaustive matching search exceeded {budget} nodes"
        )));
    }
    let v = match (0..g.n()).find(|&v| !used[v]) {
        Some(v) => v,
        None => return Ok(true),
    };
    for e in g.incident_edges(v) {
        if e.iter().any(|&x| used[x]) {
            continue;
        }
        for &x in e {
            used[x] = true;
        }
        out.push(e.clone());
        if pm_dfs(g, used, out, budget, nodes)? {
            return Ok(true);
        }
        out.pop();
        for &x in e {
            used[x] = false;
        }
    }
    Ok(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_3_graph_matches_perfectly() {
        let g = RGraph::complete(3, 12).unwrap();
        let pm = perfect_matching(&g, 0.3, 0.9, 0.02, 0.1, 1).unwrap();
        assert_eq!(pm.edges.len(), 4);
        pm.verify(&g).unwrap();
    }

    #[test]
    fn two_cliques_with_cross_edges() {
        // K8 + K8 in 2-uniform form, plus 20 seeded cross pairs.
        let mut edges = Vec::new();
        for a in 0..8 {
            for b in a + 1..8 {
                edges.push(vec![a, b]);
                edges.push(vec![a + 8, b + 8]);
            }
        }
        let mut added = 0;
        let mut ctr = 0u64;
        while added < 20 {
            let a = (mix(2, ctr) as usize) % 8;
            let b = 8 + (mix(2, ctr + 1) as usize) % 8;
            ctr += 2;
            let e = vec![a, b];
            if !edges.contains(&e) {
                edges.push(e);
                added += 1;
            }
        }
        let g = RGraph::new(2, 16, edges).unwrap();
        let pm = perfect_matching(&g, 0.3, 0.9, 0.02, 0.1, 2).unwrap();
        assert_eq!(pm.edges.len(), 8);
        pm.verify(&g).unwrap();
    }

    #[test]
    fn indivisible_vertex_count_is_rejected() {
        let g = RGraph::complete(3, 10).unwrap();
        let err = perfect_matching(&g, 0.3, 0.9, 0.02, 0.1, 1).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)), "got {err:?}");
    }

    #[test]
    fn missing_matching_is_definitive() {
        // A star: every edge shares vertex 0, so no two disjoint edges.
        let g = RGraph::new(2, 4, vec![vec![0, 1], vec![0, 2], vec![0, 3]]).unwrap();
        let err = perfect_matching(&g, 0.3, 0.9, 0.02, 0.1, 1).unwrap_err();
        match err {
            Error::PipelineFailure { stage, .. } => assert_eq!(stage, "exhaustive"),
            other => panic!("expected a definitive miss, got {other:?}"),
        }
    }

    #[test]
    fn pipeline_route_runs_on_large_hosts() {
        let g = RGraph::complete(3, 45).unwrap();
        let pm = perfect_matching(&g, 0.3, 0.9, 0.05, 0.95, 4).unwrap();
        assert_eq!(pm.edges.len(), 15);
        pm.verify(&g).unwrap();

        // Determinism: the same seed reproduces the same matching.
        let again = perfect_matching(&g, 0.3, 0.9, 0.05, 0.95, 4).unwrap();
        assert_eq!(pm, again);
    }

    #[test]
    fn sparse_host_fails_the_hypothesis() {
        // A single edge on 18 vertices: minimum degree zero.
        let g = RGraph::new(3, 18, vec![vec![0, 1, 2]]).unwrap();
        let err = perfect_matching(&g, 0.3, 0.9, 0.02, 0.1, 1).unwrap_err();
        assert!(matches!(err, Error::HypothesisRejected(_)), "got {err:?}");
    }
}
