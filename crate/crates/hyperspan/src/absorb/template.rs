//! Robust bipartite templates for absorption routing.
//!
//! A template is a bounded-degree bipartite graph on (X' + Y', Z') whose
//! perfect matchings survive deleting the flexible slack of X': for every
//! X'' of size m inside the (1+beta)m left slots, the graph restricted to
//! X'' + Y' against Z' still has a perfect matching. The matching property
//! is efficiently checkable, so construction samples a structured random
//! graph and verifies, retrying with fresh randomness on failure.

use crate::rng::rng;
use crate::{Error, Result};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Degree ceiling for every template vertex.
pub const MAX_DEGREE: usize = 40;
const RETRY_CAP: usize = 5;
const SAMPLES: usize = 50;

/// A verified robust bipartite template. Left vertices `0..x_size` form X',
/// `x_size..x_size + y_size` form Y'; right vertices are `0..z_size`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    pub m: usize,
    pub beta: f64,
    pub x_size: usize,
    pub y_size: usize,
    pub z_size: usize,
    /// Sorted right-neighbor lists, indexed by left vertex.
    pub adj: Vec<Vec<usize>>,
    pub seed: u64,
    /// Number of X'' subsets whose matching was checked at construction.
    pub verified_subsets: usize,
    /// True when every X'' subset was checked, not a sample.
    pub exhaustive: bool,
}

impl Template {
    /// Maximum degree over both sides.
    pub fn max_degree(&self) -> usize {
        let left = self.adj.iter().map(Vec::len).max().unwrap_or(0);
        let mut right = vec![0usize; self.z_size];
        for nbrs in &self.adj {
            for &z in nbrs {
                right[z] += 1;
            }
        }
        left.max(right.into_iter().max().unwrap_or(0))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// True when X'' (indices into X') plus all of Y' perfectly matches Z'.
    pub fn matches_with(&self, x_subset: &[usize]) -> bool {
        let mut left: Vec<&[usize]> = Vec::with_capacity(x_subset.len() + self.y_size);
        for &x in x_subset {
            left.push(&self.adj[x]);
        }
        for y in self.x_size..self.x_size + self.y_size {
            left.push(&self.adj[y]);
        }
        max_bipartite_matching(&left, self.z_size) == self.z_size
    }

    /// Re-run the matching verification: exhaustive over all X'' subsets
    /// when `m <= 6`, otherwise over `samples` seeded draws.
    pub fn verify(&self, samples: usize, seed: u64) -> Result<(usize, bool)> {
        if self.exhaustive_feasible() {
            let mut checked = 0;
            let mut subset: Vec<usize> = (0..self.m).collect();
            loop {
                if !self.matches_with(&subset) {
                    return Err(Error::Internal(format!(
                        "template misses a matching for X'' = {subset:?}"
                    )));
                }
                checked += 1;
                if !next_combination(&mut subset, self.x_size) {
                    return Ok((checked, true));
                }
            }
        }
        let mut r = rng(seed, 0x7465_6d70);
        let mut pool: Vec<usize> = (0..self.x_size).collect();
        for i in 0..samples {
            pool.shuffle(&mut r);
            let mut subset: Vec<usize> = pool[..self.m].to_vec();
            subset.sort_unstable();
            if !self.matches_with(&subset) {
                return Err(Error::Internal(format!(
                    "template misses a matching on sample {i}: X'' = {subset:?}"
                )));
            }
        }
        Ok((samples, false))
    }

    fn exhaustive_feasible(&self) -> bool {
        self.m <= 6
    }
}

/// Build a robust template for the given flexibility `beta` in (0,1).
///
/// Shape: a spine pairs each Y' vertex with its own Z' vertex; the m
/// leftover Z' vertices take their matches from whichever X'' survives, so
/// every X' vertex spreads its edges over those leftover slots widely
/// enough that any m survivors still expand. Construction retries with
/// fresh randomness and fails once the retry cap is hit.
pub fn build_template(m: usize, beta: f64, seed: u64) -> Result<Template> {
    if m == 0 {
        return Err(Error::InvalidInput("template needs m >= 1".into()));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::InvalidInput("template needs beta in (0,1)".into()));
    }
    let x_size = (((1.0 + beta) * m as f64).ceil() as usize).max(m + 1);
    let y_size = 2 * m;
    let z_size = 3 * m;
    let slack = x_size - m;

    // Every X' vertex needs enough spread that deleting `slack` of X' never
    // strands a leftover Z' slot.
    let d = m.min((slack + 2).max(6));
    let z_degree_bound = (x_size * d).div_ceil(m) + 2;
    if d > MAX_DEGREE || z_degree_bound > MAX_DEGREE {
        return Err(Error::Precondition(format!(
            "m = {m} with beta = {beta} cannot respect the degree ceiling \
             {MAX_DEGREE} (x-degree {d}, z-degree bound {z_degree_bound})"
        )));
    }

    let mut last_err = None;
    for attempt in 0..RETRY_CAP {
        let mut r = rng(seed, 0x626c_6421 ^ attempt as u64);
        let mut adj = vec![Vec::new(); x_size + y_size];
        // Spine: y_k pairs with z_k.
        for k in 0..y_size {
            adj[x_size + k] = vec![k];
        }
        // X' spreads over the leftover slots with balanced loads.
        let free: Vec<usize> = (y_size..z_size).collect();
        let mut load = vec![0usize; m];
        let mut ok = true;
        for x in 0..x_size {
            let mut picks: Vec<(usize, u32, usize)> =
                (0..m).map(|i| (load[i], r.gen::<u32>(), i)).collect();
            picks.sort_unstable();
            let mut chosen = Vec::with_capacity(d);
            for &(_, _, i) in &picks[..d] {
                load[i] += 1;
                if load[i] > MAX_DEGREE {
                    ok = false;
                }
                chosen.push(free[i]);
            }
            chosen.sort_unstable();
            adj[x] = chosen;
        }
        if !ok {
            last_err = Some(Error::Internal("degree ceiling overrun".into()));
            continue;
        }
        let mut template = Template {
            m,
            beta,
            x_size,
            y_size,
            z_size,
            adj,
            seed,
            verified_subsets: 0,
            exhaustive: false,
        };
        match template.verify(SAMPLES, seed ^ attempt as u64) {
            Ok((checked, exhaustive)) => {
                template.verified_subsets = checked;
                template.exhaustive = exhaustive;
                debug_assert!(template.max_degree() <= MAX_DEGREE);
                return Ok(template);
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::PipelineFailure {
        stage: "template".into(),
        detail: format!(
            "no verified template after {RETRY_CAP} attempts (m = {m}, beta = {beta}); \
             last failure: {}",
            last_err.map_or_else(|| "none".into(), |e| e.to_string())
        ),
    })
}

/// Maximum bipartite matching by augmenting paths (Kuhn's algorithm).
/// `left[i]` lists the right-neighbors of left vertex i; returns the size.
pub(crate) fn max_bipartite_matching(left: &[&[usize]], rights: usize) -> usize {
    let mut match_of_right = vec![usize::MAX; rights];
    let mut size = 0;
    for (i, _) in left.iter().enumerate() {
        let mut visited = vec![false; rights];
        if augment(left, i, &mut visited, &mut match_of_right) {
            size += 1;
        }
    }
    size
}

fn augment(
    left: &[&[usize]],
    i: usize,
    visited: &mut [bool],
    match_of_right: &mut [usize],
) -> bool {
    for &z in left[i] {
        if visited[z] {
            continue;
        }
        visited[z] = true;
        if match_of_right[z] == usize::MAX
            || augment(left, match_of_right[z], visited, match_of_right)
        {
            match_of_right[z] = i;
            return true;
        }
    }
    false
}

/// Advance `subset` (sorted, values below `n`) to the next combination in
/// lexicographic order; false once exhausted.
fn next_combination(subset: &mut [usize], n: usize) -> bool {
    let k = subset.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if subset[i] < n - (k - i) {
            subset[i] += 1;
            for j in i + 1..k {
                subset[j] = subset[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tiny_template_is_exhaustively_verified() {
        let t = build_template(1, 0.5, 7).unwrap();
        assert_eq!((t.x_size, t.y_size, t.z_size), (2, 2, 3));
        assert!(t.exhaustive);
        assert_eq!(t.verified_subsets, 2);
        assert!(t.max_degree() <= MAX_DEGREE);
    }

    #[test]
    fn medium_template_respects_degree_ceiling() {
        let t = build_template(20, 0.1, 5).unwrap();
        assert_eq!((t.x_size, t.y_size, t.z_size), (22, 40, 60));
        assert!(t.max_degree() <= MAX_DEGREE);
        assert!(!t.exhaustive);
        assert_eq!(t.verified_subsets, 50);
        // Deterministic per seed.
        let t2 = build_template(20, 0.1, 5).unwrap();
        assert_eq!(t, t2);
    }

    #[test]
    fn large_template_passes_sampled_matchings() {
        let t = build_template(50, 0.2, 11).unwrap();
        t.verify(50, 99).unwrap();
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(build_template(0, 0.5, 1).is_err());
        assert!(build_template(3, 0.0, 1).is_err());
        assert!(build_template(3, 1.0, 1).is_err());
    }

    #[test]
    fn matcher_finds_maximum() {
        // A 3x3 graph with a unique perfect matching.
        let rows: Vec<Vec<usize>> = vec![vec![0], vec![0, 1], vec![1, 2]];
        let left: Vec<&[usize]> = rows.iter().map(|r| r.as_slice()).collect();
        assert_eq!(max_bipartite_matching(&left, 3), 3);
        let rows: Vec<Vec<usize>> = vec![vec![0], vec![0], vec![1, 2]];
        let left: Vec<&[usize]> = rows.iter().map(|r| r.as_slice()).collect();
        assert_eq!(max_bipartite_matching(&left, 3), 2);
    }
}
