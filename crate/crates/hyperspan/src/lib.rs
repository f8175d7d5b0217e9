//! Constructive machinery for embedding spanning structures in dense
//! r-uniform hypergraphs whose r-partite holes are small.
//!
//! The crate is organized bottom-up:
//!
//! * [`graph`] — canonical r-uniform hypergraphs, degrees, crossing counts.
//! * [`hole`] — r-partite hole numbers, exact and heuristic, with certificates.
//! * [`tree`] — linear hypertrees and their decompositions (leaf-edges, bare
//!   paths, pendant stars, caterpillars, split sequences).
//! * [`partition`], [`matching`], [`path`] — embedding primitives: random
//!   partitions with degree concentration, crossing matchings, linear paths,
//!   and high-degree vertex filters.
//! * [`absorb`] — templates, absorbers, reachability, absorbing sets, and the
//!   perfect-matching pipeline built on them.
//! * [`span`] — spanning pipelines: star factors, almost-spanning forests,
//!   spanning hypertrees, loose cycle factors, loose Hamilton cycles, and the
//!   rainbow reduction.
//! * [`gen`], [`oracle`], [`experiment`] — instance generators, independent
//!   brute-force oracles, and the experiment harness.
//!
//! All randomized routines take explicit seeds and are deterministic per seed
//! across platforms.

pub mod absorb;
pub mod error;
pub mod graph;
pub mod hole;
pub mod matching;
pub mod partition;
pub mod path;
pub mod rng;
pub mod span;
pub mod tree;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
