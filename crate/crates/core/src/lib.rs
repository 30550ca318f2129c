//! removal-lab: finite-scale counterparts of the correspondence between
//! (hyper)graph counting and probability spaces.
//!
//! The crate bundles, at desk scale:
//!
//! * exact motif/copy counting on d-uniform hypergraphs ([`hypergraph`]),
//! * a finite probability engine with factors, conditional expectation and
//!   relative-independence measurement ([`probspace`]),
//! * exact and Monte-Carlo densities of regular events under the universal
//!   embeddings of a graph, hypergraph, or cyclic-group set ([`embedding`]),
//! * an executable uniform-intersection-property constructor over downsets
//!   of factors ([`uip`]),
//! * removal algorithms that certify motif-freeness ([`removal`]),
//! * arithmetic corollary counters and commuting-shift identities
//!   ([`arithmetic`]),
//! * weak-convergence diagnostics ([`limits`]),
//! * and the `removal-lab` command line ([`cli`]).
//!
//! All probability computations default to exact rational arithmetic; every
//! stochastic routine is driven by counter-based seeded streams so results
//! are bit-reproducible for any worker count.

pub mod arithmetic;
pub mod cli;
pub mod embedding;
pub mod error;
pub mod hypergraph;
pub mod limits;
pub mod probspace;
pub mod removal;
pub mod report;
pub mod rng;
pub mod uip;

pub use error::{Error, Result};
