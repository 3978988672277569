//! Workbench for studying emergence on a probabilistic context-sensitive
//! formal language.
//!
//! The crate covers three areas:
//!
//! * the language itself: a PCFG over part-of-speech roles ([`grammar`]), the
//!   type-constraints bipartite graph ([`typegraph`]) and the token-level
//!   corpus built on both ([`corpus`]);
//! * scoring of model outputs and probe answers ([`eval`]);
//! * the percolation model of concept-class learning ([`percolation`]), curve
//!   fitting and collapse analysis ([`analysis`]) and the glue between corpus
//!   statistics and percolation predictions ([`bridge`]).
//!
//! Every stochastic routine takes an explicit seed or RNG; see [`rng`] for how
//! per-item streams are derived from a root seed.

pub mod analysis;
pub mod bridge;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod grammar;
pub mod jsonl;
mod numeric;
pub mod percolation;
pub mod rng;
pub mod typegraph;

/// Schema version written into the header line of every JSONL/CSV file the
/// crate produces.
pub const SCHEMA_VERSION: u32 = 1;
