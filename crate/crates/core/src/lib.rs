//! Reachability properties of finite semi-automata and nonnegative matrix
//! sets, and generators for the reduction gadgets that make those properties
//! hard.
//!
//! The crate has three layers:
//!
//! * decision procedures in [`analysis`] (completeness, synchronisation,
//!   unambiguity, image bounds, strong connectivity, period), with the
//!   matrix-side translations in [`matrices`] and the code-theoretic
//!   correspondence in [`codes`];
//! * exhaustive power-set oracles in [`oracles`] that certify the decision
//!   procedures and the generated instances at small scale;
//! * instance factories in [`gadgets`] that build the reduction
//!   constructions from digraph inputs ([`digraph`]), each output carrying a
//!   ground-truth label, a witness, and enough metadata to re-certify both.

pub mod analysis;
pub mod codes;
pub mod digraph;
pub mod error;
pub mod gadgets;
pub mod matrices;
pub mod nfa;
pub mod oracles;

pub use error::Error;
pub use nfa::{Nfa, StateSet, Word};
