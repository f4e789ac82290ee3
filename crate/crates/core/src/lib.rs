//! Group-invariant maximum-entropy log-linear models on finite lattices.
//!
//! The library fits exponential-family models whose sufficient statistics
//! are monomials in polynomial invariants of a finite group acting on a
//! lattice, and builds nested model paths by greedy or stepwise term
//! selection. The runnable examples are the quickest way in:
//!
//! | example | shows |
//! |---|---|
//! | `orbit_enumeration` | orbits of the 2x2 microimage group and the closed-form counts |
//! | `invariant_generators` | invariance, relation and orbit separation of the generators |
//! | `monomial_order` | graded lexicographic order, ranks and candidate shells |
//! | `fit_maxent` | one maximum-entropy fit for a fixed list of terms |
//! | `greedy_invariant` | greedy and stepwise paths recovering an invariant target |
//! | `mixed_pool` | invariant, ordinary and mixed term pools on a general target |
//! | `image_statistics` | PGM images to microimage frequencies to a fitted path |
//!
//! ```text
//! cargo run --release --example greedy_invariant
//! ```

pub mod action;
pub mod builder;
pub mod cli;
pub mod distribution;
pub mod features;
pub mod generators;
pub mod group;
pub mod imagery;
pub mod lattice;
pub mod maxent;
pub mod order;
pub mod poly;
pub mod rational;
pub mod report;
pub mod span;
