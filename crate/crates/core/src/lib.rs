//! Symbolic simulation and verification of systems of recurrence equations.
//!
//! A system defines each variable at time `n` from variables at times
//! `n - d`. Traces are computed by substituting earlier values into the
//! equations and simplifying with term rewriting. On top of traces the crate
//! provides trace matching, bounded equivalence checking between two
//! systems, and bounded property checking with counterexamples.

pub mod bench;
pub mod dsl;
pub mod equiv;
pub mod eval;
pub mod matcher;
pub mod pattern;
pub mod prop;
pub mod report;
pub mod rewrite;
pub mod session;
pub mod sim;
pub mod sort;
pub mod system;
pub mod term;
pub mod wimax;

pub use system::SreSystem;
pub use term::Term;
