//! Reversible true-concurrency process algebra: terms, rewriting to basic
//! form, forward/reverse semantics, FR equivalence checking, recursion and
//! abstraction.

pub mod cli;
pub mod equivalence;
pub mod gen;
pub mod recursion;
pub mod rewriter;
pub mod semantics;
pub mod suite;
pub mod syntax;
pub mod term;
