//! Context-free expressions: regular expressions extended with a least
//! fixed point operator `mu`, together with machinery for deciding whether
//! such an expression is contained in a regular one and for converting
//! parse trees between the two worlds.
//!
//! Module map:
//!
//! * [`regex`]: plain regular expressions, Brzozowski derivatives,
//!   canonical forms, descendant sets, matching and word parsing.
//! * [`cfe`]: the expression language with `mu`, well-formedness,
//!   unfolding, word enumeration and guardedness.
//! * [`trees`]: parse trees, the two typing relations, flattening and
//!   tree enumeration.
//! * [`coercion`]: a tiny pattern-matching lambda calculus in which tree
//!   conversions are expressed, with an interpreter.
//! * [`reach`]: the reachability fixpoint that decides containment of a
//!   context-free expression in a regular one.
//! * [`coerce`]: synthesis of coercion terms (upcasts, downcasts, and the
//!   predictive parser built from them).
//! * [`syntax`]: concrete grammar for both expression languages.

pub mod cfe;
pub mod coerce;
pub mod coercion;
pub mod reach;
pub mod regex;
pub mod syntax;
pub mod trees;
