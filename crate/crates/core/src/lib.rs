//! Reference kernel for a polymorphic lambda calculus in which isomorphic
//! types are treated as equal.
//!
//! The crate provides, in dependency order:
//!
//! - [`syntax`]: type and term ASTs, binding, substitution and
//!   alpha-canonicalization;
//! - [`iso`]: prime-factor canonical forms for types, the isomorphism
//!   decision procedure, and the residual operations the type checker
//!   uses to absorb isomorphism into syntax-directed rules;
//! - [`typing`]: Church-style type synthesis and checking;
//! - [`rewrite`]: the structural-equivalence relation on terms, reduction
//!   modulo that equivalence, and normalization strategies;
//! - [`measures`]: the pair-count and size measures that certify
//!   termination, plus longest-reduction search;
//! - [`oracle`]: independent, axiom-closure based ground truth for the
//!   isomorphism relation, a bounded type enumerator, and the pair-shape
//!   classifier for equivalence classes of pairs;
//! - [`generate`]: a seeded generator of well-typed terms;
//! - [`parse`] / [`print`]: concrete syntax;
//! - [`trace`]: JSON and DOT serialization of reduction traces.

pub mod generate;
pub mod iso;
pub mod measures;
pub mod oracle;
pub mod parse;
pub mod print;
pub mod rewrite;
pub mod syntax;
pub mod trace;
pub mod typing;

pub use syntax::{Context, Term, TermVar, Type, TypeVar};
