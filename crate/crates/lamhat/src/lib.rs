//! Core library for a pattern-matching lambda calculus with explicit matching.
//!
//! Terms pair ordinary lambda calculus with algebraic data: tagged products
//! `c(t1, ..., tn)`, abstractions over nested patterns `\p. t`, first-class
//! matching closures `t[p/u]`, and `case` expressions. Evaluation is weak
//! head reduction with four rules (`dB`, `c`, `m`, `e`) that fire at a
//! distance through stacks of matching frames.
//!
//! Modules:
//! - [`syntax`]: terms, patterns, binding, substitution, alpha-equivalence.
//! - [`reduction`]: the reduction relation, the deterministic strategy,
//!   traces, and exhaustive path enumeration.
//! - [`classify`]: normal-form grammars, clash detection, shape reporting.
//! - [`encodings`]: call-by-name, call-by-value, and bang-calculus source
//!   languages, their translations, and simulation certificates.
//! - [`types`]: non-idempotent intersection types, typing contexts,
//!   derivation trees, the derivation checker, and the size measure.
//! - [`synthesis`]: derivation transformers (weighted substitution and
//!   anti-substitution, step transport and expansion) and the fuel-bounded
//!   typability oracle.
//! - [`parse`] / [`pretty`]: concrete syntax.
//! - [`json`]: derivation (de)serialization.
//! - [`gen`]: deterministic random generators used by the test suites.
//! - [`fixtures`]: the worked example terms and derivation.

pub mod classify;
pub mod encodings;
pub mod fixtures;
pub mod gen;
pub mod json;
pub mod parse;
pub mod pretty;
pub mod reduction;
pub mod syntax;
pub mod synthesis;
pub mod types;

pub use syntax::{Branch, ListContext, Pattern, Tag, TagRegistry, Term};
