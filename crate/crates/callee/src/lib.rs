//! An object-oriented core language where an expression's effects are
//! the methods it directly calls.
//!
//! Every method carries an `effect[...]` annotation bounding its body's
//! behaviour, and a method is itself a sub-effect of its own
//! annotation, so calling through helper methods never forces wider
//! annotations. The crate provides the parser and printer, the class
//! table with selector-substituting lookup, the subtype and sub-effect
//! decision procedures, the type-and-effect checker, a small-step
//! interpreter, a monitored evaluator that asserts annotation soundness
//! on executions, and the `callee` command-line front end over all of
//! it.

pub mod classtable;
pub mod cli;
pub mod diag;
pub mod interp;
pub mod relations;
pub mod syntax;
pub mod typecheck;
