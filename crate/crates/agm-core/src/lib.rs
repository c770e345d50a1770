//! Batch workbench for an executable UML subset.
//!
//! Class diagrams and flat statecharts form the constructive model; object
//! diagrams, sequence-diagram drivers, and OCL constraints form tests. On
//! top of the interpreter sit a refactoring catalog with context conditions,
//! co-transformation of glass-box tests, and an invariance gate that checks
//! test observations commute with model transformations.
//!
//! Module map:
//! - [`model`] — model AST, well-formedness, inheritance lookups
//! - [`parser`] — text formats (`.agm`, `.agt`, `.agr`) and printers
//! - [`typecheck`] — static resolution of expressions, bodies, and tests
//! - [`ocl`] — constraint evaluation over an object space
//! - [`runtime`] — the interpreter: spaces, calls, traces, budgets
//! - [`testkit`] — test execution, pattern/trace matching, lint, derivation
//! - [`refactor`] — transformations, context conditions, co-transformation
//! - [`invariance`] — before/after suite runs and the commuting-gate verdict

pub mod expr;
pub mod invariance;
pub mod loc;
pub mod model;
pub mod ocl;
pub mod parser;
pub mod refactor;
pub mod runtime;
pub mod testkit;
pub mod typecheck;

pub use loc::{Diagnostic, SourceLocation};
