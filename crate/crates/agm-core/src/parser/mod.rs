//! Parsing and printing of the three textual file kinds: model (`.agm`),
//! tests (`.agt`), and refactoring scripts (`.agr`).
//!
//! Parsing is purely syntactic; `parse_tests` and `parse_refactorings`
//! additionally resolve names against a model and reject dangling
//! references. The canonical printers are inverses of the parsers up to
//! source locations; see `docs/grammar.md` for the exact grammar.

pub mod grammar;
pub mod lexer;
pub mod printer;

use crate::loc::Diagnostic;
use crate::model::Model;
use crate::refactor::types::Refactoring;
use crate::testkit::types::TestSuite;
use crate::typecheck;

pub use printer::{format_expr, print_model, print_refactorings, print_tests};

/// Parse a model file. Succeeds whenever the syntax is valid; structural
/// well-formedness is `validate_model`'s job, not the parser's.
pub fn parse_model(text: &str, file: &str) -> Result<Model, Vec<Diagnostic>> {
    let mut parser = grammar::Parser::new(text, file);
    let model = parser.parse_model_file();
    if parser.diagnostics.is_empty() {
        Ok(model)
    } else {
        Err(parser.diagnostics)
    }
}

/// Parse a test file without resolving names. Used by the formatter, which
/// has no model at hand.
pub fn parse_tests_syntax(text: &str, file: &str) -> Result<TestSuite, Vec<Diagnostic>> {
    let mut parser = grammar::Parser::new(text, file);
    let suite = parser.parse_test_file();
    if parser.diagnostics.is_empty() {
        Ok(suite)
    } else {
        Err(parser.diagnostics)
    }
}

/// Parse a test file and resolve every class, method, role, and binding
/// name against `model`.
pub fn parse_tests(text: &str, file: &str, model: &Model) -> Result<TestSuite, Vec<Diagnostic>> {
    let suite = parse_tests_syntax(text, file)?;
    let diagnostics = typecheck::check_suite(model, &suite);
    if diagnostics.is_empty() {
        Ok(suite)
    } else {
        Err(diagnostics)
    }
}

/// Parse a refactoring script without resolving names.
pub fn parse_refactorings_syntax(text: &str, file: &str) -> Result<Vec<Refactoring>, Vec<Diagnostic>> {
    let mut parser = grammar::Parser::new(text, file);
    let steps = parser.parse_refactoring_file();
    if parser.diagnostics.is_empty() {
        Ok(steps)
    } else {
        Err(parser.diagnostics)
    }
}

/// Parse a refactoring script and check that every named element exists in
/// `model`. Context conditions are checked later, step by step, against the
/// intermediate models of a script run.
pub fn parse_refactorings(text: &str, file: &str, model: &Model) -> Result<Vec<Refactoring>, Vec<Diagnostic>> {
    let steps = parse_refactorings_syntax(text, file)?;
    let diagnostics = crate::refactor::resolve_steps(model, &steps);
    if diagnostics.is_empty() {
        Ok(steps)
    } else {
        Err(diagnostics)
    }
}
