//! Model refactorings: the catalog, context-condition checks, application
//! with co-transformation of test suites, and script execution.

pub mod apply;
pub mod conditions;
pub mod rewrite;
pub mod types;

pub use apply::{apply, apply_script, ScriptOutcome};
pub use conditions::check_conditions;
pub use types::{
    Applicability, ConditionReport, ConditionViolation, CoTransformReport, DefaultValue, Disposition, PullUpVariant,
    RefactorError, Refactoring, StepReport,
};

use crate::loc::Diagnostic;
use crate::model::Model;

/// Resolution pass used by `parse_refactorings`: every named element must
/// exist in the model and the target must be the direct superclass.
pub fn resolve_steps(model: &Model, steps: &[Refactoring]) -> Vec<Diagnostic> {
    let mut diagnostics = Vec::new();
    let mut report = |loc: &crate::loc::SourceLocation, message: String| {
        diagnostics.push(Diagnostic::new(loc.clone(), message));
    };
    for step in steps {
        match step {
            Refactoring::PullUpAttribute { subclass, attribute, superclass, loc, .. } => {
                match model.class(subclass) {
                    None => report(loc, format!("unknown class `{subclass}`")),
                    Some(class) => {
                        if class.attribute(attribute).is_none() {
                            report(loc, format!("class `{subclass}` declares no attribute `{attribute}`"));
                        }
                        if class.superclass.as_deref() != Some(superclass.as_str()) {
                            report(loc, format!("`{superclass}` is not the direct superclass of `{subclass}`"));
                        }
                    }
                }
                if model.class(superclass).is_none() {
                    report(loc, format!("unknown class `{superclass}`"));
                }
            }
            Refactoring::PullUpMethod { subclass, method, superclass, loc, .. } => {
                match model.class(subclass) {
                    None => report(loc, format!("unknown class `{subclass}`")),
                    Some(class) => {
                        if class.method(method).is_none() {
                            report(loc, format!("class `{subclass}` declares no method `{method}`"));
                        }
                        if class.superclass.as_deref() != Some(superclass.as_str()) {
                            report(loc, format!("`{superclass}` is not the direct superclass of `{subclass}`"));
                        }
                    }
                }
                if model.class(superclass).is_none() {
                    report(loc, format!("unknown class `{superclass}`"));
                }
            }
            Refactoring::RenameAttribute { class, old, loc, .. } => match model.class(class) {
                None => report(loc, format!("unknown class `{class}`")),
                Some(c) => {
                    if c.attribute(old).is_none() {
                        report(loc, format!("class `{class}` declares no attribute `{old}`"));
                    }
                }
            },
            Refactoring::RenameMethod { class, old, loc, .. } => match model.class(class) {
                None => report(loc, format!("unknown class `{class}`")),
                Some(c) => {
                    if c.method(old).is_none() {
                        report(loc, format!("class `{class}` declares no method `{old}`"));
                    }
                }
            },
            Refactoring::RenameClass { old, loc, .. } => {
                if model.class(old).is_none() {
                    report(loc, format!("unknown class `{old}`"));
                }
            }
        }
    }
    diagnostics
}
