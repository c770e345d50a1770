//! Applying refactorings: model edit plus co-transformation of the test
//! suite. Inputs are never mutated; outputs are fresh values.

use super::conditions::{check_conditions, gaining_classes};
use super::rewrite::{RenameRule, Rewriter};
use super::types::{
    CoTransformReport, DefaultValue, Disposition, PullUpVariant, RefactorError, Refactoring, StepReport,
};
use crate::expr::Expr;
use crate::loc::SourceLocation;
use crate::model::Model;
use crate::testkit::types::{SetupStmt, TestSuite};

fn default_to_expr(default: &DefaultValue) -> Expr {
    let loc = SourceLocation::dummy();
    match default {
        DefaultValue::Int(v) => Expr::IntLit(*v, loc),
        DefaultValue::Bool(v) => Expr::BoolLit(*v, loc),
        DefaultValue::Str(s) => Expr::StrLit(s.clone(), loc),
    }
}

/// Apply one refactoring. Refuses when a context condition is violated; on
/// success returns the transformed model, the co-transformed suite, and a
/// per-test report.
pub fn apply(
    model: &Model,
    suite: &TestSuite,
    r: &Refactoring,
) -> Result<(Model, TestSuite, CoTransformReport), RefactorError> {
    let conditions = check_conditions(model, r)?;
    if !conditions.is_applicable() {
        return Err(RefactorError::Blocked(conditions));
    }
    let mut new_model = model.clone();
    let mut new_suite = suite.clone();
    let mut report = CoTransformReport {
        tests: suite.tests.iter().map(|t| (t.name.clone(), Disposition::Unchanged)).collect(),
    };

    match r {
        Refactoring::PullUpAttribute { subclass, attribute, superclass, default, .. } => {
            let attr_def = model
                .class(subclass)
                .and_then(|c| c.attribute(attribute))
                .expect("conditions resolved the attribute")
                .clone();
            // Remove from the declaring subclass, add once to the target.
            if let Some(sub) = new_model.classes.iter_mut().find(|c| c.name == *subclass) {
                sub.attributes.retain(|a| a.name != *attribute);
            }
            if let Some(sup) = new_model.classes.iter_mut().find(|c| c.name == *superclass) {
                sup.attributes.push(attr_def);
            }
            // Co-transform: setup objects of gaining classes receive the
            // supplied default. Oracle patterns are never auto-edited.
            let gaining = gaining_classes(model, superclass, subclass);
            for test in &mut new_suite.tests {
                let mut edits = Vec::new();
                for stmt in &mut test.setup {
                    let SetupStmt::Create { name, class, inits, .. } = stmt else { continue };
                    if !gaining.contains(class) {
                        continue;
                    }
                    if inits.iter().any(|(n, _)| n == attribute) {
                        continue;
                    }
                    inits.push((attribute.clone(), default_to_expr(default)));
                    edits.push(format!("setup `{name}`: added {attribute} = {default}"));
                }
                let mut attention: Option<String> = None;
                if let Some(pattern) = &test.oracle.pattern {
                    for entry in &pattern.entries {
                        if gaining.contains(&entry.class) && entry.constraints.iter().any(|(n, _)| n == attribute) {
                            attention = Some(format!(
                                "oracle pattern constrains moved attribute `{attribute}` on gaining class `{}`",
                                entry.class
                            ));
                        }
                    }
                }
                let slot = report.tests.iter_mut().find(|(n, _)| n == &test.name).expect("test listed");
                if let Some(reason) = attention {
                    slot.1 = Disposition::NeedsAttention { reason };
                } else if !edits.is_empty() {
                    slot.1 = Disposition::Adapted { edits };
                }
            }
        }
        Refactoring::PullUpMethod { subclass, method, superclass, variant, .. } => {
            let method_def = model
                .class(subclass)
                .and_then(|c| c.method(method))
                .expect("conditions resolved the method")
                .clone();
            match variant {
                PullUpVariant::Override => {
                    if let Some(sub) = new_model.classes.iter_mut().find(|c| c.name == *subclass) {
                        sub.methods.retain(|m| m.name != *method);
                    }
                    if let Some(sup) = new_model.classes.iter_mut().find(|c| c.name == *superclass) {
                        sup.methods.push(method_def);
                    }
                    // Dispatch is preserved; glass-box suites stay untouched.
                }
                PullUpVariant::AbstractSignature => {
                    if let Some(sup) = new_model.classes.iter_mut().find(|c| c.name == *superclass) {
                        sup.methods.push(crate::model::MethodDef {
                            abstract_: true,
                            body: None,
                            loc: SourceLocation::dummy(),
                            ..method_def
                        });
                    }
                    // The target is abstract now; route its instantiations
                    // in test setups to a human.
                    for test in &mut new_suite.tests {
                        let instantiates = test.setup.iter().any(
                            |s| matches!(s, SetupStmt::Create { class, .. } if class == superclass),
                        );
                        if instantiates {
                            let slot = report.tests.iter_mut().find(|(n, _)| n == &test.name).expect("test listed");
                            slot.1 = Disposition::NeedsAttention {
                                reason: format!("setup instantiates `{superclass}`, which is abstract after the pull-up"),
                            };
                        }
                    }
                }
            }
        }
        Refactoring::RenameAttribute { class, old, new, .. } => {
            if let Some(c) = new_model.classes.iter_mut().find(|c| c.name == *class) {
                if let Some(attr) = c.attributes.iter_mut().find(|a| a.name == *old) {
                    attr.name = new.clone();
                }
            }
            rewrite_for_rename(model, &mut new_model, &mut new_suite, &mut report, RenameRule::Attr {
                class,
                old,
                new,
            });
        }
        Refactoring::RenameMethod { class, old, new, .. } => {
            if let Some(c) = new_model.classes.iter_mut().find(|c| c.name == *class) {
                if let Some(m) = c.methods.iter_mut().find(|m| m.name == *old) {
                    m.name = new.clone();
                }
            }
            rewrite_for_rename(model, &mut new_model, &mut new_suite, &mut report, RenameRule::Method {
                class,
                old,
                new,
            });
        }
        Refactoring::RenameClass { old, new, .. } => {
            if let Some(c) = new_model.classes.iter_mut().find(|c| c.name == *old) {
                c.name = new.clone();
            }
            rewrite_for_rename(model, &mut new_model, &mut new_suite, &mut report, RenameRule::Class { old, new });
        }
    }

    debug_assert!(
        crate::model::validate::validate_model(&new_model).is_clean(),
        "applicable refactorings preserve well-formedness"
    );
    Ok((new_model, new_suite, report))
}

fn rewrite_for_rename(
    pre_model: &Model,
    new_model: &mut Model,
    new_suite: &mut TestSuite,
    report: &mut CoTransformReport,
    rule: RenameRule<'_>,
) {
    let mut rewriter = Rewriter::new(pre_model, rule);
    rewriter.rewrite_model_references(new_model);
    let per_test = rewriter.rewrite_suite(new_suite);
    for (name, changed) in per_test {
        if changed == 0 {
            continue;
        }
        let slot = report.tests.iter_mut().find(|(n, _)| n == &name).expect("test listed");
        let edit = format!("renamed {changed} reference(s)");
        match &mut slot.1 {
            Disposition::Unchanged => slot.1 = Disposition::Adapted { edits: vec![edit] },
            Disposition::Adapted { edits } => edits.push(edit),
            Disposition::NeedsAttention { .. } => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptOutcome {
    pub model: Model,
    pub suite: TestSuite,
    pub steps: Vec<StepReport>,
}

/// Apply a script atomically: steps run in order against the intermediate
/// results; the first blocked step aborts the whole script and the caller
/// keeps its untouched inputs.
pub fn apply_script(model: &Model, suite: &TestSuite, steps: &[Refactoring]) -> Result<ScriptOutcome, RefactorError> {
    let mut current_model = model.clone();
    let mut current_suite = suite.clone();
    let mut reports = Vec::new();
    for (index, step) in steps.iter().enumerate() {
        let conditions = check_conditions(&current_model, step)?;
        if !conditions.is_applicable() {
            return Err(RefactorError::BlockedAtStep { step: index + 1, report: conditions, prior_reports: reports });
        }
        let (next_model, next_suite, co_transform) = apply(&current_model, &current_suite, step)?;
        reports.push(StepReport {
            step: index + 1,
            refactoring: step.describe(),
            conditions,
            co_transform,
        });
        current_model = next_model;
        current_suite = next_suite;
    }
    Ok(ScriptOutcome { model: current_model, suite: current_suite, steps: reports })
}
