//! Context conditions. A refactoring applies only when its report comes back
//! with no violations; `apply` refuses blocked steps.
//!
//! Condition ids:
//! - C1 pull-up-attr: neither the target superclass (including inherited)
//!   nor any other class in its subtree already has the attribute name.
//! - C2 pull-up-attr: a same-named declaration elsewhere in the subtree with
//!   a different type (reported alongside C1).
//! - C3 pull-up-method (override): the moved body resolves entirely at the
//!   superclass — no subclass-only attributes, methods, roles, or states.
//! - C4 pull-up-method: no signature conflict at the superclass or among
//!   subtree declarations that would become overrides.
//! - C5 pull-up-method (abstract variant): every previously concrete class
//!   below the target still resolves the method to a body, and no method
//!   body instantiates the now-abstract target.
//! - C6 renames: no name collision in the affected scope (including
//!   inherited names), and method renames stay out of override chains.
//! - C7 pull-up-attr: the supplied default value matches the attribute type.

use super::types::{ConditionReport, ConditionViolation, DefaultValue, PullUpVariant, RefactorError, Refactoring};
use crate::loc::SourceLocation;
use crate::model::{Block, Model, Stmt, TypeRef};
use crate::typecheck::{Checker, StaticType, TypeEnv};

fn violation(condition: &'static str, loc: &SourceLocation, message: String) -> ConditionViolation {
    ConditionViolation { condition, location: loc.clone(), message }
}

/// Evaluate the context conditions of `r` against `model`.
pub fn check_conditions(model: &Model, r: &Refactoring) -> Result<ConditionReport, RefactorError> {
    let resolution = super::resolve_steps(model, std::slice::from_ref(r));
    if let Some(first) = resolution.first() {
        return Err(RefactorError::UnknownElement(first.message.clone()));
    }
    let violations = match r {
        Refactoring::PullUpAttribute { subclass, attribute, superclass, default, loc } => {
            check_pull_up_attribute(model, subclass, attribute, superclass, default, loc)
        }
        Refactoring::PullUpMethod { subclass, method, superclass, variant, loc } => {
            check_pull_up_method(model, subclass, method, superclass, *variant, loc)
        }
        Refactoring::RenameAttribute { class, old, new, loc } => check_rename_attribute(model, class, old, new, loc),
        Refactoring::RenameMethod { class, old, new, loc } => check_rename_method(model, class, old, new, loc),
        Refactoring::RenameClass { old, new, loc } => check_rename_class(model, old, new, loc),
    };
    Ok(ConditionReport::new(r, violations))
}

fn check_pull_up_attribute(
    model: &Model,
    subclass: &str,
    attribute: &str,
    superclass: &str,
    default: &DefaultValue,
    loc: &SourceLocation,
) -> Vec<ConditionViolation> {
    let mut violations = Vec::new();
    let attr = model.class(subclass).and_then(|c| c.attribute(attribute)).expect("resolved");

    // C1: the target must not have the name yet, neither inherited ...
    if model.effective_attribute(superclass, attribute).is_some() {
        violations.push(violation(
            "C1",
            loc,
            format!("class `{superclass}` already has an attribute `{attribute}`"),
        ));
    }
    // ... nor declared anywhere else in its subtree, where the pulled-up
    // attribute would arrive by inheritance and shadow.
    for other in model.descendants_of(superclass) {
        if other.name == subclass {
            continue;
        }
        if let Some(conflicting) = other.attribute(attribute) {
            violations.push(violation(
                "C1",
                loc,
                format!("class `{}` also declares an attribute `{attribute}`", other.name),
            ));
            // C2: merging declarations would need identical types.
            if conflicting.ty != attr.ty {
                violations.push(violation(
                    "C2",
                    loc,
                    format!(
                        "attribute `{attribute}` is `{}` in `{subclass}` but `{}` in `{}`",
                        attr.ty, conflicting.ty, other.name
                    ),
                ));
            }
        }
    }
    // Gaining classes would collide with association roles of the same name.
    for gaining in gaining_classes(model, superclass, subclass) {
        if model.role_of(&gaining, attribute).is_some() {
            violations.push(violation(
                "C1",
                loc,
                format!("class `{gaining}` navigates a role named `{attribute}`; the attribute would collide"),
            ));
        }
    }
    // C7: the default must be expressible for the attribute's type.
    let default_matches = matches!(
        (default, &attr.ty),
        (DefaultValue::Int(_), TypeRef::Int) | (DefaultValue::Bool(_), TypeRef::Bool) | (DefaultValue::Str(_), TypeRef::Str)
    );
    if !default_matches {
        violations.push(violation(
            "C7",
            loc,
            format!("default value {default} does not match the attribute type `{}`", attr.ty),
        ));
    }
    violations
}

/// Classes that newly gain the attribute: the target's subtree (target
/// included) minus the source subclass's subtree, which already had it.
pub(crate) fn gaining_classes(model: &Model, superclass: &str, subclass: &str) -> Vec<String> {
    let mut out = vec![superclass.to_string()];
    for c in model.descendants_of(superclass) {
        if !model.is_subclass_of(&c.name, subclass) {
            out.push(c.name.clone());
        }
    }
    out
}

fn check_pull_up_method(
    model: &Model,
    subclass: &str,
    method: &str,
    superclass: &str,
    variant: PullUpVariant,
    loc: &SourceLocation,
) -> Vec<ConditionViolation> {
    let mut violations = Vec::new();
    let moved = model.class(subclass).and_then(|c| c.method(method)).expect("resolved");

    // C4: the superclass itself must not declare the method; an inherited
    // one and every subtree declaration must match the moved signature
    // exactly, since they become override pairs.
    if model.class(superclass).is_some_and(|c| c.method(method).is_some()) {
        violations.push(violation("C4", loc, format!("class `{superclass}` already declares `{method}`")));
    } else if let Ok(inherited) = model.resolve_method(superclass, method) {
        if !inherited.signature_matches(moved) {
            violations.push(violation(
                "C4",
                loc,
                format!("`{method}` is inherited at `{superclass}` with a different signature"),
            ));
        }
    }
    for other in model.descendants_of(superclass) {
        if other.name == subclass {
            continue;
        }
        if let Some(theirs) = other.method(method) {
            if !theirs.signature_matches(moved) {
                violations.push(violation(
                    "C4",
                    loc,
                    format!("`{}.{method}` has a different signature and could not override the moved method", other.name),
                ));
            }
        }
    }

    match variant {
        PullUpVariant::Override => {
            // C3: re-type the body with `self` bound to the superclass; any
            // resolution failure means the body leans on subclass-only parts.
            if let Some(body) = &moved.body {
                for problem in body_problems_at(model, superclass, moved, body) {
                    violations.push(violation("C3", loc, problem));
                }
            }
        }
        PullUpVariant::AbstractSignature => {
            // C5: every previously concrete class below the target must keep
            // a concrete body for the method.
            for below in model.descendants_of(superclass) {
                if model.is_abstract(&below.name) {
                    continue;
                }
                let concrete = model.resolve_method(&below.name, method).map(|m| !m.abstract_).unwrap_or(false);
                if !concrete {
                    violations.push(violation(
                        "C5",
                        loc,
                        format!("concrete class `{}` would not implement abstract `{method}`", below.name),
                    ));
                }
            }
            // The target itself turns abstract; any body instantiating it
            // would leave the model ill-formed.
            for class in &model.classes {
                for m in &class.methods {
                    let Some(body) = &m.body else { continue };
                    if block_instantiates(body, superclass) {
                        violations.push(violation(
                            "C5",
                            loc,
                            format!("`{}.{}` instantiates `{superclass}`, which would become abstract", class.name, m.name),
                        ));
                    }
                }
            }
        }
    }
    violations
}

/// Type problems the method body would have if its `self` were an instance
/// of `class`. The moved method itself is assumed present at `class` so
/// that self-recursion stays legal.
fn body_problems_at(model: &Model, class: &str, moved: &crate::model::MethodDef, body: &Block) -> Vec<String> {
    // Simulate the post-move model: method present at the superclass.
    let mut sim = model.clone();
    if let Some(target) = sim.classes.iter_mut().find(|c| c.name == class) {
        if target.method(&moved.name).is_none() {
            target.methods.push(moved.clone());
        }
    }
    let mut checker = Checker::new(&sim);
    let mut env = TypeEnv::new();
    env.bind("self", StaticType::Object(class.to_string()));
    for param in &moved.params {
        env.bind(&param.name, StaticType::from_type_ref(&param.ty));
    }
    let return_ty = moved.return_ty.as_ref().map(StaticType::from_type_ref);
    checker.check_body_for_conditions(&mut env, body, &return_ty);
    checker.diagnostics.into_iter().map(|d| d.message).collect()
}

fn block_instantiates(block: &Block, class: &str) -> bool {
    block.stmts.iter().any(|stmt| match stmt {
        Stmt::Create { class: c, .. } => c == class,
        Stmt::If { then_block, else_block, .. } => {
            block_instantiates(then_block, class)
                || else_block.as_ref().is_some_and(|b| block_instantiates(b, class))
        }
        Stmt::Foreach { body, .. } => block_instantiates(body, class),
        _ => false,
    })
}

fn check_rename_attribute(
    model: &Model,
    class: &str,
    old: &str,
    new: &str,
    loc: &SourceLocation,
) -> Vec<ConditionViolation> {
    let mut violations = Vec::new();
    if old == new {
        violations.push(violation("C6", loc, "old and new name are identical".into()));
        return violations;
    }
    if model.effective_attribute(class, new).is_some() {
        violations.push(violation("C6", loc, format!("class `{class}` already has an attribute `{new}`")));
    }
    for below in model.descendants_of(class) {
        if below.attribute(new).is_some() {
            violations.push(violation(
                "C6",
                loc,
                format!("subclass `{}` declares `{new}`; the renamed attribute would be shadowed", below.name),
            ));
        }
    }
    // The new name must not collide with any role navigable from the class
    // or its subtree, where `x.new` would turn ambiguous.
    let mut scope = vec![class.to_string()];
    scope.extend(model.descendants_of(class).iter().map(|c| c.name.clone()));
    for cname in scope {
        if model.role_of(&cname, new).is_some() {
            violations.push(violation(
                "C6",
                loc,
                format!("class `{cname}` navigates a role named `{new}`"),
            ));
        }
    }
    violations
}

fn check_rename_method(model: &Model, class: &str, old: &str, new: &str, loc: &SourceLocation) -> Vec<ConditionViolation> {
    let mut violations = Vec::new();
    if old == new {
        violations.push(violation("C6", loc, "old and new name are identical".into()));
        return violations;
    }
    // Override chains are renamed at their root declaration or not at all;
    // renaming one link of the chain would silently change dispatch.
    let chain_above = model
        .inheritance_chain(class)
        .iter()
        .skip(1)
        .any(|c| c.method(old).is_some());
    if chain_above {
        violations.push(violation(
            "C6",
            loc,
            format!("`{old}` overrides a superclass method; rename it at the declaring root"),
        ));
    }
    for below in model.descendants_of(class) {
        if below.method(old).is_some() {
            violations.push(violation(
                "C6",
                loc,
                format!("`{old}` is overridden in `{}`; rename the whole hierarchy is not supported", below.name),
            ));
        }
    }
    if model.resolve_method(class, new).is_ok() {
        violations.push(violation("C6", loc, format!("class `{class}` already resolves a method `{new}`")));
    }
    for below in model.descendants_of(class) {
        if below.method(new).is_some() {
            violations.push(violation("C6", loc, format!("subclass `{}` declares `{new}`", below.name)));
        }
    }
    violations
}

fn check_rename_class(model: &Model, old: &str, new: &str, loc: &SourceLocation) -> Vec<ConditionViolation> {
    let mut violations = Vec::new();
    if old == new {
        violations.push(violation("C6", loc, "old and new name are identical".into()));
        return violations;
    }
    if model.class(new).is_some() {
        violations.push(violation("C6", loc, format!("a class `{new}` already exists")));
    }
    violations
}
