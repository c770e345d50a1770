//! Well-formedness checking. Every rule violation becomes a finding; the
//! checker never aborts early, so one pass reports everything it can see.

use super::{Model, TypeRef};
use crate::loc::SourceLocation;
use crate::typecheck;
use serde::Serialize;
use std::collections::BTreeSet;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Severity {
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Finding {
    pub severity: Severity,
    pub rule: &'static str,
    pub location: SourceLocation,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: [{}] {}", self.location, self.rule, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct WellFormednessReport {
    pub findings: Vec<Finding>,
}

impl WellFormednessReport {
    pub fn is_clean(&self) -> bool {
        self.findings.is_empty()
    }

    fn add(&mut self, rule: &'static str, location: &SourceLocation, message: String) {
        self.findings.push(Finding { severity: Severity::Error, rule, location: location.clone(), message });
    }
}

/// Check every model invariant. Idempotent and side-effect-free; an empty
/// report means the model satisfies all type invariants.
pub fn validate_model(model: &Model) -> WellFormednessReport {
    let mut report = WellFormednessReport::default();

    check_unique_names(model, &mut report);
    check_inheritance(model, &mut report);
    check_classes(model, &mut report);
    check_associations(model, &mut report);
    check_invariant_decls(model, &mut report);
    // Body and guard typing is meaningful only once the structure above is
    // sound; on a structurally broken model the checker would cascade.
    if report.is_clean() {
        typecheck::check_model_types(model, &mut report.findings);
    }
    report
}

fn check_unique_names(model: &Model, report: &mut WellFormednessReport) {
    let mut seen = BTreeSet::new();
    for class in &model.classes {
        if !seen.insert(class.name.as_str()) {
            report.add("duplicate-class", &class.loc, format!("class `{}` is declared more than once", class.name));
        }
    }
    let mut seen = BTreeSet::new();
    for assoc in &model.associations {
        if !seen.insert(assoc.name.as_str()) {
            report.add(
                "duplicate-association",
                &assoc.loc,
                format!("association `{}` is declared more than once", assoc.name),
            );
        }
    }
    let mut seen = BTreeSet::new();
    for inv in &model.invariants {
        if !seen.insert(inv.name.as_str()) {
            report.add("duplicate-invariant", &inv.loc, format!("invariant `{}` is declared more than once", inv.name));
        }
    }
}

fn check_inheritance(model: &Model, report: &mut WellFormednessReport) {
    for class in &model.classes {
        let Some(sup) = &class.superclass else { continue };
        if model.class(sup).is_none() {
            report.add(
                "unknown-superclass",
                &class.loc,
                format!("class `{}` extends unknown class `{sup}`", class.name),
            );
            continue;
        }
        // Walk upward; revisiting the starting class closes a cycle.
        let mut seen = vec![class.name.as_str()];
        let mut current = model.class(sup);
        while let Some(c) = current {
            if seen.contains(&c.name.as_str()) {
                report.add(
                    "cycle-in-inheritance",
                    &class.loc,
                    format!("inheritance cycle through class `{}`", class.name),
                );
                break;
            }
            seen.push(&c.name);
            current = c.superclass.as_deref().and_then(|s| model.class(s));
        }
    }
}

fn type_exists(model: &Model, ty: &TypeRef) -> bool {
    match ty {
        TypeRef::Int | TypeRef::Bool | TypeRef::Str => true,
        TypeRef::Class(name) => model.class(name).is_some(),
    }
}

fn check_classes(model: &Model, report: &mut WellFormednessReport) {
    for class in &model.classes {
        let inherited: Vec<&str> = match &class.superclass {
            Some(sup) if model.class(sup).is_some() => model
                .effective_attributes(sup)
                .map(|attrs| attrs.iter().map(|a| a.name.as_str()).collect())
                .unwrap_or_default(),
            _ => Vec::new(),
        };

        let mut own = BTreeSet::new();
        for attr in &class.attributes {
            if !own.insert(attr.name.as_str()) {
                report.add(
                    "duplicate-attribute",
                    &attr.loc,
                    format!("attribute `{}` is declared twice in class `{}`", attr.name, class.name),
                );
            }
            if inherited.contains(&attr.name.as_str()) {
                report.add(
                    "shadowed-attribute",
                    &attr.loc,
                    format!("attribute `{}` in class `{}` shadows an inherited attribute", attr.name, class.name),
                );
            }
            if !type_exists(model, &attr.ty) {
                report.add(
                    "unknown-type",
                    &attr.loc,
                    format!("attribute `{}` has unknown type `{}`", attr.name, attr.ty),
                );
            }
        }

        let mut method_names = BTreeSet::new();
        for method in &class.methods {
            if !method_names.insert(method.name.as_str()) {
                report.add(
                    "duplicate-method",
                    &method.loc,
                    format!("method `{}` is declared twice in class `{}`", method.name, class.name),
                );
            }
            match (&method.body, method.abstract_) {
                (Some(_), true) => report.add(
                    "abstract-with-body",
                    &method.loc,
                    format!("abstract method `{}` must not have a body", method.name),
                ),
                (None, false) => report.add(
                    "missing-body",
                    &method.loc,
                    format!("method `{}` is not abstract and must have a body", method.name),
                ),
                _ => {}
            }
            let mut param_names = BTreeSet::new();
            for param in &method.params {
                if !param_names.insert(param.name.as_str()) {
                    report.add(
                        "duplicate-parameter",
                        &method.loc,
                        format!("parameter `{}` repeats in method `{}`", param.name, method.name),
                    );
                }
                if !type_exists(model, &param.ty) {
                    report.add(
                        "unknown-type",
                        &method.loc,
                        format!("parameter `{}` of `{}` has unknown type `{}`", param.name, method.name, param.ty),
                    );
                }
            }
            if let Some(ret) = &method.return_ty {
                if !type_exists(model, ret) {
                    report.add(
                        "unknown-type",
                        &method.loc,
                        format!("return type `{ret}` of `{}` is unknown", method.name),
                    );
                }
            }
            // Overrides must match the overridden signature exactly.
            if let Some(sup) = &class.superclass {
                if model.class(sup).is_some() {
                    if let Ok(overridden) = model.resolve_method(sup, &method.name) {
                        if !overridden.signature_matches(method) {
                            report.add(
                                "override-signature-mismatch",
                                &method.loc,
                                format!(
                                    "method `{}` in class `{}` overrides a method with a different signature",
                                    method.name, class.name
                                ),
                            );
                        }
                    }
                }
            }
        }

        if let Some(chart) = &class.statechart {
            check_statechart(model, class, chart, report);
        }
    }
}

fn check_statechart(
    model: &Model,
    class: &super::ClassDef,
    chart: &super::Statechart,
    report: &mut WellFormednessReport,
) {
    let mut states = BTreeSet::new();
    for state in &chart.states {
        if !states.insert(state.as_str()) {
            report.add("duplicate-state", &chart.loc, format!("state `{state}` is declared twice"));
        }
    }
    if !states.contains(chart.initial.as_str()) {
        report.add(
            "unknown-initial-state",
            &chart.loc,
            format!("initial state `{}` is not a declared state", chart.initial),
        );
    }
    for t in &chart.transitions {
        for endpoint in [&t.source, &t.target] {
            if !states.contains(endpoint.as_str()) {
                report.add("unknown-state", &t.loc, format!("transition endpoint `{endpoint}` is not a declared state"));
            }
        }
        // Triggers may be inherited methods; resolution along the chain is
        // what the runtime will do at dispatch.
        if model.resolve_method(&class.name, &t.trigger).is_err() {
            report.add(
                "unknown-trigger-method",
                &t.loc,
                format!("trigger `{}` is not a method of class `{}`", t.trigger, class.name),
            );
        }
    }
}

fn check_associations(model: &Model, report: &mut WellFormednessReport) {
    for assoc in &model.associations {
        if assoc.end_a.role == assoc.end_b.role {
            report.add(
                "duplicate-role",
                &assoc.loc,
                format!("association `{}` uses role `{}` on both ends", assoc.name, assoc.end_a.role),
            );
        }
        for end in [&assoc.end_a, &assoc.end_b] {
            if model.class(&end.class).is_none() {
                report.add(
                    "unknown-class",
                    &assoc.loc,
                    format!("association `{}` references unknown class `{}`", assoc.name, end.class),
                );
                continue;
            }
            // The role is navigated from instances of `end.class`, so it must
            // not be confusable with an attribute there or below.
            let mut clash_classes: Vec<&str> = vec![end.class.as_str()];
            clash_classes.extend(model.descendants_of(&end.class).iter().map(|c| c.name.as_str()));
            for cname in clash_classes {
                if let Ok(attrs) = model.effective_attributes(cname) {
                    if attrs.iter().any(|a| a.name == end.role) {
                        report.add(
                            "role-attribute-collision",
                            &assoc.loc,
                            format!(
                                "role `{}` of association `{}` collides with an attribute of class `{cname}`",
                                end.role, assoc.name
                            ),
                        );
                        break;
                    }
                }
            }
        }
    }
}

fn check_invariant_decls(model: &Model, report: &mut WellFormednessReport) {
    for inv in &model.invariants {
        if model.class(&inv.context_class).is_none() {
            report.add(
                "unknown-context-class",
                &inv.loc,
                format!("invariant `{}` names unknown context class `{}`", inv.name, inv.context_class),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{AttributeDef, ClassDef};

    fn class(name: &str, superclass: Option<&str>) -> ClassDef {
        ClassDef {
            name: name.into(),
            superclass: superclass.map(String::from),
            published: false,
            attributes: Vec::new(),
            methods: Vec::new(),
            statechart: None,
            loc: SourceLocation::dummy(),
        }
    }

    #[test]
    fn empty_model_is_clean() {
        assert!(validate_model(&Model::default()).is_clean());
    }

    #[test]
    fn inheritance_cycle_is_reported() {
        let model = Model {
            classes: vec![class("B", Some("A")), class("A", Some("B"))],
            ..Default::default()
        };
        let report = validate_model(&model);
        assert!(report.findings.iter().any(|f| f.rule == "cycle-in-inheritance"), "{report:?}");
    }

    #[test]
    fn shadowed_attribute_is_reported() {
        // Oracle: exhaustive shadowing check over the two-class fixture —
        // an attribute of the subclass is flagged iff its name occurs among
        // the superclass's attributes.
        let sup_attrs = ["name", "age"];
        let sub_attrs = ["name", "nickname"];
        let mut person = class("Person", None);
        person.attributes = sup_attrs
            .iter()
            .map(|n| AttributeDef { name: n.to_string(), ty: TypeRef::Str, loc: SourceLocation::dummy() })
            .collect();
        let mut guest = class("Guest", Some("Person"));
        guest.attributes = sub_attrs
            .iter()
            .map(|n| AttributeDef { name: n.to_string(), ty: TypeRef::Str, loc: SourceLocation::dummy() })
            .collect();
        let model = Model { classes: vec![person, guest], ..Default::default() };
        let report = validate_model(&model);
        let flagged: Vec<&str> = report
            .findings
            .iter()
            .filter(|f| f.rule == "shadowed-attribute")
            .map(|f| {
                sub_attrs
                    .iter()
                    .copied()
                    .find(|n| f.message.contains(&format!("`{n}`")))
                    .expect("finding names a subclass attribute")
            })
            .collect();
        let expected: Vec<&str> = sub_attrs.iter().copied().filter(|n| sup_attrs.contains(n)).collect();
        assert_eq!(flagged, expected);
    }

    #[test]
    fn validate_is_idempotent() {
        let model = Model {
            classes: vec![class("B", Some("A")), class("A", Some("B"))],
            ..Default::default()
        };
        assert_eq!(validate_model(&model), validate_model(&model));
    }
}
