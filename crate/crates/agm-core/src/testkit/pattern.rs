//! Object-pattern matching: find an injective assignment of pattern objects
//! to space objects, consistent with the seed bindings, such that classes,
//! constrained attributes, and link constraints all agree. Everything the
//! pattern does not mention is ignored.

use super::types::ObjectPattern;
use crate::model::Model;
use crate::ocl::{self, Bindings, EvalError, Value};
use crate::runtime::{ObjectRef, ObjectSpace};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq)]
pub enum MatchOutcome {
    Match(BTreeMap<String, ObjectRef>),
    NoMatch(String),
}

impl MatchOutcome {
    pub fn is_match(&self) -> bool {
        matches!(self, MatchOutcome::Match(_))
    }
}

struct PreparedEntry<'p> {
    binding: &'p str,
    class: &'p str,
    /// Constraint values, evaluated up front against the final space.
    constraints: Vec<(&'p str, Value)>,
    seed: Option<ObjectRef>,
}

/// Match `pattern` against `space`. Seed bindings pre-bind setup names to
/// their objects; constraint expressions may reference them. Returns the
/// full binding map on success, or the first unsatisfiable constraint.
pub fn match_pattern(
    model: &Model,
    space: &ObjectSpace,
    pattern: &ObjectPattern,
    seed: &BTreeMap<String, Value>,
    depth: u32,
) -> Result<MatchOutcome, EvalError> {
    let mut env = Bindings::from_map(seed);
    let mut entries = Vec::with_capacity(pattern.entries.len());
    for entry in &pattern.entries {
        let mut constraints = Vec::with_capacity(entry.constraints.len());
        for (attr, expr) in &entry.constraints {
            let value = ocl::eval_ocl(model, space, &mut env, expr, depth)?;
            constraints.push((attr.as_str(), value));
        }
        let seed_ref = match seed.get(&entry.binding) {
            Some(Value::Obj(r)) => Some(*r),
            _ => None,
        };
        entries.push(PreparedEntry { binding: &entry.binding, class: &entry.class, constraints, seed: seed_ref });
    }

    // Candidate objects per entry, by class-compatibility (subclasses are
    // accepted) and attribute constraints alone.
    let mut candidates: Vec<Vec<ObjectRef>> = Vec::with_capacity(entries.len());
    for entry in &entries {
        let locals: Vec<ObjectRef> = space
            .iter()
            .filter(|(r, o)| {
                if let Some(seeded) = entry.seed {
                    if *r != seeded {
                        return false;
                    }
                }
                model.is_subclass_of(&o.class, entry.class) && satisfies(space, *r, &entry.constraints)
            })
            .map(|(r, _)| r)
            .collect();
        if locals.is_empty() {
            return Ok(MatchOutcome::NoMatch(explain_entry(model, space, entry)));
        }
        candidates.push(locals);
    }

    // Backtracking over the injective assignment, trying candidates in
    // creation order for determinism.
    let mut assignment: Vec<ObjectRef> = Vec::with_capacity(entries.len());
    if !assign(space, pattern, model, seed, &entries, &candidates, &mut assignment) {
        return Ok(MatchOutcome::NoMatch(
            "no injective assignment of pattern objects satisfies all constraints together".to_string(),
        ));
    }
    let mut bound = BTreeMap::new();
    for (entry, obj) in entries.iter().zip(&assignment) {
        bound.insert(entry.binding.to_string(), *obj);
    }
    Ok(MatchOutcome::Match(bound))
}

fn satisfies(space: &ObjectSpace, obj: ObjectRef, constraints: &[(&str, Value)]) -> bool {
    let Some(instance) = space.object(obj) else { return false };
    constraints.iter().all(|(attr, expected)| instance.attrs.get(*attr).is_some_and(|actual| actual == expected))
}

fn explain_entry(model: &Model, space: &ObjectSpace, entry: &PreparedEntry) -> String {
    let class_matches: Vec<ObjectRef> = space
        .iter()
        .filter(|(r, o)| {
            entry.seed.map(|s| *r == s).unwrap_or(true) && model.is_subclass_of(&o.class, entry.class)
        })
        .map(|(r, _)| r)
        .collect();
    if class_matches.is_empty() {
        return format!("pattern object `{}`: no object of class `{}` exists", entry.binding, entry.class);
    }
    // Name the first constraint no class-compatible object satisfies.
    for (attr, expected) in &entry.constraints {
        let satisfied_somewhere = class_matches
            .iter()
            .any(|r| space.object(*r).is_some_and(|o| o.attrs.get(*attr).is_some_and(|v| v == expected)));
        if !satisfied_somewhere {
            return format!(
                "pattern object `{}`: no `{}` satisfies {attr} = {}",
                entry.binding,
                entry.class,
                expected.render(space)
            );
        }
    }
    format!("pattern object `{}`: no `{}` satisfies all attribute constraints", entry.binding, entry.class)
}

fn assign(
    space: &ObjectSpace,
    pattern: &ObjectPattern,
    model: &Model,
    seed: &BTreeMap<String, Value>,
    entries: &[PreparedEntry],
    candidates: &[Vec<ObjectRef>],
    assignment: &mut Vec<ObjectRef>,
) -> bool {
    if assignment.len() == entries.len() {
        return links_hold(space, pattern, model, seed, entries, assignment);
    }
    let index = assignment.len();
    for candidate in &candidates[index] {
        if assignment.contains(candidate) {
            continue;
        }
        assignment.push(*candidate);
        if assign(space, pattern, model, seed, entries, candidates, assignment) {
            return true;
        }
        assignment.pop();
    }
    false
}

fn links_hold(
    space: &ObjectSpace,
    pattern: &ObjectPattern,
    model: &Model,
    seed: &BTreeMap<String, Value>,
    entries: &[PreparedEntry],
    assignment: &[ObjectRef],
) -> bool {
    // Link endpoints may be pattern bindings or plain setup names.
    let resolve = |name: &str| -> Option<ObjectRef> {
        entries
            .iter()
            .position(|e| e.binding == name)
            .map(|i| assignment[i])
            .or_else(|| match seed.get(name) {
                Some(Value::Obj(r)) => Some(*r),
                _ => None,
            })
    };
    for link in &pattern.links {
        let Some(from) = resolve(&link.from) else { return false };
        let Some(to) = resolve(&link.to) else { return false };
        let Some(class) = space.class_of(from) else { return false };
        let Some((assoc, own, _)) = model.role_of(class, &link.role) else { return false };
        if !space.linked(assoc, own, from).contains(&to) {
            return false;
        }
    }
    true
}
