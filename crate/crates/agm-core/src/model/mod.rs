//! Domain types for models: class definitions, associations, statecharts,
//! global invariants, and the action language, plus the name-resolution and
//! inheritance lookups every other module builds on.
//!
//! A freshly parsed `Model` may violate its own well-formedness rules;
//! [`validate::validate_model`] reports every violation as a finding. The
//! lookup operations here assume a validated model and have defined behavior
//! only on one (on invalid input they still terminate but may return
//! arbitrary declarations).

pub mod validate;

use crate::expr::Expr;
use crate::loc::SourceLocation;
use serde::Serialize;
use std::fmt;

/// A declared type: one of the built-in primitives or a class reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum TypeRef {
    Int,
    Bool,
    Str,
    Class(String),
}

impl fmt::Display for TypeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypeRef::Int => f.write_str("Int"),
            TypeRef::Bool => f.write_str("Bool"),
            TypeRef::Str => f.write_str("String"),
            TypeRef::Class(name) => f.write_str(name),
        }
    }
}

/// Association-end multiplicity. Multiplicities bound links from above only:
/// a `1` or `0..1` end may hold at most one partner, and may be unset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Multiplicity {
    One,
    ZeroOrOne,
    Many,
}

impl Multiplicity {
    pub fn is_single(self) -> bool {
        !matches!(self, Multiplicity::Many)
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::One => f.write_str("1"),
            Multiplicity::ZeroOrOne => f.write_str("0..1"),
            Multiplicity::Many => f.write_str("*"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttributeDef {
    pub name: String,
    pub ty: TypeRef,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamDef {
    pub name: String,
    pub ty: TypeRef,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodDef {
    pub name: String,
    pub published: bool,
    pub abstract_: bool,
    pub params: Vec<ParamDef>,
    pub return_ty: Option<TypeRef>,
    pub body: Option<Block>,
    pub loc: SourceLocation,
}

impl MethodDef {
    /// Signature identity used by the override rule: name, parameter types,
    /// and return type must all agree. Parameter names may differ.
    pub fn signature_matches(&self, other: &MethodDef) -> bool {
        self.name == other.name
            && self.return_ty == other.return_ty
            && self.params.len() == other.params.len()
            && self.params.iter().zip(&other.params).all(|(a, b)| a.ty == b.ty)
    }

    /// A query method has a body consisting of exactly one `return`
    /// statement. Only query methods may be called from constraint positions.
    pub fn is_query(&self) -> bool {
        match &self.body {
            Some(block) => block.stmts.len() == 1 && matches!(block.stmts[0], Stmt::Return { .. }),
            None => false,
        }
    }
}

/// One end of an association. `role` is the name objects of `class` use to
/// navigate to the opposite end; `mult` bounds how many instances of `class`
/// may be linked to a single instance of the opposite end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssocEnd {
    pub class: String,
    pub role: String,
    pub mult: Multiplicity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssocDef {
    pub name: String,
    pub end_a: AssocEnd,
    pub end_b: AssocEnd,
    pub loc: SourceLocation,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Transition {
    pub source: String,
    pub trigger: String,
    pub guard: Option<Expr>,
    pub target: String,
    pub loc: SourceLocation,
}

/// A flat statechart owned by one class. Statecharts are not inherited:
/// only direct instances of the owning class carry a current state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Statechart {
    pub initial: String,
    pub states: Vec<String>,
    pub transitions: Vec<Transition>,
    pub loc: SourceLocation,
}

impl Statechart {
    /// Methods that appear as a trigger anywhere in the chart. Calls to
    /// methods outside this alphabet bypass the chart entirely.
    pub fn trigger_alphabet(&self) -> impl Iterator<Item = &str> {
        self.transitions.iter().map(|t| t.trigger.as_str())
    }

    pub fn has_trigger(&self, method: &str) -> bool {
        self.trigger_alphabet().any(|t| t == method)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassDef {
    pub name: String,
    pub superclass: Option<String>,
    pub published: bool,
    pub attributes: Vec<AttributeDef>,
    pub methods: Vec<MethodDef>,
    pub statechart: Option<Statechart>,
    pub loc: SourceLocation,
}

impl ClassDef {
    pub fn attribute(&self, name: &str) -> Option<&AttributeDef> {
        self.attributes.iter().find(|a| a.name == name)
    }

    pub fn method(&self, name: &str) -> Option<&MethodDef> {
        self.methods.iter().find(|m| m.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantDef {
    pub name: String,
    pub context_class: String,
    pub expr: Expr,
    pub loc: SourceLocation,
}

/// A dotted name `a.b.c` used as an assignment target, link target, or
/// foreach source. The head segment is a binding; trailing segments navigate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    pub segments: Vec<String>,
    pub loc: SourceLocation,
}

impl Path {
    pub fn head(&self) -> &str {
        &self.segments[0]
    }

    pub fn last(&self) -> &str {
        self.segments.last().expect("path has at least one segment")
    }

    /// The navigation prefix, i.e. everything but the final segment.
    pub fn prefix(&self) -> &[String] {
        &self.segments[..self.segments.len() - 1]
    }
}

impl fmt::Display for Path {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.segments.join("."))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Stmt {
    /// `x = expr;` binds a new local when the path is a single segment,
    /// otherwise assigns the attribute named by the final segment.
    Assign { target: Path, value: Expr, loc: SourceLocation },
    /// `x = new C {attr = expr, ...};`
    Create { local: String, class: String, inits: Vec<(String, Expr)>, loc: SourceLocation },
    /// `expr.m(args);` with the result discarded.
    CallStmt { call: Expr, loc: SourceLocation },
    /// `path.role += expr;`
    LinkAdd { target: Path, value: Expr, loc: SourceLocation },
    /// `path.role -= expr;`
    LinkRemove { target: Path, value: Expr, loc: SourceLocation },
    Return { value: Expr, loc: SourceLocation },
    If { cond: Expr, then_block: Block, else_block: Option<Block>, loc: SourceLocation },
    Foreach { var: String, source: Path, body: Block, loc: SourceLocation },
}

/// The constructive system description: classes, associations, and global
/// OCL invariants. Duplicate names survive parsing so that validation can
/// report them; lookups return the first declaration.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Model {
    pub classes: Vec<ClassDef>,
    pub associations: Vec<AssocDef>,
    pub invariants: Vec<InvariantDef>,
}

/// Failures of the inheritance-walking lookups.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LookupError {
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("no method `{method}` on class `{class}` or any superclass")]
    NoSuchMethod { class: String, method: String },
}

impl Model {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn assoc(&self, name: &str) -> Option<&AssocDef> {
        self.associations.iter().find(|a| a.name == name)
    }

    /// The inheritance chain from `name` up to the root, starting with
    /// `name` itself. Stops when a superclass is missing or a cycle closes.
    pub fn inheritance_chain(&self, name: &str) -> Vec<&ClassDef> {
        let mut chain = Vec::new();
        let mut seen = Vec::new();
        let mut current = self.class(name);
        while let Some(class) = current {
            if seen.contains(&class.name.as_str()) {
                break;
            }
            seen.push(&class.name);
            chain.push(class);
            current = class.superclass.as_deref().and_then(|s| self.class(s));
        }
        chain
    }

    /// True when `sub` equals `ancestor` or lists it among its superclasses.
    pub fn is_subclass_of(&self, sub: &str, ancestor: &str) -> bool {
        self.inheritance_chain(sub).iter().any(|c| c.name == ancestor)
    }

    /// All attributes visible on instances of `class`: superclass attributes
    /// first (root downward), own attributes last.
    pub fn effective_attributes(&self, class: &str) -> Result<Vec<&AttributeDef>, LookupError> {
        if self.class(class).is_none() {
            return Err(LookupError::UnknownClass(class.to_string()));
        }
        let mut chain = self.inheritance_chain(class);
        chain.reverse();
        Ok(chain.iter().flat_map(|c| c.attributes.iter()).collect())
    }

    /// Find the effective attribute `name` on `class`, walking the chain.
    pub fn effective_attribute(&self, class: &str, name: &str) -> Option<&AttributeDef> {
        self.inheritance_chain(class).iter().find_map(|c| c.attribute(name))
    }

    /// Dynamic-dispatch lookup: the definition in the nearest class on the
    /// chain from `class` upward that declares `method`.
    pub fn resolve_method(&self, class: &str, method: &str) -> Result<&MethodDef, LookupError> {
        if self.class(class).is_none() {
            return Err(LookupError::UnknownClass(class.to_string()));
        }
        self.inheritance_chain(class)
            .iter()
            .find_map(|c| c.method(method))
            .ok_or_else(|| LookupError::NoSuchMethod { class: class.to_string(), method: method.to_string() })
    }

    /// Association ends whose `class` is `class` or one of its ancestors,
    /// i.e. the roles instances of `class` may navigate. Returns the end the
    /// role is attached to together with the opposite end.
    pub fn roles_of(&self, class: &str) -> Vec<(&AssocDef, &AssocEnd, &AssocEnd)> {
        let chain: Vec<&str> = self.inheritance_chain(class).iter().map(|c| c.name.as_str()).collect();
        let mut out = Vec::new();
        for assoc in &self.associations {
            if chain.contains(&assoc.end_a.class.as_str()) {
                out.push((assoc, &assoc.end_a, &assoc.end_b));
            }
            if chain.contains(&assoc.end_b.class.as_str()) {
                out.push((assoc, &assoc.end_b, &assoc.end_a));
            }
        }
        out
    }

    /// Resolve a role name navigable from `class`.
    pub fn role_of(&self, class: &str, role: &str) -> Option<(&AssocDef, &AssocEnd, &AssocEnd)> {
        self.roles_of(class).into_iter().find(|(_, own, _)| own.role == role)
    }

    /// A class is abstract when any method on its chain is abstract and not
    /// overridden closer to the class.
    pub fn is_abstract(&self, class: &str) -> bool {
        let chain = self.inheritance_chain(class);
        let mut abstract_found = Vec::new();
        for c in &chain {
            for m in &c.methods {
                if m.abstract_ && !abstract_found.contains(&m.name.as_str()) {
                    // Overridden iff a class nearer the leaf declares a body.
                    let overridden = chain
                        .iter()
                        .take_while(|d| d.name != c.name)
                        .any(|d| d.method(&m.name).is_some_and(|o| !o.abstract_));
                    if !overridden {
                        return true;
                    }
                }
                abstract_found.push(m.name.as_str());
            }
        }
        false
    }

    /// Classes whose chain contains `ancestor`, excluding `ancestor` itself.
    pub fn descendants_of(&self, ancestor: &str) -> Vec<&ClassDef> {
        self.classes
            .iter()
            .filter(|c| c.name != ancestor && self.is_subclass_of(&c.name, ancestor))
            .collect()
    }

    pub fn strip_locations(&mut self) {
        for class in &mut self.classes {
            class.loc = SourceLocation::dummy();
            for attr in &mut class.attributes {
                attr.loc = SourceLocation::dummy();
            }
            for method in &mut class.methods {
                method.loc = SourceLocation::dummy();
                if let Some(body) = &mut method.body {
                    strip_block(body);
                }
            }
            if let Some(chart) = &mut class.statechart {
                chart.loc = SourceLocation::dummy();
                for t in &mut chart.transitions {
                    t.loc = SourceLocation::dummy();
                    if let Some(g) = &mut t.guard {
                        g.strip_locations();
                    }
                }
            }
        }
        for assoc in &mut self.associations {
            assoc.loc = SourceLocation::dummy();
        }
        for inv in &mut self.invariants {
            inv.loc = SourceLocation::dummy();
            inv.expr.strip_locations();
        }
    }
}

pub(crate) fn strip_block(block: &mut Block) {
    for stmt in &mut block.stmts {
        strip_stmt(stmt);
    }
}

fn strip_stmt(stmt: &mut Stmt) {
    match stmt {
        Stmt::Assign { target, value, loc } => {
            target.loc = SourceLocation::dummy();
            value.strip_locations();
            *loc = SourceLocation::dummy();
        }
        Stmt::Create { inits, loc, .. } => {
            inits.iter_mut().for_each(|(_, e)| e.strip_locations());
            *loc = SourceLocation::dummy();
        }
        Stmt::CallStmt { call, loc } => {
            call.strip_locations();
            *loc = SourceLocation::dummy();
        }
        Stmt::LinkAdd { target, value, loc } | Stmt::LinkRemove { target, value, loc } => {
            target.loc = SourceLocation::dummy();
            value.strip_locations();
            *loc = SourceLocation::dummy();
        }
        Stmt::Return { value, loc } => {
            value.strip_locations();
            *loc = SourceLocation::dummy();
        }
        Stmt::If { cond, then_block, else_block, loc } => {
            cond.strip_locations();
            strip_block(then_block);
            if let Some(b) = else_block {
                strip_block(b);
            }
            *loc = SourceLocation::dummy();
        }
        Stmt::Foreach { source, body, loc, .. } => {
            source.loc = SourceLocation::dummy();
            strip_block(body);
            *loc = SourceLocation::dummy();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attr(name: &str, ty: TypeRef) -> AttributeDef {
        AttributeDef { name: name.into(), ty, loc: SourceLocation::dummy() }
    }

    fn class(name: &str, superclass: Option<&str>, attrs: Vec<AttributeDef>) -> ClassDef {
        ClassDef {
            name: name.into(),
            superclass: superclass.map(String::from),
            published: false,
            attributes: attrs,
            methods: Vec::new(),
            statechart: None,
            loc: SourceLocation::dummy(),
        }
    }

    #[test]
    fn effective_attributes_pure_inheritance() {
        let model = Model {
            classes: vec![
                class("Person", None, vec![attr("name", TypeRef::Str)]),
                class("Guest", Some("Person"), vec![]),
            ],
            ..Default::default()
        };
        let names: Vec<_> = model.effective_attributes("Guest").unwrap().iter().map(|a| a.name.clone()).collect();
        assert_eq!(names, ["name"]);
    }

    #[test]
    fn effective_attributes_own_only() {
        let model = Model {
            classes: vec![
                class("Person", None, vec![]),
                class("Guest", Some("Person"), vec![attr("nickname", TypeRef::Str)]),
            ],
            ..Default::default()
        };
        let names: Vec<_> = model.effective_attributes("Guest").unwrap().iter().map(|a| a.name.clone()).collect();
        assert_eq!(names, ["nickname"]);
    }

    #[test]
    fn effective_attributes_superclass_first() {
        // Oracle: walk chain root to leaf and concatenate.
        let model = Model {
            classes: vec![
                class("Person", None, vec![attr("name", TypeRef::Str)]),
                class("Guest", Some("Person"), vec![attr("nickname", TypeRef::Str)]),
            ],
            ..Default::default()
        };
        let names: Vec<_> = model.effective_attributes("Guest").unwrap().iter().map(|a| a.name.clone()).collect();
        assert_eq!(names, ["name", "nickname"]);
    }

    #[test]
    fn effective_attributes_unknown_class() {
        let model = Model::default();
        assert_eq!(model.effective_attributes("Ghost"), Err(LookupError::UnknownClass("Ghost".into())));
    }

    fn method(name: &str, body_marker: i64) -> MethodDef {
        MethodDef {
            name: name.into(),
            published: false,
            abstract_: false,
            params: Vec::new(),
            return_ty: Some(TypeRef::Int),
            body: Some(Block {
                stmts: vec![Stmt::Return {
                    value: Expr::IntLit(body_marker, SourceLocation::dummy()),
                    loc: SourceLocation::dummy(),
                }],
            }),
            loc: SourceLocation::dummy(),
        }
    }

    #[test]
    fn resolve_method_single_definition() {
        let mut person = class("Person", None, vec![]);
        person.methods.push(method("checkPasswd", 1));
        let guest = class("Guest", Some("Person"), vec![]);
        let model = Model { classes: vec![person, guest], ..Default::default() };
        let m = model.resolve_method("Guest", "checkPasswd").unwrap();
        assert!(matches!(m.body.as_ref().unwrap().stmts[0], Stmt::Return { value: Expr::IntLit(1, _), .. }));
    }

    #[test]
    fn resolve_method_override_wins() {
        let mut person = class("Person", None, vec![]);
        person.methods.push(method("checkPasswd", 1));
        let mut guest = class("Guest", Some("Person"), vec![]);
        guest.methods.push(method("checkPasswd", 2));
        let model = Model { classes: vec![person, guest], ..Default::default() };
        let m = model.resolve_method("Guest", "checkPasswd").unwrap();
        assert!(matches!(m.body.as_ref().unwrap().stmts[0], Stmt::Return { value: Expr::IntLit(2, _), .. }));
    }

    #[test]
    fn resolve_method_absent() {
        let person = class("Person", None, vec![]);
        let guest = class("Guest", Some("Person"), vec![]);
        let model = Model { classes: vec![person, guest], ..Default::default() };
        assert_eq!(
            model.resolve_method("Guest", "frobnicate"),
            Err(LookupError::NoSuchMethod { class: "Guest".into(), method: "frobnicate".into() })
        );
    }

    #[test]
    fn resolve_method_agrees_with_superclass_when_not_declared() {
        let mut person = class("Person", None, vec![]);
        person.methods.push(method("m", 7));
        let guest = class("Guest", Some("Person"), vec![]);
        let model = Model { classes: vec![person, guest], ..Default::default() };
        assert_eq!(model.resolve_method("Guest", "m").unwrap(), model.resolve_method("Person", "m").unwrap());
    }

    #[test]
    fn abstractness_tracks_unoverridden_signatures() {
        let mut base = class("Base", None, vec![]);
        base.methods.push(MethodDef {
            name: "m".into(),
            published: false,
            abstract_: true,
            params: Vec::new(),
            return_ty: None,
            body: None,
            loc: SourceLocation::dummy(),
        });
        let mut solid = class("Solid", Some("Base"), vec![]);
        solid.methods.push(MethodDef { return_ty: None, ..method("m", 0) });
        solid.methods[0].body = Some(Block { stmts: vec![] });
        let hollow = class("Hollow", Some("Base"), vec![]);
        let model = Model { classes: vec![base, solid, hollow], ..Default::default() };
        assert!(model.is_abstract("Base"));
        assert!(model.is_abstract("Hollow"));
        assert!(!model.is_abstract("Solid"));
    }
}
