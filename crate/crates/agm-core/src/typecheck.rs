//! Static name resolution and type checking of expressions, method bodies,
//! and test files against a model.
//!
//! Two checking contexts exist. Constraint positions (guards, invariants,
//! checkpoints, assertions, initializers, arguments) are pure: method calls
//! must target query methods. Statement positions additionally admit one
//! effectful call at the top level of the right-hand side.

use crate::expr::{BinOp, CollOp, Expr};
use crate::loc::{Diagnostic, SourceLocation};
use crate::model::{Block, ClassDef, Model, Multiplicity, Path, Stmt, TypeRef};
use crate::model::validate::{Finding, Severity};
use crate::testkit::types::{DriverItem, SenderRef, SetupStmt, TestSuite};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StaticType {
    Int,
    Bool,
    Str,
    Object(String),
    SetOf(String),
}

impl StaticType {
    pub fn from_type_ref(ty: &TypeRef) -> StaticType {
        match ty {
            TypeRef::Int => StaticType::Int,
            TypeRef::Bool => StaticType::Bool,
            TypeRef::Str => StaticType::Str,
            TypeRef::Class(name) => StaticType::Object(name.clone()),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            StaticType::Int => "Int".into(),
            StaticType::Bool => "Bool".into(),
            StaticType::Str => "String".into(),
            StaticType::Object(c) => c.clone(),
            StaticType::SetOf(c) => format!("Set({c})"),
        }
    }
}

/// Scoped bindings name -> static type. Locals are block-scoped and
/// single-assignment: a name may be bound once across all live scopes.
pub struct TypeEnv {
    scopes: Vec<BTreeMap<String, StaticType>>,
}

impl TypeEnv {
    pub fn new() -> Self {
        TypeEnv { scopes: vec![BTreeMap::new()] }
    }

    pub fn push_scope(&mut self) {
        self.scopes.push(BTreeMap::new());
    }

    pub fn pop_scope(&mut self) {
        self.scopes.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&StaticType> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    /// Bind a fresh name; false when the name is already taken in any scope.
    pub fn bind(&mut self, name: &str, ty: StaticType) -> bool {
        if self.lookup(name).is_some() {
            return false;
        }
        self.scopes.last_mut().expect("at least one scope").insert(name.to_string(), ty);
        true
    }
}

impl Default for TypeEnv {
    fn default() -> Self {
        Self::new()
    }
}

pub struct Checker<'m> {
    pub model: &'m Model,
    pub diagnostics: Vec<Diagnostic>,
    /// When false, problems are not recorded; used for inference-only walks.
    record: bool,
}

pub fn assignable(model: &Model, from: &StaticType, to: &StaticType) -> bool {
    match (from, to) {
        (StaticType::Int, StaticType::Int)
        | (StaticType::Bool, StaticType::Bool)
        | (StaticType::Str, StaticType::Str) => true,
        (StaticType::Object(d), StaticType::Object(c)) => model.is_subclass_of(d, c),
        _ => false,
    }
}

fn related(model: &Model, a: &str, b: &str) -> bool {
    model.is_subclass_of(a, b) || model.is_subclass_of(b, a)
}

impl<'m> Checker<'m> {
    pub fn new(model: &'m Model) -> Self {
        Checker { model, diagnostics: Vec::new(), record: true }
    }

    fn report(&mut self, loc: &SourceLocation, message: String) {
        if self.record {
            self.diagnostics.push(Diagnostic::new(loc.clone(), message));
        }
    }

    /// Navigate one member (attribute or role) from an object type.
    fn member_type(&mut self, class: &str, name: &str, loc: &SourceLocation) -> Option<StaticType> {
        if let Some(attr) = self.model.effective_attribute(class, name) {
            return Some(StaticType::from_type_ref(&attr.ty));
        }
        if let Some((_, _own, other)) = self.model.role_of(class, name) {
            return Some(match other.mult {
                Multiplicity::Many => StaticType::SetOf(other.class.clone()),
                Multiplicity::One | Multiplicity::ZeroOrOne => StaticType::Object(other.class.clone()),
            });
        }
        self.report(loc, format!("class `{class}` has no attribute or role `{name}`"));
        None
    }

    /// Infer a pure (constraint-position) expression.
    pub fn infer_pure(&mut self, env: &mut TypeEnv, expr: &Expr) -> Option<StaticType> {
        self.infer(env, expr, false)
    }

    /// Infer a statement-position expression: one effectful call may sit at
    /// the top level; everything beneath stays pure.
    pub fn infer_action(&mut self, env: &mut TypeEnv, expr: &Expr) -> Option<StaticType> {
        self.infer(env, expr, true)
    }

    fn infer(&mut self, env: &mut TypeEnv, expr: &Expr, effect_ok: bool) -> Option<StaticType> {
        match expr {
            Expr::IntLit(..) => Some(StaticType::Int),
            Expr::BoolLit(..) => Some(StaticType::Bool),
            Expr::StrLit(..) => Some(StaticType::Str),
            Expr::SelfRef(loc) => match env.lookup("self") {
                Some(ty) => Some(ty.clone()),
                None => {
                    self.report(loc, "`self` is not bound in this context".into());
                    None
                }
            },
            Expr::Name(name, loc) => match env.lookup(name) {
                Some(ty) => Some(ty.clone()),
                None => {
                    self.report(loc, format!("unbound name `{name}`"));
                    None
                }
            },
            Expr::Nav { recv, name, loc } => {
                let recv_ty = self.infer(env, recv, false)?;
                match recv_ty {
                    StaticType::Object(class) => self.member_type(&class, name, loc),
                    other => {
                        self.report(loc, format!("cannot navigate `{name}` on value of type {}", other.describe()));
                        None
                    }
                }
            }
            Expr::Call { recv, method, args, loc } => {
                let recv_ty = self.infer(env, recv, false)?;
                let StaticType::Object(class) = recv_ty else {
                    self.report(loc, format!("cannot call `{method}` on value of type {}", recv_ty.describe()));
                    return None;
                };
                let Ok(def) = self.model.resolve_method(&class, method) else {
                    self.report(loc, format!("unknown method `{method}` on class `{class}`"));
                    return None;
                };
                let (params, return_ty, is_query) = (
                    def.params.iter().map(|p| StaticType::from_type_ref(&p.ty)).collect::<Vec<_>>(),
                    def.return_ty.as_ref().map(StaticType::from_type_ref),
                    def.is_query(),
                );
                if !effect_ok && !is_query {
                    self.report(
                        loc,
                        format!("method `{class}.{method}` is not a query method and cannot be called here"),
                    );
                }
                if args.len() != params.len() {
                    self.report(
                        loc,
                        format!("`{class}.{method}` takes {} argument(s), {} given", params.len(), args.len()),
                    );
                } else {
                    for (arg, param_ty) in args.iter().zip(&params) {
                        if let Some(arg_ty) = self.infer(env, arg, false) {
                            if !assignable(self.model, &arg_ty, param_ty) {
                                self.report(
                                    arg.loc(),
                                    format!(
                                        "argument of type {} is not assignable to parameter of type {}",
                                        arg_ty.describe(),
                                        param_ty.describe()
                                    ),
                                );
                            }
                        }
                    }
                }
                match return_ty {
                    Some(ty) => Some(ty),
                    None => {
                        self.report(loc, format!("`{class}.{method}` returns nothing and cannot be used as a value"));
                        None
                    }
                }
            }
            Expr::AllInstances { class, loc } => {
                if self.model.class(class).is_none() {
                    self.report(loc, format!("unknown class `{class}`"));
                    return None;
                }
                Some(StaticType::SetOf(class.clone()))
            }
            Expr::InState { recv, state, loc } => {
                let recv_ty = self.infer(env, recv, false)?;
                let StaticType::Object(class) = recv_ty else {
                    self.report(loc, format!("oclInState applies to an object, not {}", recv_ty.describe()));
                    return None;
                };
                match self.model.class(&class).and_then(|c| c.statechart.as_ref()) {
                    Some(chart) if chart.states.iter().any(|s| s == state) => Some(StaticType::Bool),
                    Some(_) => {
                        self.report(loc, format!("class `{class}` has no state `{state}`"));
                        None
                    }
                    None => {
                        self.report(loc, format!("class `{class}` has no statechart"));
                        None
                    }
                }
            }
            Expr::Not { expr: inner, loc } => {
                if let Some(ty) = self.infer(env, inner, false) {
                    if ty != StaticType::Bool {
                        self.report(loc, format!("`not` needs a Bool, found {}", ty.describe()));
                    }
                }
                Some(StaticType::Bool)
            }
            Expr::Binary { op, lhs, rhs, loc } => {
                let lt = self.infer(env, lhs, false);
                let rt = self.infer(env, rhs, false);
                match op {
                    BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
                        for ty in [&lt, &rt].into_iter().flatten() {
                            if *ty != StaticType::Int {
                                self.report(loc, format!("arithmetic needs Int operands, found {}", ty.describe()));
                            }
                        }
                        Some(StaticType::Int)
                    }
                    BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                        for ty in [&lt, &rt].into_iter().flatten() {
                            if *ty != StaticType::Int {
                                self.report(loc, format!("ordering needs Int operands, found {}", ty.describe()));
                            }
                        }
                        Some(StaticType::Bool)
                    }
                    BinOp::Eq | BinOp::Ne => {
                        if let (Some(lt), Some(rt)) = (&lt, &rt) {
                            let ok = match (lt, rt) {
                                (StaticType::Object(a), StaticType::Object(b)) => related(self.model, a, b),
                                (a, b) => a == b && !matches!(a, StaticType::SetOf(_)),
                            };
                            if !ok {
                                self.report(
                                    loc,
                                    format!("cannot compare {} with {}", lt.describe(), rt.describe()),
                                );
                            }
                        }
                        Some(StaticType::Bool)
                    }
                    BinOp::And | BinOp::Or | BinOp::Implies => {
                        for ty in [&lt, &rt].into_iter().flatten() {
                            if *ty != StaticType::Bool {
                                self.report(
                                    loc,
                                    format!("`{}` needs Bool operands, found {}", op.symbol(), ty.describe()),
                                );
                            }
                        }
                        Some(StaticType::Bool)
                    }
                }
            }
            Expr::Coll { recv, op, loc } => {
                let recv_ty = self.infer(env, recv, false)?;
                let StaticType::SetOf(elem) = recv_ty else {
                    self.report(loc, format!("`->{}` applies to a set, not {}", op.name(), recv_ty.describe()));
                    return None;
                };
                match op {
                    CollOp::Size => Some(StaticType::Int),
                    CollOp::IsEmpty => Some(StaticType::Bool),
                    CollOp::Includes(arg) => {
                        if let Some(arg_ty) = self.infer(env, arg, false) {
                            match &arg_ty {
                                StaticType::Object(c) if related(self.model, c, &elem) => {}
                                other => self.report(
                                    arg.loc(),
                                    format!("includes expects an object of class `{elem}`, found {}", other.describe()),
                                ),
                            }
                        }
                        Some(StaticType::Bool)
                    }
                    CollOp::ForAll { var, pred } | CollOp::Exists { var, pred } | CollOp::Select { var, pred } => {
                        env.push_scope();
                        if !env.bind(var, StaticType::Object(elem.clone())) {
                            self.report(loc, format!("iterator `{var}` shadows an existing binding"));
                        }
                        if let Some(pred_ty) = self.infer(env, pred, false) {
                            if pred_ty != StaticType::Bool {
                                self.report(
                                    pred.loc(),
                                    format!("`->{}` predicate must be Bool, found {}", op.name(), pred_ty.describe()),
                                );
                            }
                        }
                        env.pop_scope();
                        match op {
                            CollOp::Select { .. } => Some(StaticType::SetOf(elem)),
                            _ => Some(StaticType::Bool),
                        }
                    }
                }
            }
        }
    }

    /// Resolve a dotted path. With `full = false` the final segment is left
    /// to the caller (assignment and link targets interpret it themselves).
    fn resolve_path(&mut self, env: &mut TypeEnv, path: &Path, full: bool) -> Option<StaticType> {
        let head = path.head();
        let mut ty = match head {
            "self" => env.lookup("self").cloned().or_else(|| {
                self.report(&path.loc, "`self` is not bound in this context".into());
                None
            })?,
            name => env.lookup(name).cloned().or_else(|| {
                self.report(&path.loc, format!("unbound name `{name}`"));
                None
            })?,
        };
        let upto = if full { path.segments.len() } else { path.segments.len() - 1 };
        for segment in &path.segments[1..upto] {
            let StaticType::Object(class) = &ty else {
                self.report(&path.loc, format!("cannot navigate `{segment}` through {}", ty.describe()));
                return None;
            };
            let class = class.clone();
            ty = self.member_type(&class, segment, &path.loc)?;
        }
        Some(ty)
    }

    // ---- method bodies ----

    /// Check a body against an externally prepared environment. Exposed for
    /// refactoring condition checks, which re-type a body at a new `self`.
    pub fn check_body_for_conditions(&mut self, env: &mut TypeEnv, block: &Block, return_ty: &Option<StaticType>) {
        self.check_block(env, block, return_ty);
    }

    fn check_block(&mut self, env: &mut TypeEnv, block: &Block, return_ty: &Option<StaticType>) {
        env.push_scope();
        for stmt in &block.stmts {
            self.check_stmt(env, stmt, return_ty);
        }
        env.pop_scope();
    }

    fn check_stmt(&mut self, env: &mut TypeEnv, stmt: &Stmt, return_ty: &Option<StaticType>) {
        match stmt {
            Stmt::Assign { target, value, loc } => {
                let value_ty = self.infer_action(env, value);
                if target.segments.len() == 1 {
                    let name = target.head();
                    if name == "self" {
                        self.report(loc, "`self` cannot be assigned".into());
                        return;
                    }
                    if let Some(ty) = value_ty {
                        if !env.bind(name, ty) {
                            self.report(loc, format!("`{name}` is already bound; locals are single-assignment"));
                        }
                    }
                    return;
                }
                let Some(prefix_ty) = self.resolve_path(env, target, false) else { return };
                let StaticType::Object(class) = prefix_ty else {
                    self.report(loc, format!("cannot assign through {}", prefix_ty.describe()));
                    return;
                };
                let attr_name = target.last();
                let Some(attr) = self.model.effective_attribute(&class, attr_name) else {
                    self.report(loc, format!("class `{class}` has no attribute `{attr_name}`"));
                    return;
                };
                let attr_ty = StaticType::from_type_ref(&attr.ty);
                if let Some(value_ty) = value_ty {
                    if !assignable(self.model, &value_ty, &attr_ty) {
                        self.report(
                            loc,
                            format!("cannot assign {} to attribute of type {}", value_ty.describe(), attr_ty.describe()),
                        );
                    }
                }
            }
            Stmt::Create { local, class, inits, loc } => {
                let Some(_def) = self.model.class(class) else {
                    self.report(loc, format!("unknown class `{class}`"));
                    return;
                };
                if self.model.is_abstract(class) {
                    self.report(loc, format!("class `{class}` is abstract and cannot be instantiated"));
                }
                self.check_inits(env, class, inits);
                if !env.bind(local, StaticType::Object(class.clone())) {
                    self.report(loc, format!("`{local}` is already bound; locals are single-assignment"));
                }
            }
            Stmt::CallStmt { call, loc } => {
                if let Expr::Call { .. } = call {
                    // Result may be discarded; a missing return type is fine
                    // here, so tolerate the "no value" outcome.
                    let before = self.diagnostics.len();
                    let out = self.infer_action(env, call);
                    if out.is_none() && self.diagnostics.len() > before {
                        let last = &self.diagnostics[self.diagnostics.len() - 1];
                        if last.message.contains("returns nothing") {
                            self.diagnostics.pop();
                        }
                    }
                } else {
                    self.report(loc, "expression statements must be method calls".into());
                }
            }
            Stmt::LinkAdd { target, value, loc } | Stmt::LinkRemove { target, value, loc } => {
                let Some(prefix_ty) = self.resolve_path(env, target, false) else { return };
                let StaticType::Object(class) = prefix_ty else {
                    self.report(loc, format!("cannot link through {}", prefix_ty.describe()));
                    return;
                };
                let role = target.last();
                let Some((_, _, other)) = self.model.role_of(&class, role) else {
                    self.report(loc, format!("class `{class}` has no role `{role}`"));
                    return;
                };
                let other_class = other.class.clone();
                if let Some(value_ty) = self.infer_pure(env, value) {
                    if !assignable(self.model, &value_ty, &StaticType::Object(other_class.clone())) {
                        self.report(
                            loc,
                            format!("link target must be a `{other_class}`, found {}", value_ty.describe()),
                        );
                    }
                }
            }
            Stmt::Return { value, loc } => {
                let value_ty = self.infer_action(env, value);
                match return_ty {
                    None => self.report(loc, "this method has no return type".into()),
                    Some(expected) => {
                        if let Some(actual) = value_ty {
                            if !assignable(self.model, &actual, expected) {
                                self.report(
                                    loc,
                                    format!("return type mismatch: expected {}, found {}", expected.describe(), actual.describe()),
                                );
                            }
                        }
                    }
                }
            }
            Stmt::If { cond, then_block, else_block, .. } => {
                if let Some(cond_ty) = self.infer_pure(env, cond) {
                    if cond_ty != StaticType::Bool {
                        self.report(cond.loc(), format!("if-condition must be Bool, found {}", cond_ty.describe()));
                    }
                }
                self.check_block(env, then_block, return_ty);
                if let Some(else_block) = else_block {
                    self.check_block(env, else_block, return_ty);
                }
            }
            Stmt::Foreach { var, source, body, loc } => {
                let source_ty = self.resolve_path(env, source, true);
                let elem = match source_ty {
                    Some(StaticType::SetOf(elem)) => Some(elem),
                    Some(other) => {
                        self.report(loc, format!("foreach source must be a set-valued role, found {}", other.describe()));
                        None
                    }
                    None => None,
                };
                env.push_scope();
                if let Some(elem) = elem {
                    if !env.bind(var, StaticType::Object(elem)) {
                        self.report(loc, format!("`{var}` is already bound; locals are single-assignment"));
                    }
                }
                for stmt in &body.stmts {
                    self.check_stmt(env, stmt, return_ty);
                }
                env.pop_scope();
            }
        }
    }

    fn check_inits(&mut self, env: &mut TypeEnv, class: &str, inits: &[(String, Expr)]) {
        let mut seen: Vec<&str> = Vec::new();
        for (name, value) in inits {
            if seen.contains(&name.as_str()) {
                self.report(value.loc(), format!("attribute `{name}` is initialized twice"));
            }
            seen.push(name);
            let Some(attr) = self.model.effective_attribute(class, name) else {
                self.report(value.loc(), format!("class `{class}` has no attribute `{name}`"));
                continue;
            };
            let attr_ty = StaticType::from_type_ref(&attr.ty);
            if let Some(value_ty) = self.infer_pure(env, value) {
                if !assignable(self.model, &value_ty, &attr_ty) {
                    self.report(
                        value.loc(),
                        format!("cannot initialize `{name}` ({}) with {}", attr_ty.describe(), value_ty.describe()),
                    );
                }
            }
        }
    }
}

/// Type-check all method bodies, statechart guards, and invariants of a
/// structurally sound model, appending a finding per problem.
pub fn check_model_types(model: &Model, findings: &mut Vec<Finding>) {
    let mut checker = Checker::new(model);
    for class in &model.classes {
        for method in &class.methods {
            let Some(body) = &method.body else { continue };
            let mut env = TypeEnv::new();
            env.bind("self", StaticType::Object(class.name.clone()));
            for param in &method.params {
                if !env.bind(&param.name, StaticType::from_type_ref(&param.ty)) {
                    checker.report(&method.loc, format!("parameter `{}` collides with another binding", param.name));
                }
            }
            let return_ty = method.return_ty.as_ref().map(StaticType::from_type_ref);
            checker.check_block(&mut env, body, &return_ty);
        }
        if let Some(chart) = &class.statechart {
            for t in &chart.transitions {
                let Some(guard) = &t.guard else { continue };
                let mut env = TypeEnv::new();
                env.bind("self", StaticType::Object(class.name.clone()));
                if let Ok(trigger) = model.resolve_method(&class.name, &t.trigger) {
                    for param in &trigger.params {
                        env.bind(&param.name, StaticType::from_type_ref(&param.ty));
                    }
                }
                if let Some(ty) = checker.infer_pure(&mut env, guard) {
                    if ty != StaticType::Bool {
                        checker.report(guard.loc(), format!("guard must be Bool, found {}", ty.describe()));
                    }
                }
            }
        }
    }
    for inv in &model.invariants {
        if model.class(&inv.context_class).is_none() {
            continue; // already reported structurally
        }
        let mut env = TypeEnv::new();
        env.bind("self", StaticType::Object(inv.context_class.clone()));
        if let Some(ty) = checker.infer_pure(&mut env, &inv.expr) {
            if ty != StaticType::Bool {
                checker.report(inv.expr.loc(), format!("invariant must be Bool, found {}", ty.describe()));
            }
        }
    }
    findings.extend(checker.diagnostics.into_iter().map(|d| Finding {
        severity: Severity::Error,
        rule: "type-error",
        location: d.location,
        message: d.message,
    }));
}

/// Environment of setup bindings (name -> declared class) for one test.
pub fn setup_env(test: &crate::testkit::types::TestCase) -> TypeEnv {
    let mut env = TypeEnv::new();
    for stmt in &test.setup {
        if let SetupStmt::Create { name, class, .. } = stmt {
            env.bind(name, StaticType::Object(class.clone()));
        }
    }
    env
}

/// Resolve and type-check a whole test suite against a model.
pub fn check_suite(model: &Model, suite: &TestSuite) -> Vec<Diagnostic> {
    let mut checker = Checker::new(model);
    let mut names: Vec<&str> = Vec::new();
    for test in &suite.tests {
        if names.contains(&test.name.as_str()) {
            checker.report(&test.loc, format!("test `{}` is declared more than once", test.name));
        }
        names.push(&test.name);
        check_test(model, &mut checker, test);
    }
    checker.diagnostics
}

fn check_test(model: &Model, checker: &mut Checker, test: &crate::testkit::types::TestCase) {
    // Setup: declaration order matters, bindings accumulate.
    let mut env = TypeEnv::new();
    for stmt in &test.setup {
        match stmt {
            SetupStmt::Create { name, class, inits, loc } => {
                if model.class(class).is_none() {
                    checker.report(loc, format!("unknown class `{class}`"));
                    continue;
                }
                checker.check_inits(&mut env, class, inits);
                if !env.bind(name, StaticType::Object(class.clone())) {
                    checker.report(loc, format!("object name `{name}` is already used"));
                }
            }
            SetupStmt::Link { target, value, loc } => {
                let Some(prefix_ty) = checker.resolve_path(&mut env, target, false) else { continue };
                let StaticType::Object(class) = prefix_ty else {
                    checker.report(loc, format!("cannot link through {}", prefix_ty.describe()));
                    continue;
                };
                let role = target.last();
                let Some((_, _, other)) = model.role_of(&class, role) else {
                    checker.report(loc, format!("class `{class}` has no role `{role}`"));
                    continue;
                };
                let other_class = other.class.clone();
                match env.lookup(value) {
                    Some(StaticType::Object(vclass)) => {
                        if !model.is_subclass_of(vclass, &other_class) {
                            checker.report(
                                loc,
                                format!("link target must be a `{other_class}`, found `{vclass}`"),
                            );
                        }
                    }
                    Some(other) => {
                        let d = other.describe();
                        checker.report(loc, format!("link target must be an object, found {d}"));
                    }
                    None => checker.report(loc, format!("unbound object name `{value}`")),
                }
            }
        }
    }

    // Driver items.
    for item in &test.driver {
        match item {
            DriverItem::Trigger { target, method, args, loc } => {
                let Some(target_ty) = checker.resolve_path(&mut env, target, true) else { continue };
                let StaticType::Object(class) = target_ty else {
                    checker.report(loc, format!("trigger target must be an object, found {}", target_ty.describe()));
                    continue;
                };
                let Ok(def) = model.resolve_method(&class, method) else {
                    checker.report(loc, format!("unknown method `{method}` on class `{class}`"));
                    continue;
                };
                let params: Vec<StaticType> = def.params.iter().map(|p| StaticType::from_type_ref(&p.ty)).collect();
                if args.len() != params.len() {
                    checker.report(
                        loc,
                        format!("`{class}.{method}` takes {} argument(s), {} given", params.len(), args.len()),
                    );
                    continue;
                }
                for (arg, param_ty) in args.iter().zip(&params) {
                    if let Some(arg_ty) = checker.infer_pure(&mut env, arg) {
                        if !assignable(model, &arg_ty, param_ty) {
                            checker.report(
                                arg.loc(),
                                format!(
                                    "argument of type {} is not assignable to parameter of type {}",
                                    arg_ty.describe(),
                                    param_ty.describe()
                                ),
                            );
                        }
                    }
                }
            }
            DriverItem::Expect { sender, receiver, method, args, loc } => {
                if let SenderRef::Binding(name) = sender {
                    if env.lookup(name).is_none() {
                        checker.report(loc, format!("unbound object name `{name}`"));
                    }
                }
                let Some(StaticType::Object(class)) = env.lookup(receiver).cloned() else {
                    checker.report(loc, format!("unbound object name `{receiver}`"));
                    continue;
                };
                let Ok(def) = model.resolve_method(&class, method) else {
                    checker.report(loc, format!("unknown method `{method}` on class `{class}`"));
                    continue;
                };
                // Empty parentheses leave arguments unconstrained.
                if !args.is_empty() && args.len() != def.params.len() {
                    checker.report(
                        loc,
                        format!(
                            "`{class}.{method}` takes {} argument(s); constrain all of them or none",
                            def.params.len()
                        ),
                    );
                }
                for arg in args {
                    checker.infer_pure(&mut env, arg);
                }
            }
            DriverItem::Check { expr, .. } => {
                if let Some(ty) = checker.infer_pure(&mut env, expr) {
                    if ty != StaticType::Bool {
                        checker.report(expr.loc(), format!("check must be Bool, found {}", ty.describe()));
                    }
                }
            }
        }
    }

    // Oracle: pattern bindings extend the environment for the assertions.
    env.push_scope();
    if let Some(pattern) = &test.oracle.pattern {
        for entry in &pattern.entries {
            if model.class(&entry.class).is_none() {
                checker.report(&entry.loc, format!("unknown class `{}`", entry.class));
                continue;
            }
            for (attr_name, value) in &entry.constraints {
                let Some(attr) = model.effective_attribute(&entry.class, attr_name) else {
                    checker.report(value.loc(), format!("class `{}` has no attribute `{attr_name}`", entry.class));
                    continue;
                };
                let attr_ty = StaticType::from_type_ref(&attr.ty);
                // Constraint values may reference setup bindings only; the
                // pattern scope is pushed after all values are checked.
                if let Some(value_ty) = checker.infer_pure(&mut env, value) {
                    if !assignable(model, &value_ty, &attr_ty) {
                        checker.report(
                            value.loc(),
                            format!("cannot compare `{attr_name}` ({}) with {}", attr_ty.describe(), value_ty.describe()),
                        );
                    }
                }
            }
        }
        // Bind pattern names after constraint checking. A binding that
        // repeats a setup name is a seed constraint, not a new binding.
        for entry in &pattern.entries {
            if env.lookup(&entry.binding).is_none() {
                env.bind(&entry.binding, StaticType::Object(entry.class.clone()));
            }
        }
        for link in &pattern.links {
            let from_class = match env.lookup(&link.from) {
                Some(StaticType::Object(c)) => Some(c.clone()),
                _ => {
                    checker.report(&link.loc, format!("unbound object name `{}`", link.from));
                    None
                }
            };
            if env.lookup(&link.to).is_none() {
                checker.report(&link.loc, format!("unbound object name `{}`", link.to));
            }
            if let Some(class) = from_class {
                if model.role_of(&class, &link.role).is_none() {
                    checker.report(&link.loc, format!("class `{class}` has no role `{}`", link.role));
                }
            }
        }
    }
    for assert in &test.oracle.asserts {
        if let Some(ty) = checker.infer_pure(&mut env, assert) {
            if ty != StaticType::Bool {
                checker.report(assert.loc(), format!("assert must be Bool, found {}", ty.describe()));
            }
        }
    }
    env.pop_scope();
}

/// Infer the static type of an expression without recording diagnostics.
/// Used by the refactoring rewriter, which re-walks already-checked code.
pub fn infer_quiet(model: &Model, env: &mut TypeEnv, expr: &Expr) -> Option<StaticType> {
    let mut checker = Checker { model, diagnostics: Vec::new(), record: false };
    checker.infer(env, expr, true)
}
