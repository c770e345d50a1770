//! Typed reference rewriting for rename refactorings.
//!
//! Every decision is made against the pre-rename model and the pre-rename
//! expression, then applied bottom-up: a node's rename decision is fixed
//! before its children mutate, so typing always sees consistent state.

use crate::expr::{CollOp, Expr};
use crate::model::{Model, Path, Stmt};
use crate::testkit::types::{DriverItem, SetupStmt, TestCase, TestSuite};
use crate::typecheck::{infer_quiet, StaticType, TypeEnv};

#[derive(Debug, Clone, Copy)]
pub enum RenameRule<'a> {
    Attr { class: &'a str, old: &'a str, new: &'a str },
    Method { class: &'a str, old: &'a str, new: &'a str },
    Class { old: &'a str, new: &'a str },
}

pub struct Rewriter<'m, 'r> {
    /// The pre-rename model; all typing questions go here.
    model: &'m Model,
    rule: RenameRule<'r>,
    pub count: usize,
}

impl<'m, 'r> Rewriter<'m, 'r> {
    pub fn new(model: &'m Model, rule: RenameRule<'r>) -> Self {
        Rewriter { model, rule, count: 0 }
    }

    fn class_matches(&self, class: &str, rule_class: &str) -> bool {
        self.model.is_subclass_of(class, rule_class)
    }

    /// Rename decision for member `name` on a receiver of static type `ty`.
    fn member_decision(&self, ty: Option<StaticType>, name: &str, want_method: bool) -> bool {
        let (rule_class, old) = match self.rule {
            RenameRule::Attr { class, old, .. } if !want_method => (class, old),
            RenameRule::Method { class, old, .. } if want_method => (class, old),
            _ => return false,
        };
        match ty {
            Some(StaticType::Object(class)) => name == old && self.class_matches(&class, rule_class),
            _ => false,
        }
    }

    fn new_member_name(&self) -> String {
        match self.rule {
            RenameRule::Attr { new, .. } | RenameRule::Method { new, .. } => new.to_string(),
            RenameRule::Class { .. } => unreachable!("class renames never rename members"),
        }
    }

    /// Rewrite a class-name occurrence in place when the class rule matches.
    pub fn rewrite_class_name(&mut self, name: &mut String) {
        if let RenameRule::Class { old, new } = self.rule {
            if name == old {
                *name = new.to_string();
                self.count += 1;
            }
        }
    }

    pub fn rewrite_expr(&mut self, env: &mut TypeEnv, expr: &mut Expr) {
        match expr {
            Expr::IntLit(..) | Expr::BoolLit(..) | Expr::StrLit(..) | Expr::SelfRef(_) | Expr::Name(..) => {}
            Expr::Nav { recv, name, .. } => {
                let decision = self.member_decision(infer_quiet(self.model, env, recv), name, false);
                self.rewrite_expr(env, recv);
                if decision {
                    *name = self.new_member_name();
                    self.count += 1;
                }
            }
            Expr::Call { recv, method, args, .. } => {
                let decision = self.member_decision(infer_quiet(self.model, env, recv), method, true);
                self.rewrite_expr(env, recv);
                for arg in args {
                    self.rewrite_expr(env, arg);
                }
                if decision {
                    *method = self.new_member_name();
                    self.count += 1;
                }
            }
            Expr::AllInstances { class, .. } => self.rewrite_class_name(class),
            Expr::InState { recv, .. } => self.rewrite_expr(env, recv),
            Expr::Not { expr: inner, .. } => self.rewrite_expr(env, inner),
            Expr::Binary { lhs, rhs, .. } => {
                self.rewrite_expr(env, lhs);
                self.rewrite_expr(env, rhs);
            }
            Expr::Coll { recv, op, .. } => {
                // Bind the iterator variable before descending into the
                // predicate, mirroring the checker's scoping.
                let elem = match infer_quiet(self.model, env, recv) {
                    Some(StaticType::SetOf(elem)) => Some(elem),
                    _ => None,
                };
                self.rewrite_expr(env, recv);
                match op {
                    CollOp::Size | CollOp::IsEmpty => {}
                    CollOp::Includes(arg) => self.rewrite_expr(env, arg),
                    CollOp::ForAll { var, pred } | CollOp::Exists { var, pred } | CollOp::Select { var, pred } => {
                        env.push_scope();
                        if let Some(elem) = elem {
                            env.bind(var, StaticType::Object(elem));
                        }
                        self.rewrite_expr(env, pred);
                        env.pop_scope();
                    }
                }
            }
        }
    }

    /// Rewrite a dotted path segment by segment. Each non-head segment may
    /// be an attribute subject to renaming; roles are never renamed.
    pub fn rewrite_path(&mut self, env: &mut TypeEnv, path: &mut Path) {
        let mut ty = env.lookup(path.head()).cloned();
        for segment in path.segments.iter_mut().skip(1) {
            let decision = self.member_decision(ty.clone(), segment, false);
            // Advance the type before mutating the segment name.
            ty = match &ty {
                Some(StaticType::Object(class)) => member_static_type(self.model, class, segment),
                _ => None,
            };
            if decision {
                *segment = self.new_member_name();
                self.count += 1;
            }
        }
    }

    fn path_type(&self, env: &TypeEnv, path: &Path, upto_last: bool) -> Option<StaticType> {
        let mut ty = env.lookup(path.head()).cloned();
        let end = if upto_last { path.segments.len() } else { path.segments.len() - 1 };
        for segment in &path.segments[1..end] {
            ty = match &ty {
                Some(StaticType::Object(class)) => member_static_type(self.model, class, segment),
                _ => None,
            };
        }
        ty
    }

    pub fn rewrite_block(&mut self, env: &mut TypeEnv, block: &mut crate::model::Block) {
        env.push_scope();
        for stmt in &mut block.stmts {
            self.rewrite_stmt(env, stmt);
        }
        env.pop_scope();
    }

    fn rewrite_stmt(&mut self, env: &mut TypeEnv, stmt: &mut Stmt) {
        match stmt {
            Stmt::Assign { target, value, .. } => {
                let local_ty = if target.segments.len() == 1 { infer_quiet(self.model, env, value) } else { None };
                self.rewrite_expr(env, value);
                self.rewrite_path(env, target);
                if target.segments.len() == 1 {
                    if let Some(ty) = local_ty {
                        env.bind(target.head(), ty);
                    }
                }
            }
            Stmt::Create { local, class, inits, .. } => {
                // Decide init-attribute renames against the pre-rename class.
                let pre_class = class.clone();
                for (name, value) in inits.iter_mut() {
                    if self.member_decision(Some(StaticType::Object(pre_class.clone())), name, false) {
                        *name = self.new_member_name();
                        self.count += 1;
                    }
                    self.rewrite_expr(env, value);
                }
                self.rewrite_class_name(class);
                env.bind(local, StaticType::Object(pre_class));
            }
            Stmt::CallStmt { call, .. } => self.rewrite_expr(env, call),
            Stmt::LinkAdd { target, value, .. } | Stmt::LinkRemove { target, value, .. } => {
                self.rewrite_expr(env, value);
                self.rewrite_path(env, target);
            }
            Stmt::Return { value, .. } => self.rewrite_expr(env, value),
            Stmt::If { cond, then_block, else_block, .. } => {
                self.rewrite_expr(env, cond);
                self.rewrite_block(env, then_block);
                if let Some(b) = else_block {
                    self.rewrite_block(env, b);
                }
            }
            Stmt::Foreach { var, source, body, .. } => {
                let elem = match self.path_type(env, source, true) {
                    Some(StaticType::SetOf(elem)) => Some(elem),
                    _ => None,
                };
                self.rewrite_path(env, source);
                env.push_scope();
                if let Some(elem) = elem {
                    env.bind(var, StaticType::Object(elem));
                }
                for stmt in &mut body.stmts {
                    self.rewrite_stmt(env, stmt);
                }
                env.pop_scope();
            }
        }
    }

    /// Rewrite every reference inside the model (declarations are the
    /// caller's job). Returns the number of rewritten occurrences.
    pub fn rewrite_model_references(&mut self, model: &mut Model) {
        for class in &mut model.classes {
            if let RenameRule::Class { old, new } = self.rule {
                if class.superclass.as_deref() == Some(old) {
                    class.superclass = Some(new.to_string());
                    self.count += 1;
                }
            }
            let owner = class.name.clone();
            for attr in &mut class.attributes {
                if let crate::model::TypeRef::Class(name) = &mut attr.ty {
                    self.rewrite_class_name(name);
                }
            }
            for method in &mut class.methods {
                for param in &mut method.params {
                    if let crate::model::TypeRef::Class(name) = &mut param.ty {
                        self.rewrite_class_name(name);
                    }
                }
                if let Some(crate::model::TypeRef::Class(name)) = &mut method.return_ty {
                    self.rewrite_class_name(name);
                }
                let params: Vec<(String, StaticType)> = method
                    .params
                    .iter()
                    .map(|p| (p.name.clone(), StaticType::from_type_ref(&p.ty)))
                    .collect();
                if let Some(body) = &mut method.body {
                    let mut env = TypeEnv::new();
                    env.bind("self", StaticType::Object(owner.clone()));
                    for (name, ty) in &params {
                        env.bind(name, ty.clone());
                    }
                    self.rewrite_block(&mut env, body);
                }
            }
            if let Some(chart) = &mut class.statechart {
                for t in &mut chart.transitions {
                    if self.member_decision(Some(StaticType::Object(owner.clone())), &t.trigger, true) {
                        t.trigger = self.new_member_name();
                        self.count += 1;
                    }
                    if let Some(guard) = &mut t.guard {
                        let mut env = TypeEnv::new();
                        env.bind("self", StaticType::Object(owner.clone()));
                        if let Ok(trigger) = self.model.resolve_method(&owner, pre_trigger_name(&t.trigger, self.rule)) {
                            for param in &trigger.params {
                                env.bind(&param.name, StaticType::from_type_ref(&param.ty));
                            }
                        }
                        self.rewrite_expr(&mut env, guard);
                    }
                }
            }
        }
        for assoc in &mut model.associations {
            self.rewrite_class_name(&mut assoc.end_a.class);
            self.rewrite_class_name(&mut assoc.end_b.class);
        }
        for inv in &mut model.invariants {
            let context = inv.context_class.clone();
            self.rewrite_class_name(&mut inv.context_class);
            let mut env = TypeEnv::new();
            env.bind("self", StaticType::Object(context));
            self.rewrite_expr(&mut env, &mut inv.expr);
        }
    }

    /// Rewrite one test case; returns how many occurrences changed in it.
    pub fn rewrite_test(&mut self, test: &mut TestCase) -> usize {
        let before = self.count;
        let mut env = TypeEnv::new();
        for stmt in &mut test.setup {
            match stmt {
                SetupStmt::Create { name, class, inits, .. } => {
                    let pre_class = class.clone();
                    for (attr, value) in inits.iter_mut() {
                        if self.member_decision(Some(StaticType::Object(pre_class.clone())), attr, false) {
                            *attr = self.new_member_name();
                            self.count += 1;
                        }
                        self.rewrite_expr(&mut env, value);
                    }
                    self.rewrite_class_name(class);
                    env.bind(name, StaticType::Object(pre_class));
                }
                SetupStmt::Link { target, .. } => {
                    self.rewrite_path(&mut env, target);
                }
            }
        }
        for item in &mut test.driver {
            match item {
                DriverItem::Trigger { target, method, args, .. } => {
                    let recv_ty = self.path_type(&env, target, true);
                    if self.member_decision(recv_ty, method, true) {
                        *method = self.new_member_name();
                        self.count += 1;
                    }
                    self.rewrite_path(&mut env, target);
                    for arg in args {
                        self.rewrite_expr(&mut env, arg);
                    }
                }
                DriverItem::Expect { receiver, method, args, .. } => {
                    let recv_ty = env.lookup(receiver).cloned();
                    if self.member_decision(recv_ty, method, true) {
                        *method = self.new_member_name();
                        self.count += 1;
                    }
                    for arg in args {
                        self.rewrite_expr(&mut env, arg);
                    }
                }
                DriverItem::Check { expr, .. } => self.rewrite_expr(&mut env, expr),
            }
        }
        if let Some(pattern) = &mut test.oracle.pattern {
            let mut pattern_classes = Vec::new();
            for entry in &mut pattern.entries {
                let pre_class = entry.class.clone();
                for (attr, value) in entry.constraints.iter_mut() {
                    if self.member_decision(Some(StaticType::Object(pre_class.clone())), attr, false) {
                        *attr = self.new_member_name();
                        self.count += 1;
                    }
                    self.rewrite_expr(&mut env, value);
                }
                self.rewrite_class_name(&mut entry.class);
                pattern_classes.push((entry.binding.clone(), pre_class));
            }
            env.push_scope();
            for (binding, class) in pattern_classes {
                if env.lookup(&binding).is_none() {
                    env.bind(&binding, StaticType::Object(class));
                }
            }
            for assert in &mut test.oracle.asserts {
                self.rewrite_expr(&mut env, assert);
            }
            env.pop_scope();
        } else {
            for assert in &mut test.oracle.asserts {
                self.rewrite_expr(&mut env, assert);
            }
        }
        self.count - before
    }

    pub fn rewrite_suite(&mut self, suite: &mut TestSuite) -> Vec<(String, usize)> {
        suite
            .tests
            .iter_mut()
            .map(|test| {
                let name = test.name.clone();
                let changed = self.rewrite_test(test);
                (name, changed)
            })
            .collect()
    }
}

/// Statechart triggers may already be rewritten when their guard is visited;
/// map the (possibly new) name back to the pre-rename one for resolution.
fn pre_trigger_name<'a>(current: &'a str, rule: RenameRule<'a>) -> &'a str {
    match rule {
        RenameRule::Method { old, new, .. } if current == new => old,
        _ => current,
    }
}

fn member_static_type(model: &Model, class: &str, name: &str) -> Option<StaticType> {
    if let Some(attr) = model.effective_attribute(class, name) {
        return Some(StaticType::from_type_ref(&attr.ty));
    }
    if let Some((_, _, other)) = model.role_of(class, name) {
        return Some(match other.mult {
            crate::model::Multiplicity::Many => StaticType::SetOf(other.class.clone()),
            _ => StaticType::Object(other.class.clone()),
        });
    }
    None
}
