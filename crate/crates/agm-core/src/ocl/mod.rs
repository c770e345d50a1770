//! OCL evaluation over an object space: guards, checkpoints, oracle
//! assertions, and global invariants.
//!
//! Evaluation is two-valued and side-effect-free. Anything that would be
//! `undefined` in full OCL is a hard evaluation error here, kept distinct
//! from a false result so tests report `error` rather than a misleading
//! `fail`. Pinned semantics shared with the reference evaluator:
//!
//! - `and`/`or`/`implies` short-circuit; an error in the unevaluated operand
//!   is not raised.
//! - Quantifiers iterate elements in ascending creation order and stop at
//!   the first deciding element or error.
//! - Query-method calls bypass statecharts entirely and may only dispatch to
//!   single-`return` bodies.
//! - `C.allInstances()` includes instances of subclasses.
//! - Int arithmetic is checked; overflow is an error.

use crate::expr::{BinOp, CollOp, Expr};
use crate::model::{Model, Multiplicity, Stmt};
use crate::runtime::{ObjectRef, ObjectSpace};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Str(String),
    Obj(ObjectRef),
    Set(BTreeSet<ObjectRef>),
}

impl Value {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Value::Int(_) => "Int",
            Value::Bool(_) => "Bool",
            Value::Str(_) => "String",
            Value::Obj(_) => "object",
            Value::Set(_) => "set",
        }
    }

    /// Render against a space so object refs show their labels.
    pub fn render(&self, space: &ObjectSpace) -> String {
        match self {
            Value::Int(v) => v.to_string(),
            Value::Bool(v) => v.to_string(),
            Value::Str(s) => {
                let mut out = String::from("\"");
                for ch in s.chars() {
                    match ch {
                        '"' => out.push_str("\\\""),
                        '\\' => out.push_str("\\\\"),
                        '\n' => out.push_str("\\n"),
                        '\t' => out.push_str("\\t"),
                        other => out.push(other),
                    }
                }
                out.push('"');
                out
            }
            Value::Obj(r) => space.label_of(*r),
            Value::Set(set) => {
                let items: Vec<String> = set.iter().map(|r| space.label_of(*r)).collect();
                format!("{{{}}}", items.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EvalErrorKind {
    UndefinedNavigation,
    AmbiguousNavigation,
    DivisionByZero,
    UnboundVariable,
    Overflow,
    NonQueryMethod,
    NoStatechart,
    BudgetExhausted,
    TypeMismatch,
}

impl EvalErrorKind {
    pub fn id(self) -> &'static str {
        match self {
            EvalErrorKind::UndefinedNavigation => "undefined-navigation",
            EvalErrorKind::AmbiguousNavigation => "ambiguous-navigation",
            EvalErrorKind::DivisionByZero => "division-by-zero",
            EvalErrorKind::UnboundVariable => "unbound-variable",
            EvalErrorKind::Overflow => "int-overflow",
            EvalErrorKind::NonQueryMethod => "non-query-method",
            EvalErrorKind::NoStatechart => "no-statechart",
            EvalErrorKind::BudgetExhausted => "budget-exhausted",
            EvalErrorKind::TypeMismatch => "type-mismatch",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error, Serialize)]
#[error("{}: {message}", kind.id())]
pub struct EvalError {
    pub kind: EvalErrorKind,
    pub message: String,
}

impl EvalError {
    pub fn new(kind: EvalErrorKind, message: impl Into<String>) -> Self {
        EvalError { kind, message: message.into() }
    }
}

/// Variable bindings for evaluation. Later bindings shadow earlier ones
/// (quantifier variables push while their predicate runs).
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    entries: Vec<(String, Value)>,
}

impl Bindings {
    pub fn new() -> Self {
        Bindings::default()
    }

    pub fn from_map(map: &BTreeMap<String, Value>) -> Self {
        Bindings { entries: map.iter().map(|(k, v)| (k.clone(), v.clone())).collect() }
    }

    pub fn bind(&mut self, name: impl Into<String>, value: Value) {
        self.entries.push((name.into(), value));
    }

    pub fn unbind_last(&mut self) {
        self.entries.pop();
    }

    pub fn lookup(&self, name: &str) -> Option<&Value> {
        self.entries.iter().rev().find(|(n, _)| n == name).map(|(_, v)| v)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Str(s) => write!(f, "{s:?}"),
            Value::Obj(r) => write!(f, "obj#{}", r.index()),
            Value::Set(set) => {
                let items: Vec<String> = set.iter().map(|r| format!("obj#{}", r.index())).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
        }
    }
}

fn expect_int(value: Value) -> Result<i64, EvalError> {
    match value {
        Value::Int(v) => Ok(v),
        other => Err(EvalError::new(EvalErrorKind::TypeMismatch, format!("expected Int, found {}", other.kind_name()))),
    }
}

fn expect_bool(value: Value) -> Result<bool, EvalError> {
    match value {
        Value::Bool(v) => Ok(v),
        other => Err(EvalError::new(EvalErrorKind::TypeMismatch, format!("expected Bool, found {}", other.kind_name()))),
    }
}

fn expect_obj(value: Value) -> Result<ObjectRef, EvalError> {
    match value {
        Value::Obj(r) => Ok(r),
        other => {
            Err(EvalError::new(EvalErrorKind::TypeMismatch, format!("expected an object, found {}", other.kind_name())))
        }
    }
}

fn expect_set(value: Value) -> Result<BTreeSet<ObjectRef>, EvalError> {
    match value {
        Value::Set(s) => Ok(s),
        other => Err(EvalError::new(EvalErrorKind::TypeMismatch, format!("expected a set, found {}", other.kind_name()))),
    }
}

/// Evaluate `expr` against `space` under `env`. `depth` bounds query-method
/// recursion. The space is never mutated.
pub fn eval_ocl(
    model: &Model,
    space: &ObjectSpace,
    env: &mut Bindings,
    expr: &Expr,
    depth: u32,
) -> Result<Value, EvalError> {
    match expr {
        Expr::IntLit(v, _) => Ok(Value::Int(*v)),
        Expr::BoolLit(v, _) => Ok(Value::Bool(*v)),
        Expr::StrLit(s, _) => Ok(Value::Str(s.clone())),
        Expr::SelfRef(_) => env
            .lookup("self")
            .cloned()
            .ok_or_else(|| EvalError::new(EvalErrorKind::UnboundVariable, "`self` is not bound")),
        Expr::Name(name, _) => env
            .lookup(name)
            .cloned()
            .ok_or_else(|| EvalError::new(EvalErrorKind::UnboundVariable, format!("`{name}` is not bound"))),
        Expr::Nav { recv, name, .. } => {
            let target = expect_obj(eval_ocl(model, space, env, recv, depth)?)?;
            navigate(model, space, target, name)
        }
        Expr::Call { recv, method, args, .. } => {
            let target = expect_obj(eval_ocl(model, space, env, recv, depth)?)?;
            let mut arg_values = Vec::with_capacity(args.len());
            for arg in args {
                arg_values.push(eval_ocl(model, space, env, arg, depth)?);
            }
            call_query(model, space, target, method, arg_values, depth)
        }
        Expr::AllInstances { class, .. } => Ok(Value::Set(space.instances_of(model, class))),
        Expr::InState { recv, state, .. } => {
            let target = expect_obj(eval_ocl(model, space, env, recv, depth)?)?;
            match space.object(target).and_then(|o| o.state.as_deref()) {
                Some(current) => Ok(Value::Bool(current == state)),
                None => Err(EvalError::new(
                    EvalErrorKind::NoStatechart,
                    format!("object `{}` carries no statechart state", space.label_of(target)),
                )),
            }
        }
        Expr::Not { expr: inner, .. } => {
            let v = expect_bool(eval_ocl(model, space, env, inner, depth)?)?;
            Ok(Value::Bool(!v))
        }
        Expr::Binary { op, lhs, rhs, .. } => eval_binary(model, space, env, *op, lhs, rhs, depth),
        Expr::Coll { recv, op, .. } => {
            let set = expect_set(eval_ocl(model, space, env, recv, depth)?)?;
            match op {
                CollOp::Size => Ok(Value::Int(set.len() as i64)),
                CollOp::IsEmpty => Ok(Value::Bool(set.is_empty())),
                CollOp::Includes(arg) => {
                    let needle = expect_obj(eval_ocl(model, space, env, arg, depth)?)?;
                    Ok(Value::Bool(set.contains(&needle)))
                }
                CollOp::ForAll { var, pred } => {
                    for elem in &set {
                        env.bind(var.clone(), Value::Obj(*elem));
                        let outcome = eval_ocl(model, space, env, pred, depth).and_then(expect_bool);
                        env.unbind_last();
                        if !outcome? {
                            return Ok(Value::Bool(false));
                        }
                    }
                    Ok(Value::Bool(true))
                }
                CollOp::Exists { var, pred } => {
                    for elem in &set {
                        env.bind(var.clone(), Value::Obj(*elem));
                        let outcome = eval_ocl(model, space, env, pred, depth).and_then(expect_bool);
                        env.unbind_last();
                        if outcome? {
                            return Ok(Value::Bool(true));
                        }
                    }
                    Ok(Value::Bool(false))
                }
                CollOp::Select { var, pred } => {
                    let mut picked = BTreeSet::new();
                    for elem in &set {
                        env.bind(var.clone(), Value::Obj(*elem));
                        let outcome = eval_ocl(model, space, env, pred, depth).and_then(expect_bool);
                        env.unbind_last();
                        if outcome? {
                            picked.insert(*elem);
                        }
                    }
                    Ok(Value::Set(picked))
                }
            }
        }
    }
}

fn eval_binary(
    model: &Model,
    space: &ObjectSpace,
    env: &mut Bindings,
    op: BinOp,
    lhs: &Expr,
    rhs: &Expr,
    depth: u32,
) -> Result<Value, EvalError> {
    match op {
        BinOp::And => {
            if !expect_bool(eval_ocl(model, space, env, lhs, depth)?)? {
                return Ok(Value::Bool(false));
            }
            Ok(Value::Bool(expect_bool(eval_ocl(model, space, env, rhs, depth)?)?))
        }
        BinOp::Or => {
            if expect_bool(eval_ocl(model, space, env, lhs, depth)?)? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(expect_bool(eval_ocl(model, space, env, rhs, depth)?)?))
        }
        BinOp::Implies => {
            if !expect_bool(eval_ocl(model, space, env, lhs, depth)?)? {
                return Ok(Value::Bool(true));
            }
            Ok(Value::Bool(expect_bool(eval_ocl(model, space, env, rhs, depth)?)?))
        }
        BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div => {
            let a = expect_int(eval_ocl(model, space, env, lhs, depth)?)?;
            let b = expect_int(eval_ocl(model, space, env, rhs, depth)?)?;
            let out = match op {
                BinOp::Add => a.checked_add(b),
                BinOp::Sub => a.checked_sub(b),
                BinOp::Mul => a.checked_mul(b),
                BinOp::Div => {
                    if b == 0 {
                        return Err(EvalError::new(EvalErrorKind::DivisionByZero, format!("{a} / 0")));
                    }
                    a.checked_div(b)
                }
                _ => unreachable!(),
            };
            out.map(Value::Int)
                .ok_or_else(|| EvalError::new(EvalErrorKind::Overflow, format!("{a} {} {b} overflows", op.symbol())))
        }
        BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
            let a = expect_int(eval_ocl(model, space, env, lhs, depth)?)?;
            let b = expect_int(eval_ocl(model, space, env, rhs, depth)?)?;
            Ok(Value::Bool(match op {
                BinOp::Lt => a < b,
                BinOp::Le => a <= b,
                BinOp::Gt => a > b,
                BinOp::Ge => a >= b,
                _ => unreachable!(),
            }))
        }
        BinOp::Eq | BinOp::Ne => {
            let a = eval_ocl(model, space, env, lhs, depth)?;
            let b = eval_ocl(model, space, env, rhs, depth)?;
            let equal = values_equal(&a, &b)?;
            Ok(Value::Bool(if op == BinOp::Eq { equal } else { !equal }))
        }
    }
}

/// Equality across values of the same kind; comparing different kinds is an
/// error, never silently false.
pub fn values_equal(a: &Value, b: &Value) -> Result<bool, EvalError> {
    match (a, b) {
        (Value::Int(x), Value::Int(y)) => Ok(x == y),
        (Value::Bool(x), Value::Bool(y)) => Ok(x == y),
        (Value::Str(x), Value::Str(y)) => Ok(x == y),
        (Value::Obj(x), Value::Obj(y)) => Ok(x == y),
        (Value::Set(x), Value::Set(y)) => Ok(x == y),
        _ => Err(EvalError::new(
            EvalErrorKind::TypeMismatch,
            format!("cannot compare {} with {}", a.kind_name(), b.kind_name()),
        )),
    }
}

/// Navigate an attribute or a link role on one object.
pub fn navigate(model: &Model, space: &ObjectSpace, target: ObjectRef, name: &str) -> Result<Value, EvalError> {
    let object = space
        .object(target)
        .ok_or_else(|| EvalError::new(EvalErrorKind::TypeMismatch, format!("dangling object reference #{}", target.index())))?;
    if let Some(value) = object.attrs.get(name) {
        return Ok(value.clone());
    }
    let class = object.class.clone();
    let Some((assoc, own, other)) = model.role_of(&class, name) else {
        return Err(EvalError::new(
            EvalErrorKind::TypeMismatch,
            format!("class `{class}` has no attribute or role `{name}`"),
        ));
    };
    let partners = space.linked(assoc, own, target);
    match other.mult {
        Multiplicity::Many => Ok(Value::Set(partners)),
        Multiplicity::One | Multiplicity::ZeroOrOne => match partners.len() {
            0 => Err(EvalError::new(
                EvalErrorKind::UndefinedNavigation,
                format!("role `{name}` of `{}` is unset", space.label_of(target)),
            )),
            1 => Ok(Value::Obj(*partners.iter().next().expect("one partner"))),
            n => Err(EvalError::new(
                EvalErrorKind::AmbiguousNavigation,
                format!("role `{name}` of `{}` holds {n} partners", space.label_of(target)),
            )),
        },
    }
}

/// Call a query method purely: dispatch on the dynamic class, require a
/// single-`return` body, and evaluate that return expression. Statecharts
/// are not consulted and no trace is recorded.
pub fn call_query(
    model: &Model,
    space: &ObjectSpace,
    target: ObjectRef,
    method: &str,
    args: Vec<Value>,
    depth: u32,
) -> Result<Value, EvalError> {
    if depth == 0 {
        return Err(EvalError::new(EvalErrorKind::BudgetExhausted, format!("query call depth exhausted at `{method}`")));
    }
    let class = space
        .object(target)
        .ok_or_else(|| EvalError::new(EvalErrorKind::TypeMismatch, format!("dangling object reference #{}", target.index())))?
        .class
        .clone();
    let def = model
        .resolve_method(&class, method)
        .map_err(|e| EvalError::new(EvalErrorKind::TypeMismatch, e.to_string()))?;
    if !def.is_query() {
        return Err(EvalError::new(
            EvalErrorKind::NonQueryMethod,
            format!("`{class}.{method}` is not a query method (its body is not a single return)"),
        ));
    }
    if args.len() != def.params.len() {
        return Err(EvalError::new(
            EvalErrorKind::TypeMismatch,
            format!("`{class}.{method}` takes {} argument(s), {} given", def.params.len(), args.len()),
        ));
    }
    let mut env = Bindings::new();
    env.bind("self", Value::Obj(target));
    for (param, value) in def.params.iter().zip(args) {
        env.bind(param.name.clone(), value);
    }
    let body = def.body.as_ref().expect("query methods have a body");
    let Stmt::Return { value, .. } = &body.stmts[0] else {
        unreachable!("is_query guarantees a single return statement");
    };
    eval_ocl(model, space, &mut env, value, depth - 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum InvariantOutcome {
    Pass,
    Fail,
    Error(EvalErrorKind, String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantVerdict {
    pub invariant: String,
    pub object: ObjectRef,
    pub outcome: InvariantOutcome,
}

/// Evaluate every model invariant with `self` bound to each instance of its
/// context class (subclass instances included). All verdicts are reported.
pub fn check_invariants(model: &Model, space: &ObjectSpace, depth: u32) -> Vec<InvariantVerdict> {
    let mut verdicts = Vec::new();
    for inv in &model.invariants {
        for instance in space.instances_of(model, &inv.context_class) {
            let mut env = Bindings::new();
            env.bind("self", Value::Obj(instance));
            let outcome = match eval_ocl(model, space, &mut env, &inv.expr, depth) {
                Ok(Value::Bool(true)) => InvariantOutcome::Pass,
                Ok(Value::Bool(false)) => InvariantOutcome::Fail,
                Ok(other) => InvariantOutcome::Error(
                    EvalErrorKind::TypeMismatch,
                    format!("invariant produced {} instead of Bool", other.kind_name()),
                ),
                Err(e) => InvariantOutcome::Error(e.kind, e.message),
            };
            verdicts.push(InvariantVerdict { invariant: inv.name.clone(), object: instance, outcome });
        }
    }
    verdicts
}
