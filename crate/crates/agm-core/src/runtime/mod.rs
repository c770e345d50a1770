//! The interpreter: instantiate object diagrams into an object space,
//! execute method calls through the action language with dynamic dispatch
//! and statechart enforcement, and record a trace of interactions.
//!
//! A single execution is strictly single-threaded and mutates its space in
//! place; distinct executions never share a space. Determinism is by
//! construction: argument evaluation is left to right, link sets iterate in
//! creation order, and `foreach` runs over a snapshot of its source set.

use crate::expr::Expr;
use crate::loc::SourceLocation;
use crate::model::{AssocEnd, Model, Multiplicity, Path, Stmt, TypeRef};
use crate::ocl::{self, Bindings, EvalError, Value};
use crate::testkit::types::SetupStmt;
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Identity of one object: its creation index within the space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct ObjectRef(u32);

impl ObjectRef {
    pub fn index(self) -> u32 {
        self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObjectInstance {
    pub class: String,
    /// Setup binding name, when the object came from an object diagram.
    pub label: Option<String>,
    pub attrs: BTreeMap<String, Value>,
    /// Current statechart state; present iff the class owns a statechart.
    pub state: Option<String>,
}

/// The runtime heap: concrete objects plus a duplicate-free link store.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ObjectSpace {
    objects: Vec<ObjectInstance>,
    links: BTreeSet<(String, ObjectRef, ObjectRef)>,
}

impl ObjectSpace {
    pub fn new() -> Self {
        ObjectSpace::default()
    }

    pub fn object(&self, r: ObjectRef) -> Option<&ObjectInstance> {
        self.objects.get(r.0 as usize)
    }

    pub fn object_mut(&mut self, r: ObjectRef) -> Option<&mut ObjectInstance> {
        self.objects.get_mut(r.0 as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ObjectRef, &ObjectInstance)> {
        self.objects.iter().enumerate().map(|(i, o)| (ObjectRef(i as u32), o))
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn push_object(&mut self, instance: ObjectInstance) -> ObjectRef {
        self.objects.push(instance);
        ObjectRef(self.objects.len() as u32 - 1)
    }

    /// Display name: the setup label when present, `$<index>` otherwise.
    pub fn label_of(&self, r: ObjectRef) -> String {
        match self.object(r).and_then(|o| o.label.as_deref()) {
            Some(label) => label.to_string(),
            None => format!("${}", r.0),
        }
    }

    pub fn class_of(&self, r: ObjectRef) -> Option<&str> {
        self.object(r).map(|o| o.class.as_str())
    }

    /// Instances whose class is `class` or a descendant, in creation order.
    pub fn instances_of(&self, model: &Model, class: &str) -> BTreeSet<ObjectRef> {
        self.iter()
            .filter(|(_, o)| model.is_subclass_of(&o.class, class))
            .map(|(r, _)| r)
            .collect()
    }

    pub fn add_link(&mut self, assoc: &str, own_end_is_a: bool, from: ObjectRef, to: ObjectRef) {
        let (a, b) = if own_end_is_a { (from, to) } else { (to, from) };
        self.links.insert((assoc.to_string(), a, b));
    }

    pub fn remove_link(&mut self, assoc: &str, own_end_is_a: bool, from: ObjectRef, to: ObjectRef) {
        let (a, b) = if own_end_is_a { (from, to) } else { (to, from) };
        self.links.remove(&(assoc.to_string(), a, b));
    }

    pub fn links(&self) -> impl Iterator<Item = &(String, ObjectRef, ObjectRef)> {
        self.links.iter()
    }

    /// Partners of `obj` across `assoc`, navigating from `own` toward the
    /// opposite end.
    pub fn linked(&self, assoc: &crate::model::AssocDef, own: &AssocEnd, obj: ObjectRef) -> BTreeSet<ObjectRef> {
        let own_is_a = std::ptr::eq(own, &assoc.end_a);
        self.links
            .iter()
            .filter(|(name, a, b)| {
                name == &assoc.name && ((own_is_a && *a == obj) || (!own_is_a && *b == obj))
            })
            .map(|(_, a, b)| if own_is_a { *b } else { *a })
            .collect()
    }

    /// Canonical text form: objects in creation order with attributes sorted
    /// by name, then links sorted lexicographically. Byte-stable.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (r, object) in self.iter() {
            out.push_str(&format!("object {} : {}", self.label_of(r), object.class));
            if let Some(state) = &object.state {
                out.push_str(&format!(" [{state}]"));
            }
            out.push_str(" {");
            // BTreeMap iterates sorted by attribute name.
            let rendered: Vec<String> =
                object.attrs.iter().map(|(name, value)| format!("{name} = {}", value.render(self))).collect();
            out.push_str(&rendered.join(", "));
            out.push_str("}\n");
        }
        let mut link_lines: Vec<String> = self
            .links
            .iter()
            .map(|(name, a, b)| format!("link {name} {} -- {}", self.label_of(*a), self.label_of(*b)))
            .collect();
        link_lines.sort();
        for line in link_lines {
            out.push_str(&line);
            out.push('\n');
        }
        out
    }

    /// Serialization of a single object; used by frame-property checks.
    pub fn serialize_object(&self, r: ObjectRef) -> String {
        let Some(object) = self.object(r) else { return String::new() };
        let attrs: Vec<String> =
            object.attrs.iter().map(|(name, value)| format!("{name} = {}", value.render(self))).collect();
        format!(
            "object {} : {}{} {{{}}}",
            self.label_of(r),
            object.class,
            object.state.as_deref().map(|s| format!(" [{s}]")).unwrap_or_default(),
            attrs.join(", ")
        )
    }
}

/// Execution limits. Steps count executed statements and calls; depth counts
/// nested interpreted calls plus pure query recursion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub max_steps: u64,
    pub max_depth: u32,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_steps: 100_000, max_depth: 1_000 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunConfig {
    pub budget: Budget,
    /// Downgrade `no-enabled-transition` to a no-op call, for exploratory
    /// runs against incomplete charts.
    pub ignore_unexpected_events: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TraceEvent {
    /// `caller` is `None` for calls issued by the test driver (TESTER).
    Call { caller: Option<ObjectRef>, callee: ObjectRef, method: String, args: Vec<Value> },
    Return { callee: ObjectRef, method: String, value: Option<Value> },
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn calls(&self) -> impl Iterator<Item = (&Option<ObjectRef>, &ObjectRef, &str, &[Value])> {
        self.events.iter().filter_map(|e| match e {
            TraceEvent::Call { caller, callee, method, args } => Some((caller, callee, method.as_str(), args.as_slice())),
            TraceEvent::Return { .. } => None,
        })
    }

    /// Human-readable rendering, one event per line.
    pub fn render(&self, space: &ObjectSpace) -> String {
        let mut out = String::new();
        for event in &self.events {
            match event {
                TraceEvent::Call { caller, callee, method, args } => {
                    let caller = match caller {
                        None => "TESTER".to_string(),
                        Some(r) => space.label_of(*r),
                    };
                    let args: Vec<String> = args.iter().map(|v| v.render(space)).collect();
                    out.push_str(&format!("call {caller} -> {}.{method}({})\n", space.label_of(*callee), args.join(", ")));
                }
                TraceEvent::Return { callee, method, value } => {
                    let value = value.as_ref().map(|v| v.render(space)).unwrap_or_else(|| "none".into());
                    out.push_str(&format!("return {}.{method} = {value}\n", space.label_of(*callee), value = value));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RuntimeErrorKind {
    AbstractInstantiation,
    AbstractCall,
    MissingRequiredAttribute,
    MultiplicityViolation,
    NoEnabledTransition,
    NondeterministicStatechart,
    BudgetExhausted,
    MissingReturn,
    UnknownBinding,
    TypeMismatch,
    Eval,
}

impl RuntimeErrorKind {
    pub fn id(self) -> &'static str {
        match self {
            RuntimeErrorKind::AbstractInstantiation => "abstract-instantiation",
            RuntimeErrorKind::AbstractCall => "abstract-call",
            RuntimeErrorKind::MissingRequiredAttribute => "missing-required-attribute",
            RuntimeErrorKind::MultiplicityViolation => "multiplicity-violation",
            RuntimeErrorKind::NoEnabledTransition => "no-enabled-transition",
            RuntimeErrorKind::NondeterministicStatechart => "nondeterministic-statechart",
            RuntimeErrorKind::BudgetExhausted => "budget-exhausted",
            RuntimeErrorKind::MissingReturn => "missing-return",
            RuntimeErrorKind::UnknownBinding => "unknown-binding",
            RuntimeErrorKind::TypeMismatch => "type-mismatch",
            RuntimeErrorKind::Eval => "eval-error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error, Serialize)]
#[error("{}: {message}", kind.id())]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    pub message: String,
    pub location: Option<SourceLocation>,
}

impl RuntimeError {
    pub fn new(kind: RuntimeErrorKind, message: impl Into<String>) -> Self {
        RuntimeError { kind, message: message.into(), location: None }
    }

    pub fn at(mut self, loc: &SourceLocation) -> Self {
        if self.location.is_none() {
            self.location = Some(loc.clone());
        }
        self
    }
}

impl From<EvalError> for RuntimeError {
    fn from(e: EvalError) -> Self {
        RuntimeError { kind: RuntimeErrorKind::Eval, message: e.to_string(), location: None }
    }
}

fn default_value(ty: &TypeRef) -> Option<Value> {
    match ty {
        TypeRef::Int => Some(Value::Int(0)),
        TypeRef::Bool => Some(Value::Bool(false)),
        TypeRef::Str => Some(Value::Str(String::new())),
        TypeRef::Class(_) => None,
    }
}

/// Build one object: initializer values first, then type defaults for every
/// unset primitive attribute. Object-typed attributes have no default and
/// must be set explicitly.
fn build_instance(
    model: &Model,
    class: &str,
    label: Option<String>,
    inits: Vec<(String, Value)>,
    loc: &SourceLocation,
) -> Result<ObjectInstance, RuntimeError> {
    if model.is_abstract(class) {
        return Err(RuntimeError::new(
            RuntimeErrorKind::AbstractInstantiation,
            format!("class `{class}` is abstract and cannot be instantiated"),
        )
        .at(loc));
    }
    let attrs_def = model
        .effective_attributes(class)
        .map_err(|e| RuntimeError::new(RuntimeErrorKind::TypeMismatch, e.to_string()).at(loc))?;
    let mut attrs = BTreeMap::new();
    for (name, value) in inits {
        attrs.insert(name, value);
    }
    for attr in attrs_def {
        if attrs.contains_key(&attr.name) {
            continue;
        }
        match default_value(&attr.ty) {
            Some(v) => {
                attrs.insert(attr.name.clone(), v);
            }
            None => {
                return Err(RuntimeError::new(
                    RuntimeErrorKind::MissingRequiredAttribute,
                    format!("attribute `{}` of class `{class}` is object-typed and has no default; set it explicitly", attr.name),
                )
                .at(loc));
            }
        }
    }
    let state = model.class(class).and_then(|c| c.statechart.as_ref()).map(|chart| chart.initial.clone());
    Ok(ObjectInstance { class: class.to_string(), label, attrs, state })
}

/// Check multiplicity upper bounds across all links. Called at instantiation
/// and at test end, not between statements.
pub fn validate_multiplicities(model: &Model, space: &ObjectSpace) -> Result<(), RuntimeError> {
    for assoc in &model.associations {
        let mut per_a: BTreeMap<ObjectRef, u32> = BTreeMap::new();
        let mut per_b: BTreeMap<ObjectRef, u32> = BTreeMap::new();
        for (name, a, b) in space.links() {
            if name != &assoc.name {
                continue;
            }
            *per_a.entry(*a).or_default() += 1;
            *per_b.entry(*b).or_default() += 1;
        }
        // end_a.mult bounds how many end-A partners one end-B object holds.
        if assoc.end_a.mult.is_single() {
            if let Some((obj, n)) = per_b.iter().find(|(_, n)| **n > 1) {
                return Err(RuntimeError::new(
                    RuntimeErrorKind::MultiplicityViolation,
                    format!(
                        "`{}` holds {n} `{}` partners via `{}`; multiplicity {} allows at most one",
                        space.label_of(*obj),
                        assoc.end_a.class,
                        assoc.name,
                        assoc.end_a.mult
                    ),
                ));
            }
        }
        if assoc.end_b.mult.is_single() {
            if let Some((obj, n)) = per_a.iter().find(|(_, n)| **n > 1) {
                return Err(RuntimeError::new(
                    RuntimeErrorKind::MultiplicityViolation,
                    format!(
                        "`{}` holds {n} `{}` partners via `{}`; multiplicity {} allows at most one",
                        space.label_of(*obj),
                        assoc.end_b.class,
                        assoc.name,
                        assoc.end_b.mult
                    ),
                ));
            }
        }
    }
    Ok(())
}

/// Instantiate an object-diagram section: every declared object exists with
/// all attributes initialized, statechart-bearing objects start in their
/// initial state, links are installed, and multiplicities validated.
pub fn instantiate(
    model: &Model,
    setup: &[SetupStmt],
    budget: &Budget,
) -> Result<(ObjectSpace, BTreeMap<String, Value>), RuntimeError> {
    let mut space = ObjectSpace::new();
    let mut bindings: BTreeMap<String, Value> = BTreeMap::new();
    for stmt in setup {
        match stmt {
            SetupStmt::Create { name, class, inits, loc } => {
                let mut env = Bindings::from_map(&bindings);
                let mut init_values = Vec::with_capacity(inits.len());
                for (attr, expr) in inits {
                    let value = ocl::eval_ocl(model, &space, &mut env, expr, budget.max_depth)
                        .map_err(|e| RuntimeError::from(e).at(loc))?;
                    init_values.push((attr.clone(), value));
                }
                let instance = build_instance(model, class, Some(name.clone()), init_values, loc)?;
                let r = space.push_object(instance);
                bindings.insert(name.clone(), Value::Obj(r));
            }
            SetupStmt::Link { target, value, loc } => {
                let mut env = Bindings::from_map(&bindings);
                let owner = resolve_path_object(model, &space, &mut env, target, budget.max_depth)
                    .map_err(|e| e.at(loc))?;
                let role = target.last();
                let owner_class = space.class_of(owner).unwrap_or_default().to_string();
                let Some((assoc, own, _)) = model.role_of(&owner_class, role) else {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::TypeMismatch,
                        format!("class `{owner_class}` has no role `{role}`"),
                    )
                    .at(loc));
                };
                let own_is_a = std::ptr::eq(own, &assoc.end_a);
                let assoc_name = assoc.name.clone();
                let partner = match bindings.get(value) {
                    Some(Value::Obj(r)) => *r,
                    _ => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::UnknownBinding,
                            format!("unbound object name `{value}`"),
                        )
                        .at(loc));
                    }
                };
                space.add_link(&assoc_name, own_is_a, owner, partner);
            }
        }
    }
    validate_multiplicities(model, &space)?;
    Ok((space, bindings))
}

/// Resolve a dotted path down to an object reference: the head comes from
/// the environment, the remaining segments navigate (each must stay single).
pub fn resolve_path_object(
    model: &Model,
    space: &ObjectSpace,
    env: &mut Bindings,
    path: &Path,
    depth: u32,
) -> Result<ObjectRef, RuntimeError> {
    let head = env
        .lookup(path.head())
        .cloned()
        .ok_or_else(|| RuntimeError::new(RuntimeErrorKind::UnknownBinding, format!("unbound name `{}`", path.head())))?;
    let mut current = match head {
        Value::Obj(r) => r,
        other => {
            return Err(RuntimeError::new(
                RuntimeErrorKind::TypeMismatch,
                format!("`{}` is {}, not an object", path.head(), other.kind_name()),
            ));
        }
    };
    let _ = depth;
    for segment in &path.segments[1..path.segments.len() - 1] {
        match ocl::navigate(model, space, current, segment) {
            Ok(Value::Obj(r)) => current = r,
            Ok(other) => {
                return Err(RuntimeError::new(
                    RuntimeErrorKind::TypeMismatch,
                    format!("cannot navigate `{segment}`: found {}, not an object", other.kind_name()),
                ));
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(current)
}

enum Flow {
    Normal,
    Returned(Value),
}

/// One interpreter run: shared step budget and trace across nested calls.
pub struct Interpreter<'m> {
    pub model: &'m Model,
    pub config: RunConfig,
    steps_left: u64,
    pub trace: Trace,
}

impl<'m> Interpreter<'m> {
    pub fn new(model: &'m Model, config: RunConfig) -> Self {
        let steps_left = config.budget.max_steps;
        Interpreter { model, config, steps_left, trace: Trace::default() }
    }

    fn spend_step(&mut self, loc: &SourceLocation) -> Result<(), RuntimeError> {
        if self.steps_left == 0 {
            return Err(RuntimeError::new(RuntimeErrorKind::BudgetExhausted, "step budget exhausted").at(loc));
        }
        self.steps_left -= 1;
        Ok(())
    }

    /// Execute `target.method(args)`. `caller` is `None` when the tester
    /// issues the call. The space is mutated in place; every call and return
    /// is appended to the trace in execution order.
    pub fn call(
        &mut self,
        space: &mut ObjectSpace,
        caller: Option<ObjectRef>,
        target: ObjectRef,
        method: &str,
        args: Vec<Value>,
        depth: u32,
        loc: &SourceLocation,
    ) -> Result<Option<Value>, RuntimeError> {
        self.spend_step(loc)?;
        if depth >= self.config.budget.max_depth {
            return Err(RuntimeError::new(RuntimeErrorKind::BudgetExhausted, format!("call depth exceeded at `{method}`"))
                .at(loc));
        }
        let class = space
            .class_of(target)
            .ok_or_else(|| {
                RuntimeError::new(RuntimeErrorKind::TypeMismatch, format!("dangling object reference #{}", target.index()))
            })?
            .to_string();
        let def = self
            .model
            .resolve_method(&class, method)
            .map_err(|e| RuntimeError::new(RuntimeErrorKind::TypeMismatch, e.to_string()).at(loc))?
            .clone();
        if def.abstract_ {
            return Err(RuntimeError::new(
                RuntimeErrorKind::AbstractCall,
                format!("`{class}.{method}` resolved to an abstract method"),
            )
            .at(loc));
        }

        self.trace.events.push(TraceEvent::Call { caller, callee: target, method: method.to_string(), args: args.clone() });

        // The statechart governs exactly its trigger alphabet: a call to a
        // method the chart never names passes through without a transition.
        if let Some(chart) = self.model.class(&class).and_then(|c| c.statechart.as_ref()) {
            if chart.has_trigger(method) {
                let current = space
                    .object(target)
                    .and_then(|o| o.state.clone())
                    .ok_or_else(|| RuntimeError::new(RuntimeErrorKind::TypeMismatch, "statechart object lost its state"))?;
                let mut guard_env = Bindings::new();
                guard_env.bind("self", Value::Obj(target));
                for (param, value) in def.params.iter().zip(&args) {
                    guard_env.bind(param.name.clone(), value.clone());
                }
                let mut enabled = Vec::new();
                for t in chart.transitions.iter().filter(|t| t.source == current && t.trigger == method) {
                    let open = match &t.guard {
                        None => true,
                        Some(guard) => match ocl::eval_ocl(self.model, space, &mut guard_env, guard, self.config.budget.max_depth) {
                            Ok(Value::Bool(b)) => b,
                            Ok(other) => {
                                return Err(RuntimeError::new(
                                    RuntimeErrorKind::TypeMismatch,
                                    format!("guard produced {} instead of Bool", other.kind_name()),
                                )
                                .at(&t.loc));
                            }
                            Err(e) => return Err(RuntimeError::from(e).at(&t.loc)),
                        },
                    };
                    if open {
                        enabled.push(t);
                    }
                }
                match enabled.len() {
                    0 => {
                        if self.config.ignore_unexpected_events {
                            self.trace.events.push(TraceEvent::Return { callee: target, method: method.to_string(), value: None });
                            return Ok(None);
                        }
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NoEnabledTransition,
                            format!("no transition enabled for `{method}` in state `{current}` of `{}`", space.label_of(target)),
                        )
                        .at(loc));
                    }
                    1 => {
                        let next = enabled[0].target.clone();
                        space.object_mut(target).expect("target exists").state = Some(next);
                    }
                    n => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::NondeterministicStatechart,
                            format!("{n} transitions enabled for `{method}` in state `{current}`"),
                        )
                        .at(loc));
                    }
                }
            }
        }

        let body = def.body.as_ref().expect("non-abstract methods have a body");
        let mut env = Bindings::new();
        env.bind("self", Value::Obj(target));
        for (param, value) in def.params.iter().zip(args) {
            env.bind(param.name.clone(), value);
        }
        let flow = self.exec_block(space, &mut env, &body.stmts, target, depth)?;
        let value = match flow {
            Flow::Returned(v) => Some(v),
            Flow::Normal => None,
        };
        self.trace.events.push(TraceEvent::Return { callee: target, method: method.to_string(), value: value.clone() });
        Ok(value)
    }

    fn exec_block(
        &mut self,
        space: &mut ObjectSpace,
        env: &mut Bindings,
        stmts: &[Stmt],
        self_ref: ObjectRef,
        depth: u32,
    ) -> Result<Flow, RuntimeError> {
        for stmt in stmts {
            match self.exec_stmt(space, env, stmt, self_ref, depth)? {
                Flow::Normal => {}
                returned => return Ok(returned),
            }
        }
        Ok(Flow::Normal)
    }

    /// Evaluate a statement-position expression: a top-level call is an
    /// interpreted (trace-recorded, statechart-engaged) call; anything else
    /// is pure OCL.
    fn eval_rhs(
        &mut self,
        space: &mut ObjectSpace,
        env: &mut Bindings,
        expr: &Expr,
        self_ref: ObjectRef,
        depth: u32,
    ) -> Result<Value, RuntimeError> {
        if let Expr::Call { recv, method, args, loc } = expr {
            let target = match ocl::eval_ocl(self.model, space, env, recv, self.config.budget.max_depth)? {
                Value::Obj(r) => r,
                other => {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::TypeMismatch,
                        format!("cannot call `{method}` on {}", other.kind_name()),
                    )
                    .at(loc));
                }
            };
            let mut arg_values = Vec::with_capacity(args.len());
            for arg in args {
                arg_values.push(ocl::eval_ocl(self.model, space, env, arg, self.config.budget.max_depth).map_err(RuntimeError::from)?);
            }
            let value = self.call(space, Some(self_ref), target, method, arg_values, depth + 1, loc)?;
            return value.ok_or_else(|| {
                RuntimeError::new(RuntimeErrorKind::MissingReturn, format!("`{method}` returned no value")).at(loc)
            });
        }
        ocl::eval_ocl(self.model, space, env, expr, self.config.budget.max_depth).map_err(RuntimeError::from)
    }

    fn exec_stmt(
        &mut self,
        space: &mut ObjectSpace,
        env: &mut Bindings,
        stmt: &Stmt,
        self_ref: ObjectRef,
        depth: u32,
    ) -> Result<Flow, RuntimeError> {
        match stmt {
            Stmt::Assign { target, value, loc } => {
                self.spend_step(loc)?;
                let v = self.eval_rhs(space, env, value, self_ref, depth)?;
                if target.segments.len() == 1 {
                    env.bind(target.head().to_string(), v);
                    return Ok(Flow::Normal);
                }
                let owner = resolve_path_object(self.model, space, env, target, self.config.budget.max_depth)
                    .map_err(|e| e.at(loc))?;
                let attr = target.last().to_string();
                let object = space.object_mut(owner).expect("owner exists");
                object.attrs.insert(attr, v);
                Ok(Flow::Normal)
            }
            Stmt::Create { local, class, inits, loc } => {
                self.spend_step(loc)?;
                let mut init_values = Vec::with_capacity(inits.len());
                for (attr, expr) in inits {
                    let value = ocl::eval_ocl(self.model, space, env, expr, self.config.budget.max_depth)
                        .map_err(|e| RuntimeError::from(e).at(loc))?;
                    init_values.push((attr.clone(), value));
                }
                let instance = build_instance(self.model, class, None, init_values, loc)?;
                let r = space.push_object(instance);
                env.bind(local.clone(), Value::Obj(r));
                Ok(Flow::Normal)
            }
            Stmt::CallStmt { call, loc } => {
                self.spend_step(loc)?;
                if let Expr::Call { recv, method, args, loc: call_loc } = call {
                    let target = match ocl::eval_ocl(self.model, space, env, recv, self.config.budget.max_depth)
                        .map_err(RuntimeError::from)?
                    {
                        Value::Obj(r) => r,
                        other => {
                            return Err(RuntimeError::new(
                                RuntimeErrorKind::TypeMismatch,
                                format!("cannot call `{method}` on {}", other.kind_name()),
                            )
                            .at(call_loc));
                        }
                    };
                    let mut arg_values = Vec::with_capacity(args.len());
                    for arg in args {
                        arg_values.push(
                            ocl::eval_ocl(self.model, space, env, arg, self.config.budget.max_depth)
                                .map_err(RuntimeError::from)?,
                        );
                    }
                    self.call(space, Some(self_ref), target, method, arg_values, depth + 1, call_loc)?;
                    Ok(Flow::Normal)
                } else {
                    Err(RuntimeError::new(RuntimeErrorKind::TypeMismatch, "expression statement is not a call").at(loc))
                }
            }
            Stmt::LinkAdd { target, value, loc } | Stmt::LinkRemove { target, value, loc } => {
                self.spend_step(loc)?;
                let owner = resolve_path_object(self.model, space, env, target, self.config.budget.max_depth)
                    .map_err(|e| e.at(loc))?;
                let role = target.last();
                let owner_class = space.class_of(owner).unwrap_or_default().to_string();
                let Some((assoc, own, _)) = self.model.role_of(&owner_class, role) else {
                    return Err(RuntimeError::new(
                        RuntimeErrorKind::TypeMismatch,
                        format!("class `{owner_class}` has no role `{role}`"),
                    )
                    .at(loc));
                };
                let own_is_a = std::ptr::eq(own, &assoc.end_a);
                let assoc_name = assoc.name.clone();
                let partner = match ocl::eval_ocl(self.model, space, env, value, self.config.budget.max_depth)
                    .map_err(RuntimeError::from)?
                {
                    Value::Obj(r) => r,
                    other => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::TypeMismatch,
                            format!("link target must be an object, found {}", other.kind_name()),
                        )
                        .at(loc));
                    }
                };
                if matches!(stmt, Stmt::LinkAdd { .. }) {
                    space.add_link(&assoc_name, own_is_a, owner, partner);
                } else {
                    space.remove_link(&assoc_name, own_is_a, owner, partner);
                }
                Ok(Flow::Normal)
            }
            Stmt::Return { value, loc } => {
                self.spend_step(loc)?;
                let v = self.eval_rhs(space, env, value, self_ref, depth)?;
                Ok(Flow::Returned(v))
            }
            Stmt::If { cond, then_block, else_block, loc } => {
                self.spend_step(loc)?;
                let c = match ocl::eval_ocl(self.model, space, env, cond, self.config.budget.max_depth)
                    .map_err(RuntimeError::from)?
                {
                    Value::Bool(b) => b,
                    other => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::TypeMismatch,
                            format!("if-condition produced {} instead of Bool", other.kind_name()),
                        )
                        .at(loc));
                    }
                };
                if c {
                    self.exec_block(space, env, &then_block.stmts, self_ref, depth)
                } else if let Some(else_block) = else_block {
                    self.exec_block(space, env, &else_block.stmts, self_ref, depth)
                } else {
                    Ok(Flow::Normal)
                }
            }
            Stmt::Foreach { var, source, body, loc } => {
                self.spend_step(loc)?;
                let owner = resolve_path_object(self.model, space, env, source, self.config.budget.max_depth)
                    .map_err(|e| e.at(loc))?;
                let role = source.last();
                // Snapshot before iterating: the body may rewire the links.
                let elements = match ocl::navigate(self.model, space, owner, role).map_err(RuntimeError::from)? {
                    Value::Set(set) => set,
                    other => {
                        return Err(RuntimeError::new(
                            RuntimeErrorKind::TypeMismatch,
                            format!("foreach source must be a set-valued role, found {}", other.kind_name()),
                        )
                        .at(loc));
                    }
                };
                for elem in elements {
                    env.bind(var.clone(), Value::Obj(elem));
                    let flow = self.exec_block(space, env, &body.stmts, self_ref, depth);
                    env.unbind_last();
                    match flow? {
                        Flow::Normal => {}
                        returned => return Ok(returned),
                    }
                }
                Ok(Flow::Normal)
            }
        }
    }
}

impl fmt::Display for ObjectRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
