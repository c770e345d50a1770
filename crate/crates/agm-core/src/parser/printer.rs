//! Canonical formatter: 2-space indentation, one declaration per line,
//! declaration order preserved, no trailing whitespace, single trailing
//! newline. The printer is the fixed point the `fmt` command normalizes to.

use crate::expr::{BinOp, CollOp, Expr};
use crate::model::{Block, ClassDef, MethodDef, Model, Statechart, Stmt};
use crate::refactor::types::{DefaultValue, PullUpVariant, Refactoring};
use crate::testkit::types::{DriverItem, DriverMode, SenderRef, SetupStmt, TestCase, TestSuite};
use std::fmt::Write;

fn escape_str(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
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

// Binding strength, mirroring the parser's precedence ladder. Higher binds
// tighter. `Implies` is right-associative; comparisons do not associate.
fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Implies => 1,
        BinOp::Or => 2,
        BinOp::And => 3,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 5,
        BinOp::Add | BinOp::Sub => 6,
        BinOp::Mul | BinOp::Div => 7,
    }
}

const PREC_NOT: u8 = 4;
const PREC_POSTFIX: u8 = 8;

fn expr_prec(expr: &Expr) -> u8 {
    match expr {
        Expr::Binary { op, .. } => precedence(*op),
        Expr::Not { .. } => PREC_NOT,
        _ => PREC_POSTFIX,
    }
}

fn write_expr(out: &mut String, expr: &Expr, min_prec: u8) {
    let prec = expr_prec(expr);
    let needs_parens = prec < min_prec;
    if needs_parens {
        out.push('(');
    }
    match expr {
        Expr::IntLit(v, _) => {
            let _ = write!(out, "{v}");
        }
        Expr::BoolLit(v, _) => {
            let _ = write!(out, "{v}");
        }
        Expr::StrLit(s, _) => out.push_str(&escape_str(s)),
        Expr::SelfRef(_) => out.push_str("self"),
        Expr::Name(name, _) => out.push_str(name),
        Expr::Nav { recv, name, .. } => {
            write_expr(out, recv, PREC_POSTFIX);
            let _ = write!(out, ".{name}");
        }
        Expr::Call { recv, method, args, .. } => {
            write_expr(out, recv, PREC_POSTFIX);
            let _ = write!(out, ".{method}(");
            write_args(out, args);
            out.push(')');
        }
        Expr::AllInstances { class, .. } => {
            let _ = write!(out, "{class}.allInstances()");
        }
        Expr::InState { recv, state, .. } => {
            write_expr(out, recv, PREC_POSTFIX);
            let _ = write!(out, ".oclInState({state})");
        }
        Expr::Not { expr: inner, .. } => {
            out.push_str("not ");
            write_expr(out, inner, PREC_NOT);
        }
        Expr::Binary { op, lhs, rhs, .. } => {
            let (lmin, rmin) = match op {
                // Right-associative: a implies (b implies c) prints bare.
                BinOp::Implies => (prec + 1, prec),
                // Non-associative comparisons: nested ones need parens.
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => (prec + 1, prec + 1),
                _ => (prec, prec + 1),
            };
            write_expr(out, lhs, lmin);
            let _ = write!(out, " {} ", op.symbol());
            write_expr(out, rhs, rmin);
        }
        Expr::Coll { recv, op, .. } => {
            write_expr(out, recv, PREC_POSTFIX);
            match op {
                CollOp::Size => out.push_str("->size()"),
                CollOp::IsEmpty => out.push_str("->isEmpty()"),
                CollOp::Includes(arg) => {
                    out.push_str("->includes(");
                    write_expr(out, arg, 0);
                    out.push(')');
                }
                CollOp::ForAll { var, pred } | CollOp::Exists { var, pred } | CollOp::Select { var, pred } => {
                    let _ = write!(out, "->{}({var} | ", op.name());
                    write_expr(out, pred, 0);
                    out.push(')');
                }
            }
        }
    }
    if needs_parens {
        out.push(')');
    }
}

fn write_args(out: &mut String, args: &[Expr]) {
    for (i, arg) in args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, arg, 0);
    }
}

pub fn format_expr(expr: &Expr) -> String {
    let mut out = String::new();
    write_expr(&mut out, expr, 0);
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("  ");
    }
}

fn write_inits(out: &mut String, inits: &[(String, Expr)]) {
    out.push('{');
    for (i, (name, value)) in inits.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{name} = ");
        write_expr(out, value, 0);
    }
    out.push('}');
}

fn write_block(out: &mut String, block: &Block, level: usize) {
    out.push_str("{\n");
    for stmt in &block.stmts {
        write_stmt(out, stmt, level + 1);
    }
    indent(out, level);
    out.push('}');
}

fn write_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    indent(out, level);
    match stmt {
        Stmt::Assign { target, value, .. } => {
            let _ = write!(out, "{target} = ");
            write_expr(out, value, 0);
            out.push_str(";\n");
        }
        Stmt::Create { local, class, inits, .. } => {
            let _ = write!(out, "{local} = new {class}");
            write_inits(out, inits);
            out.push_str(";\n");
        }
        Stmt::CallStmt { call, .. } => {
            write_expr(out, call, 0);
            out.push_str(";\n");
        }
        Stmt::LinkAdd { target, value, .. } => {
            let _ = write!(out, "{target} += ");
            write_expr(out, value, 0);
            out.push_str(";\n");
        }
        Stmt::LinkRemove { target, value, .. } => {
            let _ = write!(out, "{target} -= ");
            write_expr(out, value, 0);
            out.push_str(";\n");
        }
        Stmt::Return { value, .. } => {
            out.push_str("return ");
            write_expr(out, value, 0);
            out.push_str(";\n");
        }
        Stmt::If { cond, then_block, else_block, .. } => {
            out.push_str("if (");
            write_expr(out, cond, 0);
            out.push_str(") ");
            write_block(out, then_block, level);
            if let Some(else_block) = else_block {
                out.push_str(" else ");
                write_block(out, else_block, level);
            }
            out.push('\n');
        }
        Stmt::Foreach { var, source, body, .. } => {
            let _ = write!(out, "foreach {var} in {source} ");
            write_block(out, body, level);
            out.push('\n');
        }
    }
}

fn write_method(out: &mut String, method: &MethodDef, level: usize) {
    indent(out, level);
    if method.published {
        out.push_str("published ");
    }
    if method.abstract_ {
        out.push_str("abstract ");
    }
    let _ = write!(out, "method {}(", method.name);
    for (i, param) in method.params.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{}: {}", param.name, param.ty);
    }
    out.push(')');
    if let Some(ret) = &method.return_ty {
        let _ = write!(out, ": {ret}");
    }
    if let Some(body) = &method.body {
        out.push(' ');
        write_block(out, body, level);
    }
    out.push('\n');
}

fn write_statechart(out: &mut String, chart: &Statechart, level: usize) {
    indent(out, level);
    out.push_str("statechart {\n");
    indent(out, level + 1);
    let _ = writeln!(out, "initial {};", chart.initial);
    for state in &chart.states {
        indent(out, level + 1);
        let _ = writeln!(out, "state {state};");
    }
    for t in &chart.transitions {
        indent(out, level + 1);
        let _ = write!(out, "{} -> {} on {}", t.source, t.target, t.trigger);
        if let Some(guard) = &t.guard {
            out.push_str(" [");
            write_expr(out, guard, 0);
            out.push(']');
        }
        out.push_str(";\n");
    }
    indent(out, level);
    out.push_str("}\n");
}

fn write_class(out: &mut String, class: &ClassDef) {
    let _ = write!(out, "class {}", class.name);
    if let Some(sup) = &class.superclass {
        let _ = write!(out, " extends {sup}");
    }
    if class.published {
        out.push_str(" published");
    }
    out.push_str(" {\n");
    for attr in &class.attributes {
        indent(out, 1);
        let _ = writeln!(out, "attr {}: {}", attr.name, attr.ty);
    }
    for method in &class.methods {
        write_method(out, method, 1);
    }
    if let Some(chart) = &class.statechart {
        write_statechart(out, chart, 1);
    }
    out.push_str("}\n");
}

/// Render a model in canonical form.
pub fn print_model(model: &Model) -> String {
    let mut out = String::new();
    for class in &model.classes {
        write_class(&mut out, class);
    }
    for assoc in &model.associations {
        let _ = writeln!(
            out,
            "assoc {} {}.{} {} -- {} {}.{}",
            assoc.name,
            assoc.end_a.class,
            assoc.end_a.role,
            assoc.end_a.mult,
            assoc.end_b.mult,
            assoc.end_b.class,
            assoc.end_b.role
        );
    }
    for inv in &model.invariants {
        let _ = write!(out, "invariant {} context {}: ", inv.name, inv.context_class);
        write_expr(&mut out, &inv.expr, 0);
        out.push('\n');
    }
    if out.is_empty() {
        out.push('\n');
    }
    out
}

fn write_test(out: &mut String, test: &TestCase) {
    let _ = writeln!(out, "test {} {} {{", test.category, test.name);
    indent(out, 1);
    out.push_str("setup {\n");
    for stmt in &test.setup {
        indent(out, 2);
        match stmt {
            SetupStmt::Create { name, class, inits, .. } => {
                let _ = write!(out, "{name} = new {class}");
                write_inits(out, inits);
                out.push_str(";\n");
            }
            SetupStmt::Link { target, value, .. } => {
                let _ = writeln!(out, "link {target} += {value};");
            }
        }
    }
    indent(out, 1);
    out.push_str("}\n");

    indent(out, 1);
    out.push_str("driver");
    match test.driver_mode {
        Some(DriverMode::Strict) => out.push_str(" strict"),
        Some(DriverMode::Loose) => out.push_str(" loose"),
        None => {}
    }
    out.push_str(" {\n");
    for item in &test.driver {
        indent(out, 2);
        match item {
            DriverItem::Trigger { target, method, args, .. } => {
                let _ = write!(out, "{target}.{method}(");
                write_args(out, args);
                out.push_str(");\n");
            }
            DriverItem::Expect { sender, receiver, method, args, .. } => {
                let sender = match sender {
                    SenderRef::Tester => "TESTER".to_string(),
                    SenderRef::Binding(name) => name.clone(),
                };
                let _ = write!(out, "expect {sender} -> {receiver} : {method}(");
                write_args(out, args);
                out.push_str(");\n");
            }
            DriverItem::Check { expr, .. } => {
                out.push_str("check ");
                write_expr(out, expr, 0);
                out.push_str(";\n");
            }
        }
    }
    indent(out, 1);
    out.push_str("}\n");

    indent(out, 1);
    out.push_str("oracle {\n");
    if let Some(pattern) = &test.oracle.pattern {
        indent(out, 2);
        out.push_str("pattern {\n");
        for entry in &pattern.entries {
            indent(out, 3);
            let _ = write!(out, "{}: {}", entry.binding, entry.class);
            write_inits(out, &entry.constraints);
            out.push('\n');
        }
        for link in &pattern.links {
            indent(out, 3);
            let _ = writeln!(out, "link {}.{} += {};", link.from, link.role, link.to);
        }
        indent(out, 2);
        out.push_str("}\n");
    }
    for assert in &test.oracle.asserts {
        indent(out, 2);
        out.push_str("assert ");
        write_expr(out, assert, 0);
        out.push_str(";\n");
    }
    indent(out, 1);
    out.push_str("}\n");
    out.push_str("}\n");
}

/// Render a test suite in canonical form.
pub fn print_tests(suite: &TestSuite) -> String {
    let mut out = String::new();
    for test in &suite.tests {
        write_test(&mut out, test);
    }
    if out.is_empty() {
        out.push('\n');
    }
    out
}

/// Render a refactoring script in canonical form, one step per line.
pub fn print_refactorings(steps: &[Refactoring]) -> String {
    let mut out = String::new();
    for step in steps {
        match step {
            Refactoring::PullUpAttribute { subclass, attribute, superclass, default, .. } => {
                let default = match default {
                    DefaultValue::Int(v) => v.to_string(),
                    DefaultValue::Bool(v) => v.to_string(),
                    DefaultValue::Str(s) => escape_str(s),
                };
                let _ = writeln!(out, "pull_up_attr {subclass}.{attribute} -> {superclass} default {default};");
            }
            Refactoring::PullUpMethod { subclass, method, superclass, variant, .. } => {
                let v = match variant {
                    PullUpVariant::Override => "override",
                    PullUpVariant::AbstractSignature => "abstract",
                };
                let _ = writeln!(out, "pull_up_method {subclass}.{method} -> {superclass} variant {v};");
            }
            Refactoring::RenameAttribute { class, old, new, .. } => {
                let _ = writeln!(out, "rename_attr {class}.{old} -> {new};");
            }
            Refactoring::RenameMethod { class, old, new, .. } => {
                let _ = writeln!(out, "rename_method {class}.{old} -> {new};");
            }
            Refactoring::RenameClass { old, new, .. } => {
                let _ = writeln!(out, "rename_class {old} -> {new};");
            }
        }
    }
    if out.is_empty() {
        out.push('\n');
    }
    out
}
