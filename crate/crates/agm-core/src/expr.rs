//! Expression AST.
//!
//! One expression grammar serves every constraint position (guards,
//! invariants, checkpoints, oracle assertions) and the right-hand sides of
//! action-language statements. Purity is a property of the checking context,
//! not of the syntax: constraint positions admit query-method calls only,
//! statement positions additionally admit one top-level effectful call.

use crate::loc::SourceLocation;
use serde::Serialize;
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BinOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
    And,
    Or,
    Implies,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::Implies => "implies",
        }
    }
}

/// Collection operations applied with `->`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum CollOp {
    Size,
    IsEmpty,
    Includes(Box<Expr>),
    ForAll { var: String, pred: Box<Expr> },
    Exists { var: String, pred: Box<Expr> },
    Select { var: String, pred: Box<Expr> },
}

impl CollOp {
    pub fn name(&self) -> &'static str {
        match self {
            CollOp::Size => "size",
            CollOp::IsEmpty => "isEmpty",
            CollOp::Includes(_) => "includes",
            CollOp::ForAll { .. } => "forAll",
            CollOp::Exists { .. } => "exists",
            CollOp::Select { .. } => "select",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Expr {
    IntLit(i64, SourceLocation),
    BoolLit(bool, SourceLocation),
    StrLit(String, SourceLocation),
    SelfRef(SourceLocation),
    /// A free variable: a setup binding, parameter, local, or quantifier var.
    Name(String, SourceLocation),
    /// Attribute or link-role navigation `recv.name`.
    Nav { recv: Box<Expr>, name: String, loc: SourceLocation },
    /// Method call `recv.method(args)`.
    Call { recv: Box<Expr>, method: String, args: Vec<Expr>, loc: SourceLocation },
    /// `Class.allInstances()`.
    AllInstances { class: String, loc: SourceLocation },
    /// `recv.oclInState(State)`.
    InState { recv: Box<Expr>, state: String, loc: SourceLocation },
    Not { expr: Box<Expr>, loc: SourceLocation },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr>, loc: SourceLocation },
    /// `recv->op(...)` over a set value.
    Coll { recv: Box<Expr>, op: CollOp, loc: SourceLocation },
}

impl Expr {
    pub fn loc(&self) -> &SourceLocation {
        match self {
            Expr::IntLit(_, l)
            | Expr::BoolLit(_, l)
            | Expr::StrLit(_, l)
            | Expr::SelfRef(l)
            | Expr::Name(_, l) => l,
            Expr::Nav { loc, .. }
            | Expr::Call { loc, .. }
            | Expr::AllInstances { loc, .. }
            | Expr::InState { loc, .. }
            | Expr::Not { loc, .. }
            | Expr::Binary { loc, .. }
            | Expr::Coll { loc, .. } => loc,
        }
    }

    /// Reset every location to the dummy value, recursively. Used for
    /// structural comparison that ignores source positions.
    pub fn strip_locations(&mut self) {
        match self {
            Expr::IntLit(_, l)
            | Expr::BoolLit(_, l)
            | Expr::StrLit(_, l)
            | Expr::SelfRef(l)
            | Expr::Name(_, l) => *l = SourceLocation::dummy(),
            Expr::Nav { recv, loc, .. } => {
                recv.strip_locations();
                *loc = SourceLocation::dummy();
            }
            Expr::Call { recv, args, loc, .. } => {
                recv.strip_locations();
                args.iter_mut().for_each(Expr::strip_locations);
                *loc = SourceLocation::dummy();
            }
            Expr::AllInstances { loc, .. } => *loc = SourceLocation::dummy(),
            Expr::InState { recv, loc, .. } => {
                recv.strip_locations();
                *loc = SourceLocation::dummy();
            }
            Expr::Not { expr, loc } => {
                expr.strip_locations();
                *loc = SourceLocation::dummy();
            }
            Expr::Binary { lhs, rhs, loc, .. } => {
                lhs.strip_locations();
                rhs.strip_locations();
                *loc = SourceLocation::dummy();
            }
            Expr::Coll { recv, op, loc } => {
                recv.strip_locations();
                match op {
                    CollOp::Size | CollOp::IsEmpty => {}
                    CollOp::Includes(e) => e.strip_locations(),
                    CollOp::ForAll { pred, .. }
                    | CollOp::Exists { pred, .. }
                    | CollOp::Select { pred, .. } => pred.strip_locations(),
                }
                *loc = SourceLocation::dummy();
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::parser::printer::format_expr(self))
    }
}
