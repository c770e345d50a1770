//! Recursive-descent parsers for the three file kinds. Syntax only: name
//! resolution and typing live in `typecheck`. On an error the parser records
//! a diagnostic and recovers at the next safe point, so one pass reports as
//! much as it can.

use super::lexer::{Lexer, Tok, Token};
use crate::expr::{BinOp, CollOp, Expr};
use crate::loc::{Diagnostic, SourceLocation};
use crate::model::{
    AssocDef, AssocEnd, AttributeDef, Block, ClassDef, InvariantDef, MethodDef, Model, Multiplicity, ParamDef, Path,
    Statechart, Stmt, Transition, TypeRef,
};
use crate::refactor::types::{DefaultValue, PullUpVariant, Refactoring};
use crate::testkit::types::{
    Category, DriverItem, DriverMode, ObjectPattern, Oracle, PatternEntry, PatternLink, SenderRef, SetupStmt, TestCase,
    TestSuite,
};

pub struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    pub diagnostics: Vec<Diagnostic>,
}

impl Parser {
    pub fn new(src: &str, file: &str) -> Self {
        let (tokens, diagnostics) = Lexer::new(src, file).tokenize();
        Parser { tokens, pos: 0, diagnostics }
    }

    fn peek(&self) -> &Tok {
        &self.tokens[self.pos.min(self.tokens.len() - 1)].tok
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        &self.tokens[(self.pos + offset).min(self.tokens.len() - 1)].tok
    }

    fn loc(&self) -> SourceLocation {
        self.tokens[self.pos.min(self.tokens.len() - 1)].loc.clone()
    }

    fn bump(&mut self) -> Token {
        let tok = self.tokens[self.pos.min(self.tokens.len() - 1)].clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn at(&self, tok: &Tok) -> bool {
        self.peek() == tok
    }

    fn at_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Keyword(k) if *k == kw)
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.at(tok) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.at_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error(&mut self, message: impl Into<String>, expected: &str) {
        let loc = self.loc();
        self.diagnostics.push(Diagnostic::expecting(loc, message, expected));
    }

    fn expect(&mut self, tok: &Tok, expected: &str) -> bool {
        if self.eat(tok) {
            true
        } else {
            self.error(format!("found {}", self.peek().describe()), expected);
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> bool {
        if self.eat_kw(kw) {
            true
        } else {
            self.error(format!("found {}", self.peek().describe()), &format!("`{kw}`"));
            false
        }
    }

    fn expect_ident(&mut self, what: &str) -> Option<String> {
        match self.peek() {
            Tok::Ident(name) => {
                let name = name.clone();
                self.bump();
                Some(name)
            }
            _ => {
                self.error(format!("found {}", self.peek().describe()), what);
                None
            }
        }
    }

    /// Skip tokens until one of the sync keywords (or a closing brace /
    /// semicolon boundary) comes up at the current nesting level.
    fn recover(&mut self, sync_keywords: &[&str], stop_at_rbrace: bool) {
        let mut depth = 0usize;
        loop {
            match self.peek() {
                Tok::Eof => return,
                Tok::LBrace => {
                    depth += 1;
                    self.bump();
                }
                Tok::RBrace => {
                    if depth == 0 {
                        if stop_at_rbrace {
                            return;
                        }
                        self.bump();
                    } else {
                        depth -= 1;
                        self.bump();
                    }
                }
                Tok::Semi if depth == 0 => {
                    self.bump();
                    return;
                }
                Tok::Keyword(kw) if depth == 0 && sync_keywords.contains(kw) => return,
                _ => {
                    self.bump();
                }
            }
        }
    }

    // ---- types, paths, literals ----

    fn parse_type(&mut self) -> Option<TypeRef> {
        match self.peek().clone() {
            Tok::Keyword("Int") => {
                self.bump();
                Some(TypeRef::Int)
            }
            Tok::Keyword("Bool") => {
                self.bump();
                Some(TypeRef::Bool)
            }
            Tok::Keyword("String") => {
                self.bump();
                Some(TypeRef::Str)
            }
            Tok::Ident(name) => {
                self.bump();
                Some(TypeRef::Class(name))
            }
            _ => {
                self.error(format!("found {}", self.peek().describe()), "a type (Int, Bool, String, or a class name)");
                None
            }
        }
    }

    fn parse_path(&mut self) -> Option<Path> {
        let loc = self.loc();
        let head = match self.peek().clone() {
            Tok::Keyword("self") => {
                self.bump();
                "self".to_string()
            }
            Tok::Ident(name) => {
                self.bump();
                name
            }
            _ => {
                self.error(format!("found {}", self.peek().describe()), "a name or `self`");
                return None;
            }
        };
        let mut segments = vec![head];
        while self.at(&Tok::Dot) {
            // Stop before `.name(`: that is a method call, not a path step.
            if matches!(self.peek_at(1), Tok::Ident(_)) && matches!(self.peek_at(2), Tok::LParen) {
                break;
            }
            self.bump();
            segments.push(self.expect_ident("a name after `.`")?);
        }
        Some(Path { segments, loc })
    }

    // ---- expressions ----

    pub fn parse_expr(&mut self) -> Option<Expr> {
        self.parse_implies()
    }

    fn parse_implies(&mut self) -> Option<Expr> {
        let lhs = self.parse_or()?;
        if self.at_kw("implies") {
            let loc = self.loc();
            self.bump();
            // Right-associative.
            let rhs = self.parse_implies()?;
            return Some(Expr::Binary { op: BinOp::Implies, lhs: Box::new(lhs), rhs: Box::new(rhs), loc });
        }
        Some(lhs)
    }

    fn parse_or(&mut self) -> Option<Expr> {
        let mut lhs = self.parse_and()?;
        while self.at_kw("or") {
            let loc = self.loc();
            self.bump();
            let rhs = self.parse_and()?;
            lhs = Expr::Binary { op: BinOp::Or, lhs: Box::new(lhs), rhs: Box::new(rhs), loc };
        }
        Some(lhs)
    }

    fn parse_and(&mut self) -> Option<Expr> {
        let mut lhs = self.parse_not()?;
        while self.at_kw("and") {
            let loc = self.loc();
            self.bump();
            let rhs = self.parse_not()?;
            lhs = Expr::Binary { op: BinOp::And, lhs: Box::new(lhs), rhs: Box::new(rhs), loc };
        }
        Some(lhs)
    }

    fn parse_not(&mut self) -> Option<Expr> {
        if self.at_kw("not") {
            let loc = self.loc();
            self.bump();
            let expr = self.parse_not()?;
            return Some(Expr::Not { expr: Box::new(expr), loc });
        }
        self.parse_comparison()
    }

    fn parse_comparison(&mut self) -> Option<Expr> {
        let lhs = self.parse_additive()?;
        let op = match self.peek() {
            Tok::EqEq => Some(BinOp::Eq),
            Tok::NotEq => Some(BinOp::Ne),
            Tok::Lt => Some(BinOp::Lt),
            Tok::Le => Some(BinOp::Le),
            Tok::Gt => Some(BinOp::Gt),
            Tok::Ge => Some(BinOp::Ge),
            _ => None,
        };
        if let Some(op) = op {
            let loc = self.loc();
            self.bump();
            let rhs = self.parse_additive()?;
            return Some(Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), loc });
        }
        Some(lhs)
    }

    fn parse_additive(&mut self) -> Option<Expr> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            let loc = self.loc();
            self.bump();
            let rhs = self.parse_multiplicative()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), loc };
        }
        Some(lhs)
    }

    fn parse_multiplicative(&mut self) -> Option<Expr> {
        let mut lhs = self.parse_postfix()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            let loc = self.loc();
            self.bump();
            let rhs = self.parse_postfix()?;
            lhs = Expr::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs), loc };
        }
        Some(lhs)
    }

    fn parse_postfix(&mut self) -> Option<Expr> {
        let mut expr = self.parse_primary()?;
        loop {
            if self.at(&Tok::Dot) {
                let loc = self.loc();
                self.bump();
                if self.at_kw("allInstances") {
                    self.bump();
                    self.expect(&Tok::LParen, "`(`");
                    self.expect(&Tok::RParen, "`)`");
                    match expr {
                        Expr::Name(class, _) => {
                            expr = Expr::AllInstances { class, loc };
                        }
                        _ => {
                            self.diagnostics.push(Diagnostic::new(
                                loc.clone(),
                                "allInstances() applies to a class name",
                            ));
                            return None;
                        }
                    }
                    continue;
                }
                if self.at_kw("oclInState") {
                    self.bump();
                    self.expect(&Tok::LParen, "`(`");
                    let state = self.expect_ident("a state name")?;
                    self.expect(&Tok::RParen, "`)`");
                    expr = Expr::InState { recv: Box::new(expr), state, loc };
                    continue;
                }
                let name = self.expect_ident("an attribute, role, or method name")?;
                if self.at(&Tok::LParen) {
                    self.bump();
                    let args = self.parse_args()?;
                    expr = Expr::Call { recv: Box::new(expr), method: name, args, loc };
                } else {
                    expr = Expr::Nav { recv: Box::new(expr), name, loc };
                }
                continue;
            }
            if self.at(&Tok::Arrow) {
                let loc = self.loc();
                self.bump();
                let op_name = self.expect_ident("a collection operation")?;
                self.expect(&Tok::LParen, "`(`");
                let op = match op_name.as_str() {
                    "size" => {
                        self.expect(&Tok::RParen, "`)`");
                        CollOp::Size
                    }
                    "isEmpty" => {
                        self.expect(&Tok::RParen, "`)`");
                        CollOp::IsEmpty
                    }
                    "includes" => {
                        let arg = self.parse_expr()?;
                        self.expect(&Tok::RParen, "`)`");
                        CollOp::Includes(Box::new(arg))
                    }
                    "forAll" | "exists" | "select" => {
                        let var = self.expect_ident("an iterator variable")?;
                        self.expect(&Tok::Pipe, "`|`");
                        let pred = Box::new(self.parse_expr()?);
                        self.expect(&Tok::RParen, "`)`");
                        match op_name.as_str() {
                            "forAll" => CollOp::ForAll { var, pred },
                            "exists" => CollOp::Exists { var, pred },
                            _ => CollOp::Select { var, pred },
                        }
                    }
                    other => {
                        self.diagnostics.push(Diagnostic::expecting(
                            loc.clone(),
                            format!("unknown collection operation `{other}`"),
                            "size, isEmpty, includes, forAll, exists, or select",
                        ));
                        return None;
                    }
                };
                expr = Expr::Coll { recv: Box::new(expr), op, loc };
                continue;
            }
            break;
        }
        Some(expr)
    }

    fn parse_args(&mut self) -> Option<Vec<Expr>> {
        let mut args = Vec::new();
        if self.eat(&Tok::RParen) {
            return Some(args);
        }
        loop {
            args.push(self.parse_expr()?);
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(&Tok::RParen, "`,` or `)`");
            break;
        }
        Some(args)
    }

    fn parse_primary(&mut self) -> Option<Expr> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Some(Expr::IntLit(v, loc))
            }
            Tok::Minus => {
                // Unary minus exists only as part of an integer literal.
                self.bump();
                match self.peek().clone() {
                    Tok::Int(v) => {
                        self.bump();
                        Some(Expr::IntLit(-v, loc))
                    }
                    _ => {
                        self.error(format!("found {}", self.peek().describe()), "an integer after `-`");
                        None
                    }
                }
            }
            Tok::Str(s) => {
                self.bump();
                Some(Expr::StrLit(s, loc))
            }
            Tok::Keyword("true") => {
                self.bump();
                Some(Expr::BoolLit(true, loc))
            }
            Tok::Keyword("false") => {
                self.bump();
                Some(Expr::BoolLit(false, loc))
            }
            Tok::Keyword("self") => {
                self.bump();
                Some(Expr::SelfRef(loc))
            }
            Tok::Ident(name) => {
                self.bump();
                Some(Expr::Name(name, loc))
            }
            Tok::LParen => {
                self.bump();
                let expr = self.parse_expr()?;
                self.expect(&Tok::RParen, "`)`");
                Some(expr)
            }
            _ => {
                self.error(format!("found {}", self.peek().describe()), "an expression");
                None
            }
        }
    }

    // ---- statements ----

    fn parse_block(&mut self) -> Option<Block> {
        self.expect(&Tok::LBrace, "`{`");
        let mut stmts = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            match self.parse_stmt() {
                Some(stmt) => stmts.push(stmt),
                None => self.recover(&[], true),
            }
        }
        self.expect(&Tok::RBrace, "`}`");
        Some(Block { stmts })
    }

    fn parse_stmt(&mut self) -> Option<Stmt> {
        let loc = self.loc();
        if self.at_kw("return") {
            self.bump();
            let value = self.parse_expr()?;
            self.expect(&Tok::Semi, "`;`");
            return Some(Stmt::Return { value, loc });
        }
        if self.at_kw("if") {
            self.bump();
            self.expect(&Tok::LParen, "`(`");
            let cond = self.parse_expr()?;
            self.expect(&Tok::RParen, "`)`");
            let then_block = self.parse_block()?;
            let else_block = if self.eat_kw("else") { Some(self.parse_block()?) } else { None };
            return Some(Stmt::If { cond, then_block, else_block, loc });
        }
        if self.at_kw("foreach") {
            self.bump();
            let var = self.expect_ident("an iteration variable")?;
            self.expect_kw("in");
            let source = self.parse_path()?;
            let body = self.parse_block()?;
            return Some(Stmt::Foreach { var, source, body, loc });
        }

        // Everything else starts with an expression or path.
        let expr = self.parse_expr()?;
        match self.peek() {
            Tok::Assign => {
                self.bump();
                let target = self.expr_to_path(expr)?;
                if self.at_kw("new") {
                    self.bump();
                    if target.segments.len() != 1 {
                        self.diagnostics.push(Diagnostic::new(
                            target.loc.clone(),
                            "`new` binds a plain local name, not a navigation path",
                        ));
                    }
                    let class = self.expect_ident("a class name")?;
                    let inits = self.parse_init_list()?;
                    self.expect(&Tok::Semi, "`;`");
                    return Some(Stmt::Create { local: target.head().to_string(), class, inits, loc });
                }
                let value = self.parse_expr()?;
                self.expect(&Tok::Semi, "`;`");
                Some(Stmt::Assign { target, value, loc })
            }
            Tok::PlusAssign | Tok::MinusAssign => {
                let adding = self.at(&Tok::PlusAssign);
                self.bump();
                let target = self.expr_to_path(expr)?;
                let value = self.parse_expr()?;
                self.expect(&Tok::Semi, "`;`");
                Some(if adding {
                    Stmt::LinkAdd { target, value, loc }
                } else {
                    Stmt::LinkRemove { target, value, loc }
                })
            }
            _ => {
                self.expect(&Tok::Semi, "`;`");
                match expr {
                    call @ Expr::Call { .. } => Some(Stmt::CallStmt { call, loc }),
                    other => {
                        self.diagnostics.push(Diagnostic::new(
                            other.loc().clone(),
                            "expression statements must be method calls",
                        ));
                        None
                    }
                }
            }
        }
    }

    fn expr_to_path(&mut self, expr: Expr) -> Option<Path> {
        fn collect(expr: &Expr, segments: &mut Vec<String>) -> bool {
            match expr {
                Expr::SelfRef(_) => {
                    segments.push("self".to_string());
                    true
                }
                Expr::Name(name, _) => {
                    segments.push(name.clone());
                    true
                }
                Expr::Nav { recv, name, .. } => {
                    if !collect(recv, segments) {
                        return false;
                    }
                    segments.push(name.clone());
                    true
                }
                _ => false,
            }
        }
        let loc = expr.loc().clone();
        let mut segments = Vec::new();
        if collect(&expr, &mut segments) {
            Some(Path { segments, loc })
        } else {
            self.diagnostics.push(Diagnostic::new(loc, "assignment target must be a dotted name"));
            None
        }
    }

    fn parse_init_list(&mut self) -> Option<Vec<(String, Expr)>> {
        self.expect(&Tok::LBrace, "`{`");
        let mut inits = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Some(inits);
        }
        loop {
            let name = self.expect_ident("an attribute name")?;
            self.expect(&Tok::Assign, "`=`");
            let value = self.parse_expr()?;
            inits.push((name, value));
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(&Tok::RBrace, "`,` or `}`");
            break;
        }
        Some(inits)
    }

    // ---- model files ----

    pub fn parse_model_file(&mut self) -> Model {
        let mut model = Model::default();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Keyword("class") => {
                    if let Some(class) = self.parse_classdef() {
                        model.classes.push(class);
                    } else {
                        self.recover(&["class", "assoc", "invariant"], false);
                    }
                }
                Tok::Keyword("assoc") => {
                    if let Some(assoc) = self.parse_assocdef() {
                        model.associations.push(assoc);
                    } else {
                        self.recover(&["class", "assoc", "invariant"], false);
                    }
                }
                Tok::Keyword("invariant") => {
                    if let Some(inv) = self.parse_invariantdef() {
                        model.invariants.push(inv);
                    } else {
                        self.recover(&["class", "assoc", "invariant"], false);
                    }
                }
                _ => {
                    self.error(format!("found {}", self.peek().describe()), "`class`, `assoc`, or `invariant`");
                    self.recover(&["class", "assoc", "invariant"], false);
                }
            }
        }
        model
    }

    fn parse_classdef(&mut self) -> Option<ClassDef> {
        let loc = self.loc();
        self.expect_kw("class");
        let name = self.expect_ident("a class name")?;
        let superclass = if self.eat_kw("extends") { Some(self.expect_ident("a superclass name")?) } else { None };
        let published = self.eat_kw("published");
        self.expect(&Tok::LBrace, "`{`");
        let mut class = ClassDef {
            name,
            superclass,
            published,
            attributes: Vec::new(),
            methods: Vec::new(),
            statechart: None,
            loc,
        };
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            if !self.parse_member(&mut class) {
                self.recover(&["attr", "method", "published", "abstract", "statechart"], true);
            }
        }
        self.expect(&Tok::RBrace, "`}`");
        Some(class)
    }

    fn parse_member(&mut self, class: &mut ClassDef) -> bool {
        let loc = self.loc();
        if self.at_kw("attr") {
            self.bump();
            let Some(name) = self.expect_ident("an attribute name") else { return false };
            if !self.expect(&Tok::Colon, "`:`") {
                return false;
            }
            let Some(ty) = self.parse_type() else { return false };
            class.attributes.push(AttributeDef { name, ty, loc });
            return true;
        }
        if self.at_kw("statechart") {
            match self.parse_statechart() {
                Some(chart) => {
                    if class.statechart.is_some() {
                        self.diagnostics
                            .push(Diagnostic::new(loc, format!("class `{}` already has a statechart", class.name)));
                    }
                    class.statechart = Some(chart);
                    return true;
                }
                None => return false,
            }
        }
        // ["published"] ["abstract"] "method" ...
        let published = self.eat_kw("published");
        let abstract_ = self.eat_kw("abstract");
        if !self.at_kw("method") {
            self.error(format!("found {}", self.peek().describe()), "`attr`, `method`, or `statechart`");
            return false;
        }
        self.bump();
        let Some(name) = self.expect_ident("a method name") else { return false };
        if !self.expect(&Tok::LParen, "`(`") {
            return false;
        }
        let mut params = Vec::new();
        if !self.eat(&Tok::RParen) {
            loop {
                let Some(pname) = self.expect_ident("a parameter name") else { return false };
                if !self.expect(&Tok::Colon, "`:`") {
                    return false;
                }
                let Some(pty) = self.parse_type() else { return false };
                params.push(ParamDef { name: pname, ty: pty });
                if self.eat(&Tok::Comma) {
                    continue;
                }
                if !self.expect(&Tok::RParen, "`,` or `)`") {
                    return false;
                }
                break;
            }
        }
        let return_ty = if self.eat(&Tok::Colon) {
            match self.parse_type() {
                Some(t) => Some(t),
                None => return false,
            }
        } else {
            None
        };
        let body = if self.at(&Tok::LBrace) {
            match self.parse_block() {
                Some(b) => Some(b),
                None => return false,
            }
        } else {
            None
        };
        class.methods.push(MethodDef { name, published, abstract_, params, return_ty, body, loc });
        true
    }

    fn parse_statechart(&mut self) -> Option<Statechart> {
        let loc = self.loc();
        self.expect_kw("statechart");
        self.expect(&Tok::LBrace, "`{`");
        self.expect_kw("initial");
        let initial = self.expect_ident("the initial state name")?;
        self.expect(&Tok::Semi, "`;`");
        let mut states = Vec::new();
        while self.at_kw("state") {
            self.bump();
            states.push(self.expect_ident("a state name")?);
            self.expect(&Tok::Semi, "`;`");
        }
        if states.is_empty() {
            self.error(format!("found {}", self.peek().describe()), "at least one `state` declaration");
        }
        let mut transitions = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            let tloc = self.loc();
            let source = self.expect_ident("a source state")?;
            self.expect(&Tok::Arrow, "`->`");
            let target = self.expect_ident("a target state")?;
            self.expect_kw("on");
            let trigger = self.expect_ident("a trigger method name")?;
            let guard = if self.eat(&Tok::LBracket) {
                let g = self.parse_expr()?;
                self.expect(&Tok::RBracket, "`]`");
                Some(g)
            } else {
                None
            };
            self.expect(&Tok::Semi, "`;`");
            transitions.push(Transition { source, trigger, guard, target, loc: tloc });
        }
        self.expect(&Tok::RBrace, "`}`");
        Some(Statechart { initial, states, transitions, loc })
    }

    fn parse_mult(&mut self) -> Option<Multiplicity> {
        match self.peek().clone() {
            Tok::Int(1) => {
                self.bump();
                Some(Multiplicity::One)
            }
            Tok::Int(0) => {
                self.bump();
                if self.expect(&Tok::DotDot, "`..`") && matches!(self.peek(), Tok::Int(1)) {
                    self.bump();
                    Some(Multiplicity::ZeroOrOne)
                } else {
                    self.error(format!("found {}", self.peek().describe()), "`0..1`");
                    None
                }
            }
            Tok::Star => {
                self.bump();
                Some(Multiplicity::Many)
            }
            _ => {
                self.error(format!("found {}", self.peek().describe()), "a multiplicity (`1`, `0..1`, or `*`)");
                None
            }
        }
    }

    fn parse_assocdef(&mut self) -> Option<AssocDef> {
        let loc = self.loc();
        self.expect_kw("assoc");
        let name = self.expect_ident("an association name")?;
        let class_a = self.expect_ident("a class name")?;
        self.expect(&Tok::Dot, "`.`");
        let role_a = self.expect_ident("a role name")?;
        let mult_a = self.parse_mult()?;
        self.expect(&Tok::DashDash, "`--`");
        let mult_b = self.parse_mult()?;
        let class_b = self.expect_ident("a class name")?;
        self.expect(&Tok::Dot, "`.`");
        let role_b = self.expect_ident("a role name")?;
        Some(AssocDef {
            name,
            end_a: AssocEnd { class: class_a, role: role_a, mult: mult_a },
            end_b: AssocEnd { class: class_b, role: role_b, mult: mult_b },
            loc,
        })
    }

    fn parse_invariantdef(&mut self) -> Option<InvariantDef> {
        let loc = self.loc();
        self.expect_kw("invariant");
        let name = self.expect_ident("an invariant name")?;
        self.expect_kw("context");
        let context_class = self.expect_ident("a context class name")?;
        self.expect(&Tok::Colon, "`:`");
        let expr = self.parse_expr()?;
        Some(InvariantDef { name, context_class, expr, loc })
    }

    // ---- test files ----

    pub fn parse_test_file(&mut self) -> TestSuite {
        let mut suite = TestSuite::default();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Keyword("test") => match self.parse_testcase() {
                    Some(test) => suite.tests.push(test),
                    None => self.recover(&["test"], false),
                },
                _ => {
                    self.error(format!("found {}", self.peek().describe()), "`test`");
                    self.recover(&["test"], false);
                }
            }
        }
        suite
    }

    fn parse_testcase(&mut self) -> Option<TestCase> {
        let loc = self.loc();
        self.expect_kw("test");
        let category = if self.eat_kw("unit") {
            Category::Unit
        } else if self.eat_kw("integration") {
            Category::Integration
        } else if self.eat_kw("acceptance") {
            Category::Acceptance
        } else {
            self.error(format!("found {}", self.peek().describe()), "`unit`, `integration`, or `acceptance`");
            return None;
        };
        let name = self.expect_ident("a test name")?;
        self.expect(&Tok::LBrace, "`{`");

        self.expect_kw("setup");
        self.expect(&Tok::LBrace, "`{`");
        let mut setup = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            match self.parse_setup_stmt() {
                Some(stmt) => setup.push(stmt),
                None => self.recover(&[], true),
            }
        }
        self.expect(&Tok::RBrace, "`}`");

        self.expect_kw("driver");
        let driver_mode = if self.eat_kw("strict") {
            Some(DriverMode::Strict)
        } else if self.eat_kw("loose") {
            Some(DriverMode::Loose)
        } else {
            None
        };
        self.expect(&Tok::LBrace, "`{`");
        let mut driver = Vec::new();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            match self.parse_driver_item() {
                Some(item) => driver.push(item),
                None => self.recover(&[], true),
            }
        }
        self.expect(&Tok::RBrace, "`}`");

        self.expect_kw("oracle");
        self.expect(&Tok::LBrace, "`{`");
        let mut oracle = Oracle::default();
        if self.at_kw("pattern") {
            oracle.pattern = self.parse_pattern();
        }
        while self.at_kw("assert") {
            self.bump();
            match self.parse_expr() {
                Some(expr) => {
                    oracle.asserts.push(expr);
                    self.expect(&Tok::Semi, "`;`");
                }
                None => self.recover(&[], true),
            }
        }
        self.expect(&Tok::RBrace, "`}`");
        self.expect(&Tok::RBrace, "`}`");
        Some(TestCase { name, category, setup, driver_mode, driver, oracle, loc })
    }

    fn parse_setup_stmt(&mut self) -> Option<SetupStmt> {
        let loc = self.loc();
        if self.at_kw("link") {
            self.bump();
            let target = self.parse_path()?;
            self.expect(&Tok::PlusAssign, "`+=`");
            let value = self.expect_ident("an object name")?;
            self.expect(&Tok::Semi, "`;`");
            return Some(SetupStmt::Link { target, value, loc });
        }
        let name = self.expect_ident("an object name or `link`")?;
        self.expect(&Tok::Assign, "`=`");
        self.expect_kw("new");
        let class = self.expect_ident("a class name")?;
        let inits = self.parse_init_list()?;
        self.expect(&Tok::Semi, "`;`");
        Some(SetupStmt::Create { name, class, inits, loc })
    }

    fn parse_driver_item(&mut self) -> Option<DriverItem> {
        let loc = self.loc();
        if self.at_kw("check") {
            self.bump();
            let expr = self.parse_expr()?;
            self.expect(&Tok::Semi, "`;`");
            return Some(DriverItem::Check { expr, loc });
        }
        if self.at_kw("expect") {
            self.bump();
            let sender = if self.eat_kw("TESTER") {
                SenderRef::Tester
            } else {
                SenderRef::Binding(self.expect_ident("a sender (object name or TESTER)")?)
            };
            self.expect(&Tok::Arrow, "`->`");
            let receiver = self.expect_ident("a receiver object name")?;
            self.expect(&Tok::Colon, "`:`");
            let method = self.expect_ident("a method name")?;
            self.expect(&Tok::LParen, "`(`");
            let args = self.parse_args()?;
            self.expect(&Tok::Semi, "`;`");
            return Some(DriverItem::Expect { sender, receiver, method, args, loc });
        }
        // trigger call: path.method(args);
        let target = self.parse_path()?;
        self.expect(&Tok::Dot, "`.`");
        let method = self.expect_ident("a method name")?;
        self.expect(&Tok::LParen, "`(`");
        let args = self.parse_args()?;
        self.expect(&Tok::Semi, "`;`");
        Some(DriverItem::Trigger { target, method, args, loc })
    }

    fn parse_pattern(&mut self) -> Option<ObjectPattern> {
        self.expect_kw("pattern");
        self.expect(&Tok::LBrace, "`{`");
        let mut pattern = ObjectPattern::default();
        while !self.at(&Tok::RBrace) && !self.at(&Tok::Eof) {
            let loc = self.loc();
            if self.at_kw("link") {
                self.bump();
                let from = self.expect_ident("an object binding")?;
                self.expect(&Tok::Dot, "`.`");
                let role = self.expect_ident("a role name")?;
                self.expect(&Tok::PlusAssign, "`+=`");
                let to = self.expect_ident("an object binding")?;
                self.expect(&Tok::Semi, "`;`");
                pattern.links.push(PatternLink { from, role, to, loc });
                continue;
            }
            let Some(binding) = self.expect_ident("a binding name or `link`") else {
                self.recover(&[], true);
                continue;
            };
            self.expect(&Tok::Colon, "`:`");
            let Some(class) = self.expect_ident("a class name") else {
                self.recover(&[], true);
                continue;
            };
            let Some(constraints) = self.parse_init_list() else {
                self.recover(&[], true);
                continue;
            };
            pattern.entries.push(PatternEntry { binding, class, constraints, loc });
        }
        self.expect(&Tok::RBrace, "`}`");
        Some(pattern)
    }

    // ---- refactoring scripts ----

    pub fn parse_refactoring_file(&mut self) -> Vec<Refactoring> {
        let mut steps = Vec::new();
        loop {
            match self.peek() {
                Tok::Eof => break,
                Tok::Keyword(kw @ ("pull_up_attr" | "pull_up_method" | "rename_attr" | "rename_method" | "rename_class")) => {
                    let kw = *kw;
                    match self.parse_refactoring_step(kw) {
                        Some(step) => steps.push(step),
                        None => self.recover(
                            &["pull_up_attr", "pull_up_method", "rename_attr", "rename_method", "rename_class"],
                            false,
                        ),
                    }
                }
                _ => {
                    self.error(format!("found {}", self.peek().describe()), "a refactoring step keyword");
                    self.recover(
                        &["pull_up_attr", "pull_up_method", "rename_attr", "rename_method", "rename_class"],
                        false,
                    );
                }
            }
        }
        steps
    }

    fn parse_default_literal(&mut self) -> Option<DefaultValue> {
        let loc = self.loc();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Some(DefaultValue::Int(v))
            }
            Tok::Minus => {
                self.bump();
                if let Tok::Int(v) = self.peek().clone() {
                    self.bump();
                    Some(DefaultValue::Int(-v))
                } else {
                    self.diagnostics.push(Diagnostic::expecting(loc, "expected an integer after `-`", "an integer"));
                    None
                }
            }
            Tok::Keyword("true") => {
                self.bump();
                Some(DefaultValue::Bool(true))
            }
            Tok::Keyword("false") => {
                self.bump();
                Some(DefaultValue::Bool(false))
            }
            Tok::Str(s) => {
                self.bump();
                Some(DefaultValue::Str(s))
            }
            _ => {
                self.error(format!("found {}", self.peek().describe()), "a literal default value");
                None
            }
        }
    }

    fn parse_refactoring_step(&mut self, kw: &str) -> Option<Refactoring> {
        let loc = self.loc();
        self.bump(); // the keyword
        let step = match kw {
            "pull_up_attr" => {
                let subclass = self.expect_ident("a class name")?;
                self.expect(&Tok::Dot, "`.`");
                let attribute = self.expect_ident("an attribute name")?;
                self.expect(&Tok::Arrow, "`->`");
                let superclass = self.expect_ident("the target superclass")?;
                self.expect_kw("default");
                let default = self.parse_default_literal()?;
                Refactoring::PullUpAttribute { subclass, attribute, superclass, default, loc }
            }
            "pull_up_method" => {
                let subclass = self.expect_ident("a class name")?;
                self.expect(&Tok::Dot, "`.`");
                let method = self.expect_ident("a method name")?;
                self.expect(&Tok::Arrow, "`->`");
                let superclass = self.expect_ident("the target superclass")?;
                self.expect_kw("variant");
                let variant = if self.eat_kw("override") {
                    PullUpVariant::Override
                } else if self.eat_kw("abstract") {
                    PullUpVariant::AbstractSignature
                } else {
                    self.error(format!("found {}", self.peek().describe()), "`override` or `abstract`");
                    return None;
                };
                Refactoring::PullUpMethod { subclass, method, superclass, variant, loc }
            }
            "rename_attr" | "rename_method" => {
                let class = self.expect_ident("a class name")?;
                self.expect(&Tok::Dot, "`.`");
                let old = self.expect_ident("the current name")?;
                self.expect(&Tok::Arrow, "`->`");
                let new = self.expect_ident("the new name")?;
                if kw == "rename_attr" {
                    Refactoring::RenameAttribute { class, old, new, loc }
                } else {
                    Refactoring::RenameMethod { class, old, new, loc }
                }
            }
            "rename_class" => {
                let old = self.expect_ident("the current class name")?;
                self.expect(&Tok::Arrow, "`->`");
                let new = self.expect_ident("the new class name")?;
                Refactoring::RenameClass { old, new, loc }
            }
            _ => unreachable!("caller checked the keyword"),
        };
        self.expect(&Tok::Semi, "`;`");
        Some(step)
    }
}
