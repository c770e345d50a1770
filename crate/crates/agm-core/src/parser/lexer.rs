//! Hand-written lexer shared by the three file kinds.

use crate::loc::{Diagnostic, SourceLocation};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Keyword(&'static str),
    Int(i64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Semi,
    Colon,
    Comma,
    Dot,
    DotDot,
    Arrow,     // ->
    DashDash,  // --
    EqEq,
    NotEq,
    Le,
    Ge,
    Lt,
    Gt,
    Assign,    // =
    Plus,
    Minus,
    Star,
    Slash,
    PlusAssign, // +=
    MinusAssign, // -=
    Pipe,
    Eof,
}

impl Tok {
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(name) => format!("identifier `{name}`"),
            Tok::Keyword(kw) => format!("`{kw}`"),
            Tok::Int(v) => format!("integer `{v}`"),
            Tok::Str(_) => "string literal".to_string(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::DotDot => "`..`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::DashDash => "`--`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::NotEq => "`!=`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Assign => "`=`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::PlusAssign => "`+=`".into(),
            Tok::MinusAssign => "`-=`".into(),
            Tok::Pipe => "`|`".into(),
            Tok::Eof => "end of file".into(),
        }
    }
}

/// Reserved words. None of these may be used as an identifier anywhere.
pub const KEYWORDS: &[&str] = &[
    "class", "extends", "published", "abstract", "method", "attr", "assoc", "statechart", "initial",
    "state", "on", "invariant", "context", "test", "unit", "integration", "acceptance", "setup",
    "driver", "oracle", "strict", "loose", "check", "expect", "assert", "pattern", "link", "new",
    "return", "if", "else", "foreach", "in", "not", "and", "or", "implies", "true", "false", "self",
    "TESTER", "Int", "Bool", "String", "allInstances", "oclInState", "pull_up_attr", "pull_up_method",
    "rename_attr", "rename_method", "rename_class", "default", "variant", "override",
];

#[derive(Debug, Clone)]
pub struct Token {
    pub tok: Tok,
    pub loc: SourceLocation,
}

pub struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: u32,
    column: u32,
    file: String,
    pub diagnostics: Vec<Diagnostic>,
}

impl<'a> Lexer<'a> {
    pub fn new(src: &'a str, file: &str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, column: 1, file: file.to_string(), diagnostics: Vec::new() }
    }

    fn loc(&self) -> SourceLocation {
        SourceLocation::new(&self.file, self.line, self.column)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn peek2(&self) -> Option<u8> {
        self.src.get(self.pos + 1).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(b)
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(b' ') | Some(b'\t') | Some(b'\r') | Some(b'\n') => {
                    self.bump();
                }
                Some(b'/') if self.peek2() == Some(b'/') => {
                    while let Some(b) = self.peek() {
                        if b == b'\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    pub fn tokenize(mut self) -> (Vec<Token>, Vec<Diagnostic>) {
        let mut tokens = Vec::new();
        loop {
            self.skip_trivia();
            let loc = self.loc();
            let Some(b) = self.peek() else {
                tokens.push(Token { tok: Tok::Eof, loc });
                break;
            };
            let tok = match b {
                b'{' => self.single(Tok::LBrace),
                b'}' => self.single(Tok::RBrace),
                b'(' => self.single(Tok::LParen),
                b')' => self.single(Tok::RParen),
                b'[' => self.single(Tok::LBracket),
                b']' => self.single(Tok::RBracket),
                b';' => self.single(Tok::Semi),
                b':' => self.single(Tok::Colon),
                b',' => self.single(Tok::Comma),
                b'|' => self.single(Tok::Pipe),
                b'*' => self.single(Tok::Star),
                b'/' => self.single(Tok::Slash),
                b'.' => {
                    self.bump();
                    if self.peek() == Some(b'.') {
                        self.bump();
                        Tok::DotDot
                    } else {
                        Tok::Dot
                    }
                }
                b'-' => {
                    self.bump();
                    match self.peek() {
                        Some(b'>') => {
                            self.bump();
                            Tok::Arrow
                        }
                        Some(b'-') => {
                            self.bump();
                            Tok::DashDash
                        }
                        Some(b'=') => {
                            self.bump();
                            Tok::MinusAssign
                        }
                        _ => Tok::Minus,
                    }
                }
                b'+' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::PlusAssign
                    } else {
                        Tok::Plus
                    }
                }
                b'=' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::EqEq
                    } else {
                        Tok::Assign
                    }
                }
                b'!' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::NotEq
                    } else {
                        self.diagnostics.push(Diagnostic::new(loc.clone(), "stray `!`; use `not` or `!=`"));
                        continue;
                    }
                }
                b'<' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Le
                    } else {
                        Tok::Lt
                    }
                }
                b'>' => {
                    self.bump();
                    if self.peek() == Some(b'=') {
                        self.bump();
                        Tok::Ge
                    } else {
                        Tok::Gt
                    }
                }
                b'"' => self.string(loc.clone()),
                b'0'..=b'9' => self.number(loc.clone()),
                b'A'..=b'Z' | b'a'..=b'z' | b'_' => self.word(),
                other => {
                    self.bump();
                    self.diagnostics
                        .push(Diagnostic::new(loc.clone(), format!("unexpected character `{}`", other as char)));
                    continue;
                }
            };
            tokens.push(Token { tok, loc });
        }
        (tokens, self.diagnostics)
    }

    fn single(&mut self, tok: Tok) -> Tok {
        self.bump();
        tok
    }

    fn word(&mut self) -> Tok {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_alphanumeric() || b == b'_' {
                self.bump();
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii word");
        match KEYWORDS.iter().find(|k| **k == text) {
            Some(kw) => Tok::Keyword(kw),
            None => Tok::Ident(text.to_string()),
        }
    }

    fn number(&mut self, loc: SourceLocation) -> Tok {
        let start = self.pos;
        while let Some(b) = self.peek() {
            if b.is_ascii_digit() {
                self.bump();
            } else {
                break;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        match text.parse::<i64>() {
            Ok(v) => Tok::Int(v),
            Err(_) => {
                self.diagnostics.push(Diagnostic::new(loc, format!("integer literal `{text}` out of range")));
                Tok::Int(0)
            }
        }
    }

    fn string(&mut self, loc: SourceLocation) -> Tok {
        self.bump(); // opening quote
        let mut out = String::new();
        loop {
            match self.bump() {
                None | Some(b'\n') => {
                    self.diagnostics.push(Diagnostic::new(loc, "unterminated string literal".to_string()));
                    break;
                }
                Some(b'"') => break,
                Some(b'\\') => match self.bump() {
                    Some(b'"') => out.push('"'),
                    Some(b'\\') => out.push('\\'),
                    Some(b'n') => out.push('\n'),
                    Some(b't') => out.push('\t'),
                    other => {
                        self.diagnostics.push(Diagnostic::new(
                            self.loc(),
                            format!(
                                "unknown escape `\\{}`",
                                other.map(|b| (b as char).to_string()).unwrap_or_default()
                            ),
                        ));
                    }
                },
                Some(b) if b < 0x80 => out.push(b as char),
                Some(b) => {
                    // Reassemble a UTF-8 sequence; the input is valid UTF-8.
                    let len = match b {
                        0xC0..=0xDF => 2,
                        0xE0..=0xEF => 3,
                        _ => 4,
                    };
                    let mut buf = vec![b];
                    for _ in 1..len {
                        if let Some(next) = self.bump() {
                            buf.push(next);
                        }
                    }
                    if let Ok(s) = std::str::from_utf8(&buf) {
                        out.push_str(s);
                    }
                }
            }
        }
        Tok::Str(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(src: &str) -> Vec<Tok> {
        let (tokens, diags) = Lexer::new(src, "t").tokenize();
        assert!(diags.is_empty(), "{diags:?}");
        tokens.into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn punctuation_disambiguation() {
        assert_eq!(
            toks("-> -- -= - .. . += + == ="),
            vec![
                Tok::Arrow,
                Tok::DashDash,
                Tok::MinusAssign,
                Tok::Minus,
                Tok::DotDot,
                Tok::Dot,
                Tok::PlusAssign,
                Tok::Plus,
                Tok::EqEq,
                Tok::Assign,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn keywords_and_idents() {
        assert_eq!(
            toks("class Auction closingTime"),
            vec![Tok::Keyword("class"), Tok::Ident("Auction".into()), Tok::Ident("closingTime".into()), Tok::Eof]
        );
    }

    #[test]
    fn string_escapes_round() {
        assert_eq!(toks(r#""a\"b\\c\nd""#), vec![Tok::Str("a\"b\\c\nd".into()), Tok::Eof]);
    }

    #[test]
    fn comments_are_skipped() {
        assert_eq!(toks("1 // comment\n2"), vec![Tok::Int(1), Tok::Int(2), Tok::Eof]);
    }

    #[test]
    fn locations_are_one_based() {
        let (tokens, _) = Lexer::new("a\n  b", "t").tokenize();
        assert_eq!((tokens[0].loc.line, tokens[0].loc.column), (1, 1));
        assert_eq!((tokens[1].loc.line, tokens[1].loc.column), (2, 3));
    }
}
