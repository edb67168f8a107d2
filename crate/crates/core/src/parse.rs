//! Lexer and recursive-descent parser for formulas and agent files.
//!
//! Precedence, loosest first: `<->` (left), `->` (right), `|`, `&`, then the
//! prefix operators `~`, `[]`, `box`, `box^n`. ASCII and Unicode spellings
//! are both accepted.

use std::fmt;

use thiserror::Error;

use crate::formula::Formula;

/// An atom as written: `caller(callee)`, before any name resolution.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RawAtom {
    pub caller: String,
    pub callee: String,
}

impl RawAtom {
    pub fn new(caller: impl Into<String>, callee: impl Into<String>) -> Self {
        RawAtom {
            caller: caller.into(),
            callee: callee.into(),
        }
    }
}

impl fmt::Display for RawAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.caller, self.callee)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}{}", expected_suffix(.expected))]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!("; expected one of: {}", expected.join(", "))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Pos {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    LParen,
    RParen,
    Not,
    BoxOp,
    Caret,
    And,
    Or,
    Implies,
    Iff,
    Lt,
    Gt,
    Plus,
    Assign,
    True,
    False,
    Int(u64),
    Ident(String),
    Str(String),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Not => "`~`".into(),
            Tok::BoxOp => "`[]`".into(),
            Tok::Caret => "`^`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Iff => "`<->`".into(),
            Tok::Lt => "`<`".into(),
            Tok::Gt => "`>`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Ident(s) => format!("name `{s}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

pub(crate) fn lex(text: &str, first_line: usize) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = first_line;
    let mut column = 1;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                column = 1;
            } else if c.is_some() {
                column += 1;
            }
            c
        }};
    }

    while let Some(&c) = chars.peek() {
        let pos = Pos { line, column };
        let err = |message: String| ParseError {
            line: pos.line,
            column: pos.column,
            message,
            expected: Vec::new(),
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump!();
            }
            continue;
        }
        let tok = match c {
            '(' => {
                bump!();
                Tok::LParen
            }
            ')' => {
                bump!();
                Tok::RParen
            }
            '~' | '¬' => {
                bump!();
                Tok::Not
            }
            '□' => {
                bump!();
                Tok::BoxOp
            }
            '^' => {
                bump!();
                Tok::Caret
            }
            '&' | '∧' => {
                bump!();
                Tok::And
            }
            '|' | '∨' => {
                bump!();
                Tok::Or
            }
            '→' => {
                bump!();
                Tok::Implies
            }
            '↔' => {
                bump!();
                Tok::Iff
            }
            '⊤' => {
                bump!();
                Tok::True
            }
            '⊥' => {
                bump!();
                Tok::False
            }
            '+' => {
                bump!();
                Tok::Plus
            }
            '>' => {
                bump!();
                Tok::Gt
            }
            '[' => {
                bump!();
                if chars.peek() == Some(&']') {
                    bump!();
                    Tok::BoxOp
                } else {
                    return Err(err("unknown token `[` (did you mean `[]`?)".into()));
                }
            }
            '-' => {
                bump!();
                if chars.peek() == Some(&'>') {
                    bump!();
                    Tok::Implies
                } else {
                    return Err(err("unknown token `-` (did you mean `->`?)".into()));
                }
            }
            ':' => {
                bump!();
                if chars.peek() == Some(&'=') {
                    bump!();
                    Tok::Assign
                } else {
                    return Err(err("unknown token `:` (did you mean `:=`?)".into()));
                }
            }
            '<' => {
                bump!();
                let mut probe = chars.clone();
                if probe.next() == Some('-') && probe.next() == Some('>') {
                    bump!();
                    bump!();
                    Tok::Iff
                } else {
                    Tok::Lt
                }
            }
            '"' => {
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None => return Err(err("unterminated string literal".into())),
                        Some('"') => break,
                        Some('\\') => match bump!() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(other) => s.push(other),
                            None => return Err(err("unterminated string literal".into())),
                        },
                        Some(other) => s.push(other),
                    }
                }
                Tok::Str(s)
            }
            c if c.is_ascii_digit() => {
                let mut n: u64 = 0;
                while let Some(&d) = chars.peek() {
                    let Some(v) = d.to_digit(10) else { break };
                    n = n
                        .checked_mul(10)
                        .and_then(|n| n.checked_add(v as u64))
                        .ok_or_else(|| err("integer literal too large".into()))?;
                    bump!();
                }
                Tok::Int(n)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut s = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        s.push(d);
                        bump!();
                    } else {
                        break;
                    }
                }
                match s.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    _ => Tok::Ident(s),
                }
            }
            other => return Err(err(format!("unknown token `{other}`"))),
        };
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, column }));
    Ok(out)
}

/// Cursor over a token stream, with an optional bound family parameter
/// that may appear in `box^K`, `provable<K>` and `Name<K+1>` positions.
pub(crate) struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    idx: usize,
    param: Option<(&'a str, u64)>,
}

impl<'a> Parser<'a> {
    pub(crate) fn new(toks: Vec<(Tok, Pos)>, param: Option<(&'a str, u64)>) -> Self {
        Parser { toks, idx: 0, param }
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.idx].0
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.idx + offset).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    pub(crate) fn pos(&self) -> Pos {
        self.toks[self.idx].1
    }

    pub(crate) fn advance(&mut self) -> Tok {
        let t = self.toks[self.idx].0.clone();
        if self.idx + 1 < self.toks.len() {
            self.idx += 1;
        }
        t
    }

    pub(crate) fn error(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let pos = self.pos();
        ParseError {
            line: pos.line,
            column: pos.column,
            message: message.into(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub(crate) fn unexpected(&self, expected: &[&str]) -> ParseError {
        let msg = match self.peek() {
            Tok::RParen => "unbalanced parentheses: unexpected `)`".to_string(),
            Tok::Eof if expected.contains(&"`)`") => "unbalanced parentheses: missing `)`".to_string(),
            t => format!("unexpected {}", t.describe()),
        };
        self.error(msg, expected)
    }

    pub(crate) fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            let d = tok.describe();
            Err(self.unexpected(&[d.as_str()]))
        }
    }

    pub(crate) fn expect_ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.advance();
                Ok(s)
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    pub(crate) fn expect_eof(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.unexpected(&["end of input", "`&`", "`|`", "`->`", "`<->`"]))
        }
    }

    pub(crate) fn formula(&mut self) -> Result<Formula<RawAtom>, ParseError> {
        let mut lhs = self.implication()?;
        while *self.peek() == Tok::Iff {
            self.advance();
            let rhs = self.implication()?;
            lhs = Formula::iff(lhs, rhs);
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<Formula<RawAtom>, ParseError> {
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Implies {
            self.advance();
            let rhs = self.implication()?;
            Ok(Formula::implies(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn disjunction(&mut self) -> Result<Formula<RawAtom>, ParseError> {
        let mut lhs = self.conjunction()?;
        while *self.peek() == Tok::Or {
            self.advance();
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula<RawAtom>, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Tok::And {
            self.advance();
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula<RawAtom>, ParseError> {
        match self.peek() {
            Tok::Not => {
                self.advance();
                Ok(Formula::not(self.unary()?))
            }
            Tok::BoxOp => {
                self.advance();
                Ok(Formula::boxed(self.unary()?))
            }
            Tok::Ident(s) if s == "box" => {
                self.advance();
                let n = if *self.peek() == Tok::Caret {
                    self.advance();
                    self.exponent()?
                } else {
                    1
                };
                Ok(Formula::boxes(n, self.unary()?))
            }
            _ => self.primary(),
        }
    }

    /// `INT | PARAM | "(" sum ")"`
    fn exponent(&mut self) -> Result<u32, ParseError> {
        let value = match self.peek() {
            Tok::LParen => {
                self.advance();
                let v = self.sum()?;
                self.expect(Tok::RParen)?;
                v
            }
            _ => self.term()?,
        };
        self.small(value)
    }

    fn small(&self, value: u64) -> Result<u32, ParseError> {
        u32::try_from(value).map_err(|_| self.error("exponent too large", &[]))
    }

    /// `term ("+" INT)*`
    fn sum(&mut self) -> Result<u64, ParseError> {
        let mut v = self.term()?;
        while *self.peek() == Tok::Plus {
            self.advance();
            match self.advance() {
                Tok::Int(n) => {
                    v = v
                        .checked_add(n)
                        .ok_or_else(|| self.error("exponent too large", &[]))?
                }
                _ => return Err(self.error("expected an integer after `+`", &["integer"])),
            }
        }
        Ok(v)
    }

    fn term(&mut self) -> Result<u64, ParseError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(n)
            }
            Tok::Ident(s) => match self.param {
                Some((name, value)) if name == s => {
                    self.advance();
                    Ok(value)
                }
                _ => Err(self.error(format!("unknown parameter `{s}`"), &["integer"])),
            },
            _ => Err(self.unexpected(&["integer", "parameter"])),
        }
    }

    /// `NAME` optionally followed by a family argument `<sum>`, rendered as
    /// `Name<k>`.
    pub(crate) fn agent_name(&mut self, what: &str) -> Result<String, ParseError> {
        let name = self.expect_ident(what)?;
        if *self.peek() == Tok::Lt {
            self.advance();
            let k = self.sum()?;
            self.expect(Tok::Gt)?;
            Ok(format!("{name}<{k}>"))
        } else {
            Ok(name)
        }
    }

    fn primary(&mut self) -> Result<Formula<RawAtom>, ParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.advance();
                Ok(Formula::Top)
            }
            Tok::False => {
                self.advance();
                Ok(Formula::Bottom)
            }
            Tok::LParen => {
                self.advance();
                let f = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Ident(s) if s == "provable" && *self.peek_at(1) == Tok::Lt => {
                self.advance();
                self.advance();
                let level = self.sum()?;
                let level = self.small(level)?;
                self.expect(Tok::Gt)?;
                self.expect(Tok::LParen)?;
                let body = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(Formula::provable(level, body))
            }
            Tok::Ident(_) => {
                let caller = self.agent_name("name")?;
                self.expect(Tok::LParen)?;
                let callee = self.agent_name("name")?;
                self.expect(Tok::RParen)?;
                Ok(Formula::atom(RawAtom { caller, callee }))
            }
            _ => Err(self.unexpected(&[
                "`true`",
                "`false`",
                "`~`",
                "`[]`",
                "`box`",
                "`(`",
                "atom NAME(NAME)",
            ])),
        }
    }
}

/// Parses a single formula. Atoms come back unresolved.
pub fn parse_formula(text: &str) -> Result<Formula<RawAtom>, ParseError> {
    let mut p = Parser::new(lex(text, 1)?, None);
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}
