//! Concrete syntax for session types and JSON encodings of judgements.
//!
//! ```text
//! T ::= "end" | IDENT | "rec" IDENT "." T
//!     | "?" "[" T ("," T)* "]" "." T
//!     | "!" "[" T ("," T)* "]" "." T
//!     | "+" "{" LABEL ":" T ("," LABEL ":" T)* "}"
//!     | "&" "{" LABEL ":" T ("," LABEL ":" T)* "}"
//!     | "(" T ")"
//! ```
//!
//! Whitespace is insignificant and `#` starts a comment that runs to the end
//! of the line. A continuation after `.` extends as far to the right as
//! possible, so the printer never needs parentheses.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::inductive::{Claim, Judgement};
use crate::syntax::{Ident, Label, SessionType};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SourceSpan {
    /// Byte offsets into the input, `start <= end`.
    pub start: usize,
    pub end: usize,
    /// 1-based.
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    pub span: SourceSpan,
    pub expected: Vec<String>,
    pub found: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.span)?;
        match self.expected.as_slice() {
            [] => write!(f, "unexpected {}", self.found),
            [one] => write!(f, "expected {one}, found {}", self.found),
            many => write!(f, "expected one of {}, found {}", many.join(" "), self.found),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    End,
    Rec,
    Ident(String),
    Question,
    Bang,
    Plus,
    Amp,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    LParen,
    RParen,
    Dot,
    Comma,
    Colon,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::End => "`end`".into(),
            Tok::Rec => "`rec`".into(),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Question => "`?`".into(),
            Tok::Bang => "`!`".into(),
            Tok::Plus => "`+`".into(),
            Tok::Amp => "`&`".into(),
            Tok::LBracket => "`[`".into(),
            Tok::RBracket => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src,
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn peek_char(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek_char()?;
        self.pos += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(c) = self.peek_char() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, SourceSpan)>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_trivia();
            let (start, line, column) = (self.pos, self.line, self.col);
            let span = |end| SourceSpan {
                start,
                end,
                line,
                column,
            };
            let Some(c) = self.bump() else {
                out.push((Tok::Eof, span(start)));
                return Ok(out);
            };
            let tok = match c {
                '?' => Tok::Question,
                '!' => Tok::Bang,
                '+' => Tok::Plus,
                '&' => Tok::Amp,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '.' => Tok::Dot,
                ',' => Tok::Comma,
                ':' => Tok::Colon,
                c if c.is_ascii_alphabetic() || c == '_' => {
                    while matches!(self.peek_char(), Some(c) if c.is_ascii_alphanumeric() || c == '_')
                    {
                        self.bump();
                    }
                    match &self.src[start..self.pos] {
                        "end" => Tok::End,
                        "rec" => Tok::Rec,
                        word => Tok::Ident(word.to_string()),
                    }
                }
                other => {
                    return Err(ParseError {
                        span: span(self.pos),
                        expected: Vec::new(),
                        found: format!("character `{other}`"),
                    })
                }
            };
            out.push((tok, span(self.pos)));
        }
    }
}

struct Parser {
    toks: Vec<(Tok, SourceSpan)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let (tok, span) = &self.toks[self.pos];
        ParseError {
            span: *span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: tok.describe(),
        }
    }

    fn advance(&mut self) -> Tok {
        let tok = self.toks[self.pos].0.clone();
        if tok != Tok::Eof {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, tok: Tok, shown: &str) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error(&[shown]))
        }
    }

    fn ty(&mut self) -> Result<SessionType, ParseError> {
        match self.peek().clone() {
            Tok::End => {
                self.advance();
                Ok(SessionType::End)
            }
            Tok::Ident(name) => {
                let span = self.toks[self.pos].1;
                self.advance();
                let id = Ident::new(name.clone()).map_err(|e| ParseError {
                    span,
                    expected: vec!["identifier".into()],
                    found: e.to_string(),
                })?;
                Ok(SessionType::Var(id))
            }
            Tok::Rec => {
                self.advance();
                let binder = match self.peek().clone() {
                    Tok::Ident(name) => {
                        self.advance();
                        Ident::new(name).expect("lexer yields identifier lexemes")
                    }
                    _ => return Err(self.error(&["identifier"])),
                };
                self.expect(Tok::Dot, "`.`")?;
                let body = self.ty()?;
                Ok(SessionType::Rec(binder, Box::new(body)))
            }
            Tok::Question | Tok::Bang => {
                let input = self.advance() == Tok::Question;
                self.expect(Tok::LBracket, "`[`")?;
                let mut payloads = vec![self.ty()?];
                loop {
                    match self.peek() {
                        Tok::Comma => {
                            self.advance();
                            payloads.push(self.ty()?);
                        }
                        Tok::RBracket => {
                            self.advance();
                            break;
                        }
                        _ => return Err(self.error(&["`,`", "`]`"])),
                    }
                }
                self.expect(Tok::Dot, "`.`")?;
                let cont = Box::new(self.ty()?);
                Ok(if input {
                    SessionType::Input(payloads, cont)
                } else {
                    SessionType::Output(payloads, cont)
                })
            }
            Tok::Plus | Tok::Amp => {
                let select = self.advance() == Tok::Plus;
                self.expect(Tok::LBrace, "`{`")?;
                let mut alts = vec![self.alternative()?];
                loop {
                    match self.peek() {
                        Tok::Comma => {
                            self.advance();
                            alts.push(self.alternative()?);
                        }
                        Tok::RBrace => {
                            self.advance();
                            break;
                        }
                        _ => return Err(self.error(&["`,`", "`}`"])),
                    }
                }
                Ok(if select {
                    SessionType::Select(alts)
                } else {
                    SessionType::Branch(alts)
                })
            }
            Tok::LParen => {
                self.advance();
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => Err(self.error(&[
                "`end`", "identifier", "`rec`", "`?`", "`!`", "`+`", "`&`", "`(`",
            ])),
        }
    }

    fn alternative(&mut self) -> Result<(Label, SessionType), ParseError> {
        let label = match self.peek().clone() {
            Tok::Ident(name) => name,
            Tok::End => "end".to_string(),
            Tok::Rec => "rec".to_string(),
            _ => return Err(self.error(&["label"])),
        };
        self.advance();
        self.expect(Tok::Colon, "`:`")?;
        let t = self.ty()?;
        Ok((Label::new(label).expect("lexer yields identifier lexemes"), t))
    }
}

/// Parses one session type. Duplicate labels and non-contractive binders are
/// accepted here and rejected by [`crate::syntax::validate`].
pub fn parse(text: &str) -> Result<SessionType, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let mut p = Parser { toks, pos: 0 };
    let t = p.ty()?;
    if *p.peek() != Tok::Eof {
        return Err(p.error(&["end of input"]));
    }
    Ok(t)
}

pub fn print(t: &SessionType) -> String {
    let mut out = String::new();
    write_type(t, &mut out);
    out
}

fn write_type(t: &SessionType, out: &mut String) {
    match t {
        SessionType::End => out.push_str("end"),
        SessionType::Var(x) => out.push_str(x.as_str()),
        SessionType::Rec(x, body) => {
            out.push_str("rec ");
            out.push_str(x.as_str());
            out.push_str(". ");
            write_type(body, out);
        }
        SessionType::Input(ps, k) | SessionType::Output(ps, k) => {
            out.push(if matches!(t, SessionType::Input(..)) { '?' } else { '!' });
            out.push('[');
            for (i, p) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_type(p, out);
            }
            out.push_str("].");
            write_type(k, out);
        }
        SessionType::Select(alts) | SessionType::Branch(alts) => {
            out.push(if matches!(t, SessionType::Select(..)) { '+' } else { '&' });
            out.push('{');
            for (i, (l, a)) in alts.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(l.as_str());
                out.push_str(": ");
                write_type(a, out);
            }
            out.push('}');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub lhs: String,
    pub rhs: String,
}

impl From<&Claim> for ClaimRecord {
    fn from(c: &Claim) -> Self {
        ClaimRecord {
            lhs: print(c.lhs()),
            rhs: print(c.rhs()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JudgementRecord {
    pub sigma: Vec<ClaimRecord>,
    pub goal: ClaimRecord,
}

impl From<&Judgement> for JudgementRecord {
    fn from(j: &Judgement) -> Self {
        let mut sigma: Vec<ClaimRecord> = j.sigma.iter().map(ClaimRecord::from).collect();
        sigma.sort();
        JudgementRecord {
            sigma,
            goal: ClaimRecord::from(&j.goal),
        }
    }
}

/// One-line JSON record `{"sigma":[{"lhs":..,"rhs":..},..],"goal":{..}}` with
/// the context sorted by printed form.
pub fn encode_judgement(j: &Judgement) -> String {
    serde_json::to_string(&JudgementRecord::from(j)).expect("string-only record serializes")
}
