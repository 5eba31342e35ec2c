//! Parser for the concrete syntax.
//!
//! Grammar sketch, loosest binding first:
//!
//! ```text
//! program  ::= tagdecl* term
//! tagdecl  ::= 'tag' TagName '/' nat ';'
//! term     ::= '\' pattern '.' term
//!            | 'case' term 'of' '{' branch ('|' branch)* '}'
//!            | app
//! app      ::= suffixed suffixed*
//! suffixed ::= atom ('[' pattern '/' term ']')*
//! atom     ::= var | TagName args? | '(' term ')'
//! pattern  ::= var | TagName pargs?
//! ```
//!
//! Variables start lowercase, tag names start uppercase. A tag's argument
//! list must open immediately after the name (no space), so `f C0 (x)` is an
//! application chain while `Pair(x,y)` is a data term. `I` abbreviates
//! `\x.x` and cannot be a tag name. `#` starts a line comment. Tag arities
//! are fixed at first use or by a `tag Name/arity;` declaration; conflicting
//! reuse is a parse error.

use std::fmt;

use crate::syntax::{Branch, Pattern, TagRegistry, Term};

/// A parse or lex error with its position in the source.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub message: String,
    pub line: usize,
    pub col: usize,
    pub offset: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "parse error at line {}, col {}: {}",
            self.line, self.col, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum TokKind {
    Lower(String),
    Upper(String),
    Nat(usize),
    Backslash,
    Dot,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Slash,
    Arrow,
    Bar,
    Comma,
    Semi,
    Bang,
    KwCase,
    KwOf,
    KwTag,
    Eof,
}

impl TokKind {
    pub(crate) fn describe(&self) -> String {
        match self {
            TokKind::Lower(s) | TokKind::Upper(s) => format!("`{s}`"),
            TokKind::Nat(n) => format!("`{n}`"),
            TokKind::Backslash => "`\\`".into(),
            TokKind::Dot => "`.`".into(),
            TokKind::LParen => "`(`".into(),
            TokKind::RParen => "`)`".into(),
            TokKind::LBracket => "`[`".into(),
            TokKind::RBracket => "`]`".into(),
            TokKind::LBrace => "`{`".into(),
            TokKind::RBrace => "`}`".into(),
            TokKind::Slash => "`/`".into(),
            TokKind::Arrow => "`->`".into(),
            TokKind::Bar => "`|`".into(),
            TokKind::Comma => "`,`".into(),
            TokKind::Semi => "`;`".into(),
            TokKind::Bang => "`!`".into(),
            TokKind::KwCase => "`case`".into(),
            TokKind::KwOf => "`of`".into(),
            TokKind::KwTag => "`tag`".into(),
            TokKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub kind: TokKind,
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub col: usize,
}

pub(crate) fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut iter = src.char_indices().peekable();
    while let Some(&(i, c)) = iter.peek() {
        let (tline, tcol) = (line, col);
        let advance = |iter: &mut std::iter::Peekable<std::str::CharIndices>,
                       line: &mut usize,
                       col: &mut usize| {
            let (_, ch) = iter.next().unwrap();
            if ch == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            ch
        };
        if c.is_whitespace() {
            advance(&mut iter, &mut line, &mut col);
            continue;
        }
        if c == '#' {
            while let Some(&(_, ch)) = iter.peek() {
                if ch == '\n' {
                    break;
                }
                advance(&mut iter, &mut line, &mut col);
            }
            continue;
        }
        let single = |kind: TokKind, end: usize| Token {
            kind,
            start: i,
            end,
            line: tline,
            col: tcol,
        };
        match c {
            '\\' | '.' | '(' | ')' | '[' | ']' | '{' | '}' | '/' | '|' | ',' | ';' | '!' => {
                advance(&mut iter, &mut line, &mut col);
                let kind = match c {
                    '\\' => TokKind::Backslash,
                    '.' => TokKind::Dot,
                    '(' => TokKind::LParen,
                    ')' => TokKind::RParen,
                    '[' => TokKind::LBracket,
                    ']' => TokKind::RBracket,
                    '{' => TokKind::LBrace,
                    '}' => TokKind::RBrace,
                    '/' => TokKind::Slash,
                    '|' => TokKind::Bar,
                    ',' => TokKind::Comma,
                    ';' => TokKind::Semi,
                    '!' => TokKind::Bang,
                    _ => unreachable!(),
                };
                out.push(single(kind, i + c.len_utf8()));
            }
            '-' => {
                advance(&mut iter, &mut line, &mut col);
                match iter.peek() {
                    Some(&(_, '>')) => {
                        advance(&mut iter, &mut line, &mut col);
                        out.push(single(TokKind::Arrow, i + 2));
                    }
                    _ => {
                        return Err(ParseError {
                            message: "expected `->` after `-`".into(),
                            line: tline,
                            col: tcol,
                            offset: i,
                        })
                    }
                }
            }
            _ if c.is_ascii_digit() => {
                let mut end = i;
                let mut value = 0usize;
                while let Some(&(j, ch)) = iter.peek() {
                    if ch.is_ascii_digit() {
                        value = value * 10 + (ch as usize - '0' as usize);
                        end = j + 1;
                        advance(&mut iter, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                out.push(single(TokKind::Nat(value), end));
            }
            _ if c.is_ascii_alphabetic() || c == '_' => {
                let mut end = i;
                let mut name = String::new();
                while let Some(&(j, ch)) = iter.peek() {
                    if ch.is_ascii_alphanumeric() || ch == '_' {
                        name.push(ch);
                        end = j + ch.len_utf8();
                        advance(&mut iter, &mut line, &mut col);
                    } else {
                        break;
                    }
                }
                let kind = match name.as_str() {
                    "case" => TokKind::KwCase,
                    "of" => TokKind::KwOf,
                    "tag" => TokKind::KwTag,
                    _ if name.chars().next().unwrap().is_ascii_uppercase() => TokKind::Upper(name),
                    _ => TokKind::Lower(name),
                };
                out.push(single(kind, end));
            }
            _ => {
                return Err(ParseError {
                    message: format!("unexpected character `{c}`"),
                    line: tline,
                    col: tcol,
                    offset: i,
                })
            }
        }
    }
    out.push(Token {
        kind: TokKind::Eof,
        start: src.len(),
        end: src.len(),
        line,
        col,
    });
    Ok(out)
}

pub(crate) struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    pub registry: &'a mut TagRegistry,
}

impl<'a> Parser<'a> {
    pub fn new(src: &str, registry: &'a mut TagRegistry) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(src)?,
            pos: 0,
            registry,
        })
    }

    pub fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    pub fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn err(&self, message: impl Into<String>) -> ParseError {
        let t = self.peek();
        ParseError {
            message: message.into(),
            line: t.line,
            col: t.col,
            offset: t.start,
        }
    }

    pub fn expect(&mut self, kind: &TokKind) -> Result<Token, ParseError> {
        if &self.peek().kind == kind {
            Ok(self.bump())
        } else {
            Err(self.err(format!(
                "expected {}, found {}",
                kind.describe(),
                self.peek().kind.describe()
            )))
        }
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if self.peek().kind == TokKind::Eof {
            Ok(())
        } else {
            Err(self.err(format!(
                "unexpected {} after term",
                self.peek().kind.describe()
            )))
        }
    }

    fn declare(&mut self, name: &str, arity: usize) -> Result<crate::syntax::Tag, ParseError> {
        if name == "I" {
            return Err(self.err("`I` is reserved for the identity term and cannot be a tag"));
        }
        self.registry
            .declare(name, arity)
            .map_err(|e| self.err(e.to_string()))
    }

    /// Leading `tag Name/arity;` declarations.
    pub fn tag_decls(&mut self) -> Result<(), ParseError> {
        while self.peek().kind == TokKind::KwTag {
            self.bump();
            let name = match self.bump() {
                Token {
                    kind: TokKind::Upper(n),
                    ..
                } => n,
                _ => return Err(self.err("expected a tag name after `tag`")),
            };
            self.expect(&TokKind::Slash)?;
            let arity = match self.bump() {
                Token {
                    kind: TokKind::Nat(n),
                    ..
                } => n,
                _ => return Err(self.err("expected an arity after `/`")),
            };
            self.declare(&name, arity)?;
            self.expect(&TokKind::Semi)?;
        }
        Ok(())
    }

    pub fn term(&mut self) -> Result<Term, ParseError> {
        match &self.peek().kind {
            TokKind::Backslash => {
                self.bump();
                let p = self.pattern()?;
                self.expect(&TokKind::Dot)?;
                let body = self.term()?;
                Ok(Term::abs(p, body))
            }
            TokKind::KwCase => {
                self.bump();
                let scrutinee = self.term()?;
                self.expect(&TokKind::KwOf)?;
                self.expect(&TokKind::LBrace)?;
                if self.peek().kind == TokKind::RBrace {
                    return Err(self.err("case expression must have at least one branch"));
                }
                let mut branches = vec![self.branch()?];
                while self.peek().kind == TokKind::Bar {
                    self.bump();
                    branches.push(self.branch()?);
                }
                self.expect(&TokKind::RBrace)?;
                Ok(Term::case(scrutinee, branches))
            }
            _ => self.app(),
        }
    }

    fn branch(&mut self) -> Result<Branch, ParseError> {
        let pattern = self.pattern()?;
        if matches!(pattern, Pattern::Var(_)) {
            return Err(self.err("branch pattern must be a data pattern"));
        }
        self.expect(&TokKind::Arrow)?;
        let body = self.term()?;
        Ok(Branch { pattern, body })
    }

    fn app(&mut self) -> Result<Term, ParseError> {
        let mut t = self.suffixed()?;
        while matches!(
            self.peek().kind,
            TokKind::Lower(_) | TokKind::Upper(_) | TokKind::LParen
        ) {
            let arg = self.suffixed()?;
            t = Term::app(t, arg);
        }
        Ok(t)
    }

    fn suffixed(&mut self) -> Result<Term, ParseError> {
        let mut t = self.atom()?;
        while self.peek().kind == TokKind::LBracket {
            self.bump();
            let p = self.pattern()?;
            self.expect(&TokKind::Slash)?;
            let u = self.term()?;
            self.expect(&TokKind::RBracket)?;
            t = Term::match_closure(t, p, u);
        }
        Ok(t)
    }

    /// True when the next token is `(` starting at exactly `end`, i.e. with
    /// no space after the preceding name. Tags take arguments only then.
    fn adjacent_lparen(&self, end: usize) -> bool {
        let t = self.peek();
        t.kind == TokKind::LParen && t.start == end
    }

    fn atom(&mut self) -> Result<Term, ParseError> {
        match self.peek().kind.clone() {
            TokKind::Lower(x) => {
                self.bump();
                Ok(Term::var(x))
            }
            TokKind::Upper(name) => {
                let tok = self.bump();
                if name == "I" {
                    return Ok(Term::ident());
                }
                let mut args = Vec::new();
                if self.adjacent_lparen(tok.end) {
                    self.bump();
                    if self.peek().kind != TokKind::RParen {
                        args.push(self.term()?);
                        while self.peek().kind == TokKind::Comma {
                            self.bump();
                            args.push(self.term()?);
                        }
                    }
                    self.expect(&TokKind::RParen)?;
                }
                let tag = self.declare(&name, args.len())?;
                Ok(Term::data(tag, args))
            }
            TokKind::LParen => {
                self.bump();
                let t = self.term()?;
                self.expect(&TokKind::RParen)?;
                Ok(t)
            }
            other => Err(self.err(format!("expected a term, found {}", other.describe()))),
        }
    }

    pub fn pattern(&mut self) -> Result<Pattern, ParseError> {
        match self.peek().kind.clone() {
            TokKind::Lower(x) => {
                self.bump();
                Ok(Pattern::var(x))
            }
            TokKind::Upper(name) => {
                let tok = self.bump();
                if name == "I" {
                    return Err(
                        self.err("`I` is reserved for the identity term and cannot be a tag")
                    );
                }
                let mut ps = Vec::new();
                if self.adjacent_lparen(tok.end) {
                    self.bump();
                    if self.peek().kind != TokKind::RParen {
                        ps.push(self.pattern()?);
                        while self.peek().kind == TokKind::Comma {
                            self.bump();
                            ps.push(self.pattern()?);
                        }
                    }
                    self.expect(&TokKind::RParen)?;
                }
                let tag = self.declare(&name, ps.len())?;
                Ok(Pattern::data(tag, ps))
            }
            other => Err(self.err(format!("expected a pattern, found {}", other.describe()))),
        }
    }
}

/// Parses a whole program (optional tag declarations followed by one term)
/// with a fresh registry.
pub fn parse_term(src: &str) -> Result<(Term, TagRegistry), ParseError> {
    let mut registry = TagRegistry::new();
    let term = parse_term_with(src, &mut registry)?;
    Ok((term, registry))
}

/// Parses a program against an existing registry, extending it with newly
/// declared tags.
pub fn parse_term_with(src: &str, registry: &mut TagRegistry) -> Result<Term, ParseError> {
    let mut p = Parser::new(src, registry)?;
    p.tag_decls()?;
    let t = p.term()?;
    p.expect_eof()?;
    Ok(t)
}

/// Parses a single pattern, extending the registry with newly used tags.
pub fn parse_pattern_str(src: &str, registry: &mut TagRegistry) -> Result<Pattern, ParseError> {
    let mut p = Parser::new(src, registry)?;
    let pat = p.pattern()?;
    p.expect_eof()?;
    Ok(pat)
}
