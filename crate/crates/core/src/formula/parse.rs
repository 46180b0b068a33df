use std::fmt;

use thiserror::Error;

use super::Formula;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    pub(crate) fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Tok {
    Var(u32),
    False,
    True,
    Not,
    Box,
    Diamond,
    And,
    Or,
    Arrow,
    LParen,
    RParen,
    Dot,
    Exists,
    Forall,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Var(i) => return write!(f, "p{i}"),
            Tok::False => "false",
            Tok::True => "true",
            Tok::Not => "~",
            Tok::Box => "[]",
            Tok::Diamond => "<>",
            Tok::And => "&",
            Tok::Or => "|",
            Tok::Arrow => "->",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::Dot => ".",
            Tok::Exists => "E",
            Tok::Forall => "A",
        };
        f.write_str(s)
    }
}

pub(crate) fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = bytes.get(i..i + 2);
        let tok = match c {
            b'~' => Tok::Not,
            b'&' => Tok::And,
            b'|' => Tok::Or,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'.' => Tok::Dot,
            b'[' if two == Some(b"[]") => Tok::Box,
            b'<' if two == Some(b"<>") => Tok::Diamond,
            b'-' if two == Some(b"->") => Tok::Arrow,
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && bytes[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "false" => Tok::False,
                    "true" => Tok::True,
                    "E" => Tok::Exists,
                    "A" => Tok::Forall,
                    _ => lex_var(word, start)?,
                };
                out.push((start, tok));
                continue;
            }
            _ => {
                let ch = text[i..].chars().next().unwrap();
                return Err(ParseError::new(i, format!("unexpected character {ch:?}")));
            }
        };
        i += match tok {
            Tok::Box | Tok::Diamond | Tok::Arrow => 2,
            _ => 1,
        };
        out.push((start, tok));
    }
    Ok(out)
}

fn lex_var(word: &str, pos: usize) -> Result<Tok, ParseError> {
    let digits = word
        .strip_prefix('p')
        .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
        .ok_or_else(|| ParseError::new(pos, format!("unknown identifier `{word}`")))?;
    let index: u32 = digits
        .parse()
        .map_err(|_| ParseError::new(pos, format!("variable index out of range in `{word}`")))?;
    if index == 0 {
        return Err(ParseError::new(pos, "variable index 0 is not allowed"));
    }
    Ok(Tok::Var(index))
}

/// Recursive-descent parser over a token slice.
pub(crate) struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    pub(crate) fn new(text: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: lex(text)?,
            at: 0,
            end: text.len(),
        })
    }

    pub(crate) fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    pub(crate) fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    pub(crate) fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.at).map(|(_, t)| t.clone());
        self.at += 1;
        t
    }

    pub(crate) fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            Some(t) => Err(ParseError::new(pos, format!("expected `{want}`, found `{t}`"))),
            None => Err(ParseError::new(pos, format!("expected `{want}`, found end of input"))),
        }
    }

    pub(crate) fn finish(&self) -> Result<(), ParseError> {
        match self.peek() {
            None => Ok(()),
            Some(t) => Err(ParseError::new(self.pos(), format!("unexpected `{t}`"))),
        }
    }

    pub(crate) fn formula(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.peek() == Some(&Tok::Arrow) {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.conjunction()?];
        while self.peek() == Some(&Tok::Or) {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(Formula::or(parts))
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut parts = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(Formula::and(parts))
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Not) => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::Box) => {
                self.bump();
                Ok(Formula::boxed(self.unary()?))
            }
            Some(Tok::Diamond) => {
                self.bump();
                Ok(Formula::diamond(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Var(i)) => Ok(Formula::Var(i)),
            Some(Tok::False) => Ok(Formula::Falsum),
            Some(Tok::True) => Ok(Formula::Top),
            Some(Tok::LParen) => {
                let inner = self.formula()?;
                self.expect(Tok::RParen)?;
                Ok(inner)
            }
            Some(t) => Err(ParseError::new(pos, format!("expected a formula, found `{t}`"))),
            None => Err(ParseError::new(pos, "expected a formula, found end of input")),
        }
    }
}

/// Parses a formula written in the ASCII grammar: `p<k>`, `false`, `true`,
/// prefix `~ [] <>`, then `&`, then `|`, then right-associative `->`.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

const PREC_IMPLIES: u8 = 1;
const PREC_OR: u8 = 2;
const PREC_AND: u8 = 3;
const PREC_PREFIX: u8 = 4;
const PREC_ATOM: u8 = 5;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => PREC_IMPLIES,
        Formula::Or(xs) if xs.len() >= 2 => PREC_OR,
        Formula::And(xs) if xs.len() >= 2 => PREC_AND,
        Formula::Or(xs) | Formula::And(xs) => xs.first().map_or(PREC_ATOM, precedence),
        Formula::Not(_) | Formula::Box(_) | Formula::Diamond(_) => PREC_PREFIX,
        Formula::Var(_) | Formula::Falsum | Formula::Top => PREC_ATOM,
    }
}

pub(super) fn write_formula(out: &mut fmt::Formatter<'_>, f: &Formula, min_prec: u8) -> fmt::Result {
    let parens = precedence(f) < min_prec;
    if parens {
        out.write_str("(")?;
    }
    match f {
        Formula::Var(i) => write!(out, "p{i}")?,
        Formula::Falsum => out.write_str("false")?,
        Formula::Top => out.write_str("true")?,
        Formula::Not(a) => {
            out.write_str("~")?;
            write_formula(out, a, PREC_PREFIX)?;
        }
        Formula::Box(a) => {
            out.write_str("[]")?;
            write_formula(out, a, PREC_PREFIX)?;
        }
        Formula::Diamond(a) => {
            out.write_str("<>")?;
            write_formula(out, a, PREC_PREFIX)?;
        }
        Formula::Implies(a, b) => {
            write_formula(out, a, PREC_OR)?;
            out.write_str(" -> ")?;
            write_formula(out, b, PREC_IMPLIES)?;
        }
        Formula::And(xs) | Formula::Or(xs) => {
            let is_and = matches!(f, Formula::And(_));
            match xs.as_slice() {
                [] => out.write_str(if is_and { "true" } else { "false" })?,
                [x] => write_formula(out, x, min_prec)?,
                _ => {
                    let (sep, child_prec) = if is_and {
                        (" & ", PREC_PREFIX)
                    } else {
                        (" | ", PREC_AND)
                    };
                    for (k, x) in xs.iter().enumerate() {
                        if k > 0 {
                            out.write_str(sep)?;
                        }
                        write_formula(out, x, child_prec)?;
                    }
                }
            }
        }
    }
    if parens {
        out.write_str(")")?;
    }
    Ok(())
}
