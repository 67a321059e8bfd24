//! Recursive-descent reader for polynomial expressions.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := unary (('*' unary) | ('/' number))*
//! unary  := '-' unary | '+' unary | power
//! power  := atom ['^' integer]
//! atom   := integer | identifier | 'i' | '(' expr ')'
//! ```
//! Division is only by a nonzero integer literal, which is how rational
//! literals like `3/4` are written.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::coeff::GaussRat;
use super::poly::{Polynomial, Vars};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(BigInt),
    Decimal(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => out.push((Tok::Plus, start)),
            '-' => out.push((Tok::Minus, start)),
            '*' => out.push((Tok::Star, start)),
            '/' => out.push((Tok::Slash, start)),
            '^' => out.push((Tok::Caret, start)),
            '(' => out.push((Tok::LParen, start)),
            ')' => out.push((Tok::RParen, start)),
            '0'..='9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    out.push((Tok::Decimal(text[start..i].to_string()), start));
                } else {
                    out.push((Tok::Int(text[start..i].parse().expect("digits")), start));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            other => {
                return Err(Error::Syntax { pos: start, msg: format!("unexpected character '{other}'") });
            }
        }
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    vars: &'a Vars,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn syntax(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos(), msg: msg.to_string() }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = match self.peek() {
            Tok::Minus => {
                self.bump();
                -&self.term()?
            }
            Tok::Plus => {
                self.bump();
                self.term()?
            }
            _ => self.term()?,
        };
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = &acc + &self.term()?;
                }
                Tok::Minus => {
                    self.bump();
                    acc = &acc - &self.term()?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = &acc * &self.unary()?;
                }
                Tok::Slash => {
                    self.bump();
                    let pos = self.pos();
                    match self.bump() {
                        Tok::Int(n) if !n.is_zero() => {
                            let inv = GaussRat::real(BigRational::new(1.into(), n));
                            acc = acc.scale(&inv);
                        }
                        Tok::Int(_) => return Err(Error::Syntax { pos, msg: "division by zero".into() }),
                        _ => return Err(Error::Syntax { pos, msg: "division is only allowed by an integer literal".into() }),
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(-&self.unary()?)
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => {
                let e: u32 = n
                    .try_into()
                    .map_err(|_| Error::NonIntegerExponent { pos, found: "exponent out of range".into() })?;
                Ok(base.pow(e))
            }
            Tok::Decimal(s) | Tok::Ident(s) => Err(Error::NonIntegerExponent { pos, found: s }),
            Tok::Minus => Err(Error::NonIntegerExponent { pos, found: "negative exponent".into() }),
            other => Err(Error::NonIntegerExponent { pos, found: format!("{other:?}") }),
        }
    }

    fn atom(&mut self) -> Result<Polynomial> {
        let pos = self.pos();
        match self.bump() {
            Tok::Int(n) => Ok(Polynomial::constant(self.vars.clone(), GaussRat::real(BigRational::from_integer(n)))),
            Tok::Decimal(s) => Err(Error::Syntax { pos, msg: format!("decimal literal '{s}' is not exact; write p/q") }),
            Tok::Ident(name) if name == "i" => Ok(Polynomial::constant(self.vars.clone(), GaussRat::i())),
            Tok::Ident(name) => match self.vars.iter().position(|v| *v == name) {
                Some(idx) => Ok(Polynomial::var(self.vars.clone(), idx)),
                None => Err(Error::UnknownIdentifier { name, pos }),
            },
            Tok::LParen => {
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.syntax("expected ')'"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::End => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            other => Err(Error::Syntax { pos, msg: format!("unexpected token {other:?}") }),
        }
    }
}

/// Parses `text` as an exact polynomial in the ordered variables `vars`.
///
/// `i` is always the imaginary unit, so it may not be used as a variable name.
pub fn parse_poly(text: &str, vars: &Vars) -> Result<Polynomial> {
    validate_vars(vars)?;
    let toks = lex(text)?;
    let mut p = Parser { toks, at: 0, vars };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.syntax("trailing input"));
    }
    Ok(out)
}

pub fn validate_vars(vars: &Vars) -> Result<()> {
    for (k, v) in vars.iter().enumerate() {
        let mut chars = v.chars();
        let ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !ok || v == "i" {
            return Err(Error::InvalidInput(format!("invalid variable name '{v}'")));
        }
        if vars[..k].contains(v) {
            return Err(Error::InvalidInput(format!("duplicate variable '{v}'")));
        }
    }
    Ok(())
}
