//! Recursive-descent parser for the expression grammar:
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)* ;
//! term   := number | [number '*'] factor (['*'] factor)* ;
//! factor := atom ['^' positive-int] ;
//! atom   := letter ["'"] | 'D[' expr ']' | '(' expr ')' ;
//! letter := ('x'|'y') positive-int ;
//! number := decimal | rational 'a/b' | complex '(a,b)' ;
//! ```
//!
//! `'` is the adjoint, `D[...]` the diagonal bracket. Whitespace is
//! insignificant. Every monomial of the result is canonical.

use super::{Alphabet, DeltaMonomial, DeltaPolynomial};
use crate::scalar::{parse_rational, ExactComplex, Scalar};
use num_rational::BigRational;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("undeclared letter {letter} at byte {pos}")]
    UndeclaredLetter { pos: usize, letter: String },
    #[error("adjoint applied to {letter} which has no declared partner (byte {pos})")]
    NoAdjointPartner { pos: usize, letter: String },
}

pub fn parse_polynomial(text: &str, alphabet: &Alphabet) -> Result<DeltaPolynomial, ParseError> {
    let mut p = Parser { bytes: text.as_bytes(), pos: 0, alphabet };
    let poly = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(poly)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    alphabet: &'a Alphabet,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos, msg: msg.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.pos += 1;
        Some(b)
    }

    fn eat(&mut self, b: u8) -> bool {
        if self.peek() == Some(b) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, b: u8) -> Result<(), ParseError> {
        if self.eat(b) {
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn expr(&mut self) -> Result<DeltaPolynomial, ParseError> {
        let mut acc = DeltaPolynomial::zero();
        let mut negate = self.eat(b'-');
        loop {
            let term = self.term()?;
            acc = if negate { acc.sub(&term) } else { acc.add(&term) };
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    negate = false;
                }
                Some(b'-') => {
                    self.pos += 1;
                    negate = true;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<DeltaPolynomial, ParseError> {
        let coeff = self.try_number()?;
        let mut acc = DeltaPolynomial::monomial(
            DeltaMonomial::unit(),
            coeff.clone().unwrap_or_else(Scalar::one),
        );
        if coeff.is_some() {
            // `number` alone is a constant term; `number '*'` prefixes factors.
            if !self.eat(b'*') {
                return Ok(acc);
            }
        }
        acc = acc.mul(&self.factor()?);
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.factor()?);
                }
                Some(b'x') | Some(b'y') | Some(b'D') | Some(b'(') => {
                    acc = acc.mul(&self.factor()?);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<DeltaPolynomial, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let k = self.positive_int()?;
            let mut acc = DeltaPolynomial::one();
            for _ in 0..k {
                acc = acc.mul(&base);
            }
            Ok(acc)
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<DeltaPolynomial, ParseError> {
        match self.peek() {
            Some(b'x') | Some(b'y') => {
                let letter = self.letter()?;
                Ok(DeltaPolynomial::from_letter(letter))
            }
            Some(b'D') => {
                self.pos += 1;
                self.expect(b'[')?;
                let inner = self.expr()?;
                self.expect(b']')?;
                Ok(inner.delta())
            }
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            _ => Err(self.err("expected letter, 'D[' or '('")),
        }
    }

    fn letter(&mut self) -> Result<super::Letter, ParseError> {
        let start = self.pos;
        let head = self.bump().unwrap();
        let family = self.positive_int()?;
        let adjoint = self.eat(b'\'');
        match head {
            b'x' => {
                let l = self.alphabet.wigner(family).ok_or_else(|| {
                    ParseError::UndeclaredLetter { pos: start, letter: format!("x{family}") }
                })?;
                // Wigner letters are self-adjoint.
                Ok(l)
            }
            b'y' => {
                let l = self.alphabet.deterministic(family).ok_or_else(|| {
                    ParseError::UndeclaredLetter { pos: start, letter: format!("y{family}") }
                })?;
                if adjoint {
                    if !self.alphabet.has_adjoint(family) {
                        return Err(ParseError::NoAdjointPartner {
                            pos: start,
                            letter: format!("y{family}"),
                        });
                    }
                    Ok(l.adjoint())
                } else {
                    Ok(l)
                }
            }
            _ => unreachable!(),
        }
    }

    fn positive_int(&mut self) -> Result<u32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected positive integer"));
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        let v: u32 = text.parse().map_err(|_| self.err("integer out of range"))?;
        if v == 0 {
            return Err(self.err("expected positive integer"));
        }
        Ok(v)
    }

    /// Try to read a number literal; backtracks when the input is not one.
    fn try_number(&mut self) -> Result<Option<Scalar>, ParseError> {
        self.skip_ws();
        let save = self.pos;
        match self.bytes.get(self.pos) {
            Some(b'(') => {
                // complex literal `(re,im)` — backtrack to a parenthesized
                // expression when the contents are not two rationals.
                if let Some(v) = self.try_complex() {
                    Ok(Some(v))
                } else {
                    self.pos = save;
                    Ok(None)
                }
            }
            Some(b) if b.is_ascii_digit() => {
                let num = self.rational_literal()?;
                // `1` followed by nothing numeric is still a number; the
                // term rule decides whether a '*' follows.
                Ok(Some(Scalar::from_rational(num)))
            }
            _ => Ok(None),
        }
    }

    fn rational_literal(&mut self) -> Result<BigRational, ParseError> {
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_digit() || self.bytes[self.pos] == b'.')
        {
            self.pos += 1;
        }
        if self.pos < self.bytes.len() && self.bytes[self.pos] == b'/' {
            self.pos += 1;
            while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        let text = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        parse_rational(text).ok_or_else(|| self.err("malformed number"))
    }

    fn try_complex(&mut self) -> Option<Scalar> {
        let save = self.pos;
        self.pos += 1; // '('
        let re = self.signed_rational()?;
        self.skip_ws();
        if self.bytes.get(self.pos) != Some(&b',') {
            self.pos = save;
            return None;
        }
        self.pos += 1;
        let im = self.signed_rational()?;
        self.skip_ws();
        if self.bytes.get(self.pos) != Some(&b')') {
            self.pos = save;
            return None;
        }
        self.pos += 1;
        Some(Scalar::from_exact(ExactComplex::new(re, im)))
    }

    fn signed_rational(&mut self) -> Option<BigRational> {
        self.skip_ws();
        let neg = self.bytes.get(self.pos) == Some(&b'-');
        if neg {
            self.pos += 1;
        }
        if !self.bytes.get(self.pos)?.is_ascii_digit() {
            return None;
        }
        let v = self.rational_literal().ok()?;
        Some(if neg { -v } else { v })
    }
}
