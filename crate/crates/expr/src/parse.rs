use num_bigint::BigInt;
use num_rational::BigRational;
use thiserror::Error;

use crate::ast::{Expr, Func, Number};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("unknown variable '{name}' at byte {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("unknown function '{name}' at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::UnknownVariable { offset, .. }
            | ParseError::UnknownFunction { offset, .. }
            | ParseError::Syntax { offset, .. } => *offset,
        }
    }
}

/// Which function names a parser accepts.
#[derive(Clone, Debug, Default)]
pub enum FunctionSet {
    /// sin, cos, exp, log
    #[default]
    Standard,
    /// Only the listed names, produced as [`Func::Named`].
    Custom(Vec<String>),
}

impl FunctionSet {
    fn resolve(&self, name: &str) -> Option<Func> {
        match self {
            FunctionSet::Standard => Func::standard(name),
            FunctionSet::Custom(names) => names
                .iter()
                .any(|n| n == name)
                .then(|| Func::Named(name.into())),
        }
    }
}

/// Parses `src` over the declared variables with the standard function set.
pub fn parse(src: &str, vars: &[&str]) -> Result<Expr, ParseError> {
    parse_with(src, vars, &FunctionSet::Standard)
}

pub fn parse_with(src: &str, vars: &[&str], funcs: &FunctionSet) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
        vars,
        funcs,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
    funcs: &'a FunctionSet,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = lhs.add(&rhs);
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = lhs.sub(&rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = lhs.mul(&rhs);
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = lhs.div(&rhs);
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            Ok(self.power()?.neg())
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.syntax("expected integer exponent"));
            }
            let digits = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let k: i32 = digits.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: "exponent too large".into(),
            })?;
            Ok(base.pow(k))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.name(),
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let bytes = self.src;
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        let mut is_float = false;
        if end < bytes.len() && bytes[end] == b'.' {
            is_float = true;
            end += 1;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                is_float = true;
                end = k;
            }
        }
        let text = std::str::from_utf8(&bytes[start..end]).unwrap();
        self.pos = end;
        if is_float {
            let x: f64 = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            Ok(Expr::num(Number::Float(x)))
        } else {
            let k: BigInt = text.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            Ok(Expr::rational(BigRational::from_integer(k)))
        }
    }

    fn name(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if self.peek() == Some(b'(') {
            let func = self
                .funcs
                .resolve(name)
                .ok_or_else(|| ParseError::UnknownFunction {
                    name: name.to_string(),
                    offset: start,
                })?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax("expected ')' after function argument"));
            }
            return Ok(Expr::call(func, &arg));
        }
        match self.vars.iter().position(|v| *v == name) {
            Some(i) => Ok(Expr::var(i, name)),
            None => Err(ParseError::UnknownVariable {
                name: name.to_string(),
                offset: start,
            }),
        }
    }
}
