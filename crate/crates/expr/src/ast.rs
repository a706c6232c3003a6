use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Numeric literal: exact when written as an integer, floating otherwise.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(BigRational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Number::Float(x) => *x,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_zero(),
            Number::Float(x) => *x == 0.0,
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_one(),
            Number::Float(x) => *x == 1.0,
        }
    }

    fn is_negative(&self) -> bool {
        match self {
            Number::Exact(q) => q.is_negative(),
            Number::Float(x) => x.is_sign_negative() && *x != 0.0,
        }
    }

    fn add(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a + b),
            _ => Number::Float(self.to_f64() + other.to_f64()),
        }
    }

    fn mul(&self, other: &Number) -> Number {
        match (self, other) {
            (Number::Exact(a), Number::Exact(b)) => Number::Exact(a * b),
            _ => Number::Float(self.to_f64() * other.to_f64()),
        }
    }

    fn neg(&self) -> Number {
        match self {
            Number::Exact(a) => Number::Exact(-a),
            Number::Float(x) => Number::Float(-x),
        }
    }
}

/// Built-in and caller-supplied function names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Named(Arc<str>),
}

impl Func {
    pub fn standard(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Named(s) => s,
        }
    }
}

#[derive(Debug, PartialEq)]
pub enum Node {
    Num(Number),
    /// Variable index into the declared variable list, plus its name for printing.
    Var(usize, Arc<str>),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Pow(Expr, i32),
    Neg(Expr),
    Call(Func, Expr),
}

/// Immutable, cheaply clonable expression tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr(pub(crate) Arc<Node>);

impl Expr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn wrap(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn num(n: Number) -> Expr {
        Expr::wrap(Node::Num(n))
    }

    pub fn rational(q: BigRational) -> Expr {
        Expr::num(Number::Exact(q))
    }

    pub fn int(k: i64) -> Expr {
        Expr::rational(BigRational::from_integer(BigInt::from(k)))
    }

    pub fn float(x: f64) -> Expr {
        Expr::num(Number::Float(x))
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    pub fn var(index: usize, name: &str) -> Expr {
        Expr::wrap(Node::Var(index, Arc::from(name)))
    }

    pub fn as_number(&self) -> Option<&Number> {
        match self.node() {
            Node::Num(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self.node() {
            Node::Num(Number::Exact(q)) => Some(q),
            _ => None,
        }
    }

    /// Structural zero: true only for a literal zero.
    pub fn is_zero(&self) -> bool {
        self.as_number().is_some_and(Number::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.as_number().is_some_and(Number::is_one)
    }

    /// Splits `c * rest` into its constant factor.
    fn split_coeff(&self) -> (Number, Option<Expr>) {
        match self.node() {
            Node::Num(n) => (n.clone(), None),
            Node::Mul(a, b) => match a.node() {
                Node::Num(n) => (n.clone(), Some(b.clone())),
                _ => (Number::Exact(BigRational::one()), Some(self.clone())),
            },
            Node::Neg(a) => {
                let (c, rest) = a.split_coeff();
                (c.neg(), rest)
            }
            _ => (Number::Exact(BigRational::one()), Some(self.clone())),
        }
    }

    fn has_negative_coeff(&self) -> bool {
        match self.node() {
            Node::Num(n) => n.is_negative(),
            Node::Mul(a, _) => a.as_number().is_some_and(Number::is_negative),
            _ => false,
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        if let (Some(a), Some(b)) = (self.as_number(), other.as_number()) {
            return Expr::num(a.add(b));
        }
        if let Node::Neg(b) = other.node() {
            return Expr::wrap(Node::Sub(self.clone(), b.clone()));
        }
        if other.has_negative_coeff() {
            return Expr::wrap(Node::Sub(self.clone(), other.neg()));
        }
        Expr::wrap(Node::Add(self.clone(), other.clone()))
    }

    pub fn sub(&self, other: &Expr) -> Expr {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.neg();
        }
        if let (Some(a), Some(b)) = (self.as_number(), other.as_number()) {
            return Expr::num(a.add(&b.neg()));
        }
        if let Node::Neg(b) = other.node() {
            return self.add(b);
        }
        if other.has_negative_coeff() {
            return Expr::wrap(Node::Add(self.clone(), other.neg()));
        }
        Expr::wrap(Node::Sub(self.clone(), other.clone()))
    }

    pub fn neg(&self) -> Expr {
        match self.node() {
            Node::Num(n) => Expr::num(n.neg()),
            Node::Neg(a) => a.clone(),
            Node::Mul(a, b) if a.as_number().is_some() => {
                Expr::num(a.as_number().unwrap().neg()).mul(b)
            }
            _ => Expr::wrap(Node::Neg(self.clone())),
        }
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        if self.is_one() {
            return other.clone();
        }
        if other.is_one() {
            return self.clone();
        }
        let (ca, ra) = self.split_coeff();
        let (cb, rb) = other.split_coeff();
        let c = ca.mul(&cb);
        let rest = match (ra, rb) {
            (None, None) => return Expr::num(c),
            (Some(r), None) | (None, Some(r)) => r,
            (Some(a), Some(b)) => Expr::wrap(Node::Mul(a, b)),
        };
        if c.is_one() {
            rest
        } else if c.is_zero() {
            Expr::zero()
        } else if matches!(c, Number::Exact(ref q) if (-q).is_one()) {
            Expr::wrap(Node::Neg(rest))
        } else {
            Expr::wrap(Node::Mul(Expr::num(c), rest))
        }
    }

    pub fn div(&self, other: &Expr) -> Expr {
        if other.is_one() {
            return self.clone();
        }
        if self.is_zero() && !other.is_zero() {
            return Expr::zero();
        }
        if let (Some(Number::Exact(a)), Some(Number::Exact(b))) =
            (self.as_number(), other.as_number())
        {
            if !b.is_zero() {
                return Expr::rational(a / b);
            }
        }
        if let Some(Number::Exact(b)) = other.as_number() {
            if !b.is_zero() {
                return Expr::rational(b.recip()).mul(self);
            }
        }
        Expr::wrap(Node::Div(self.clone(), other.clone()))
    }

    pub fn pow(&self, k: i32) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k == 1 {
            return self.clone();
        }
        if let Some(Number::Exact(q)) = self.as_number() {
            if k > 0 || !q.is_zero() {
                return Expr::rational(num_traits::pow::Pow::pow(q, k));
            }
        }
        if let Node::Pow(base, j) = self.node() {
            if let Some(kj) = j.checked_mul(k) {
                return base.pow(kj);
            }
        }
        Expr::wrap(Node::Pow(self.clone(), k))
    }

    pub fn call(func: Func, arg: &Expr) -> Expr {
        if let Some(Number::Exact(q)) = arg.as_number() {
            if q.is_zero() {
                match func {
                    Func::Sin => return Expr::zero(),
                    Func::Cos | Func::Exp => return Expr::one(),
                    _ => {}
                }
            }
            if q.is_one() && func == Func::Log {
                return Expr::zero();
            }
        }
        Expr::wrap(Node::Call(func, arg.clone()))
    }

    /// Highest variable index referenced, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self.node() {
            Node::Num(_) => None,
            Node::Var(i, _) => Some(*i),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.max_var().max(b.max_var())
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Call(_, a) => a.max_var(),
        }
    }

    /// Collects the indices of all referenced variables.
    pub fn variables(&self) -> Vec<usize> {
        fn walk(e: &Expr, out: &mut Vec<usize>) {
            match e.node() {
                Node::Num(_) => {}
                Node::Var(i, _) => {
                    if !out.contains(i) {
                        out.push(*i)
                    }
                }
                Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                Node::Pow(a, _) | Node::Neg(a) | Node::Call(_, a) => walk(a, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out.sort_unstable();
        out
    }

    /// True when the tree uses only +, -, *, integer powers and exact literals.
    pub fn is_polynomial(&self) -> bool {
        match self.node() {
            Node::Num(n) => matches!(n, Number::Exact(_)),
            Node::Var(..) => true,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) => {
                a.is_polynomial() && b.is_polynomial()
            }
            Node::Div(a, b) => {
                a.is_polynomial() && matches!(b.as_number(), Some(Number::Exact(q)) if !q.is_zero())
            }
            Node::Pow(a, k) => *k >= 0 && a.is_polynomial(),
            Node::Neg(a) => a.is_polynomial(),
            Node::Call(..) => false,
        }
    }

    /// Number of nodes, counting shared subtrees once per occurrence.
    pub fn size(&self) -> usize {
        match self.node() {
            Node::Num(_) | Node::Var(..) => 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                1 + a.size() + b.size()
            }
            Node::Pow(a, _) | Node::Neg(a) | Node::Call(_, a) => 1 + a.size(),
        }
    }
}

impl From<i64> for Expr {
    fn from(k: i64) -> Expr {
        Expr::int(k)
    }
}

// Precedence levels used by the printer.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn number_prec(n: &Number) -> u8 {
    match n {
        Number::Exact(q) if !q.is_integer() => PREC_MUL,
        _ if n.is_negative() => PREC_NEG,
        _ => PREC_ATOM,
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, n: &Number) -> fmt::Result {
    match n {
        Number::Exact(q) => {
            if q.is_integer() {
                write!(f, "{}", q.numer())
            } else {
                write!(f, "{}/{}", q.numer(), q.denom())
            }
        }
        Number::Float(x) => {
            let s = format!("{x:?}");
            f.write_str(&s)
        }
    }
}

impl Expr {
    fn prec(&self) -> u8 {
        match self.node() {
            Node::Num(n) => number_prec(n),
            Node::Var(..) | Node::Call(..) => PREC_ATOM,
            Node::Add(..) | Node::Sub(..) => PREC_ADD,
            Node::Mul(..) | Node::Div(..) => PREC_MUL,
            Node::Neg(_) => PREC_NEG,
            Node::Pow(_, k) if *k < 0 => PREC_MUL,
            Node::Pow(..) => PREC_POW,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let p = self.prec();
        if p < min {
            f.write_str("(")?;
            self.write_prec(f, 0)?;
            return f.write_str(")");
        }
        match self.node() {
            Node::Num(n) => write_number(f, n),
            Node::Var(_, name) => f.write_str(name),
            Node::Add(a, b) => {
                a.write_prec(f, PREC_ADD)?;
                f.write_str(" + ")?;
                b.write_prec(f, PREC_ADD + 1)
            }
            Node::Sub(a, b) => {
                a.write_prec(f, PREC_ADD)?;
                f.write_str(" - ")?;
                b.write_prec(f, PREC_ADD + 1)
            }
            Node::Mul(a, b) => {
                a.write_prec(f, PREC_MUL)?;
                f.write_str("*")?;
                b.write_prec(f, PREC_MUL + 1)
            }
            Node::Div(a, b) => {
                a.write_prec(f, PREC_MUL)?;
                f.write_str("/")?;
                b.write_prec(f, PREC_MUL + 1)
            }
            Node::Neg(a) => {
                f.write_str("-")?;
                a.write_prec(f, PREC_NEG)
            }
            Node::Pow(a, k) if *k < 0 => {
                f.write_str("1/")?;
                a.write_prec(f, PREC_ATOM)?;
                write!(f, "^{}", -k)
            }
            Node::Pow(a, k) => {
                a.write_prec(f, PREC_ATOM)?;
                write!(f, "^{k}")
            }
            Node::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_prec(f, 0)?;
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, 0)
    }
}
