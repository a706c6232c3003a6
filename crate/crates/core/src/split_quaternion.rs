//! The split quaternions: a 1 + b j + c e + d f with -j^2 = e^2 = f^2 = 1, ef = j.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{Num, One, Signed, Zero};
use pathgeom_expr::{Expr, Func, Node, Number};
use thiserror::Error;

use crate::linalg::{rank, rank_f64, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuatError {
    #[error("element has nonzero real part")]
    NotImaginary,
    #[error("division by a non-invertible element")]
    NotInvertible,
    #[error("unsupported expression: {0}")]
    Unsupported(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitQuaternion<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImaginaryKind {
    /// p^2 = 1 after normalization; acts as a reflection.
    Reflection,
    /// p^2 = -1 after normalization; acts as a complex structure.
    ComplexStructure,
    Null,
}

impl<T: Clone + Num + Neg<Output = T>> SplitQuaternion<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        SplitQuaternion { a, b, c, d }
    }

    pub fn scalar(a: T) -> Self {
        Self::new(a, T::zero(), T::zero(), T::zero())
    }

    pub fn one() -> Self {
        Self::scalar(T::one())
    }

    pub fn zero() -> Self {
        Self::scalar(T::zero())
    }

    pub fn j() -> Self {
        Self::new(T::zero(), T::one(), T::zero(), T::zero())
    }

    pub fn e() -> Self {
        Self::new(T::zero(), T::zero(), T::one(), T::zero())
    }

    pub fn f() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::one())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero() && self.d.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(
            self.a.clone(),
            -self.b.clone(),
            -self.c.clone(),
            -self.d.clone(),
        )
    }

    pub fn norm2(&self) -> T {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        a.clone() * a.clone() + b.clone() * b.clone() - c.clone() * c.clone() - d.clone() * d.clone()
    }

    pub fn re(&self) -> Self {
        Self::scalar(self.a.clone())
    }

    pub fn im(&self) -> Self {
        Self::new(T::zero(), self.b.clone(), self.c.clone(), self.d.clone())
    }

    pub fn scale(&self, s: &T) -> Self {
        Self::new(
            self.a.clone() * s.clone(),
            self.b.clone() * s.clone(),
            self.c.clone() * s.clone(),
            self.d.clone() * s.clone(),
        )
    }

    /// rho(p) = [[a + d, c - b], [b + c, a - d]].
    pub fn matrix_rep(&self) -> [[T; 2]; 2] {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        [
            [a.clone() + d.clone(), c.clone() - b.clone()],
            [b.clone() + c.clone(), a.clone() - d.clone()],
        ]
    }

    pub fn from_matrix(m: &[[T; 2]; 2]) -> Self {
        let two = T::one() + T::one();
        Self::new(
            (m[0][0].clone() + m[1][1].clone()) / two.clone(),
            (m[1][0].clone() - m[0][1].clone()) / two.clone(),
            (m[1][0].clone() + m[0][1].clone()) / two.clone(),
            (m[0][0].clone() - m[1][1].clone()) / two,
        )
    }

    pub fn inverse(&self) -> Option<Self> {
        let n = self.norm2();
        if n.is_zero() {
            return None;
        }
        let c = self.conj();
        Some(Self::new(
            c.a / n.clone(),
            c.b / n.clone(),
            c.c / n.clone(),
            c.d / n,
        ))
    }

    /// G(p, q) = Re(conj(p) q).
    pub fn inner(&self, other: &Self) -> T {
        (self.conj() * other.clone()).a
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.clone() * other.clone() - other.clone() * self.clone()
    }

    pub fn components(&self) -> [T; 4] {
        [self.a.clone(), self.b.clone(), self.c.clone(), self.d.clone()]
    }
}

impl<T: Clone + Num + Neg<Output = T> + PartialOrd> SplitQuaternion<T> {
    /// Classifies an imaginary element by the sign of its norm.
    pub fn classify_imaginary(&self) -> Result<ImaginaryKind, QuatError> {
        if !self.a.is_zero() {
            return Err(QuatError::NotImaginary);
        }
        let n = self.norm2();
        Ok(if n < T::zero() {
            ImaginaryKind::Reflection
        } else if n > T::zero() {
            ImaginaryKind::ComplexStructure
        } else {
            ImaginaryKind::Null
        })
    }
}

impl<T: Clone + Num + Neg<Output = T>> Add for SplitQuaternion<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }
}

impl<T: Clone + Num + Neg<Output = T>> Sub for SplitQuaternion<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }
}

impl<T: Clone + Num + Neg<Output = T>> Neg for SplitQuaternion<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl<T: Clone + Num + Neg<Output = T>> Mul for SplitQuaternion<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let (a1, b1, c1, d1) = (self.a, self.b, self.c, self.d);
        let (a2, b2, c2, d2) = (o.a, o.b, o.c, o.d);
        // jj = -1, ee = ff = 1, ef = j, fe = -j, je = -f, ej = f, jf = e, fj = -e
        let a = a1.clone() * a2.clone() - b1.clone() * b2.clone()
            + c1.clone() * c2.clone()
            + d1.clone() * d2.clone();
        let b = a1.clone() * b2.clone() + b1.clone() * a2.clone() + c1.clone() * d2.clone()
            - d1.clone() * c2.clone();
        let c = a1.clone() * c2.clone() + c1.clone() * a2.clone() + b1.clone() * d2.clone()
            - d1.clone() * b2.clone();
        let d = a1 * d2 + d1 * a2 - b1 * c2 + c1 * b2;
        Self::new(a, b, c, d)
    }
}

impl fmt::Display for SplitQuaternion<Q> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        for (coef, unit) in [(&self.a, ""), (&self.b, "j"), (&self.c, "e"), (&self.d, "f")] {
            if coef.is_zero() {
                continue;
            }
            let mag = coef.abs();
            let sign = if coef.is_negative() { "-" } else { "+" };
            let body = if unit.is_empty() {
                mag.to_string()
            } else if mag.is_one() {
                unit.to_string()
            } else {
                format!("{mag}*{unit}")
            };
            if out.is_empty() {
                if coef.is_negative() {
                    out.push('-');
                }
            } else {
                out.push_str(&format!(" {sign} "));
            }
            out.push_str(&body);
        }
        if out.is_empty() {
            out.push('0');
        }
        f.write_str(&out)
    }
}

fn stacked<T: Clone + Num + Neg<Output = T>>(x: &[SplitQuaternion<T>]) -> Vec<Vec<T>> {
    x.iter()
        .flat_map(|p| {
            let m = p.matrix_rep();
            [m[0].to_vec(), m[1].to_vec()]
        })
        .collect()
}

/// Rank of an element of A^n viewed as a map L -> V (a 2n x 2 matrix).
pub fn module_rank(x: &[SplitQuaternion<Q>]) -> usize {
    let m = stacked(x);
    if m.is_empty() {
        return 0;
    }
    rank(&m)
}

pub fn module_rank_f64(x: &[SplitQuaternion<f64>], tol: f64) -> usize {
    // rank_f64 takes column vectors
    let m = stacked(x);
    let cols: Vec<Vec<f64>> = (0..2).map(|c| m.iter().map(|r| r[c]).collect()).collect();
    rank_f64(&cols, tol)
}

/// Evaluates an expression whose variables are j, e, f (in that order) and whose
/// functions are conj and norm2.
pub fn eval_expr(e: &Expr) -> Result<SplitQuaternion<Q>, QuatError> {
    type SQ = SplitQuaternion<Q>;
    Ok(match e.node() {
        Node::Num(Number::Exact(q)) => SQ::scalar(q.clone()),
        Node::Num(Number::Float(x)) => {
            let q = Q::from_float(*x).ok_or_else(|| QuatError::Unsupported(x.to_string()))?;
            SQ::scalar(q)
        }
        Node::Var(i, name) => match i {
            0 => SQ::j(),
            1 => SQ::e(),
            2 => SQ::f(),
            _ => return Err(QuatError::Unsupported(name.to_string())),
        },
        Node::Add(a, b) => eval_expr(a)? + eval_expr(b)?,
        Node::Sub(a, b) => eval_expr(a)? - eval_expr(b)?,
        Node::Mul(a, b) => eval_expr(a)? * eval_expr(b)?,
        Node::Div(a, b) => {
            let inv = eval_expr(b)?.inverse().ok_or(QuatError::NotInvertible)?;
            eval_expr(a)? * inv
        }
        Node::Pow(a, k) => {
            let base = eval_expr(a)?;
            let base = if *k < 0 {
                base.inverse().ok_or(QuatError::NotInvertible)?
            } else {
                base
            };
            (0..k.unsigned_abs()).fold(SQ::one(), |acc, _| acc * base.clone())
        }
        Node::Neg(a) => -eval_expr(a)?,
        Node::Call(Func::Named(name), a) => {
            let x = eval_expr(a)?;
            match name.as_ref() {
                "conj" => x.conj(),
                "norm2" => SQ::scalar(x.norm2()),
                other => return Err(QuatError::Unsupported(other.to_string())),
            }
        }
        Node::Call(func, _) => return Err(QuatError::Unsupported(func.name().to_string())),
    })
}
