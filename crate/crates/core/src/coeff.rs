//! Coefficient rings for symbolic vector fields and forms.

use std::fmt::Debug;

use pathgeom_expr::{EvalError, Expr};

use crate::linalg::Q;
use crate::poly::Poly;

/// A commutative ring of functions of the chart coordinates, closed under
/// partial differentiation.
pub trait Coeff: Clone + Debug + Send + Sync {
    fn zero() -> Self;
    fn constant(c: Q) -> Self;
    fn coord(index: usize, name: &str) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn diff(&self, index: usize) -> Self;
    /// Structural zero test; `false` does not prove non-vanishing.
    fn is_zero(&self) -> bool;
    fn eval_f64(&self, pt: &[f64]) -> Result<f64, EvalError>;
    fn eval_exact(&self, pt: &[Q]) -> Result<Q, EvalError>;

    fn one() -> Self {
        Self::constant(Q::from_integer(1.into()))
    }

    fn scale(&self, c: &Q) -> Self {
        self.mul(&Self::constant(c.clone()))
    }
}

impl Coeff for Poly {
    fn zero() -> Self {
        Poly::zero()
    }
    fn constant(c: Q) -> Self {
        Poly::constant(c)
    }
    fn coord(index: usize, _name: &str) -> Self {
        Poly::var(index)
    }
    fn add(&self, other: &Self) -> Self {
        Poly::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Poly::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Poly::mul(self, other)
    }
    fn neg(&self) -> Self {
        Poly::neg(self)
    }
    fn diff(&self, index: usize) -> Self {
        Poly::diff(self, index)
    }
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn eval_f64(&self, pt: &[f64]) -> Result<f64, EvalError> {
        Ok(Poly::eval_f64(self, pt))
    }
    fn eval_exact(&self, pt: &[Q]) -> Result<Q, EvalError> {
        Ok(Poly::eval_exact(self, pt))
    }
    fn scale(&self, c: &Q) -> Self {
        Poly::scale(self, c)
    }
}

impl Coeff for Expr {
    fn zero() -> Self {
        Expr::zero()
    }
    fn constant(c: Q) -> Self {
        Expr::rational(c)
    }
    fn coord(index: usize, name: &str) -> Self {
        Expr::var(index, name)
    }
    fn add(&self, other: &Self) -> Self {
        Expr::add(self, other)
    }
    fn sub(&self, other: &Self) -> Self {
        Expr::sub(self, other)
    }
    fn mul(&self, other: &Self) -> Self {
        Expr::mul(self, other)
    }
    fn neg(&self) -> Self {
        Expr::neg(self)
    }
    fn diff(&self, index: usize) -> Self {
        // Chart expressions only use the standard function set, which is
        // always differentiable.
        Expr::diff(self, index).expect("standard functions are differentiable")
    }
    fn is_zero(&self) -> bool {
        Expr::is_zero(self)
    }
    fn eval_f64(&self, pt: &[f64]) -> Result<f64, EvalError> {
        self.eval(pt)
    }
    fn eval_exact(&self, pt: &[Q]) -> Result<Q, EvalError> {
        Expr::eval_exact(self, pt)
    }
}
