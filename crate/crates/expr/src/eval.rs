use num_rational::BigRational;
use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::ast::{Expr, Func, Node, Number};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive number")]
    LogDomain,
    #[error("variable index {0} has no value")]
    MissingVariable(usize),
    #[error("expression is not exactly evaluable ({0})")]
    NotExact(&'static str),
    #[error("function '{0}' cannot be evaluated here")]
    UnsupportedFunction(String),
    #[error("function '{0}' has no symbolic derivative")]
    NoDerivative(String),
}

impl Expr {
    /// Floating-point evaluation; `env[i]` is the value of variable `i`.
    pub fn eval(&self, env: &[f64]) -> Result<f64, EvalError> {
        match self.node() {
            Node::Num(n) => Ok(n.to_f64()),
            Node::Var(i, _) => env.get(*i).copied().ok_or(EvalError::MissingVariable(*i)),
            Node::Add(a, b) => Ok(a.eval(env)? + b.eval(env)?),
            Node::Sub(a, b) => Ok(a.eval(env)? - b.eval(env)?),
            Node::Mul(a, b) => Ok(a.eval(env)? * b.eval(env)?),
            Node::Div(a, b) => {
                let d = b.eval(env)?;
                if d == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(a.eval(env)? / d)
            }
            Node::Pow(a, k) => {
                let x = a.eval(env)?;
                if *k < 0 && x == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(x.powi(*k))
            }
            Node::Neg(a) => Ok(-a.eval(env)?),
            Node::Call(func, a) => {
                let x = a.eval(env)?;
                match func {
                    Func::Sin => Ok(x.sin()),
                    Func::Cos => Ok(x.cos()),
                    Func::Exp => Ok(x.exp()),
                    Func::Log => {
                        if x <= 0.0 {
                            Err(EvalError::LogDomain)
                        } else {
                            Ok(x.ln())
                        }
                    }
                    Func::Named(name) => Err(EvalError::UnsupportedFunction(name.to_string())),
                }
            }
        }
    }

    /// Exact rational evaluation. Fails on float literals and transcendental
    /// functions (except at arguments where the value is rational by definition).
    pub fn eval_exact(&self, env: &[BigRational]) -> Result<BigRational, EvalError> {
        match self.node() {
            Node::Num(Number::Exact(q)) => Ok(q.clone()),
            Node::Num(Number::Float(_)) => Err(EvalError::NotExact("float literal")),
            Node::Var(i, _) => env.get(*i).cloned().ok_or(EvalError::MissingVariable(*i)),
            Node::Add(a, b) => Ok(a.eval_exact(env)? + b.eval_exact(env)?),
            Node::Sub(a, b) => Ok(a.eval_exact(env)? - b.eval_exact(env)?),
            Node::Mul(a, b) => {
                let x = a.eval_exact(env)?;
                if x.is_zero() {
                    // still validate the other side for errors
                    b.eval_exact(env)?;
                    return Ok(x);
                }
                Ok(x * b.eval_exact(env)?)
            }
            Node::Div(a, b) => {
                let d = b.eval_exact(env)?;
                if d.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(a.eval_exact(env)? / d)
            }
            Node::Pow(a, k) => {
                let x = a.eval_exact(env)?;
                if *k < 0 && x.is_zero() {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(num_traits::pow::Pow::pow(&x, *k))
            }
            Node::Neg(a) => Ok(-a.eval_exact(env)?),
            Node::Call(func, a) => {
                let x = a.eval_exact(env)?;
                match func {
                    Func::Sin if x.is_zero() => Ok(BigRational::zero()),
                    Func::Cos | Func::Exp if x.is_zero() => Ok(BigRational::from_integer(1.into())),
                    Func::Log if x == BigRational::from_integer(1.into()) => Ok(BigRational::zero()),
                    Func::Log if !x.is_positive() => Err(EvalError::LogDomain),
                    Func::Named(name) => Err(EvalError::UnsupportedFunction(name.to_string())),
                    _ => Err(EvalError::NotExact("transcendental function")),
                }
            }
        }
    }

    /// Exact symbolic derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Result<Expr, EvalError> {
        Ok(match self.node() {
            Node::Num(_) => Expr::zero(),
            Node::Var(i, _) => {
                if *i == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Node::Add(a, b) => a.diff(var)?.add(&b.diff(var)?),
            Node::Sub(a, b) => a.diff(var)?.sub(&b.diff(var)?),
            Node::Mul(a, b) => {
                let da = a.diff(var)?;
                let db = b.diff(var)?;
                da.mul(b).add(&a.mul(&db))
            }
            Node::Div(a, b) => {
                let da = a.diff(var)?;
                let db = b.diff(var)?;
                if db.is_zero() {
                    da.div(b)
                } else {
                    da.mul(b).sub(&a.mul(&db)).div(&b.pow(2))
                }
            }
            Node::Pow(a, k) => {
                let da = a.diff(var)?;
                Expr::int(*k as i64).mul(&a.pow(k - 1)).mul(&da)
            }
            Node::Neg(a) => a.diff(var)?.neg(),
            Node::Call(func, a) => {
                let da = a.diff(var)?;
                if da.is_zero() {
                    return Ok(Expr::zero());
                }
                let outer = match func {
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::call(Func::Sin, a).neg(),
                    Func::Exp => self.clone(),
                    Func::Log => Expr::one().div(a),
                    Func::Named(name) => return Err(EvalError::NoDerivative(name.to_string())),
                };
                outer.mul(&da)
            }
        })
    }

    /// Substitutes expressions for variables (`subs[i]` replaces variable `i`).
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        match self.node() {
            Node::Num(_) => self.clone(),
            Node::Var(i, _) => subs.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(a, b) => a.substitute(subs).add(&b.substitute(subs)),
            Node::Sub(a, b) => a.substitute(subs).sub(&b.substitute(subs)),
            Node::Mul(a, b) => a.substitute(subs).mul(&b.substitute(subs)),
            Node::Div(a, b) => a.substitute(subs).div(&b.substitute(subs)),
            Node::Pow(a, k) => a.substitute(subs).pow(*k),
            Node::Neg(a) => a.substitute(subs).neg(),
            Node::Call(func, a) => Expr::call(func.clone(), &a.substitute(subs)),
        }
    }

    /// Rebuilds the tree through the simplifying constructors.
    pub fn simplify(&self) -> Expr {
        match self.node() {
            Node::Num(_) | Node::Var(..) => self.clone(),
            Node::Add(a, b) => a.simplify().add(&b.simplify()),
            Node::Sub(a, b) => a.simplify().sub(&b.simplify()),
            Node::Mul(a, b) => a.simplify().mul(&b.simplify()),
            Node::Div(a, b) => a.simplify().div(&b.simplify()),
            Node::Pow(a, k) => a.simplify().pow(*k),
            Node::Neg(a) => a.simplify().neg(),
            Node::Call(func, a) => Expr::call(func.clone(), &a.simplify()),
        }
    }
}
