//! A small expression language for the defining functions of path ODEs.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr  := term (('+'|'-') term)*
//! term  := unary (('*'|'/') unary)*
//! unary := '-'? power
//! power := atom ('^' intlit)?
//! atom  := number | name | name '(' expr ')' | '(' expr ')'
//! ```
//!
//! Integer literals are exact rationals, decimal literals are floats.
//! Differentiation is symbolic and exact; evaluation is available in `f64`
//! and, for rational expressions, in exact arithmetic.

mod ast;
mod eval;
mod parse;

pub use ast::{Expr, Func, Node, Number};
pub use eval::EvalError;
pub use num_rational::BigRational;
pub use parse::{parse, parse_with, FunctionSet, ParseError};

/// Outcome of a randomized identity test.
#[derive(Debug, Clone, PartialEq)]
pub enum ZeroTest {
    /// Vanished at every sample point, evaluated exactly.
    Zero,
    /// Nonzero at the sample point with this index.
    NonZero(usize),
    /// Could not be decided (evaluation failed or only float evaluation was possible
    /// and the values were within tolerance).
    Undetermined,
}

/// Decides whether `e` vanishes identically by evaluating it at the given
/// points. Exact evaluation is used when possible; otherwise values are
/// compared against `tol` in floating point, and a float-only "zero" is
/// reported as [`ZeroTest::Undetermined`].
pub fn zero_test(e: &Expr, points: &[Vec<BigRational>], tol: f64) -> ZeroTest {
    if e.is_zero() {
        return ZeroTest::Zero;
    }
    let mut exact = true;
    for (k, p) in points.iter().enumerate() {
        match e.eval_exact(p) {
            Ok(v) => {
                if !num_traits::Zero::is_zero(&v) {
                    return ZeroTest::NonZero(k);
                }
            }
            Err(EvalError::DivisionByZero) | Err(EvalError::LogDomain) => exact = false,
            Err(_) => {
                exact = false;
                let pf: Vec<f64> = p
                    .iter()
                    .map(|q| num_traits::ToPrimitive::to_f64(q).unwrap_or(f64::NAN))
                    .collect();
                if let Ok(v) = e.eval(&pf) {
                    if v.abs() > tol {
                        return ZeroTest::NonZero(k);
                    }
                }
            }
        }
    }
    if exact {
        ZeroTest::Zero
    } else {
        ZeroTest::Undetermined
    }
}
