//! Contact path ODE systems: the generating field, contact torsion and the
//! torsion-free correction, filtration ranks, the symplectic structure on
//! E-perp, secondary torsion, the adapted-frame check and integration.
//!
//! Frame indices follow the flat chart in g_- order:
//! T_{-1,0} = 0, A_i = i, T_{0,-2} = m+1, E_i = m+1+i, T_{-1,-2} = 2m+2,
//! T_{-2,-2} = 2m+3, with m = 2n-4.

use std::cell::OnceCell;
use std::fmt::Debug;
use std::io::Write;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::path::Path;

use num_traits::{One, ToPrimitive, Zero};
use pathgeom_expr::{parse, EvalError, Expr};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

use crate::coeff::Coeff;
use crate::field::{Form, VectorField};
use crate::flat_model::Chart;
use crate::graded_sp::{build_with_omega, omega_upper, standard_omega, Parabolic};
use crate::linalg::{is_skew, q, qf, rank, rank_f64, rank_of_vectors, solve_f64, solve_in_basis, QMatrix, Q};
use crate::poly::Poly;

/// Tolerance for numeric rank and zero decisions.
pub const TOL: f64 = 1e-9;

/// Default seed for sample points and random specs.
pub const DEFAULT_SEED: u64 = 42;

const SAMPLE_POINTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContactError {
    #[error("cannot read {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("invalid spec: {0}")]
    Schema(String),
    #[error("omega must be a skew nondegenerate {0}x{0} rational matrix")]
    BadOmega(usize),
    #[error("bad expression in {field}: {msg}")]
    Expression { field: String, msg: String },
    #[error("point has {got} coordinates, expected {expected}")]
    PointDimension { got: usize, expected: usize },
    #[error("C vanishes at the point, so the reduction is degenerate")]
    DegeneratePoint,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("contact torsion is nonzero; this quantity is defined only for torsion-free systems")]
    TorsionNonzero,
    #[error("a filtered frame needs s != 0")]
    InvalidFilteredFrame,
    #[error("C vanishes along the arc at t = {t}")]
    SingularArc { t: f64, state: Vec<f64> },
    #[error("bad step control: {0}")]
    Step(String),
}

type Result<T> = std::result::Result<T, ContactError>;

// ---------------------------------------------------------------------------
// Specs

/// A contact path system: X = C T_{-1,0} + f0 T_{0,-2} + f^p A_p.
#[derive(Clone, Debug)]
pub struct ODESpec {
    pub n: usize,
    pub omega: QMatrix,
    pub c: Expr,
    pub f0: Expr,
    pub f: Vec<Expr>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    n: usize,
    #[serde(default)]
    omega: Option<Vec<Vec<serde_json::Value>>>,
    #[serde(rename = "C", default)]
    c: Option<String>,
    f0: String,
    f: Vec<String>,
}

/// Parses "3", "-1/2", "0.25" exactly.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Ok(v) = s.parse::<Q>() {
        return Some(v);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.')?;
    if int.is_empty() && frac.is_empty() {
        return None;
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: num_bigint::BigInt = format!("{int}{frac}").parse().ok()?;
    let den = num_bigint::BigInt::from(10u32).pow(frac.len() as u32);
    let v = Q::new(digits, den);
    Some(if neg { -v } else { v })
}

fn json_rational(v: &serde_json::Value) -> Option<Q> {
    match v {
        serde_json::Value::String(s) => parse_rational(s),
        serde_json::Value::Number(n) => match n.as_i64() {
            Some(i) => Some(q(i)),
            None => parse_rational(&n.to_string()),
        },
        _ => None,
    }
}

impl ODESpec {
    /// Coordinate names: t (= x_inf), x0..xm, z, u0..um.
    pub fn variable_names(n: usize) -> Vec<String> {
        let m = 2 * n - 4;
        let mut v = vec!["t".to_string()];
        v.extend((0..=m).map(|i| format!("x{i}")));
        v.push("z".into());
        v.extend((0..=m).map(|i| format!("u{i}")));
        v
    }

    pub fn m(&self) -> usize {
        2 * self.n - 4
    }

    pub fn dim(&self) -> usize {
        2 * self.m() + 4
    }

    pub fn names(&self) -> Vec<String> {
        Self::variable_names(self.n)
    }

    /// Validates and assembles a spec from expression sources.
    pub fn from_sources(
        n: usize,
        omega: Option<QMatrix>,
        c: &str,
        f0: &str,
        f: &[&str],
    ) -> Result<ODESpec> {
        if n < 3 {
            return Err(ContactError::Schema(format!("n = {n}, need n >= 3")));
        }
        let m = 2 * n - 4;
        if f.len() != m {
            return Err(ContactError::Schema(format!(
                "f has {} entries, expected 2n-4 = {m}",
                f.len()
            )));
        }
        let names = Self::variable_names(n);
        let vars: Vec<&str> = names.iter().map(String::as_str).collect();
        let p = |field: &str, src: &str| {
            parse(src, &vars).map_err(|e| ContactError::Expression {
                field: field.to_string(),
                msg: e.to_string(),
            })
        };
        let spec = ODESpec {
            n,
            omega: omega.unwrap_or_else(|| standard_omega(m)),
            c: p("C", c)?,
            f0: p("f0", f0)?,
            f: f
                .iter()
                .enumerate()
                .map(|(i, s)| p(&format!("f[{i}]"), s))
                .collect::<Result<_>>()?,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// X = T_{-1,0}.
    pub fn flat(n: usize) -> Result<ODESpec> {
        let zeros = vec!["0"; 2 * n.max(2) - 4];
        Self::from_sources(n, None, "1", "0", &zeros)
    }

    pub fn validate(&self) -> Result<()> {
        let m = self.m();
        if self.omega.len() != m
            || self.omega.iter().any(|r| r.len() != m)
            || !is_skew(&self.omega)
            || rank(&self.omega) != m
        {
            return Err(ContactError::BadOmega(m));
        }
        if self.f.len() != m {
            return Err(ContactError::Schema(format!("f must have {m} entries")));
        }
        let dim = self.dim();
        for e in std::iter::once(&self.c).chain([&self.f0]).chain(&self.f) {
            if e.variables().iter().any(|&v| v >= dim) {
                return Err(ContactError::Schema("expression uses an unknown coordinate".into()));
            }
        }
        if self.c.is_zero() {
            return Err(ContactError::Schema("C is identically zero".into()));
        }
        Ok(())
    }

    pub fn from_json_str(src: &str) -> Result<ODESpec> {
        let raw: RawSpec =
            serde_json::from_str(src).map_err(|e| ContactError::Schema(e.to_string()))?;
        if raw.n < 3 {
            return Err(ContactError::Schema(format!("n = {}, need n >= 3", raw.n)));
        }
        let m = 2 * raw.n - 4;
        let omega = match raw.omega {
            None => None,
            Some(rows) => {
                let mut out = Vec::with_capacity(rows.len());
                for row in &rows {
                    let r: Option<Vec<Q>> = row.iter().map(json_rational).collect();
                    out.push(r.ok_or(ContactError::BadOmega(m))?);
                }
                Some(out)
            }
        };
        let f: Vec<&str> = raw.f.iter().map(String::as_str).collect();
        Self::from_sources(raw.n, omega, raw.c.as_deref().unwrap_or("1"), &raw.f0, &f)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let omega: Vec<Vec<String>> = self
            .omega
            .iter()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect();
        serde_json::json!({
            "n": self.n,
            "omega": omega,
            "C": self.c.to_string(),
            "f0": self.f0.to_string(),
            "f": self.f.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
        })
    }

    /// Flat chart carrying this spec's omega.
    pub fn chart(&self) -> Chart {
        Chart {
            n: self.n,
            m: self.m(),
            omega: self.omega.clone(),
        }
    }

    /// True when every coefficient is a polynomial and C is a constant, so all
    /// symbolic work is exact and canonical.
    pub fn is_polynomial(&self) -> bool {
        Poly::from_expr(&self.c).and_then(|c| c.as_constant()).is_some()
            && Poly::from_expr(&self.f0).is_some()
            && self.f.iter().all(|e| Poly::from_expr(e).is_some())
    }
}

pub fn load_spec(path: &Path) -> Result<ODESpec> {
    let src = std::fs::read_to_string(path).map_err(|e| ContactError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })?;
    ODESpec::from_json_str(&src)
}

// ---------------------------------------------------------------------------
// Coefficient rings and point scalars

/// Coefficient rings the engine can run over.
trait Ring: Coeff {
    fn lift(p: &Poly, names: &[&str]) -> Self;
    fn from_spec(e: &Expr) -> Option<Self>;
    fn to_expr(&self, names: &[&str]) -> Expr;
    fn quotient(&self, d: &Self) -> Option<Self>;
    /// Whether `is_zero` is a complete zero test.
    const CANONICAL: bool;
}

impl Ring for Poly {
    fn lift(p: &Poly, _: &[&str]) -> Self {
        p.clone()
    }
    fn from_spec(e: &Expr) -> Option<Self> {
        Poly::from_expr(e)
    }
    fn to_expr(&self, names: &[&str]) -> Expr {
        Poly::to_expr(self, names)
    }
    fn quotient(&self, d: &Self) -> Option<Self> {
        let c = d.as_constant()?;
        (!c.is_zero()).then(|| self.scale(&c.recip()))
    }
    const CANONICAL: bool = true;
}

impl Ring for Expr {
    fn lift(p: &Poly, names: &[&str]) -> Self {
        p.to_expr(names)
    }
    fn from_spec(e: &Expr) -> Option<Self> {
        Some(e.clone())
    }
    fn to_expr(&self, _: &[&str]) -> Expr {
        self.clone()
    }
    fn quotient(&self, d: &Self) -> Option<Self> {
        Some(self.div(d))
    }
    const CANONICAL: bool = false;
}

struct Point {
    q: Vec<Q>,
    f: Vec<f64>,
}

impl Point {
    fn new(pt: &[Q]) -> Point {
        Point {
            q: pt.to_vec(),
            f: pt.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect(),
        }
    }
}

/// Values at a point: exact rationals when every coefficient evaluates
/// exactly, floats otherwise.
trait Scalar:
    Clone
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn eval<S: Coeff>(c: &S, pt: &Point) -> std::result::Result<Self, EvalError>;
    fn from_q(x: &Q) -> Self;
    fn as_f64(&self) -> f64;
    fn negligible(&self, scale: f64) -> bool;
    fn rank(vs: &[Vec<Self>]) -> usize;
    fn solve(basis: &[Vec<Self>], target: &[Self]) -> Option<Vec<Self>>;

    fn nil() -> Self {
        Self::from_q(&<Q as Zero>::zero())
    }
}

impl Scalar for Q {
    fn eval<S: Coeff>(c: &S, pt: &Point) -> std::result::Result<Self, EvalError> {
        c.eval_exact(&pt.q)
    }
    fn from_q(x: &Q) -> Self {
        x.clone()
    }
    fn as_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn negligible(&self, _: f64) -> bool {
        self.is_zero()
    }
    fn rank(vs: &[Vec<Self>]) -> usize {
        if vs.is_empty() {
            0
        } else {
            rank_of_vectors(vs)
        }
    }
    fn solve(basis: &[Vec<Self>], target: &[Self]) -> Option<Vec<Self>> {
        solve_in_basis(basis, target)
    }
}

impl Scalar for f64 {
    fn eval<S: Coeff>(c: &S, pt: &Point) -> std::result::Result<Self, EvalError> {
        c.eval_f64(&pt.f)
    }
    fn from_q(x: &Q) -> Self {
        x.to_f64().unwrap_or(f64::NAN)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
    fn negligible(&self, scale: f64) -> bool {
        self.abs() <= TOL * scale.max(1.0)
    }
    fn rank(vs: &[Vec<Self>]) -> usize {
        rank_f64(vs, TOL)
    }
    fn solve(basis: &[Vec<Self>], target: &[Self]) -> Option<Vec<Self>> {
        let (x, resid) = solve_f64(basis, target, TOL)?;
        (resid <= TOL).then_some(x)
    }
}

fn eval_field<S: Coeff, T: Scalar>(v: &VectorField<S>, pt: &Point) -> Result<Vec<T>> {
    v.comps
        .iter()
        .map(|c| T::eval(c, pt).map_err(ContactError::from))
        .collect()
}

fn eval_fields<S: Coeff, T: Scalar>(vs: &[VectorField<S>], pt: &Point) -> Result<Vec<Vec<T>>> {
    vs.iter().map(|v| eval_field(v, pt)).collect()
}

fn same_span<T: Scalar>(a: &[Vec<T>], b: &[Vec<T>]) -> bool {
    let ra = T::rank(a);
    let rb = T::rank(b);
    let both: Vec<Vec<T>> = a.iter().chain(b).cloned().collect();
    ra == rb && T::rank(&both) == ra
}

fn max_magnitude<T: Scalar>(rows: &[Vec<T>]) -> f64 {
    rows.iter()
        .flatten()
        .map(|x| x.as_f64().abs())
        .fold(0.0, f64::max)
}

/// Runs the exact computation, falling back to floats when some coefficient
/// has no exact value at the point.
fn exact_or_float<R>(exact: impl FnOnce() -> Result<R>, float: impl FnOnce() -> Result<R>) -> Result<R> {
    match exact() {
        Err(ContactError::Eval(EvalError::NotExact(_))) => float(),
        r => r,
    }
}

// ---------------------------------------------------------------------------
// Engine

struct Engine<S> {
    m: usize,
    dim: usize,
    names: Vec<String>,
    omega: QMatrix,
    omega_up: QMatrix,
    frame: Vec<VectorField<S>>,
    coframe: Vec<Form<S>>,
    c: S,
    f0: S,
    f: Vec<S>,
    nf0: S,
    nf: Vec<S>,
    x: VectorField<S>,
    xn: VectorField<S>,
    ranks: OnceCell<RankFields<S>>,
    secondary: OnceCell<SecondaryFields<S>>,
}

struct RankFields<S> {
    u: Vec<VectorField<S>>,
    v: Vec<VectorField<S>>,
    e: Vec<VectorField<S>>,
    duw: Vec<VectorField<S>>,
    e_perp: Vec<VectorField<S>>,
    h: Vec<VectorField<S>>,
    de: Vec<VectorField<S>>,
    t1: Vec<VectorField<S>>,
    t2: Vec<VectorField<S>>,
    t3: Vec<VectorField<S>>,
}

struct SecondaryFields<S> {
    sigma: Vec<S>,
    /// i(X) d mu on A_j, X, [A_j, X], with mu = i(X) d theta^{-1,-2}.
    ch: Vec<S>,
    /// mu on the same fields; vanishes when the torsion does.
    mu: Vec<S>,
}

fn brackets<S: Coeff>(a: &[VectorField<S>], b: &[VectorField<S>]) -> Vec<VectorField<S>> {
    let mut out = Vec::new();
    for x in a {
        for y in b {
            let z = x.bracket(y);
            if !z.is_zero() {
                out.push(z);
            }
        }
    }
    out
}

fn joined<S: Clone>(parts: &[&[S]]) -> Vec<S> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

impl<S: Ring> Engine<S> {
    fn build(spec: &ODESpec) -> Option<Engine<S>> {
        let m = spec.m();
        let names = spec.names();
        let nm: Vec<&str> = names.iter().map(String::as_str).collect();
        let chart = spec.chart();
        let frame: Vec<VectorField<S>> = chart
            .frame()
            .iter()
            .map(|v| v.map(|p| S::lift(p, &nm)))
            .collect();
        let coframe: Vec<Form<S>> = chart
            .coframe()
            .iter()
            .map(|th| th.map(|p| S::lift(p, &nm)))
            .collect();
        let c = S::from_spec(&spec.c)?;
        let f0 = S::from_spec(&spec.f0)?;
        let f: Vec<S> = spec.f.iter().map(S::from_spec).collect::<Option<_>>()?;
        let nf0 = f0.quotient(&c)?;
        let nf: Vec<S> = f.iter().map(|x| x.quotient(&c)).collect::<Option<_>>()?;
        let omega_up = omega_upper(&spec.omega)?;
        let mut eng = Engine {
            m,
            dim: spec.dim(),
            names,
            omega: spec.omega.clone(),
            omega_up,
            frame,
            coframe,
            c,
            f0,
            f,
            nf0,
            nf,
            x: VectorField::zero(0),
            xn: VectorField::zero(0),
            ranks: OnceCell::new(),
            secondary: OnceCell::new(),
        };
        eng.x = eng.assemble(&eng.c, &eng.f0, &eng.f);
        eng.xn = eng.assemble(&S::one(), &eng.nf0, &eng.nf);
        Some(eng)
    }

    fn name_refs(&self) -> Vec<&str> {
        self.names.iter().map(String::as_str).collect()
    }

    fn a(&self, i: usize) -> usize {
        i
    }
    fn t02(&self) -> usize {
        self.m + 1
    }
    fn e(&self, i: usize) -> usize {
        self.m + 1 + i
    }
    fn t12(&self) -> usize {
        2 * self.m + 2
    }
    fn t22(&self) -> usize {
        2 * self.m + 3
    }

    fn assemble(&self, c: &S, f0: &S, f: &[S]) -> VectorField<S> {
        let mut x = self.frame[0]
            .times(c)
            .add(&self.frame[self.t02()].times(f0));
        for p in 1..=self.m {
            x = x.add(&self.frame[self.a(p)].times(&f[p - 1]));
        }
        x
    }

    fn a_fields(&self) -> Vec<VectorField<S>> {
        (1..=self.m).map(|i| self.frame[self.a(i)].clone()).collect()
    }

    fn pair(&self, k: usize, v: &VectorField<S>) -> S {
        self.coframe[k].on(&[v])
    }

    /// v_i = v^p omega_{pi}
    fn lower(&self, v: &[S]) -> Vec<S> {
        (0..self.m)
            .map(|i| {
                let mut acc = S::zero();
                for p in 0..self.m {
                    let w = &self.omega[p][i];
                    if !w.is_zero() {
                        acc = acc.add(&v[p].scale(w));
                    }
                }
                acc
            })
            .collect()
    }

    /// v^i = omega^{ip} v_p
    fn raise(&self, v: &[S]) -> Vec<S> {
        (0..self.m)
            .map(|i| {
                let mut acc = S::zero();
                for p in 0..self.m {
                    let w = &self.omega_up[i][p];
                    if !w.is_zero() {
                        acc = acc.add(&v[p].scale(w));
                    }
                }
                acc
            })
            .collect()
    }

    /// tau_i = 3 f_i + A_i(f0) for the C-normalized field.
    fn tau(&self) -> Vec<S> {
        let low = self.lower(&self.nf);
        (1..=self.m)
            .map(|i| low[i - 1].scale(&q(3)).add(&self.frame[self.a(i)].apply(&self.nf0)))
            .collect()
    }

    /// (theta^{-1,-2}, theta^{-2,-2}) of [[A_i, X], X] for the raw X.
    fn bracket_route(&self) -> Vec<(S, S)> {
        (1..=self.m)
            .map(|i| {
                let y = self.frame[self.a(i)].bracket(&self.x).bracket(&self.x);
                (self.pair(self.t12(), &y), self.pair(self.t22(), &y))
            })
            .collect()
    }

    fn rank_fields(&self) -> &RankFields<S> {
        self.ranks.get_or_init(|| {
            let u = self.a_fields();
            let v = joined(&[&u, &[self.frame[self.t02()].clone()]]);
            let e = joined(&[&v, std::slice::from_ref(&self.x)]);
            let ax = brackets(&u, std::slice::from_ref(&self.x));
            let duw = joined(&[&u, std::slice::from_ref(&self.x), &ax]);
            let e_perp = joined(&[&e, &brackets(&e, &u)]);
            let h = joined(&[&e, &brackets(&e, &v)]);
            let mut ee = Vec::new();
            for i in 0..e.len() {
                for j in i + 1..e.len() {
                    ee.push(e[i].bracket(&e[j]));
                }
            }
            let de = joined(&[&e, &ee]);
            let t1 = joined(&[&u, std::slice::from_ref(&self.x)]);
            let mut t11 = Vec::new();
            for i in 0..t1.len() {
                for j in i + 1..t1.len() {
                    t11.push(t1[i].bracket(&t1[j]));
                }
            }
            let t2 = joined(&[&t1, &t11]);
            let t3 = joined(&[&t2, &brackets(&t1, &t2)]);
            RankFields {
                u,
                v,
                e,
                duw,
                e_perp,
                h,
                de,
                t1,
                t2,
                t3,
            }
        })
    }

    /// Rank of `base` plus brackets of `left` with `right`, stopping once full.
    fn saturated_rank<T: Scalar>(
        &self,
        base: &[VectorField<S>],
        left: &[VectorField<S>],
        right: &[VectorField<S>],
        pt: &Point,
    ) -> Result<usize> {
        let mut vals: Vec<Vec<T>> = eval_fields(base, pt)?;
        let mut r = T::rank(&vals);
        for b in right.iter().rev() {
            for a in left.iter().rev() {
                if r == self.dim {
                    return Ok(r);
                }
                let z = a.bracket(b);
                if z.is_zero() {
                    continue;
                }
                vals.push(eval_field(&z, pt)?);
                r = T::rank(&vals);
            }
        }
        Ok(r)
    }

    fn check_c<T: Scalar>(&self, pt: &Point) -> Result<()> {
        let c: T = T::eval(&self.c, pt)?;
        if c.as_f64().abs() < 1e-12 {
            return Err(ContactError::DegeneratePoint);
        }
        Ok(())
    }

    fn ranks_at<T: Scalar>(&self, pt: &Point, n: usize) -> Result<RankReport> {
        self.check_c::<T>(pt)?;
        let rf = self.rank_fields();
        let ev = |vs: &[VectorField<S>]| eval_fields::<S, T>(vs, pt);
        let (u, v, e, duw, e_perp, h, de) = (
            ev(&rf.u)?,
            ev(&rf.v)?,
            ev(&rf.e)?,
            ev(&rf.duw)?,
            ev(&rf.e_perp)?,
            ev(&rf.h)?,
            ev(&rf.de)?,
        );
        let d2e = self.saturated_rank::<T>(&rf.de, &rf.e, &rf.de, pt)?;
        let t2 = ev(&rf.t2)?;
        let t3 = ev(&rf.t3)?;
        let t4 = self.saturated_rank::<T>(&rf.t3, &rf.t1, &rf.t3, pt)?;
        let chain_holds = same_span(&t2, &e_perp) && same_span(&t3, &h) && t4 == self.dim;
        let t02 = eval_field::<S, T>(&self.frame[self.t02()], pt)?;
        let with_t02 = joined(&[&duw, &[t02]]);
        let r_duw = T::rank(&duw);
        Ok(RankReport {
            n,
            u: T::rank(&u),
            v: T::rank(&v),
            e: T::rank(&e),
            duw: r_duw,
            e_perp: T::rank(&e_perp),
            h: T::rank(&h),
            de: T::rank(&de),
            d2e,
            expected: expected_ranks(n),
            chain_holds,
            t02_outside_duw: T::rank(&with_t02) == r_duw + 1,
        })
    }

    /// [A_i, [A_j, X]] + omega_ij T_{-1,-2} has no component outside V, for the
    /// C-normalized X. Returns the offending components.
    fn aax_residuals(&self) -> Vec<S> {
        let mut out = Vec::new();
        let outside: Vec<usize> = std::iter::once(0)
            .chain((1..=self.m).map(|i| self.e(i)))
            .chain([self.t12(), self.t22()])
            .collect();
        for i in 1..=self.m {
            for j in 1..=self.m {
                let y = self.frame[self.a(i)]
                    .bracket(&self.frame[self.a(j)].bracket(&self.xn))
                    .add(&self.frame[self.t12()].scale(&self.omega[i - 1][j - 1]));
                for &k in &outside {
                    let c = self.pair(k, &y);
                    if !c.is_zero() {
                        out.push(c);
                    }
                }
            }
        }
        out
    }

    /// Coordinates in the E-perp basis (T, A_i, T_{0,-2}, E_i) of a field in E-perp.
    fn e_perp_coords(&self, v: &VectorField<S>) -> Vec<S> {
        (0..2 * self.m + 2).map(|k| self.pair(k, v)).collect()
    }

    fn symplectic_at<T: Scalar>(&self, pt: &Point, r: &Q, s: &Q) -> Result<SymplecticData<T>> {
        if s.is_zero() {
            return Err(ContactError::InvalidFilteredFrame);
        }
        self.check_c::<T>(pt)?;
        let nb = 2 * self.m + 2;
        let beta = self.coframe[self.t22()]
            .scale(r)
            .add(&self.coframe[self.t12()].scale(s));
        let dbeta = beta.d(self.dim);
        let mut gram: Vec<Vec<T>> = vec![vec![T::nil(); nb]; nb];
        for a in 0..nb {
            for b in a + 1..nb {
                let v: T = T::eval(&dbeta.on(&[&self.frame[a], &self.frame[b]]), pt)?;
                gram[b][a] = -v.clone();
                gram[a][b] = v;
            }
        }
        let ev = |xs: &[S]| -> Result<Vec<T>> {
            xs.iter().map(|c| T::eval(c, pt).map_err(ContactError::from)).collect()
        };
        let unit = |k: usize| {
            let mut v = vec![T::nil(); nb];
            v[k] = T::from_q(&Q::one());
            v
        };
        let x = ev(&self.e_perp_coords(&self.x))?;
        let mut duw: Vec<Vec<T>> = (1..=self.m).map(|i| unit(self.a(i))).collect();
        duw.push(x.clone());
        for i in 1..=self.m {
            duw.push(ev(&self.e_perp_coords(&self.frame[self.a(i)].bracket(&self.x)))?);
        }
        // row_a = d beta(e_a, X)
        let row: Vec<T> = (0..nb)
            .map(|a| {
                let mut acc = T::nil();
                for (b, xb) in x.iter().enumerate() {
                    acc = acc + gram[a][b].clone() * xb.clone();
                }
                acc
            })
            .collect();
        let scale = max_magnitude(&gram) * max_magnitude(std::slice::from_ref(&x)).max(1.0);
        let w_perp = kernel_of_row(&row, scale);
        Ok(SymplecticData {
            gram,
            w_perp,
            duw,
            x,
        })
    }

    fn symplectic_report<T: Scalar>(&self, pt: &Point, r: &Q, s: &Q) -> Result<SymplecticReport> {
        let d = self.symplectic_at::<T>(pt, r, s)?;
        let nb = 2 * self.m + 2;
        let scale = max_magnitude(&d.gram);
        let nondegenerate = T::rank(&d.gram) == nb;
        let v_idx: Vec<usize> = (1..=self.m).map(|i| self.a(i)).chain([self.t02()]).collect();
        let v_lagrangian = v_idx
            .iter()
            .all(|&a| v_idx.iter().all(|&b| d.gram[a][b].negligible(scale)));
        // E-perp skew complement of U equals E: E is orthogonal to U and U's rows
        // are independent, so the complement has the dimension of E.
        let u_rows: Vec<Vec<T>> = (1..=self.m).map(|i| d.gram[self.a(i)].clone()).collect();
        let e_orth_u = (1..=self.m).all(|i| {
            let row = &d.gram[self.a(i)];
            let against_x = row
                .iter()
                .zip(&d.x)
                .fold(T::nil(), |acc, (g, x)| acc + g.clone() * x.clone());
            v_idx.iter().all(|&b| row[b].negligible(scale)) && against_x.negligible(scale)
        });
        let u_perp_is_e = e_orth_u && T::rank(&u_rows) == self.m;
        Ok(SymplecticReport {
            nondegenerate,
            v_lagrangian,
            u_perp_is_e,
            w_perp_equals_duw: same_span(&d.w_perp, &d.duw),
            w_perp_rank: T::rank(&d.w_perp),
            duw_rank: T::rank(&d.duw),
        })
    }

    fn secondary_fields(&self) -> &SecondaryFields<S> {
        self.secondary.get_or_init(|| {
            let low = self.lower(&self.nf);
            let xn = &self.xn;
            let sigma = (1..=self.m)
                .map(|i| {
                    let y = xn.bracket(&xn.bracket(&self.frame[self.a(i)]));
                    let mut s = self
                        .pair(self.t02(), &y)
                        .sub(&self.pair(0, &y).mul(&self.nf0));
                    for j in 1..=self.m {
                        let shift = self.frame[self.a(j)]
                            .apply(&self.nf0)
                            .add(&low[j - 1].scale(&q(2)));
                        s = s.sub(&self.pair(self.e(j), &y).mul(&shift));
                    }
                    s
                })
                .collect();
            let mu = self.coframe[self.t12()].d(self.dim).interior(xn);
            let nu = mu.d(self.dim).interior(xn);
            let mut gens = self.a_fields();
            gens.push(xn.clone());
            for i in 1..=self.m {
                gens.push(self.frame[self.a(i)].bracket(xn));
            }
            SecondaryFields {
                sigma,
                ch: gens.iter().map(|z| nu.on(&[z])).collect(),
                mu: gens.iter().map(|z| mu.on(&[z])).collect(),
            }
        })
    }

    fn secondary_at<T: Scalar>(&self, pt: &Point) -> Result<SecondaryReport> {
        self.check_c::<T>(pt)?;
        let sf = self.secondary_fields();
        let ev = |xs: &[S]| -> Result<Vec<T>> {
            xs.iter().map(|c| T::eval(c, pt).map_err(ContactError::from)).collect()
        };
        let sigma = ev(&sf.sigma)?;
        let ch = ev(&sf.ch)?;
        let mu = ev(&sf.mu)?;
        let scale = |v: &[T]| v.iter().map(|x| x.as_f64().abs()).fold(1.0, f64::max);
        Ok(SecondaryReport {
            sigma_vanishes: sigma.iter().all(|x| x.negligible(scale(&sigma))),
            ch_contains_w: ch.iter().all(|x| x.negligible(scale(&ch))),
            mu_annihilates: mu.iter().all(|x| x.negligible(scale(&mu))),
            sigma: sigma.iter().map(T::as_f64).collect(),
            ch: ch.iter().map(T::as_f64).collect(),
        })
    }

    /// The adapted frame u(g_-) in g_- order.
    fn adapted_frame(&self) -> Vec<VectorField<S>> {
        let low = self.lower(&self.nf);
        let mut u = self.frame.clone();
        u[0] = self.xn.clone();
        for i in 1..=self.m {
            u[self.e(i)] = self.frame[self.e(i)].sub(&self.frame[self.t02()].times(&low[i - 1]));
        }
        u
    }

    /// Coordinates of a field in the adapted frame.
    fn adapted_coords(&self, y: &VectorField<S>) -> Vec<S> {
        let low = self.lower(&self.nf);
        let yf: Vec<S> = (0..self.dim).map(|k| self.pair(k, y)).collect();
        let mut out = yf.clone();
        for p in 1..=self.m {
            out[self.a(p)] = yf[self.a(p)].sub(&yf[0].mul(&self.nf[p - 1]));
        }
        let mut t02 = yf[self.t02()].sub(&yf[0].mul(&self.nf0));
        for i in 1..=self.m {
            t02 = t02.add(&yf[self.e(i)].mul(&low[i - 1]));
        }
        out[self.t02()] = t02;
        out
    }

    fn adapted_at<T: Scalar>(&self, pt: &Point, n: usize) -> Result<AdaptedReport> {
        self.check_c::<T>(pt)?;
        let tau = self.tau();
        let tv: Vec<T> = tau
            .iter()
            .map(|c| T::eval(c, pt).map_err(ContactError::from))
            .collect::<Result<_>>()?;
        let sc = tv.iter().map(|x| x.as_f64().abs()).fold(1.0, f64::max);
        if !tv.iter().all(|x| x.negligible(sc)) {
            return Err(ContactError::TorsionNonzero);
        }
        let alg = build_with_omega(n, Parabolic::P12, Some(self.omega.clone()))
            .expect("omega was validated");
        let consts = alg.gminus_structure();
        let deg: Vec<i64> = alg.basis[..self.dim]
            .iter()
            .map(|b| b.bidegree.0 + b.bidegree.1)
            .collect();
        let u = self.adapted_frame();
        let mut residual = 0.0f64;
        let mut worst = None;
        for a in 0..self.dim {
            for b in a + 1..self.dim {
                let coords = self.adapted_coords(&u[a].bracket(&u[b]));
                for k in 0..self.dim {
                    if deg[k] > deg[a] + deg[b] {
                        continue;
                    }
                    let v: T = T::eval(&coords[k], pt)?;
                    let diff = (v - T::from_q(&consts[a][b][k])).as_f64().abs();
                    if diff > residual {
                        residual = diff;
                        worst = Some((alg.basis[a].name.clone(), alg.basis[b].name.clone()));
                    }
                }
            }
        }
        Ok(AdaptedReport { residual, worst })
    }

    /// T_{-1,-2} coefficient of [[u(a_i), u(t)], u(t)].
    fn obstruction_at<T: Scalar>(&self, pt: &Point) -> Result<Vec<f64>> {
        self.check_c::<T>(pt)?;
        (1..=self.m)
            .map(|i| {
                let y = self.frame[self.a(i)].bracket(&self.xn).bracket(&self.xn);
                let v: T = T::eval(&self.pair(self.t12(), &y), pt)?;
                Ok(v.as_f64())
            })
            .collect()
    }
}

fn kernel_of_row<T: Scalar>(row: &[T], scale: f64) -> Vec<Vec<T>> {
    let nb = row.len();
    let pivot = (0..nb)
        .filter(|&k| !row[k].negligible(scale))
        .max_by(|&a, &b| {
            row[a]
                .as_f64()
                .abs()
                .partial_cmp(&row[b].as_f64().abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
    let unit = |k: usize| {
        let mut v = vec![T::nil(); nb];
        v[k] = T::from_q(&Q::one());
        v
    };
    match pivot {
        None => (0..nb).map(unit).collect(),
        Some(k) => (0..nb)
            .filter(|&a| a != k)
            .map(|a| {
                let mut v = unit(a);
                v[k] = -(row[a].clone() / row[k].clone());
                v
            })
            .collect(),
    }
}

struct SymplecticData<T> {
    gram: Vec<Vec<T>>,
    w_perp: Vec<Vec<T>>,
    duw: Vec<Vec<T>>,
    x: Vec<T>,
}

enum AnyEngine {
    Poly(Box<Engine<Poly>>),
    Expr(Box<Engine<Expr>>),
}

macro_rules! on_engine {
    ($an:expr, $e:ident => $body:expr) => {
        match &$an.engine {
            AnyEngine::Poly($e) => $body,
            AnyEngine::Expr($e) => $body,
        }
    };
}

macro_rules! at_point {
    ($an:expr, $pt:expr, $e:ident, $call:ident ( $($arg:expr),* )) => {{
        let pt = $an.point($pt)?;
        on_engine!($an, $e => exact_or_float(
            || $e.$call::<Q>(&pt $(, $arg)*),
            || $e.$call::<f64>(&pt $(, $arg)*),
        ))
    }};
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZeroStatus {
    ProvedZero,
    ProvedNonzero,
    Undetermined,
}

fn exprs_as_strings<S: Serializer>(v: &[Expr], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|e| e.to_string()))
}

fn point_as_strings<S: Serializer>(v: &Option<Vec<Q>>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        None => s.serialize_none(),
        Some(p) => s.collect_seq(p.iter().map(|x| x.to_string())),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TorsionReport {
    /// tau_i = 3 f_i + A_i(f0) after dividing f0, f by C.
    #[serde(serialize_with = "exprs_as_strings")]
    pub tau: Vec<Expr>,
    pub status: ZeroStatus,
    #[serde(serialize_with = "point_as_strings")]
    pub witness: Option<Vec<Q>>,
    /// Closed form and bracket reduction agree (symbolically when exact,
    /// otherwise at every sample point).
    pub routes_agree: bool,
    pub max_route_gap: f64,
}

impl TorsionReport {
    pub fn is_zero(&self) -> Option<bool> {
        match self.status {
            ZeroStatus::ProvedZero => Some(true),
            ZeroStatus::ProvedNonzero => Some(false),
            ZeroStatus::Undetermined => None,
        }
    }
}

/// Ranks of U, V, E, d(U,W), E-perp, H, dE, d^2 E at a point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RankReport {
    pub n: usize,
    pub u: usize,
    pub v: usize,
    pub e: usize,
    pub duw: usize,
    pub e_perp: usize,
    pub h: usize,
    pub de: usize,
    pub d2e: usize,
    pub expected: [usize; 8],
    /// T^{-2} = dT^{-1} = E-perp, T^{-3} = H, T^{-4} everything.
    pub chain_holds: bool,
    pub t02_outside_duw: bool,
}

impl RankReport {
    pub fn ranks(&self) -> [usize; 8] {
        [self.u, self.v, self.e, self.duw, self.e_perp, self.h, self.de, self.d2e]
    }

    pub fn matches_expected(&self) -> bool {
        self.ranks() == self.expected
    }
}

pub fn expected_ranks(n: usize) -> [usize; 8] {
    [
        2 * n - 4,
        2 * n - 3,
        2 * n - 2,
        4 * n - 7,
        4 * n - 6,
        4 * n - 5,
        4 * n - 5,
        4 * n - 4,
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SymplecticReport {
    pub nondegenerate: bool,
    pub v_lagrangian: bool,
    pub u_perp_is_e: bool,
    pub w_perp_equals_duw: bool,
    pub w_perp_rank: usize,
    pub duw_rank: usize,
}

impl SymplecticReport {
    pub fn lemma_holds(&self) -> bool {
        self.nondegenerate && self.v_lagrangian && self.u_perp_is_e
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SecondaryReport {
    /// Coefficient of T_{0,-2} in [X, [X, A_i]] modulo d(U,W).
    pub sigma: Vec<f64>,
    /// i(X) d mu on A_j, X, [A_j, X].
    pub ch: Vec<f64>,
    pub sigma_vanishes: bool,
    pub ch_contains_w: bool,
    pub mu_annihilates: bool,
}

impl SecondaryReport {
    pub fn consistent(&self) -> bool {
        self.sigma_vanishes == self.ch_contains_w
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdaptedReport {
    pub residual: f64,
    pub worst: Option<(String, String)>,
}

// ---------------------------------------------------------------------------
// Analyzer

/// A validated spec together with its symbolic engine. Symbolic brackets are
/// computed once and reused across points.
pub struct Analyzer {
    spec: ODESpec,
    engine: AnyEngine,
    seed: u64,
}

impl Analyzer {
    pub fn new(spec: &ODESpec) -> Result<Analyzer> {
        Self::with_seed(spec, DEFAULT_SEED)
    }

    pub fn with_seed(spec: &ODESpec, seed: u64) -> Result<Analyzer> {
        spec.validate()?;
        let engine = if spec.is_polynomial() {
            AnyEngine::Poly(Box::new(Engine::build(spec).expect("polynomial spec")))
        } else {
            AnyEngine::Expr(Box::new(
                Engine::build(spec).ok_or(ContactError::BadOmega(spec.m()))?,
            ))
        };
        Ok(Analyzer {
            spec: spec.clone(),
            engine,
            seed,
        })
    }

    pub fn spec(&self) -> &ODESpec {
        &self.spec
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.engine, AnyEngine::Poly(_))
    }

    fn point(&self, pt: &[Q]) -> Result<Point> {
        if pt.len() != self.spec.dim() {
            return Err(ContactError::PointDimension {
                got: pt.len(),
                expected: self.spec.dim(),
            });
        }
        Ok(Point::new(pt))
    }

    pub fn sample_points(&self) -> Vec<Vec<Q>> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        random_points(&mut rng, self.spec.dim(), SAMPLE_POINTS)
    }

    /// The generating field X with expression coefficients.
    pub fn generating_field(&self) -> VectorField<Expr> {
        on_engine!(self, e => {
            let names = e.name_refs();
            e.x.map(|c| c.to_expr(&names))
        })
    }

    /// X as an exact polynomial field, when the spec allows it.
    pub fn generating_field_poly(&self) -> Option<VectorField<Poly>> {
        match &self.engine {
            AnyEngine::Poly(e) => Some(e.x.clone()),
            AnyEngine::Expr(_) => None,
        }
    }

    pub fn torsion(&self) -> Result<TorsionReport> {
        on_engine!(self, e => self.torsion_with(e))
    }

    fn torsion_with<S: Ring>(&self, e: &Engine<S>) -> Result<TorsionReport> {
        let tau = e.tau();
        let names = e.name_refs();
        let samples = self.sample_points();
        let dim = self.spec.dim();

        // witnesses: origin, unit coordinate points, then seeded samples
        let mut candidates = vec![vec![<Q as Zero>::zero(); dim]];
        for k in 0..dim {
            let mut p = vec![<Q as Zero>::zero(); dim];
            p[k] = Q::one();
            candidates.push(p);
        }
        candidates.extend(samples.iter().cloned());

        let structurally_zero = tau.iter().all(|c| c.is_zero());
        let mut witness = None;
        let mut undecided = false;
        if !structurally_zero {
            'search: for p in &candidates {
                let pt = Point::new(p);
                for c in &tau {
                    match c.eval_exact(&pt.q) {
                        Ok(v) if !v.is_zero() => {
                            witness = Some(p.clone());
                            break 'search;
                        }
                        Ok(_) => {}
                        Err(EvalError::DivisionByZero) => {}
                        Err(_) => match c.eval_f64(&pt.f) {
                            Ok(v) if v.abs() > TOL => {
                                witness = Some(p.clone());
                                break 'search;
                            }
                            _ => undecided = true,
                        },
                    }
                }
            }
        }
        let status = if structurally_zero {
            ZeroStatus::ProvedZero
        } else if witness.is_some() || S::CANONICAL {
            ZeroStatus::ProvedNonzero
        } else if undecided {
            ZeroStatus::Undetermined
        } else {
            // exact zero at every sample: a randomized identity test, not a proof
            ZeroStatus::Undetermined
        };

        // route (b): T_{-1,-2} coefficient of [[A_i, X], X] is C^2 tau_i and
        // the T_{-2,-2} coefficient vanishes
        let route = e.bracket_route();
        let c2 = e.c.mul(&e.c);
        let mut routes_agree = true;
        if S::CANONICAL {
            for (i, (t12, t22)) in route.iter().enumerate() {
                if !t12.sub(&c2.mul(&tau[i])).is_zero() || !t22.is_zero() {
                    routes_agree = false;
                }
            }
        }
        // numeric reduction modulo span{A_j, T_{0,-2}, X, E_j} at the samples
        let mut gap = 0.0f64;
        for p in &samples {
            let pt = Point::new(p);
            let g = exact_or_float(
                || reduction_gap::<S, Q>(e, &pt, &tau),
                || reduction_gap::<S, f64>(e, &pt, &tau),
            )?;
            gap = gap.max(g);
        }
        if gap > TOL {
            routes_agree = false;
        }
        Ok(TorsionReport {
            tau: tau.iter().map(|c| c.to_expr(&names)).collect(),
            status,
            witness,
            routes_agree,
            max_route_gap: gap,
        })
    }

    /// f^i -> f^i - (C/3) tau^i, index raised with omega. Returns the spec
    /// unchanged when its torsion is already provably zero.
    pub fn torsion_free_representative(&self) -> Result<ODESpec> {
        on_engine!(self, e => {
            let tau = e.tau();
            if tau.iter().all(|c| c.is_zero()) {
                return Ok(self.spec.clone());
            }
            let names = e.name_refs();
            let up = e.raise(&tau);
            let third = qf(1, 3);
            let f: Vec<Expr> = (0..e.m)
                .map(|i| e.f[i].sub(&e.c.mul(&up[i]).scale(&third)).to_expr(&names))
                .collect();
            let mut out = self.spec.clone();
            out.f = f;
            Ok(out)
        })
    }

    pub fn filtration_ranks(&self, pt: &[Q]) -> Result<RankReport> {
        let n = self.spec.n;
        at_point!(self, pt, e, ranks_at(n))
    }

    /// [A_i, [A_j, X]] = -omega_ij T_{-1,-2} modulo V for the C-normalized X.
    pub fn aax_bracket_holds(&self) -> Result<bool> {
        on_engine!(self, e => {
            let res = e.aax_residuals();
            if res.is_empty() {
                return Ok(true);
            }
            if matches!(self.engine, AnyEngine::Poly(_)) {
                return Ok(false);
            }
            for p in self.sample_points() {
                let pt = Point::new(&p);
                for c in &res {
                    let v = Coeff::eval_f64(c, &pt.f)?;
                    if v.abs() > TOL {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        })
    }

    pub fn symplectic(&self, pt: &[Q], r: &Q, s: &Q) -> Result<SymplecticReport> {
        at_point!(self, pt, e, symplectic_report(r, s))
    }

    /// The d beta-skew complement of W in E-perp, as tangent vectors in chart
    /// coordinates.
    pub fn skew_complement_w(&self, pt: &[Q], r: &Q, s: &Q) -> Result<Vec<Vec<f64>>> {
        let p = self.point(pt)?;
        on_engine!(self, e => exact_or_float(
            || to_chart_vectors::<_, Q>(e, &p, &e.symplectic_at::<Q>(&p, r, s)?.w_perp),
            || to_chart_vectors::<_, f64>(e, &p, &e.symplectic_at::<f64>(&p, r, s)?.w_perp),
        ))
    }

    /// Whether the skew complement of W is the same subspace for every (r, s).
    pub fn skew_complement_invariant(&self, pt: &[Q], pairs: &[(Q, Q)]) -> Result<bool> {
        let p = self.point(pt)?;
        on_engine!(self, e => exact_or_float(
            || complement_invariant::<_, Q>(e, &p, pairs),
            || complement_invariant::<_, f64>(e, &p, pairs),
        ))
    }

    fn require_torsion_free(&self) -> Result<()> {
        if self.torsion()?.status == ZeroStatus::ProvedNonzero {
            return Err(ContactError::TorsionNonzero);
        }
        Ok(())
    }

    /// Secondary torsion and the characteristic-system test at a point.
    pub fn secondary(&self, pt: &[Q]) -> Result<SecondaryReport> {
        self.require_torsion_free()?;
        at_point!(self, pt, e, secondary_at())
    }

    pub fn secondary_torsion(&self, pt: &[Q]) -> Result<Vec<f64>> {
        Ok(self.secondary(pt)?.sigma)
    }

    pub fn adapted_frame_check(&self, pt: &[Q]) -> Result<AdaptedReport> {
        let n = self.spec.n;
        at_point!(self, pt, e, adapted_at(n))
    }

    pub fn torsion_obstruction(&self, pt: &[Q]) -> Result<Vec<f64>> {
        at_point!(self, pt, e, obstruction_at())
    }

    pub fn integrate(&self, init: &[f64], t0: f64, t1: f64, control: StepControl) -> Result<Trajectory> {
        on_engine!(self, e => integrate_with(e, &self.spec, init, t0, t1, control))
    }
}

fn reduction_gap<S: Ring, T: Scalar>(e: &Engine<S>, pt: &Point, tau: &[S]) -> Result<f64> {
    let c: T = T::eval(&e.c, pt)?;
    if c.as_f64().abs() < 1e-12 {
        return Err(ContactError::DegeneratePoint);
    }
    let mut basis_fields: Vec<VectorField<S>> = e.a_fields();
    basis_fields.push(e.frame[e.t02()].clone());
    basis_fields.push(e.x.clone());
    basis_fields.extend((1..=e.m).map(|i| e.frame[e.e(i)].clone()));
    basis_fields.push(e.frame[e.t12()].clone());
    let basis: Vec<Vec<T>> = eval_fields(&basis_fields, pt)?;
    if T::rank(&basis) < basis.len() {
        return Err(ContactError::DegeneratePoint);
    }
    let mut gap = 0.0f64;
    for i in 1..=e.m {
        let y = e.frame[e.a(i)].bracket(&e.x).bracket(&e.x);
        let target: Vec<T> = eval_field(&y, pt)?;
        let coeffs = T::solve(&basis, &target).ok_or(ContactError::DegeneratePoint)?;
        let t12 = coeffs.last().expect("nonempty basis").clone();
        let expected: T = T::eval(&tau[i - 1], pt)?;
        let c2t = c.clone() * c.clone() * expected;
        gap = gap.max((t12 - c2t).as_f64().abs());
    }
    Ok(gap)
}

fn to_chart_vectors<S: Ring, T: Scalar>(e: &Engine<S>, pt: &Point, coords: &[Vec<T>]) -> Result<Vec<Vec<f64>>> {
    let frame: Vec<Vec<T>> = eval_fields(&e.frame[..coords.first().map_or(0, Vec::len)], pt)?;
    Ok(coords
        .iter()
        .map(|v| {
            (0..e.dim)
                .map(|k| {
                    v.iter()
                        .zip(&frame)
                        .fold(T::nil(), |acc, (a, f)| acc + a.clone() * f[k].clone())
                        .as_f64()
                })
                .collect()
        })
        .collect())
}

fn complement_invariant<S: Ring, T: Scalar>(e: &Engine<S>, pt: &Point, pairs: &[(Q, Q)]) -> Result<bool> {
    let mut first: Option<Vec<Vec<T>>> = None;
    for (r, s) in pairs {
        let k = e.symplectic_at::<T>(pt, r, s)?.w_perp;
        match &first {
            None => first = Some(k),
            Some(f) => {
                if !same_span(f, &k) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Free-function entry points

pub fn generating_field(spec: &ODESpec) -> Result<VectorField<Expr>> {
    Ok(Analyzer::new(spec)?.generating_field())
}

pub fn contact_torsion(spec: &ODESpec) -> Result<TorsionReport> {
    Analyzer::new(spec)?.torsion()
}

pub fn torsion_free_representative(spec: &ODESpec) -> Result<ODESpec> {
    Analyzer::new(spec)?.torsion_free_representative()
}

pub fn filtration_ranks(spec: &ODESpec, pt: &[Q]) -> Result<RankReport> {
    Analyzer::new(spec)?.filtration_ranks(pt)
}

pub fn secondary_torsion(spec: &ODESpec, pt: &[Q]) -> Result<Vec<f64>> {
    Analyzer::new(spec)?.secondary_torsion(pt)
}

pub fn skew_complement_w(spec: &ODESpec, pt: &[Q], r: &Q, s: &Q) -> Result<Vec<Vec<f64>>> {
    Analyzer::new(spec)?.skew_complement_w(pt, r, s)
}

pub fn adapted_frame_check(spec: &ODESpec, pt: &[Q]) -> Result<AdaptedReport> {
    Analyzer::new(spec)?.adapted_frame_check(pt)
}

pub fn integrate(spec: &ODESpec, init: &[f64], t0: f64, t1: f64, control: StepControl) -> Result<Trajectory> {
    Analyzer::new(spec)?.integrate(init, t0, t1, control)
}

// ---------------------------------------------------------------------------
// Random specs and points

fn random_rational(rng: &mut impl Rng, max_num: i64, max_den: i64) -> Q {
    Q::new(rng.gen_range(-max_num..=max_num).into(), rng.gen_range(1..=max_den).into())
}

pub fn random_points(rng: &mut impl Rng, dim: usize, count: usize) -> Vec<Vec<Q>> {
    (0..count)
        .map(|_| (0..dim).map(|_| random_rational(rng, 6, 4)).collect())
        .collect()
}

fn random_poly(rng: &mut impl Rng, dim: usize, max_degree: u32, max_terms: usize) -> Poly {
    let mut p = Poly::zero();
    for _ in 0..rng.gen_range(0..=max_terms) {
        let mut c = <Q as Zero>::zero();
        while c.is_zero() {
            c = random_rational(rng, 3, 2);
        }
        let mut t = Poly::constant(c);
        for _ in 0..rng.gen_range(0..=max_degree) {
            t = t.mul(&Poly::var(rng.gen_range(0..dim)));
        }
        p = p.add(&t);
    }
    p
}

/// A polynomial system with coefficients of degree at most `max_degree` in all
/// coordinates and a nonzero constant C.
pub fn random_polynomial_spec(rng: &mut impl Rng, n: usize, max_degree: u32) -> ODESpec {
    let m = 2 * n - 4;
    let dim = 2 * m + 4;
    let names = ODESpec::variable_names(n);
    let nm: Vec<&str> = names.iter().map(String::as_str).collect();
    let cs = [q(1), q(1), q(2), q(-1), qf(1, 2), qf(-3, 2)];
    let c = cs[rng.gen_range(0..cs.len())].clone();
    ODESpec {
        n,
        omega: standard_omega(m),
        c: Expr::rational(c),
        f0: random_poly(rng, dim, max_degree, 3).to_expr(&nm),
        f: (0..m)
            .map(|_| random_poly(rng, dim, max_degree, 2).to_expr(&nm))
            .collect(),
    }
}

/// `count` seeded random polynomial specs with n drawn from {3, 4}.
pub fn random_spec_population(seed: u64, count: usize, max_degree: u32) -> Vec<ODESpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(3..=4);
            random_polynomial_spec(&mut rng, n, max_degree)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Integration

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepControl {
    Fixed(f64),
    /// Step doubling with a local error tolerance.
    Adaptive { initial: f64, tol: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub state: Vec<f64>,
    /// theta(gamma') from differencing the computed samples.
    pub contact_residual: f64,
    /// theta^{-1,-2}(gamma') likewise.
    pub secondary_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub n: usize,
    pub rows: Vec<TrajectoryRow>,
}

impl Trajectory {
    pub fn header(n: usize) -> Vec<String> {
        let m = 2 * n - 4;
        let mut h = vec!["t".to_string(), "x_inf".to_string()];
        h.extend((0..=m).map(|i| format!("x{i}")));
        h.push("z".into());
        h.extend((0..=m).map(|i| format!("u{i}")));
        h.push("contact_residual".into());
        h.push("secondary_residual".into());
        h
    }

    pub fn max_contact_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.contact_residual.abs()).fold(0.0, f64::max)
    }

    pub fn max_secondary_residual(&self) -> f64 {
        self.rows.iter().map(|r| r.secondary_residual.abs()).fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(Self::header(self.n))?;
        for r in &self.rows {
            let mut rec = vec![r.t.to_string()];
            rec.extend(r.state.iter().map(f64::to_string));
            rec.push(r.contact_residual.to_string());
            rec.push(r.secondary_residual.to_string());
            wr.write_record(&rec)?;
        }
        wr.flush()
    }
}

fn rk4_step(rhs: &dyn Fn(&[f64]) -> Result<Vec<f64>>, y: &[f64], h: f64) -> Result<Vec<f64>> {
    let axpy = |a: &[f64], k: &[f64], s: f64| -> Vec<f64> {
        a.iter().zip(k).map(|(x, d)| x + s * d).collect()
    };
    let k1 = rhs(y)?;
    let k2 = rhs(&axpy(y, &k1, h / 2.0))?;
    let k3 = rhs(&axpy(y, &k2, h / 2.0))?;
    let k4 = rhs(&axpy(y, &k3, h))?;
    Ok((0..y.len())
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Finite-difference weights for the first derivative at `z` on nodes `x`.
fn fornberg_first(z: f64, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

fn integrate_with<S: Ring>(
    e: &Engine<S>,
    spec: &ODESpec,
    init: &[f64],
    t0: f64,
    t1: f64,
    control: StepControl,
) -> Result<Trajectory> {
    if init.len() != e.dim {
        return Err(ContactError::PointDimension {
            got: init.len(),
            expected: e.dim,
        });
    }
    if !(t1 > t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(ContactError::Step(format!("need t0 < t1, got [{t0}, {t1}]")));
    }
    let mut y0 = init.to_vec();
    // with C = 1 the parameter is x_inf itself
    if spec.c.as_rational().is_some_and(|c| c.is_one()) {
        y0[0] = t0;
    }
    let rhs = |y: &[f64]| -> Result<Vec<f64>> {
        let c = e.c.eval_f64(y)?;
        if c.abs() < 1e-12 {
            return Err(ContactError::DegeneratePoint);
        }
        e.x.eval_f64(y).map_err(ContactError::from)
    };
    let guard = |t: f64, y: &[f64], r: Result<Vec<f64>>| -> Result<Vec<f64>> {
        match r {
            Err(ContactError::DegeneratePoint) => Err(ContactError::SingularArc {
                t,
                state: y.to_vec(),
            }),
            other => other,
        }
    };
    let c_at = |y: &[f64]| Coeff::eval_f64(&e.c, y).map_err(ContactError::from);
    let c_start = c_at(&y0)?;
    if c_start.abs() < 1e-12 {
        return Err(ContactError::SingularArc { t: t0, state: y0 });
    }
    // C may also cross zero between samples
    let crossed = |y_new: &[f64]| -> Result<bool> {
        let c = c_at(y_new)?;
        Ok(c.abs() < 1e-12 || c.signum() != c_start.signum())
    };
    let mut ts = vec![t0];
    let mut ys = vec![y0.clone()];
    const MAX_STEPS: usize = 5_000_000;
    match control {
        StepControl::Fixed(h) => {
            if !(h > 0.0) {
                return Err(ContactError::Step(format!("step must be positive, got {h}")));
            }
            let steps = ((t1 - t0) / h).round().max(1.0);
            if steps as usize > MAX_STEPS {
                return Err(ContactError::Step("too many steps".into()));
            }
            let steps = steps as usize;
            let h = (t1 - t0) / steps as f64;
            let mut y = y0;
            for k in 0..steps {
                let t = t0 + k as f64 * h;
                let next = guard(t, &y, rk4_step(&rhs, &y, h))?;
                if crossed(&next)? {
                    return Err(ContactError::SingularArc { t, state: y });
                }
                y = next;
                ts.push(t0 + (k + 1) as f64 * h);
                ys.push(y.clone());
            }
        }
        StepControl::Adaptive { initial, tol } => {
            if !(initial > 0.0) || !(tol > 0.0) {
                return Err(ContactError::Step("initial step and tolerance must be positive".into()));
            }
            let mut t = t0;
            let mut h = initial.min(t1 - t0);
            let mut y = y0;
            let mut count = 0usize;
            while t < t1 {
                count += 1;
                if count > MAX_STEPS {
                    return Err(ContactError::Step("too many steps".into()));
                }
                if t + h > t1 {
                    h = t1 - t;
                }
                let big = guard(t, &y, rk4_step(&rhs, &y, h))?;
                let half = guard(t, &y, rk4_step(&rhs, &y, h / 2.0))?;
                let small = guard(t + h / 2.0, &half, rk4_step(&rhs, &half, h / 2.0))?;
                let err = big
                    .iter()
                    .zip(&small)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
                    / 15.0;
                if err <= tol || h < 1e-14 {
                    if crossed(&small)? {
                        return Err(ContactError::SingularArc { t, state: y });
                    }
                    t = if t + h >= t1 { t1 } else { t + h };
                    y = small;
                    ts.push(t);
                    ys.push(y.clone());
                }
                let factor = if err == 0.0 {
                    4.0
                } else {
                    (0.9 * (tol / err).powf(0.2)).clamp(0.1, 4.0)
                };
                h *= factor;
            }
        }
    }

    let chart = spec.chart();
    let theta = chart.contact_form();
    let theta12 = chart.theta_12();
    let count = ts.len();
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let vel: Vec<f64> = if count == 1 {
            e.x.eval_f64(&ys[0])?
        } else {
            let width = count.min(5);
            let start = i.saturating_sub(width / 2).min(count - width);
            let w = fornberg_first(ts[i], &ts[start..start + width]);
            (0..e.dim)
                .map(|k| (0..width).map(|j| w[j] * ys[start + j][k]).sum())
                .collect()
        };
        rows.push(TrajectoryRow {
            t: ts[i],
            state: ys[i].clone(),
            contact_residual: theta.eval_on_f64(&ys[i], &[&vel])?,
            secondary_residual: theta12.eval_on_f64(&ys[i], &[&vel])?,
        });
    }
    Ok(Trajectory { n: spec.n, rows })
}
