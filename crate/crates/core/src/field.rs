//! Vector fields and differential forms in a single coordinate chart.

use std::collections::BTreeMap;

use pathgeom_expr::EvalError;

use crate::coeff::Coeff;
use crate::linalg::Q;

/// Vector field with one coefficient per chart coordinate.
#[derive(Clone, Debug)]
pub struct VectorField<S> {
    pub comps: Vec<S>,
}

impl<S: Coeff> VectorField<S> {
    pub fn zero(dim: usize) -> Self {
        VectorField {
            comps: vec![S::zero(); dim],
        }
    }

    /// The coordinate field d/dx^k.
    pub fn partial(dim: usize, k: usize) -> Self {
        let mut v = Self::zero(dim);
        v.comps[k] = S::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    /// Adds `c * d/dx^k`.
    pub fn with(mut self, k: usize, c: S) -> Self {
        self.comps[k] = self.comps[k].add(&c);
        self
    }

    /// Directional derivative X(f).
    pub fn apply(&self, f: &S) -> S {
        let mut acc = S::zero();
        for (k, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = f.diff(k);
            if !d.is_zero() {
                acc = acc.add(&c.mul(&d));
            }
        }
        acc
    }

    pub fn bracket(&self, other: &Self) -> Self {
        let comps = (0..self.dim())
            .map(|k| self.apply(&other.comps[k]).sub(&other.apply(&self.comps[k])))
            .collect();
        VectorField { comps }
    }

    pub fn add(&self, other: &Self) -> Self {
        VectorField {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.add(b)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        VectorField {
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        VectorField {
            comps: self.comps.iter().map(|a| a.neg()).collect(),
        }
    }

    /// Multiplication by a function.
    pub fn times(&self, f: &S) -> Self {
        VectorField {
            comps: self.comps.iter().map(|a| a.mul(f)).collect(),
        }
    }

    pub fn scale(&self, c: &Q) -> Self {
        VectorField {
            comps: self.comps.iter().map(|a| a.scale(c)).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn eval_f64(&self, pt: &[f64]) -> Result<Vec<f64>, EvalError> {
        self.comps.iter().map(|c| c.eval_f64(pt)).collect()
    }

    pub fn eval_exact(&self, pt: &[Q]) -> Result<Vec<Q>, EvalError> {
        self.comps.iter().map(|c| c.eval_exact(pt)).collect()
    }

    /// Changes the coefficient ring.
    pub fn map<T: Coeff>(&self, f: impl Fn(&S) -> T) -> VectorField<T> {
        VectorField {
            comps: self.comps.iter().map(f).collect(),
        }
    }
}

/// Differential p-form: sum of coefficient * dx^{i1} ^ ... ^ dx^{ip} over
/// strictly increasing index lists.
#[derive(Clone, Debug)]
pub struct Form<S> {
    pub degree: usize,
    pub terms: BTreeMap<Vec<usize>, S>,
}

/// Sorts an index list, returning the permutation sign, or `None` on a repeat.
fn sort_sign(idx: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    if v.len() < 2 {
        return Some((v, sign));
    }
    for i in 0..v.len() {
        for j in 0..v.len() - 1 - i {
            if v[j] > v[j + 1] {
                v.swap(j, j + 1);
                sign = -sign;
            } else if v[j] == v[j + 1] {
                return None;
            }
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        return None;
    }
    Some((v, sign))
}

impl<S: Coeff> Form<S> {
    pub fn map<T: Coeff>(&self, f: impl Fn(&S) -> T) -> Form<T> {
        Form {
            degree: self.degree,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), f(c))).collect(),
        }
    }

    pub fn zero(degree: usize) -> Self {
        Form {
            degree,
            terms: BTreeMap::new(),
        }
    }

    pub fn function(f: S) -> Self {
        let mut out = Self::zero(0);
        out.push(Vec::new(), f);
        out
    }

    /// dx^k
    pub fn dx(k: usize) -> Self {
        let mut out = Self::zero(1);
        out.push(vec![k], S::one());
        out
    }

    fn push(&mut self, idx: Vec<usize>, c: S) {
        if c.is_zero() {
            return;
        }
        let merged = match self.terms.remove(&idx) {
            Some(old) => old.add(&c),
            None => c,
        };
        if !merged.is_zero() {
            self.terms.insert(idx, merged);
        }
    }

    /// Adds `c * dx^{idx}` for an arbitrary (unsorted) index list.
    pub fn add_term(mut self, idx: &[usize], c: S) -> Self {
        if let Some((sorted, sign)) = sort_sign(idx) {
            let c = if sign < 0 { c.neg() } else { c };
            self.push(sorted, c);
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(|c| c.is_zero())
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.push(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        Form {
            degree: self.degree,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect(),
        }
    }

    pub fn times(&self, f: &S) -> Self {
        let mut out = Self::zero(self.degree);
        for (k, c) in &self.terms {
            out.push(k.clone(), c.mul(f));
        }
        out
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.degree);
        for (k, v) in &self.terms {
            out.push(k.clone(), v.scale(c));
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let idx: Vec<usize> = a.iter().chain(b).copied().collect();
                if let Some((sorted, sign)) = sort_sign(&idx) {
                    let c = ca.mul(cb);
                    out.push(sorted, if sign < 0 { c.neg() } else { c });
                }
            }
        }
        out
    }

    /// Exterior derivative; `dim` is the chart dimension.
    pub fn d(&self, dim: usize) -> Self {
        let mut out = Self::zero(self.degree + 1);
        for (idx, c) in &self.terms {
            for k in 0..dim {
                if idx.contains(&k) {
                    continue;
                }
                let dc = c.diff(k);
                if dc.is_zero() {
                    continue;
                }
                let mut full = vec![k];
                full.extend_from_slice(idx);
                if let Some((sorted, sign)) = sort_sign(&full) {
                    out.push(sorted, if sign < 0 { dc.neg() } else { dc });
                }
            }
        }
        out
    }

    /// Interior product i(X).
    pub fn interior(&self, x: &VectorField<S>) -> Self {
        let mut out = Self::zero(self.degree.saturating_sub(1));
        if self.degree == 0 {
            return out;
        }
        for (idx, c) in &self.terms {
            for (pos, &k) in idx.iter().enumerate() {
                if x.comps[k].is_zero() {
                    continue;
                }
                let mut rest = idx.clone();
                rest.remove(pos);
                let v = c.mul(&x.comps[k]);
                out.push(rest, if pos % 2 == 1 { v.neg() } else { v });
            }
        }
        out
    }

    /// Evaluates the form on vector fields (symbolically), alternating convention
    /// (dx ^ dy)(X, Y) = X^x Y^y - X^y Y^x.
    pub fn on(&self, fields: &[&VectorField<S>]) -> S {
        assert_eq!(fields.len(), self.degree, "form degree mismatch");
        let mut f = self.clone();
        for x in fields {
            f = f.interior(x);
        }
        f.terms.get(&Vec::new()).cloned().unwrap_or_else(S::zero)
    }

    /// Numeric evaluation at a point on numeric tangent vectors.
    pub fn eval_on_f64(&self, pt: &[f64], vecs: &[&[f64]]) -> Result<f64, EvalError> {
        assert_eq!(vecs.len(), self.degree, "form degree mismatch");
        let mut acc = 0.0;
        for (idx, c) in &self.terms {
            let m: Vec<Vec<f64>> = vecs
                .iter()
                .map(|v| idx.iter().map(|&k| v[k]).collect())
                .collect();
            let d = det_small(&m);
            if d != 0.0 {
                acc += c.eval_f64(pt)? * d;
            }
        }
        Ok(acc)
    }
}

fn det_small(m: &[Vec<f64>]) -> f64 {
    match m.len() {
        0 => 1.0,
        1 => m[0][0],
        2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
        n => {
            let mut acc = 0.0;
            for j in 0..n {
                let minor: Vec<Vec<f64>> = m[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(k, _)| *k != j).map(|(_, x)| *x).collect())
                    .collect();
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += s * m[0][j] * det_small(&minor);
            }
            acc
        }
    }
}
