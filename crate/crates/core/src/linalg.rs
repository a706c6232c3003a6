//! Exact rational linear algebra, plus float rank/solve through nalgebra.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

/// Dense row-major rational matrix.
pub type QMatrix = Vec<Vec<Q>>;

pub fn q(k: i64) -> Q {
    Q::from_integer(BigInt::from(k))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

pub fn zeros(rows: usize, cols: usize) -> QMatrix {
    vec![vec![Q::zero(); cols]; rows]
}

pub fn identity(n: usize) -> QMatrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn mat_mul(a: &QMatrix, b: &QMatrix) -> QMatrix {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let mut out = zeros(rows, cols);
    for i in 0..rows {
        for k in 0..inner {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b[k][j].is_zero() {
                    out[i][j] += &a[i][k] * &b[k][j];
                }
            }
        }
    }
    out
}

pub fn transpose(a: &QMatrix) -> QMatrix {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|row| row[j].clone()).collect())
        .collect()
}

pub fn mat_add(a: &QMatrix, b: &QMatrix) -> QMatrix {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x + y).collect())
        .collect()
}

pub fn mat_sub(a: &QMatrix, b: &QMatrix) -> QMatrix {
    a.iter()
        .zip(b)
        .map(|(r, s)| r.iter().zip(s).map(|(x, y)| x - y).collect())
        .collect()
}

pub fn mat_scale(a: &QMatrix, c: &Q) -> QMatrix {
    a.iter()
        .map(|r| r.iter().map(|x| x * c).collect())
        .collect()
}

pub fn is_zero_matrix(a: &QMatrix) -> bool {
    a.iter().all(|r| r.iter().all(Zero::is_zero))
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut QMatrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(pivot_row.iter()) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &QMatrix) -> usize {
    let mut w = m.clone();
    rref(&mut w).len()
}

/// Rank of a family of vectors (each vector is one column of the implied matrix).
pub fn rank_of_vectors(vs: &[Vec<Q>]) -> usize {
    rank(&vs.to_vec())
}

pub fn inverse(m: &QMatrix) -> Option<QMatrix> {
    let n = m.len();
    let mut aug: QMatrix = m
        .iter()
        .zip(identity(n))
        .map(|(r, e)| r.iter().cloned().chain(e).collect())
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Solves sum_k x_k * basis[k] = target; `None` when target is outside the span
/// or the basis is dependent.
pub fn solve_in_basis(basis: &[Vec<Q>], target: &[Q]) -> Option<Vec<Q>> {
    let k = basis.len();
    let dim = target.len();
    let mut aug: QMatrix = (0..dim)
        .map(|i| {
            basis
                .iter()
                .map(|b| b[i].clone())
                .chain(std::iter::once(target[i].clone()))
                .collect()
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() != k || pivots.contains(&k) {
        return None;
    }
    let mut x = vec![Q::zero(); k];
    for (row, &c) in pivots.iter().enumerate() {
        x[c] = aug[row][k].clone();
    }
    Some(x)
}

/// Basis of the null space {x : m x = 0}.
pub fn nullspace(m: &QMatrix) -> Vec<Vec<Q>> {
    if m.is_empty() {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut w = m.clone();
    let pivots = rref(&mut w);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (row, &p) in pivots.iter().enumerate() {
                v[p] = -w[row][f].clone();
            }
            v
        })
        .collect()
}

pub fn det(m: &QMatrix) -> Q {
    let n = m.len();
    let mut w = m.clone();
    let mut d = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !w[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            w.swap(p, c);
            d = -d;
        }
        d *= &w[c][c];
        let inv = w[c][c].recip();
        for i in c + 1..n {
            if w[i][c].is_zero() {
                continue;
            }
            let f = &w[i][c] * &inv;
            let pivot_row = w[c].clone();
            for (x, y) in w[i].iter_mut().zip(pivot_row.iter()) {
                *x -= &f * y;
            }
        }
    }
    d
}

pub fn is_skew(m: &QMatrix) -> bool {
    let n = m.len();
    m.iter().all(|r| r.len() == n)
        && (0..n).all(|i| (0..n).all(|j| m[i][j] == -m[j][i].clone()))
}

pub fn max_abs(v: &[Q]) -> Q {
    v.iter().map(|x| x.abs()).max().unwrap_or_else(Q::zero)
}

/// Numerical rank of vectors (columns) after scaling each to unit length;
/// singular values below `tol` are treated as zero.
pub fn rank_f64(vs: &[Vec<f64>], tol: f64) -> usize {
    if vs.is_empty() {
        return 0;
    }
    let m = column_matrix(vs);
    m.svd(false, false).rank(tol)
}

fn column_matrix(vs: &[Vec<f64>]) -> DMatrix<f64> {
    let dim = vs[0].len();
    let mut m = DMatrix::<f64>::zeros(dim, vs.len());
    for (j, v) in vs.iter().enumerate() {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let s = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        for (i, x) in v.iter().enumerate() {
            m[(i, j)] = x * s;
        }
    }
    m
}

/// Least-squares coefficients of `target` in the span of `basis`, with the
/// residual norm relative to |target|.
pub fn solve_f64(basis: &[Vec<f64>], target: &[f64], tol: f64) -> Option<(Vec<f64>, f64)> {
    let dim = target.len();
    let mut m = DMatrix::<f64>::zeros(dim, basis.len());
    for (j, v) in basis.iter().enumerate() {
        for (i, x) in v.iter().enumerate() {
            m[(i, j)] = *x;
        }
    }
    let b = nalgebra::DVector::from_column_slice(target);
    let svd = m.clone().svd(true, true);
    if svd.rank(tol * svd.singular_values.max().max(1.0)) < basis.len() {
        return None;
    }
    let x = svd.solve(&b, 0.0).ok()?;
    let resid = (&m * &x - &b).norm() / b.norm().max(1.0);
    Some((x.iter().copied().collect(), resid))
}

pub fn to_f64(x: &Q) -> f64 {
    num_traits::ToPrimitive::to_f64(x).unwrap_or(f64::NAN)
}
