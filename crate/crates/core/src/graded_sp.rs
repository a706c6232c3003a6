//! Matrix realization of sp(n) on the basis (f_inf, e_inf, e_1..e_m, e_0, f_0),
//! m = 2n - 4, with the bigrading induced by the first two nodes.

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::linalg::{
    identity, inverse, is_skew, is_zero_matrix, mat_add, mat_mul, mat_scale, mat_sub, q, rank,
    rref, transpose, zeros, QMatrix, Q,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GradedError {
    #[error("n = {0} is not supported for this parabolic (the three-dimensional theory is out of scope)")]
    UnsupportedDimension(usize),
    #[error("omega must be a skew, nondegenerate {0}x{0} matrix")]
    BadOmega(usize),
    #[error("matrix is not in the span of the basis (inconsistent basis)")]
    NotInSpan,
    #[error("invalid G0 element: {0}")]
    InvalidElement(String),
    #[error("element is not in g_-")]
    NotInGMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parabolic {
    P1,
    P2,
    P12,
}

impl Parabolic {
    pub fn crossed(self) -> &'static [usize] {
        match self {
            Parabolic::P1 => &[1],
            Parabolic::P2 => &[2],
            Parabolic::P12 => &[1, 2],
        }
    }

    pub fn from_crossed(nodes: &[usize]) -> Option<Parabolic> {
        let mut v = nodes.to_vec();
        v.sort_unstable();
        v.dedup();
        match v.as_slice() {
            [1] => Some(Parabolic::P1),
            [2] => Some(Parabolic::P2),
            [1, 2] => Some(Parabolic::P12),
            _ => None,
        }
    }

    /// Projects a bidegree onto this parabolic's grading.
    pub fn grade(self, bideg: (i64, i64)) -> Vec<i64> {
        match self {
            Parabolic::P1 => vec![bideg.0],
            Parabolic::P2 => vec![bideg.1],
            Parabolic::P12 => vec![bideg.0, bideg.1],
        }
    }
}

/// Standard block form [[0, I], [-I, 0]] of size m.
pub fn standard_omega(m: usize) -> QMatrix {
    let h = m / 2;
    let mut w = zeros(m, m);
    for i in 0..h {
        w[i][h + i] = Q::one();
        w[h + i][i] = -Q::one();
    }
    w
}

/// omega^{ij} with omega^{ip} omega_{pj} = -delta^i_j.
pub fn omega_upper(omega: &QMatrix) -> Option<QMatrix> {
    inverse(omega).map(|inv| mat_scale(&inv, &-Q::one()))
}

#[derive(Clone, Debug)]
pub struct BasisElement {
    pub name: String,
    pub matrix: QMatrix,
    pub bidegree: (i64, i64),
}

#[derive(Clone, Debug)]
pub struct GradedLieAlgebra {
    pub n: usize,
    pub parabolic: Parabolic,
    pub omega: QMatrix,
    pub symplectic_form: QMatrix,
    pub basis: Vec<BasisElement>,
    coord_rows: Vec<usize>,
    coord_inv: QMatrix,
}

/// Slots of the vector-space basis.
pub struct Slots {
    pub m: usize,
}

impl Slots {
    pub const F_INF: usize = 0;
    pub const E_INF: usize = 1;
    pub fn e(&self, i: usize) -> usize {
        1 + i
    }
    pub fn e0(&self) -> usize {
        self.m + 2
    }
    pub fn f0(&self) -> usize {
        self.m + 3
    }
    pub fn size(&self) -> usize {
        self.m + 4
    }
    /// Bigrading weight of each basis vector.
    pub fn weight(&self, k: usize) -> (i64, i64) {
        if k == Self::F_INF {
            (1, 1)
        } else if k == Self::E_INF {
            (0, 1)
        } else if k == self.e0() {
            (0, -1)
        } else if k == self.f0() {
            (-1, -1)
        } else {
            (0, 0)
        }
    }
}

fn elem(size: usize, r: usize, c: usize) -> QMatrix {
    let mut m = zeros(size, size);
    m[r][c] = Q::one();
    m
}

fn commutator(a: &QMatrix, b: &QMatrix) -> QMatrix {
    mat_sub(&mat_mul(a, b), &mat_mul(b, a))
}

fn flatten(m: &QMatrix) -> Vec<Q> {
    m.iter().flat_map(|r| r.iter().cloned()).collect()
}

/// Names and matrices of the g_- basis in the order
/// t_{-1,0}, a_1..a_m, t_{0,-2}, e_1..e_m, t_{-1,-2}, t_{-2,-2}.
pub fn gminus_elements(omega: &QMatrix) -> Vec<BasisElement> {
    let m = omega.len();
    let s = Slots { m };
    let size = s.size();
    let mut out = Vec::new();
    let t10 = mat_sub(
        &elem(size, Slots::E_INF, Slots::F_INF),
        &elem(size, s.f0(), s.e0()),
    );
    out.push(BasisElement {
        name: "t_{-1,0}".into(),
        matrix: t10,
        bidegree: (-1, 0),
    });
    for p in 1..=m {
        let mut a = elem(size, s.e(p), Slots::E_INF);
        for qq in 1..=m {
            let w = &omega[p - 1][qq - 1];
            if !w.is_zero() {
                a[s.e0()][s.e(qq)] -= w;
            }
        }
        out.push(BasisElement {
            name: format!("a_{p}"),
            matrix: a,
            bidegree: (0, -1),
        });
    }
    out.push(BasisElement {
        name: "t_{0,-2}".into(),
        matrix: elem(size, s.e0(), Slots::E_INF),
        bidegree: (0, -2),
    });
    for p in 1..=m {
        let mut e = elem(size, s.e(p), Slots::F_INF);
        for qq in 1..=m {
            let w = &omega[p - 1][qq - 1];
            if !w.is_zero() {
                e[s.f0()][s.e(qq)] -= w;
            }
        }
        out.push(BasisElement {
            name: format!("e_{p}"),
            matrix: e,
            bidegree: (-1, -1),
        });
    }
    out.push(BasisElement {
        name: "t_{-1,-2}".into(),
        matrix: mat_add(
            &elem(size, s.e0(), Slots::F_INF),
            &elem(size, s.f0(), Slots::E_INF),
        ),
        bidegree: (-1, -2),
    });
    out.push(BasisElement {
        name: "t_{-2,-2}".into(),
        matrix: elem(size, s.f0(), Slots::F_INF),
        bidegree: (-2, -2),
    });
    out
}

pub fn build(n: usize, parabolic: Parabolic) -> Result<GradedLieAlgebra, GradedError> {
    build_with_omega(n, parabolic, None)
}

pub fn build_with_omega(
    n: usize,
    parabolic: Parabolic,
    omega: Option<QMatrix>,
) -> Result<GradedLieAlgebra, GradedError> {
    if n < 3 {
        return Err(GradedError::UnsupportedDimension(n));
    }
    let m = 2 * n - 4;
    let omega = omega.unwrap_or_else(|| standard_omega(m));
    if omega.len() != m || !is_skew(&omega) || rank(&omega) != m {
        return Err(GradedError::BadOmega(m));
    }
    let s = Slots { m };
    let size = s.size();
    let mut big = zeros(size, size);
    big[Slots::F_INF][s.f0()] = Q::one();
    big[s.f0()][Slots::F_INF] = -Q::one();
    big[Slots::E_INF][s.e0()] = Q::one();
    big[s.e0()][Slots::E_INF] = -Q::one();
    for i in 0..m {
        for j in 0..m {
            big[s.e(i + 1)][s.e(j + 1)] = omega[i][j].clone();
        }
    }
    let big_inv = inverse(&big).expect("symplectic form is nondegenerate");

    let mut basis = gminus_elements(&omega);
    // g_0 + p^+: Omega^{-1} S for symmetric elementary S of nonnegative bidegree
    for r in 0..size {
        for c in r..size {
            let (wr, wc) = (s.weight(r), s.weight(c));
            let bideg = (-(wr.0 + wc.0), -(wr.1 + wc.1));
            if bideg.0 < 0 || bideg.1 < 0 {
                continue;
            }
            let mut sym = elem(size, r, c);
            if r != c {
                sym[c][r] = Q::one();
            }
            basis.push(BasisElement {
                name: format!("s_{r}_{c}"),
                matrix: mat_mul(&big_inv, &sym),
                bidegree: bideg,
            });
        }
    }

    // coordinate extraction: pick independent matrix entries
    let flat: Vec<Vec<Q>> = basis.iter().map(|b| flatten(&b.matrix)).collect();
    let mut w = flat.clone();
    let rows = rref(&mut w);
    if rows.len() != basis.len() {
        return Err(GradedError::NotInSpan);
    }
    let sub: QMatrix = (0..basis.len())
        .map(|i| rows.iter().map(|&r| flat[i][r].clone()).collect())
        .collect();
    // sub[i][k] = entry rows[k] of basis i; coordinates solve x^T sub = entries
    let coord_inv = inverse(&transpose(&sub)).ok_or(GradedError::NotInSpan)?;
    Ok(GradedLieAlgebra {
        n,
        parabolic,
        omega,
        symplectic_form: big,
        basis,
        coord_rows: rows,
        coord_inv,
    })
}

/// Outcome of the structure-constant verification: one entry per relation.
#[derive(Clone, Debug)]
pub struct RelationReport {
    pub results: Vec<(String, bool)>,
}

impl RelationReport {
    pub fn passed(&self) -> usize {
        self.results.iter().filter(|(_, ok)| *ok).count()
    }
    pub fn total(&self) -> usize {
        self.results.len()
    }
    pub fn all_pass(&self) -> bool {
        self.passed() == self.total()
    }
}

impl GradedLieAlgebra {
    pub fn m(&self) -> usize {
        2 * self.n - 4
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.basis.iter().position(|b| b.name == name)
    }

    pub fn element(&self, name: &str) -> &QMatrix {
        &self.basis[self.index_of(name).unwrap_or_else(|| panic!("no basis element {name}"))].matrix
    }

    /// Number of g_- basis elements (they come first in `basis`).
    pub fn gminus_dim(&self) -> usize {
        2 * self.m() + 4
    }

    pub fn grade_of(&self, k: usize) -> Vec<i64> {
        self.parabolic.grade(self.basis[k].bidegree)
    }

    pub fn in_sp(&self, x: &QMatrix) -> bool {
        let om = &self.symplectic_form;
        is_zero_matrix(&mat_add(&mat_mul(&transpose(x), om), &mat_mul(om, x)))
    }

    /// Coordinates of a matrix in the stored basis.
    pub fn expand(&self, x: &QMatrix) -> Result<Vec<Q>, GradedError> {
        let flat = flatten(x);
        let picked: Vec<Q> = self.coord_rows.iter().map(|&r| flat[r].clone()).collect();
        let coords: Vec<Q> = self
            .coord_inv
            .iter()
            .map(|row| row.iter().zip(&picked).map(|(a, b)| a * b).sum())
            .collect();
        if &self.combine(&coords) != x {
            return Err(GradedError::NotInSpan);
        }
        Ok(coords)
    }

    pub fn combine(&self, coords: &[Q]) -> QMatrix {
        let size = self.symplectic_form.len();
        let mut out = zeros(size, size);
        for (c, b) in coords.iter().zip(&self.basis) {
            if !c.is_zero() {
                out = mat_add(&out, &mat_scale(&b.matrix, c));
            }
        }
        out
    }

    /// Matrix commutator re-expanded in the basis.
    pub fn bracket(&self, a: &QMatrix, b: &QMatrix) -> Result<Vec<Q>, GradedError> {
        self.expand(&commutator(a, b))
    }

    /// Checks the eight generating relations of g_- and the derived [e_i, e_j].
    pub fn verify_structure_constants(&self) -> RelationReport {
        let m = self.m();
        let om = &self.omega;
        let t = self.element("t_{-1,0}");
        let t02 = self.element("t_{0,-2}");
        let t12 = self.element("t_{-1,-2}");
        let t22 = self.element("t_{-2,-2}");
        let a = |i: usize| self.element(&format!("a_{i}"));
        let e = |i: usize| self.element(&format!("e_{i}"));
        let size = self.symplectic_form.len();
        let zero = zeros(size, size);
        let all = |f: &dyn Fn(usize, usize) -> bool| (1..=m).all(|i| (1..=m).all(|j| f(i, j)));
        let mut results = Vec::new();
        results.push((
            "[a_i, a_j] = -2 w_ij t_{0,-2}".to_string(),
            all(&|i, j| commutator(a(i), a(j)) == mat_scale(t02, &(q(-2) * &om[i - 1][j - 1]))),
        ));
        results.push((
            "[a_i, t_{-1,0}] = e_i".to_string(),
            (1..=m).all(|i| &commutator(a(i), t) == e(i)),
        ));
        results.push((
            "[t_{-1,0}, t_{0,-2}] = -t_{-1,-2}".to_string(),
            commutator(t, t02) == mat_scale(t12, &q(-1)),
        ));
        results.push((
            "[a_i, t_{0,-2}] = 0".to_string(),
            (1..=m).all(|i| commutator(a(i), t02) == zero),
        ));
        results.push((
            "[a_i, e_j] = -w_ij t_{-1,-2}".to_string(),
            all(&|i, j| commutator(a(i), e(j)) == mat_scale(t12, &-om[i - 1][j - 1].clone())),
        ));
        results.push((
            "[a_i, t_{-1,-2}] = 0".to_string(),
            (1..=m).all(|i| commutator(a(i), t12) == zero),
        ));
        results.push((
            "[t_{-1,0}, t_{-1,-2}] = -2 t_{-2,-2}".to_string(),
            commutator(t, t12) == mat_scale(t22, &q(-2)),
        ));
        results.push((
            "[t_{-1,0}, e_i] = 0".to_string(),
            (1..=m).all(|i| commutator(t, e(i)) == zero),
        ));
        results.push((
            "[e_i, e_j] = -2 w_ij t_{-2,-2}".to_string(),
            all(&|i, j| commutator(e(i), e(j)) == mat_scale(t22, &(q(-2) * &om[i - 1][j - 1]))),
        ));
        RelationReport { results }
    }

    /// Dimension of each graded component under this algebra's parabolic.
    pub fn graded_dims(&self) -> BTreeMap<Vec<i64>, usize> {
        let mut out = BTreeMap::new();
        for k in 0..self.dim() {
            *out.entry(self.grade_of(k)).or_insert(0) += 1;
        }
        out
    }

    /// Dimension of each bidegree component.
    pub fn bigraded_dims(&self) -> BTreeMap<(i64, i64), usize> {
        let mut out = BTreeMap::new();
        for b in &self.basis {
            *out.entry(b.bidegree).or_insert(0) += 1;
        }
        out
    }

    /// Trace form tr(XY), proportional to the Killing form.
    pub fn killing(&self, x: &QMatrix, y: &QMatrix) -> Q {
        let p = mat_mul(x, y);
        (0..p.len()).map(|i| p[i][i].clone()).sum()
    }

    /// Every basis bracket lies in the component of the summed bidegree.
    pub fn grading_compatible(&self) -> Result<bool, GradedError> {
        for i in 0..self.dim() {
            for j in i + 1..self.dim() {
                let bi = self.basis[i].bidegree;
                let bj = self.basis[j].bidegree;
                let target = (bi.0 + bj.0, bi.1 + bj.1);
                let coords = self.bracket(&self.basis[i].matrix, &self.basis[j].matrix)?;
                for (k, c) in coords.iter().enumerate() {
                    if !c.is_zero() && self.basis[k].bidegree != target {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// Structure constants of g_- in its own basis: out[i][j] = coords of [x_i, x_j].
    pub fn gminus_structure(&self) -> Vec<Vec<Vec<Q>>> {
        let d = self.gminus_dim();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        let c = self
                            .bracket(&self.basis[i].matrix, &self.basis[j].matrix)
                            .expect("g_- is closed");
                        c[..d].to_vec()
                    })
                    .collect()
            })
            .collect()
    }

    /// Coordinates of an element of g_- in the g_- basis.
    pub fn expand_gminus(&self, x: &QMatrix) -> Result<Vec<Q>, GradedError> {
        let c = self.expand(x)?;
        let d = self.gminus_dim();
        if c[d..].iter().any(|v| !v.is_zero()) {
            return Err(GradedError::NotInGMinus);
        }
        Ok(c[..d].to_vec())
    }

    pub fn adjoint_g0(&self, g: &G0Element, x: &QMatrix) -> Result<Vec<Q>, GradedError> {
        let gm = g.matrix();
        let gi = inverse(&gm).ok_or_else(|| GradedError::InvalidElement("singular".into()))?;
        self.expand_gminus(&mat_mul(&mat_mul(&gm, x), &gi))
    }

    /// The linear map Ad(g) on g_- as a matrix whose column k is the image of basis k.
    pub fn adjoint_g0_map(&self, g: &G0Element) -> Result<QMatrix, GradedError> {
        let d = self.gminus_dim();
        let cols: Vec<Vec<Q>> = (0..d)
            .map(|k| self.adjoint_g0(g, &self.basis[k].matrix))
            .collect::<Result<_, _>>()?;
        Ok(transpose(&cols))
    }

    /// The graded automorphism with parameters (a, b, A):
    /// t -> a t, a_i -> A_i^j a_j, e_i -> a A_i^j e_j,
    /// t_{0,-2} -> b t_{0,-2}, t_{-1,-2} -> ab t_{-1,-2}, t_{-2,-2} -> a^2 b t_{-2,-2}.
    pub fn automorphism_from_params(&self, p: &AutomorphismParams) -> QMatrix {
        let m = self.m();
        let d = self.gminus_dim();
        let mut map = zeros(d, d);
        map[0][0] = p.a.clone();
        for i in 0..m {
            for j in 0..m {
                map[1 + j][1 + i] = p.big_a[i][j].clone();
                map[m + 2 + j][m + 2 + i] = &p.a * &p.big_a[i][j];
            }
        }
        map[m + 1][m + 1] = p.b.clone();
        map[2 * m + 2][2 * m + 2] = &p.a * &p.b;
        map[2 * m + 3][2 * m + 3] = &p.a * &p.a * &p.b;
        map
    }

    /// Decides whether a Z-graded linear map of g_- (columns = images of the
    /// basis) is a Lie automorphism; on success returns its parameters.
    pub fn solve_graded_automorphism(
        &self,
        map: &QMatrix,
    ) -> Result<AutomorphismParams, Rejection> {
        let m = self.m();
        let d = self.gminus_dim();
        if map.len() != d || map.iter().any(|r| r.len() != d) {
            return Err(Rejection::Shape);
        }
        // Z-grading (P12 total degree) must be respected
        let zdeg = |k: usize| {
            let b = self.basis[k].bidegree;
            b.0 + b.1
        };
        for col in 0..d {
            for row in 0..d {
                if !map[row][col].is_zero() && zdeg(row) != zdeg(col) {
                    return Err(Rejection::NotGraded);
                }
            }
        }
        if rank(map) != d {
            return Err(Rejection::NotInvertible);
        }
        let sc = self.gminus_structure();
        let apply = |v: &[Q]| -> Vec<Q> {
            (0..d)
                .map(|r| (0..d).map(|c| &map[r][c] * &v[c]).sum())
                .collect()
        };
        let col = |k: usize| -> Vec<Q> { map.iter().map(|r| r[k].clone()).collect() };
        for i in 0..d {
            for j in i + 1..d {
                let lhs = apply(&sc[i][j]);
                let (xi, xj) = (col(i), col(j));
                let mut rhs = vec![Q::zero(); d];
                for (p, cp) in xi.iter().enumerate() {
                    if cp.is_zero() {
                        continue;
                    }
                    for (r, cr) in xj.iter().enumerate() {
                        if cr.is_zero() {
                            continue;
                        }
                        for (k, s) in sc[p][r].iter().enumerate() {
                            if !s.is_zero() {
                                rhs[k] += cp * cr * s;
                            }
                        }
                    }
                }
                if lhs != rhs {
                    return Err(Rejection::NotLieAutomorphism {
                        first: self.basis[i].name.clone(),
                        second: self.basis[j].name.clone(),
                    });
                }
            }
        }
        // a Lie automorphism must also respect the bigrading
        for c in 0..d {
            for r in 0..d {
                if !map[r][c].is_zero() && self.basis[r].bidegree != self.basis[c].bidegree {
                    return Err(Rejection::MixesBidegrees);
                }
            }
        }
        let a = map[0][0].clone();
        let b = map[m + 1][m + 1].clone();
        let big_a: QMatrix = (0..m)
            .map(|i| (0..m).map(|j| map[1 + j][1 + i].clone()).collect())
            .collect();
        let params = AutomorphismParams { a, b, big_a };
        if !params.is_conformally_symplectic(&self.omega) {
            return Err(Rejection::NotLieAutomorphism {
                first: "a_i".into(),
                second: "a_j".into(),
            });
        }
        Ok(params)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Rejection {
    #[error("map has the wrong shape")]
    Shape,
    #[error("map does not preserve the Z-grading")]
    NotGraded,
    #[error("map is not invertible")]
    NotInvertible,
    #[error("bracket of {first} and {second} is not preserved")]
    NotLieAutomorphism { first: String, second: String },
    #[error("map mixes bidegrees")]
    MixesBidegrees,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AutomorphismParams {
    pub a: Q,
    pub b: Q,
    pub big_a: QMatrix,
}

impl AutomorphismParams {
    pub fn identity(m: usize) -> Self {
        AutomorphismParams {
            a: Q::one(),
            b: Q::one(),
            big_a: identity(m),
        }
    }

    /// A_i^p A_j^q omega_pq = b omega_ij
    pub fn is_conformally_symplectic(&self, omega: &QMatrix) -> bool {
        let lhs = mat_mul(&mat_mul(&self.big_a, omega), &transpose(&self.big_a));
        lhs == mat_scale(omega, &self.b)
    }

    /// The G0 element (C, c, d) inducing this automorphism, when b is a positive
    /// rational square: d = b^{-1/2}, c = d / a, C = d A.
    pub fn to_g0(&self) -> Option<G0Element> {
        if !self.b.is_positive() {
            return None;
        }
        let root = rational_sqrt(&self.b)?;
        let d = root.recip();
        if self.a.is_zero() {
            return None;
        }
        let c = &d / &self.a;
        let big_c = mat_scale(&self.big_a, &d);
        Some(G0Element { big_c, c, d })
    }
}

fn rational_sqrt(x: &Q) -> Option<Q> {
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| Q::new(n, d))
}

/// Element (C, c, d) of G0 = Sp(n-2) x GL(1) x GL(1).
#[derive(Clone, Debug, PartialEq)]
pub struct G0Element {
    pub big_c: QMatrix,
    pub c: Q,
    pub d: Q,
}

impl G0Element {
    pub fn new(big_c: QMatrix, c: Q, d: Q, omega: &QMatrix) -> Result<Self, GradedError> {
        if c.is_zero() || d.is_zero() {
            return Err(GradedError::InvalidElement("c and d must be nonzero".into()));
        }
        if inverse(&big_c).is_none() {
            return Err(GradedError::InvalidElement("C is singular".into()));
        }
        if mat_mul(&mat_mul(&big_c, omega), &transpose(&big_c)) != *omega {
            return Err(GradedError::InvalidElement("C does not preserve omega".into()));
        }
        Ok(G0Element { big_c, c, d })
    }

    /// diag(c, d, C^T, 1/d, 1/c) on (f_inf, e_inf, e_i, e_0, f_0).
    pub fn matrix(&self) -> QMatrix {
        let m = self.big_c.len();
        let s = Slots { m };
        let mut g = zeros(s.size(), s.size());
        g[Slots::F_INF][Slots::F_INF] = self.c.clone();
        g[Slots::E_INF][Slots::E_INF] = self.d.clone();
        for i in 0..m {
            for j in 0..m {
                g[s.e(i + 1)][s.e(j + 1)] = self.big_c[j][i].clone();
            }
        }
        g[s.e0()][s.e0()] = self.d.recip();
        g[s.f0()][s.f0()] = self.c.recip();
        g
    }
}
