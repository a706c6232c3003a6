//! Root data of type C_n, Weyl group actions and Hasse diagrams of parabolics.
//!
//! Conventions: simple roots alpha_i = e_i - e_{i+1} (i < n) and alpha_n = 2 e_n;
//! Cartan entries A_ij = <alpha_i, alpha_j^vee>, so row n carries the -2.
//! Weights are stored by their coefficients over the fundamental weights
//! omega_i = e_1 + ... + e_i. Node indices in the public API are 1-based.

use std::collections::{HashSet, VecDeque};

use num_traits::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::linalg::{inverse, q, QMatrix, Q};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LieError {
    #[error("rank {0} is not supported (need n >= 2)")]
    InvalidRank(usize),
    #[error("simple root index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("parabolic must cross at least one node")]
    EmptyParabolic,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct Weight {
    pub coeffs: Vec<i64>,
}

impl Weight {
    pub fn new(coeffs: Vec<i64>) -> Self {
        Weight { coeffs }
    }

    pub fn zero(n: usize) -> Self {
        Weight { coeffs: vec![0; n] }
    }

    /// Highest weight 2 lambda_1 of the adjoint representation.
    pub fn adjoint(n: usize) -> Self {
        let mut w = Weight::zero(n);
        w.coeffs[0] = 2;
        w
    }

    pub fn to_eps(&self) -> Vec<i64> {
        let n = self.coeffs.len();
        let mut out = vec![0; n];
        let mut acc = 0;
        for i in (0..n).rev() {
            acc += self.coeffs[i];
            out[i] = acc;
        }
        out
    }

    pub fn from_eps(e: &[i64]) -> Self {
        let n = e.len();
        let coeffs = (0..n)
            .map(|j| if j + 1 < n { e[j] - e[j + 1] } else { e[j] })
            .collect();
        Weight { coeffs }
    }

    pub fn add(&self, other: &Weight) -> Weight {
        Weight::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Weight) -> Weight {
        Weight::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Weight {
        Weight::new(self.coeffs.iter().map(|a| -a).collect())
    }

    /// Squared length in the epsilon basis (Weyl-invariant).
    pub fn norm2_eps(&self) -> i64 {
        self.to_eps().iter().map(|x| x * x).sum()
    }
}

/// A Weyl group element as a word s_{l1} s_{l2} ... acting right-to-left.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeylWord {
    pub letters: Vec<usize>,
}

impl WeylWord {
    pub fn identity() -> Self {
        WeylWord { letters: Vec::new() }
    }

    pub fn new(letters: Vec<usize>) -> Self {
        WeylWord { letters }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        WeylWord {
            letters: self.letters.iter().rev().copied().collect(),
        }
    }

    pub fn concat(&self, other: &WeylWord) -> Self {
        WeylWord {
            letters: self.letters.iter().chain(&other.letters).copied().collect(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RootSystem {
    pub n: usize,
    pub simple_roots: Vec<Vec<i64>>,
    pub cartan: Vec<Vec<i64>>,
    pub inv_cartan: QMatrix,
    pub rho: Weight,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// First nonzero coordinate positive, in the epsilon basis.
pub fn is_positive_eps(v: &[i64]) -> bool {
    v.iter().find(|x| **x != 0).is_some_and(|x| *x > 0)
}

pub fn build_root_system(n: usize) -> Result<RootSystem, LieError> {
    if n < 2 {
        return Err(LieError::InvalidRank(n));
    }
    let simple_roots: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            let mut v = vec![0; n];
            if i + 1 < n {
                v[i] = 1;
                v[i + 1] = -1;
            } else {
                v[i] = 2;
            }
            v
        })
        .collect();
    let cartan: Vec<Vec<i64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let aj = &simple_roots[j];
                    2 * dot(&simple_roots[i], aj) / dot(aj, aj)
                })
                .collect()
        })
        .collect();
    let cq: QMatrix = cartan.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
    let inv_cartan = inverse(&cq).expect("Cartan matrix of C_n is invertible");
    Ok(RootSystem {
        n,
        simple_roots,
        cartan,
        inv_cartan,
        rho: Weight::new(vec![1; n]),
    })
}

impl RootSystem {
    fn check(&self, i: usize) -> Result<usize, LieError> {
        if i == 0 || i > self.n {
            Err(LieError::IndexOutOfRange { index: i, n: self.n })
        } else {
            Ok(i - 1)
        }
    }

    /// Simple root alpha_i as a weight (row i of the Cartan matrix).
    pub fn simple_root_weight(&self, i: usize) -> Result<Weight, LieError> {
        let i = self.check(i)?;
        Ok(Weight::new(self.cartan[i].clone()))
    }

    /// s_i(w) in the fundamental basis.
    pub fn reflect(&self, w: &Weight, i: usize) -> Result<Weight, LieError> {
        let k = self.check(i)?;
        let c = w.coeffs[k];
        Ok(Weight::new(
            (0..self.n).map(|j| w.coeffs[j] - c * self.cartan[k][j]).collect(),
        ))
    }

    pub fn apply_word(&self, w: &WeylWord, lam: &Weight) -> Result<Weight, LieError> {
        let mut out = lam.clone();
        for &i in w.letters.iter().rev() {
            out = self.reflect(&out, i)?;
        }
        Ok(out)
    }

    /// The rho-shifted action w . lam = w(lam + rho) - rho.
    pub fn affine_action(&self, w: &WeylWord, lam: &Weight) -> Result<Weight, LieError> {
        Ok(self.apply_word(w, &lam.add(&self.rho))?.sub(&self.rho))
    }

    /// Signed-permutation action of s_i on an epsilon-basis vector.
    pub fn reflect_eps(&self, v: &[i64], i: usize) -> Result<Vec<i64>, LieError> {
        let k = self.check(i)?;
        let mut out = v.to_vec();
        if k + 1 < self.n {
            out.swap(k, k + 1);
        } else {
            out[k] = -out[k];
        }
        Ok(out)
    }

    pub fn apply_word_eps(&self, w: &WeylWord, v: &[i64]) -> Result<Vec<i64>, LieError> {
        let mut out = v.to_vec();
        for &i in w.letters.iter().rev() {
            out = self.reflect_eps(&out, i)?;
        }
        Ok(out)
    }

    /// Canonical key of a Weyl group element: the image of (1, 2, ..., n).
    pub fn signed_permutation(&self, w: &WeylWord) -> Result<Vec<i64>, LieError> {
        let base: Vec<i64> = (1..=self.n as i64).collect();
        self.apply_word_eps(w, &base)
    }

    /// Positive roots in the epsilon basis: e_i - e_j, e_i + e_j (i < j), 2 e_i.
    pub fn positive_roots(&self) -> Vec<Vec<i64>> {
        let n = self.n;
        let mut out = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in i + 1..n {
                let mut a = vec![0; n];
                a[i] = 1;
                a[j] = -1;
                out.push(a);
                let mut b = vec![0; n];
                b[i] = 1;
                b[j] = 1;
                out.push(b);
            }
            let mut c = vec![0; n];
            c[i] = 2;
            out.push(c);
        }
        out
    }

    /// Eigenvalue of the grading element of `node` on a weight: the inner product
    /// of the fundamental coefficients with column `node` of the inverse Cartan matrix.
    pub fn homogeneity(&self, w: &Weight, node: usize) -> Result<Q, LieError> {
        let k = self.check(node)?;
        let mut acc = Q::zero();
        for (i, c) in w.coeffs.iter().enumerate() {
            if *c != 0 {
                acc += q(*c) * &self.inv_cartan[i][k];
            }
        }
        Ok(acc)
    }

    pub fn grade_eps(&self, v: &[i64], node: usize) -> Result<Q, LieError> {
        self.homogeneity(&Weight::from_eps(v), node)
    }

    /// Reduced length by breadth-first search over the group (signed permutations).
    pub fn reduced_length(&self, w: &WeylWord) -> Result<usize, LieError> {
        let target = self.signed_permutation(w)?;
        let start = self.signed_permutation(&WeylWord::identity())?;
        let mut seen: HashSet<Vec<i64>> = HashSet::from([start.clone()]);
        let mut queue = VecDeque::from([(start, 0usize)]);
        while let Some((v, d)) = queue.pop_front() {
            if v == target {
                return Ok(d);
            }
            for i in 1..=self.n {
                // left multiplication by s_i permutes the key's slots; BFS distance
                // under left generators is still the reduced length
                let mut nv = v.clone();
                let k = i - 1;
                if k + 1 < self.n {
                    nv.swap(k, k + 1);
                } else {
                    nv[k] = -nv[k];
                }
                if seen.insert(nv.clone()) {
                    queue.push_back((nv, d + 1));
                }
            }
        }
        unreachable!("Weyl group is finite and generated by simple reflections")
    }

    pub fn is_reduced(&self, w: &WeylWord) -> Result<bool, LieError> {
        Ok(self.reduced_length(w)? == w.len())
    }

    /// Minimal-length representatives w of W_p \ W (w^{-1} keeps every positive
    /// root of the Levi factor positive) with length <= max_len, by length.
    pub fn hasse_words(&self, crossed: &[usize], max_len: usize) -> Result<Vec<WeylWord>, LieError> {
        if crossed.is_empty() {
            return Err(LieError::EmptyParabolic);
        }
        for &c in crossed {
            self.check(c)?;
        }
        let levi: Vec<usize> = (1..=self.n).filter(|i| !crossed.contains(i)).collect();
        let mut out = vec![WeylWord::identity()];
        let mut seen = HashSet::from([self.signed_permutation(&WeylWord::identity())?]);
        let mut frontier = vec![WeylWord::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &frontier {
                for j in 1..=self.n {
                    // l(w s_j) = l(w) + 1 iff w(alpha_j) > 0
                    if !is_positive_eps(&self.apply_word_eps(w, &self.simple_roots[j - 1])?) {
                        continue;
                    }
                    let cand = w.concat(&WeylWord::new(vec![j]));
                    let inv = cand.inverse();
                    let mut minimal = true;
                    for &l in &levi {
                        if !is_positive_eps(&self.apply_word_eps(&inv, &self.simple_roots[l - 1])?) {
                            minimal = false;
                            break;
                        }
                    }
                    if minimal && seen.insert(self.signed_permutation(&cand)?) {
                        next.push(cand);
                    }
                }
            }
            out.extend(next.iter().cloned());
            frontier = next;
        }
        Ok(out)
    }
}
