//! Second homology H_2(p+; sp(n)) for the parabolics crossing nodes 1, 2 or both.
//!
//! Extreme weights come from Kostant's theorem: one component per Hasse word of
//! length two, with weight w . (2 lambda_1). Each parabolic variant supplies the
//! relation turning that cohomology weight into the dual (homology) labels.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;
use serde::Serialize;
use thiserror::Error;

use crate::graded_sp::Parabolic;
use crate::lie_core::{build_root_system, LieError, RootSystem, Weight, WeylWord};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KostantError {
    #[error("n = {0} is not supported (need n >= 3)")]
    Unsupported(usize),
    #[error("no parabolic variant registered as '{0}'")]
    UnknownVariant(String),
    #[error("homogeneity {0} is not an integer")]
    NonIntegral(String),
    #[error("no candidate subspace contains the weight")]
    NoHousing,
    #[error("{0} candidate subspaces contain the weight")]
    AmbiguousHousing(usize),
    #[error(transparent)]
    Lie(#[from] LieError),
}

/// A parabolic subalgebra of sp(n) described by its crossed nodes.
pub trait ParabolicVariant: Send + Sync {
    fn name(&self) -> &'static str;
    /// Crossed nodes, 1-based and ascending.
    fn crossed(&self) -> &'static [usize];
    /// Converts cohomology labels into the labels of the dual diagram.
    fn dual_labels(&self, mu: &[i64]) -> Vec<i64>;
}

struct CrossFirst;
struct CrossSecond;
struct CrossBoth;

fn tail_sum(mu: &[i64], from: usize) -> i64 {
    mu.iter().skip(from).sum()
}

impl ParabolicVariant for CrossFirst {
    fn name(&self) -> &'static str {
        "P1"
    }
    fn crossed(&self) -> &'static [usize] {
        &[1]
    }
    fn dual_labels(&self, mu: &[i64]) -> Vec<i64> {
        let mut out = mu.to_vec();
        out[0] = -mu[0] - 2 * tail_sum(mu, 1);
        out
    }
}

impl ParabolicVariant for CrossSecond {
    fn name(&self) -> &'static str {
        "P2"
    }
    fn crossed(&self) -> &'static [usize] {
        &[2]
    }
    fn dual_labels(&self, mu: &[i64]) -> Vec<i64> {
        let mut out = mu.to_vec();
        out[1] = -mu[0] - mu[1] - 2 * tail_sum(mu, 2);
        out
    }
}

impl ParabolicVariant for CrossBoth {
    fn name(&self) -> &'static str {
        "P12"
    }
    fn crossed(&self) -> &'static [usize] {
        &[1, 2]
    }
    fn dual_labels(&self, mu: &[i64]) -> Vec<i64> {
        let mut out = mu.to_vec();
        out[0] = -mu[0];
        out[1] = -mu[1] - 2 * tail_sum(mu, 2);
        out
    }
}

/// Parabolic variants looked up by name or by crossed nodes.
pub struct VariantRegistry {
    variants: BTreeMap<String, Box<dyn ParabolicVariant>>,
}

impl Default for VariantRegistry {
    fn default() -> Self {
        let mut r = VariantRegistry {
            variants: BTreeMap::new(),
        };
        r.register(Box::new(CrossFirst));
        r.register(Box::new(CrossSecond));
        r.register(Box::new(CrossBoth));
        r
    }
}

impl VariantRegistry {
    pub fn register(&mut self, v: Box<dyn ParabolicVariant>) {
        self.variants.insert(v.name().to_string(), v);
    }

    pub fn get(&self, name: &str) -> Result<&dyn ParabolicVariant, KostantError> {
        self.variants
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| KostantError::UnknownVariant(name.to_string()))
    }

    pub fn by_crossed(&self, nodes: &[usize]) -> Option<&dyn ParabolicVariant> {
        let mut want = nodes.to_vec();
        want.sort_unstable();
        want.dedup();
        self.variants
            .values()
            .find(|v| v.crossed() == want.as_slice())
            .map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&str> {
        self.variants.keys().map(String::as_str).collect()
    }
}

fn variant_name(p: Parabolic) -> &'static str {
    match p {
        Parabolic::P1 => "P1",
        Parabolic::P2 => "P2",
        Parabolic::P12 => "P12",
    }
}

/// The subspace (g_I* ^ g_J*) (x) g_{I+J+K}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Housing {
    #[serde(rename = "I")]
    pub i: Vec<i64>,
    #[serde(rename = "J")]
    pub j: Vec<i64>,
    #[serde(rename = "K")]
    pub k: Vec<i64>,
}

fn degree_label(d: &[i64]) -> String {
    if d.iter().all(|x| *x == 0) {
        return "g_0".into();
    }
    let parts: Vec<String> = d.iter().map(|x| x.to_string()).collect();
    format!("g_{{{}}}", parts.join(","))
}

impl Housing {
    pub fn target(&self) -> Vec<i64> {
        (0..self.k.len())
            .map(|c| self.i[c] + self.j[c] + self.k[c])
            .collect()
    }

    pub fn describe(&self) -> String {
        let left = if self.i == self.j {
            format!("L2({}*)", degree_label(&self.i))
        } else {
            format!("({}* ^ {}*)", degree_label(&self.i), degree_label(&self.j))
        };
        format!("{left} (x) {}", degree_label(&self.target()))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct H2Component {
    pub labels: Weight,
    pub homogeneity: Vec<i64>,
    pub housing: Housing,
    #[serde(skip)]
    pub word: WeylWord,
    #[serde(skip)]
    pub cohomology_weight: Weight,
}

impl H2Component {
    pub fn total_homogeneity(&self) -> i64 {
        self.homogeneity.iter().sum()
    }
}

/// Homogeneity of a weight with respect to the grading element of `node`.
pub fn homogeneity(rs: &RootSystem, w: &Weight, node: usize) -> Result<crate::linalg::Q, KostantError> {
    Ok(rs.homogeneity(w, node)?)
}

fn integral_homogeneity(rs: &RootSystem, w: &Weight, crossed: &[usize]) -> Result<Vec<i64>, KostantError> {
    crossed
        .iter()
        .map(|&k| {
            let h = rs.homogeneity(w, k)?;
            if !h.is_integer() {
                return Err(KostantError::NonIntegral(h.to_string()));
            }
            h.to_integer()
                .to_i64()
                .ok_or_else(|| KostantError::NonIntegral(h.to_string()))
        })
        .collect()
}

fn root_grade(rs: &RootSystem, root: &[i64], crossed: &[usize]) -> Vec<i64> {
    crossed
        .iter()
        .map(|&k| {
            rs.grade_eps(root, k)
                .expect("crossed node validated")
                .to_integer()
                .to_i64()
                .expect("root grades are small integers")
        })
        .collect()
}

/// Finds the unique (I, J, K) whose weight content contains `mu`, where `mu` is
/// the cohomology weight w . (2 lambda_1) and `hom` its homogeneity.
pub fn housing(
    rs: &RootSystem,
    crossed: &[usize],
    mu: &Weight,
    hom: &[i64],
) -> Result<Housing, KostantError> {
    let n = rs.n;
    let pos = rs.positive_roots();
    let all: Vec<Vec<i64>> = pos
        .iter()
        .cloned()
        .chain(pos.iter().map(|r| r.iter().map(|x| -x).collect()))
        .collect();
    let graded: Vec<(Vec<i64>, Vec<i64>)> = all
        .iter()
        .map(|r| (root_grade(rs, r, crossed), r.clone()))
        .collect();
    let mut negative: Vec<Vec<i64>> = graded
        .iter()
        .map(|(g, _)| g.clone())
        .filter(|g| g.iter().all(|x| *x <= 0) && g.iter().any(|x| *x < 0))
        .collect();
    negative.sort();
    negative.dedup();

    // the homology weight -mu must be beta1 + beta2 + gamma with beta_i
    // weights of g_I*, g_J* and gamma a weight of g_{I+J+K}
    let target: Vec<i64> = mu.to_eps().iter().map(|x| -x).collect();
    let zero = vec![0i64; n];
    let mut found = Vec::new();
    for a in 0..negative.len() {
        for b in a..negative.len() {
            let (gi, gj) = (&negative[a], &negative[b]);
            let l: Vec<i64> = (0..hom.len()).map(|c| gi[c] + gj[c] + hom[c]).collect();
            let neg = |g: &Vec<i64>| -> Vec<i64> { g.iter().map(|x| -x).collect() };
            let b1: Vec<&Vec<i64>> = pos
                .iter()
                .filter(|r| root_grade(rs, r, crossed) == neg(gi))
                .collect();
            let b2: Vec<&Vec<i64>> = pos
                .iter()
                .filter(|r| root_grade(rs, r, crossed) == neg(gj))
                .collect();
            let mut gammas: Vec<&Vec<i64>> = graded
                .iter()
                .filter(|(g, _)| *g == l)
                .map(|(_, r)| r)
                .collect();
            if l.iter().all(|x| *x == 0) {
                gammas.push(&zero);
            }
            let hit = b1.iter().any(|x| {
                b2.iter().any(|y| {
                    x != y
                        && gammas.iter().any(|g| {
                            (0..n).all(|c| x[c] + y[c] + g[c] == target[c])
                        })
                })
            });
            if hit {
                // larger degree first
                found.push(Housing {
                    i: gj.clone(),
                    j: gi.clone(),
                    k: hom.to_vec(),
                });
            }
        }
    }
    match found.len() {
        0 => Err(KostantError::NoHousing),
        1 => Ok(found.pop().expect("one candidate")),
        k => Err(KostantError::AmbiguousHousing(k)),
    }
}

pub fn h2(n: usize, parabolic: Parabolic) -> Result<Vec<H2Component>, KostantError> {
    let reg = VariantRegistry::default();
    h2_with(n, reg.get(variant_name(parabolic))?)
}

pub fn h2_with(n: usize, variant: &dyn ParabolicVariant) -> Result<Vec<H2Component>, KostantError> {
    if n < 3 {
        return Err(KostantError::Unsupported(n));
    }
    let rs = build_root_system(n)?;
    let crossed = variant.crossed();
    let words: Vec<WeylWord> = rs
        .hasse_words(crossed, 2)?
        .into_iter()
        .filter(|w| w.len() == 2)
        .collect();
    let mut out = Vec::with_capacity(words.len());
    for w in words {
        let mu = rs.affine_action(&w, &Weight::adjoint(n))?;
        let labels = Weight::new(variant.dual_labels(&mu.coeffs));
        let hom = integral_homogeneity(&rs, &labels, crossed)?;
        let housing = housing(&rs, crossed, &mu, &hom)?;
        out.push(H2Component {
            labels,
            homogeneity: hom,
            housing,
            word: w,
            cohomology_weight: mu,
        });
    }
    out.sort_by_key(|c| (c.total_homogeneity(), c.homogeneity[0]));
    Ok(out)
}

/// Components that regularity rules out: total homogeneity at most zero.
pub fn killed_by_regularity(components: &[H2Component]) -> Vec<&H2Component> {
    components
        .iter()
        .filter(|c| c.total_homogeneity() <= 0)
        .collect()
}

/// Human-readable table, one component per line.
pub fn format_table(components: &[H2Component]) -> String {
    let mut s = String::from("labels | homogeneity | contained in\n");
    for c in components {
        let labels: Vec<String> = c.labels.coeffs.iter().map(|x| x.to_string()).collect();
        let hom: Vec<String> = c.homogeneity.iter().map(|x| x.to_string()).collect();
        s.push_str(&format!(
            "({}) | ({}) | {}\n",
            labels.join(","),
            hom.join(","),
            c.housing.describe()
        ));
    }
    s
}
