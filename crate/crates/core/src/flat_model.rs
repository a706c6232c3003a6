//! The flat model: left-invariant frame and coframe on P(H) in exponential
//! coordinates, the Maurer-Cartan identity, the (p, q) chart frame, and the
//! multicontact structure on the isotropic Grassmannians Q_k.

use std::collections::BTreeMap;

use num_traits::Zero;
use thiserror::Error;

use crate::coeff::Coeff;
use crate::field::{Form, VectorField};
use crate::graded_sp::{gminus_elements, standard_omega, GradedLieAlgebra};
use crate::linalg::{q, qf, QMatrix, Q};
use crate::poly::Poly;

pub type VF = VectorField<Poly>;
pub type OneForm = Form<Poly>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlatError {
    #[error("n = {0} is not supported (need n >= 3)")]
    UnsupportedDimension(usize),
    #[error("k = {k} out of range for n = {n}")]
    KOutOfRange { n: usize, k: usize },
    #[error("s = {s} is invalid for k = {k} (need s <= k with k - s even)")]
    InvalidOrbit { k: usize, s: usize },
}

/// Exponential coordinates (x^inf, x^0, x^1..x^m, z, u^0, u^1..u^m) on P(H).
#[derive(Clone, Debug)]
pub struct Chart {
    pub n: usize,
    pub m: usize,
    pub omega: QMatrix,
}

impl Chart {
    pub fn new(n: usize) -> Result<Self, FlatError> {
        if n < 3 {
            return Err(FlatError::UnsupportedDimension(n));
        }
        let m = 2 * n - 4;
        Ok(Chart {
            n,
            m,
            omega: standard_omega(m),
        })
    }

    pub fn dim(&self) -> usize {
        2 * self.m + 4
    }
    pub fn x_inf(&self) -> usize {
        0
    }
    pub fn x0(&self) -> usize {
        1
    }
    /// x^i, i = 1..m
    pub fn x(&self, i: usize) -> usize {
        1 + i
    }
    pub fn z(&self) -> usize {
        self.m + 2
    }
    pub fn u0(&self) -> usize {
        self.m + 3
    }
    /// u^i, i = 1..m
    pub fn u(&self, i: usize) -> usize {
        self.m + 3 + i
    }

    pub fn names(&self) -> Vec<String> {
        let mut v = vec!["x_inf".to_string(), "x0".to_string()];
        v.extend((1..=self.m).map(|i| format!("x{i}")));
        v.push("z".into());
        v.push("u0".into());
        v.extend((1..=self.m).map(|i| format!("u{i}")));
        v
    }

    fn w(&self, i: usize, j: usize) -> &Q {
        &self.omega[i - 1][j - 1]
    }

    fn var(&self, k: usize) -> Poly {
        Poly::var(k)
    }

    fn partial(&self, k: usize) -> VF {
        VF::partial(self.dim(), k)
    }

    /// sum_p omega_{ip} v^p for coordinate slots `slot(p)`.
    fn lowered(&self, i: usize, slot: impl Fn(usize) -> usize) -> Poly {
        let mut acc = Poly::zero();
        for p in 1..=self.m {
            let w = self.w(i, p);
            if !w.is_zero() {
                acc = acc.add(&self.var(slot(p)).scale(w));
            }
        }
        acc
    }

    /// X_I = d/dx^I + Omega_{IP} x^P d/dz, with Omega_{inf,0} = 1.
    pub fn x_field_inf(&self) -> VF {
        self.partial(self.x_inf()).with(self.z(), self.var(self.x0()))
    }

    pub fn x_field_0(&self) -> VF {
        self.partial(self.x0())
            .with(self.z(), self.var(self.x_inf()).neg())
    }

    pub fn x_field(&self, i: usize) -> VF {
        self.partial(self.x(i))
            .with(self.z(), self.lowered(i, |p| self.x(p)))
    }

    /// The left-invariant frame in g_- order:
    /// T_{-1,0}, A_1..A_m, T_{0,-2}, E_1..E_m, T_{-1,-2}, T_{-2,-2}.
    pub fn frame(&self) -> Vec<VF> {
        let m = self.m;
        let mut out = Vec::with_capacity(self.dim());
        let mut t = self.x_field_inf().add(&self.x_field_0().times(&self.var(self.u0())));
        for p in 1..=m {
            t = t.add(&self.x_field(p).times(&self.var(self.u(p))));
        }
        out.push(t);
        for i in 1..=m {
            out.push(
                self.partial(self.u(i))
                    .with(self.u0(), self.lowered(i, |p| self.u(p))),
            );
        }
        out.push(self.partial(self.u0()));
        for i in 1..=m {
            out.push(
                self.x_field(i)
                    .add(&self.x_field_0().times(&self.lowered(i, |p| self.u(p)))),
            );
        }
        out.push(self.x_field_0());
        out.push(self.partial(self.z()));
        out
    }

    /// omega_{pq} v^p dw^q
    fn omega_term(&self, v: impl Fn(usize) -> usize, w: impl Fn(usize) -> usize) -> OneForm {
        let mut f = OneForm::zero(1);
        for p in 1..=self.m {
            for qq in 1..=self.m {
                let c = self.w(p, qq);
                if !c.is_zero() {
                    f = f.add_term(&[w(qq)], self.var(v(p)).scale(c));
                }
            }
        }
        f
    }

    /// The contact form theta = dz + x^inf dx^0 - x^0 dx^inf + omega_{pq} x^p dx^q.
    pub fn contact_form(&self) -> OneForm {
        OneForm::dx(self.z())
            .add_term(&[self.x0()], self.var(self.x_inf()))
            .add_term(&[self.x_inf()], self.var(self.x0()).neg())
            .add(&self.omega_term(|p| self.x(p), |p| self.x(p)))
    }

    /// theta^{-1,-2} = dx^0 - u^0 dx^inf + omega_{pq} u^p dx^q
    pub fn theta_12(&self) -> OneForm {
        OneForm::dx(self.x0())
            .add_term(&[self.x_inf()], self.var(self.u0()).neg())
            .add(&self.omega_term(|p| self.u(p), |p| self.x(p)))
    }

    /// theta^{0,-2} = du^0 + omega_{pq} u^p du^q
    pub fn theta_02(&self) -> OneForm {
        OneForm::dx(self.u0()).add(&self.omega_term(|p| self.u(p), |p| self.u(p)))
    }

    /// eta^i = dx^i - u^i dx^inf
    pub fn eta(&self, i: usize) -> OneForm {
        OneForm::dx(self.x(i)).add_term(&[self.x_inf()], self.var(self.u(i)).neg())
    }

    /// The coframe dual to `frame`, in the same order.
    pub fn coframe(&self) -> Vec<OneForm> {
        let m = self.m;
        let mut out = vec![OneForm::dx(self.x_inf())];
        out.extend((1..=m).map(|i| OneForm::dx(self.u(i))));
        out.push(self.theta_02());
        out.extend((1..=m).map(|i| self.eta(i)));
        out.push(self.theta_12());
        out.push(self.contact_form());
        out
    }

    /// The (p, q) chart frame: q in the x^inf slot, p in the x^0 slot, contact
    /// form dz - p dq + (1/2) omega_{ij} x^i dx^j.
    pub fn pq_frame(&self) -> Vec<VF> {
        let m = self.m;
        let (qs, ps) = (self.x_inf(), self.x0());
        let half = qf(1, 2);
        let xi = |i: usize| {
            self.partial(self.x(i))
                .with(self.z(), self.lowered(i, |p| self.x(p)).scale(&half))
        };
        let mut out = Vec::with_capacity(self.dim());
        let mut t = self
            .partial(qs)
            .with(self.z(), self.var(ps))
            .with(ps, self.var(self.u0()));
        for p in 1..=m {
            t = t.add(&xi(p).times(&self.var(self.u(p))));
        }
        out.push(t);
        for i in 1..=m {
            out.push(
                self.partial(self.u(i))
                    .with(self.u0(), self.lowered(i, |p| self.u(p))),
            );
        }
        out.push(self.partial(self.u0()));
        for i in 1..=m {
            out.push(xi(i).with(ps, self.lowered(i, |p| self.u(p))));
        }
        out.push(self.partial(ps));
        out.push(self.partial(self.z()).scale(&half));
        out
    }
}

/// Coframe evaluated on frame: entry (a, b) = theta^a(F_b).
pub fn coframe_pairing(chart: &Chart) -> Vec<Vec<Poly>> {
    let frame = chart.frame();
    chart
        .coframe()
        .iter()
        .map(|th| frame.iter().map(|f| th.on(&[f])).collect())
        .collect()
}

/// Pairs (a, b) whose bracket differs from the constant combination given by
/// the structure constants of g_-.
pub fn frame_bracket_mismatches(frame: &[VF], alg: &GradedLieAlgebra) -> Vec<(usize, usize)> {
    let sc = alg.gminus_structure();
    let d = frame.len();
    let mut bad = Vec::new();
    for a in 0..d {
        for b in a..d {
            let lhs = frame[a].bracket(&frame[b]);
            let mut rhs = VF::zero(lhs.dim());
            for (k, c) in sc[a][b].iter().enumerate() {
                if !c.is_zero() {
                    rhs = rhs.add(&frame[k].scale(c));
                }
            }
            if !lhs.sub(&rhs).is_zero() {
                bad.push((a, b));
            }
        }
    }
    bad
}

/// dTheta + Theta ^ Theta for the g_--valued coframe matrix.
pub fn maurer_cartan_residual_with(chart: &Chart, coframe: &[OneForm]) -> Vec<Vec<Form<Poly>>> {
    let basis = gminus_elements(&chart.omega);
    let size = chart.m + 4;
    let dim = chart.dim();
    let mut theta: Vec<Vec<OneForm>> = vec![vec![OneForm::zero(1); size]; size];
    for (k, b) in basis.iter().enumerate() {
        for r in 0..size {
            for c in 0..size {
                let e = &b.matrix[r][c];
                if !e.is_zero() {
                    theta[r][c] = theta[r][c].add(&coframe[k].scale(e));
                }
            }
        }
    }
    (0..size)
        .map(|r| {
            (0..size)
                .map(|c| {
                    let mut acc = theta[r][c].d(dim);
                    for s in 0..size {
                        if theta[r][s].is_zero() || theta[s][c].is_zero() {
                            continue;
                        }
                        acc = acc.add(&theta[r][s].wedge(&theta[s][c]));
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn maurer_cartan_residual(chart: &Chart) -> Vec<Vec<Form<Poly>>> {
    maurer_cartan_residual_with(chart, &chart.coframe())
}

/// Coframe with theta^{0,-2} replaced by du^0 (a deliberately wrong coframe).
pub fn perturbed_coframe(chart: &Chart) -> Vec<OneForm> {
    let mut cf = chart.coframe();
    cf[chart.m + 1] = OneForm::dx(chart.u0());
    cf
}

pub fn residual_is_zero(res: &[Vec<Form<Poly>>]) -> bool {
    res.iter().all(|row| row.iter().all(Form::is_zero))
}

/// Coordinates x_alpha^p (alpha = 1..k, p = 1..r, r = 2(n - k)) and y_{alpha beta}
/// (alpha <= beta) on the isotropic Grassmannian Q_k.
#[derive(Clone, Debug)]
pub struct QkModel {
    pub n: usize,
    pub k: usize,
    pub r: usize,
    pub omega: QMatrix,
    /// theta_{alpha beta}, keyed by (alpha, beta) with alpha <= beta (1-based).
    pub theta: BTreeMap<(usize, usize), OneForm>,
    /// Omega_{alpha beta} = d theta_{alpha beta}.
    pub big_omega: BTreeMap<(usize, usize), Form<Poly>>,
    /// x_fields[alpha-1][i-1] = X_i^alpha
    pub x_fields: Vec<Vec<VF>>,
}

impl QkModel {
    pub fn dim(&self) -> usize {
        self.k * self.r + self.k * (self.k + 1) / 2
    }

    pub fn x(&self, alpha: usize, p: usize) -> usize {
        (alpha - 1) * self.r + (p - 1)
    }

    pub fn y(&self, alpha: usize, beta: usize) -> usize {
        let (a, b) = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
        // row-major over a <= b
        let before: usize = (1..a).map(|t| self.k - t + 1).sum();
        self.k * self.r + before + (b - a)
    }

    /// V^{alpha beta}: the symmetric-coordinate derivative, so that
    /// dy_{ab}(V^{cd}) = (delta_a^c delta_b^d + delta_a^d delta_b^c) / 2.
    pub fn v_field(&self, alpha: usize, beta: usize) -> VF {
        let f = VF::partial(self.dim(), self.y(alpha, beta));
        if alpha == beta {
            f
        } else {
            f.scale(&qf(1, 2))
        }
    }

    pub fn theta(&self, alpha: usize, beta: usize) -> &OneForm {
        let key = if alpha <= beta { (alpha, beta) } else { (beta, alpha) };
        &self.theta[&key]
    }

    pub fn big_omega(&self, alpha: usize, beta: usize) -> Form<Poly> {
        if alpha <= beta {
            self.big_omega[&(alpha, beta)].clone()
        } else {
            self.big_omega[&(beta, alpha)].clone()
        }
    }

    /// Psi = eps^{a} eps^{b} Omega_{a1 b1} ^ ... ^ Omega_{ak bk}.
    pub fn psi(&self) -> Form<Poly> {
        let perms = permutations(self.k);
        let mut out = Form::zero(2 * self.k);
        for (sa, pa) in &perms {
            for (sb, pb) in &perms {
                let mut f = Form::function(Poly::one());
                for l in 0..self.k {
                    f = f.wedge(&self.big_omega(pa[l] + 1, pb[l] + 1));
                    if f.is_zero() {
                        break;
                    }
                }
                out = out.add(&f.scale(&q(sa * sb)));
            }
        }
        out
    }
}

fn permutations(k: usize) -> Vec<(i64, Vec<usize>)> {
    fn rec(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                cur.push(i);
                rec(cur, used, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut all = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut all);
    all.into_iter()
        .map(|p| {
            let mut inv = 0;
            for a in 0..p.len() {
                for b in a + 1..p.len() {
                    if p[a] > p[b] {
                        inv += 1;
                    }
                }
            }
            (if inv % 2 == 0 { 1 } else { -1 }, p)
        })
        .collect()
}

pub fn qk_forms(n: usize, k: usize) -> Result<QkModel, FlatError> {
    if k == 0 || k >= n {
        return Err(FlatError::KOutOfRange { n, k });
    }
    let r = 2 * (n - k);
    let omega = standard_omega(r);
    let mut model = QkModel {
        n,
        k,
        r,
        omega,
        theta: BTreeMap::new(),
        big_omega: BTreeMap::new(),
        x_fields: Vec::new(),
    };
    let dim = model.dim();
    let half = qf(1, 2);
    for a in 1..=k {
        for b in a..=k {
            let mut th = OneForm::dx(model.y(a, b));
            for p in 1..=r {
                for qq in 1..=r {
                    let w = model.omega[p - 1][qq - 1].clone();
                    if w.is_zero() {
                        continue;
                    }
                    let c = &w * &half;
                    th = th
                        .add_term(&[model.x(b, qq)], Poly::var(model.x(a, p)).scale(&c))
                        .add_term(&[model.x(a, qq)], Poly::var(model.x(b, p)).scale(&c));
                }
            }
            model.big_omega.insert((a, b), th.d(dim));
            model.theta.insert((a, b), th);
        }
    }
    let mut fields = Vec::with_capacity(k);
    for a in 1..=k {
        let mut row = Vec::with_capacity(r);
        for i in 1..=r {
            let mut f = VF::partial(dim, model.x(a, i));
            for s in 1..=k {
                let mut coef = Poly::zero();
                for p in 1..=r {
                    let w = &model.omega[i - 1][p - 1];
                    if !w.is_zero() {
                        coef = coef.add(&Poly::var(model.x(s, p)).scale(w));
                    }
                }
                if !coef.is_zero() {
                    f = f.add(&model.v_field(s, a).times(&coef));
                }
            }
            row.push(f);
        }
        fields.push(row);
    }
    model.x_fields = fields;
    Ok(model)
}

/// Checks theta_{ab}(X_i^c) = 0 for all indices.
pub fn x_fields_span_kernel(model: &QkModel) -> bool {
    model.theta.values().all(|th| {
        model
            .x_fields
            .iter()
            .flatten()
            .all(|x| th.on(&[x]).is_zero())
    })
}

/// Checks [X_i^a, X_j^b] = -2 omega_ij V^{ab} and that V commutes with everything.
pub fn qk_brackets_hold(model: &QkModel) -> bool {
    let (k, r) = (model.k, model.r);
    for a in 1..=k {
        for i in 1..=r {
            for b in 1..=k {
                for j in 1..=r {
                    let lhs = model.x_fields[a - 1][i - 1].bracket(&model.x_fields[b - 1][j - 1]);
                    let rhs = model.v_field(a, b).scale(&(q(-2) * &model.omega[i - 1][j - 1]));
                    if !lhs.sub(&rhs).is_zero() {
                        return false;
                    }
                }
                for c in 1..=k {
                    let v = model.v_field(b, c);
                    if !model.x_fields[a - 1][i - 1].bracket(&v).is_zero() {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// y_{ab} - y_{ba} on the isotropy constraint, for y = z + sign * (1/2) omega x_a x_b.
/// Returns true when the difference vanishes identically, i.e. y is symmetric.
pub fn isotropy_consistent(n: usize, k: usize, sign: i64) -> Result<bool, FlatError> {
    if k == 0 || k > n {
        return Err(FlatError::KOutOfRange { n, k });
    }
    let r = 2 * (n - k);
    let omega = standard_omega(r);
    // variables: x_a^p then z_ab for all ordered (a, b)
    let xv = |a: usize, p: usize| Poly::var((a - 1) * r + (p - 1));
    let zv = |a: usize, b: usize| Poly::var(k * r + (a - 1) * k + (b - 1));
    let wxx = |a: usize, b: usize| {
        let mut acc = Poly::zero();
        for p in 1..=r {
            for qq in 1..=r {
                let w = &omega[p - 1][qq - 1];
                if !w.is_zero() {
                    acc = acc.add(&xv(a, p).mul(&xv(b, qq)).scale(w));
                }
            }
        }
        acc
    };
    let half = qf(sign, 2);
    for a in 1..=k {
        for b in 1..=k {
            // eliminate z_ba using z_ab - z_ba + omega x_a x_b = 0
            let z_ba = zv(a, b).add(&wxx(a, b));
            let y_ab = zv(a, b).add(&wxx(a, b).scale(&half));
            let y_ba = z_ba.add(&wxx(b, a).scale(&half));
            if !y_ab.sub(&y_ba).is_zero() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Rank of C + [C, C] at a point; equals dim Q_k when C is 1-step bracket generating.
pub fn bracket_generating_rank(model: &QkModel, pt: &[Q]) -> usize {
    let fields: Vec<&VF> = model.x_fields.iter().flatten().collect();
    let mut vecs: Vec<Vec<Q>> = fields
        .iter()
        .map(|f| f.eval_exact(pt).expect("polynomial"))
        .collect();
    for a in 0..fields.len() {
        for b in a + 1..fields.len() {
            vecs.push(fields[a].bracket(fields[b]).eval_exact(pt).expect("polynomial"));
        }
    }
    crate::linalg::rank_of_vectors(&vecs)
}

/// Residuals of the E, F, J identities on Q_2, all of which should be zero matrices.
#[derive(Clone, Debug)]
pub struct EfjReport {
    pub relations: Vec<(String, bool)>,
}

impl EfjReport {
    pub fn all_pass(&self) -> bool {
        self.relations.iter().all(|(_, ok)| *ok)
    }
}

fn mm(a: &QMatrix, b: &QMatrix) -> QMatrix {
    crate::linalg::mat_mul(a, b)
}

pub fn efj_identity_check(n: usize) -> Result<EfjReport, FlatError> {
    let model = qk_forms(n, 2)?;
    let r = model.r;
    let d = 2 * r;
    let idx = |a: usize, i: usize| (a - 1) * r + (i - 1);
    // eta^{12} = 1
    let eta = |a: usize, b: usize| -> Q {
        match (a, b) {
            (1, 2) => q(1),
            (2, 1) => q(-1),
            _ => q(0),
        }
    };
    let mut g = crate::linalg::zeros(d, d);
    for a in 1..=2 {
        for i in 1..=r {
            for b in 1..=2 {
                for j in 1..=r {
                    g[idx(a, i)][idx(b, j)] = eta(a, b) * &model.omega[i - 1][j - 1];
                }
            }
        }
    }
    // endomorphisms as matrices acting on coordinate columns: column c = image of basis c
    let mut e = crate::linalg::zeros(d, d);
    let mut f = crate::linalg::zeros(d, d);
    let mut j = crate::linalg::zeros(d, d);
    for i in 1..=r {
        e[idx(2, i)][idx(1, i)] = q(1);
        e[idx(1, i)][idx(2, i)] = q(1);
        f[idx(1, i)][idx(1, i)] = q(1);
        f[idx(2, i)][idx(2, i)] = q(-1);
        j[idx(2, i)][idx(1, i)] = q(1);
        j[idx(1, i)][idx(2, i)] = q(-1);
    }
    let id = crate::linalg::identity(d);
    let neg = |m: &QMatrix| crate::linalg::mat_scale(m, &q(-1));
    // g(A., .) as a bilinear form: entry (c, c') = g(A e_c, e_c') = (A^T g)[c][c']
    let ga = |a: &QMatrix| mm(&crate::linalg::transpose(a), &g);
    let pull = |a: &QMatrix| mm(&mm(&crate::linalg::transpose(a), &g), a);

    // Omega_{ab} restricted to C, evaluated on the X fields (constant coefficients)
    let fields: Vec<&VF> = model.x_fields.iter().flatten().collect();
    let origin = vec![q(0); model.dim()];
    let restricted = |a: usize, b: usize| -> QMatrix {
        let om = model.big_omega(a, b);
        (0..d)
            .map(|c1| {
                (0..d)
                    .map(|c2| {
                        om.on(&[fields[c1], fields[c2]])
                            .eval_exact(&origin)
                    })
                    .collect()
            })
            .collect()
    };
    let om11 = restricted(1, 1);
    let om12 = restricted(1, 2);
    let om21 = restricted(2, 1);
    let om22 = restricted(2, 2);
    let constant_on_c = [(1, 1), (1, 2), (2, 2)].iter().all(|&(a, b)| {
        let om = model.big_omega(a, b);
        fields.iter().all(|x| {
            fields
                .iter()
                .all(|y| om.on(&[*x, *y]).as_constant().is_some())
        })
    });
    let add = crate::linalg::mat_add;
    let sub = crate::linalg::mat_sub;
    let mut rel = vec![
        ("E^2 = I".to_string(), mm(&e, &e) == id),
        ("F^2 = I".to_string(), mm(&f, &f) == id),
        ("J^2 = -I".to_string(), mm(&j, &j) == neg(&id)),
        ("E F = J".to_string(), mm(&e, &f) == j),
        ("g(E., E.) = -g".to_string(), pull(&e) == neg(&g)),
        ("g(F., F.) = -g".to_string(), pull(&f) == neg(&g)),
        ("g(J., J.) = g".to_string(), pull(&j) == g),
        ("Omega restricted to C is constant".to_string(), constant_on_c),
        ("Omega_12 = g(F., .)".to_string(), om12 == ga(&f)),
        (
            "Omega_11 = -g(E., .) - g(J., .)".to_string(),
            om11 == neg(&add(&ga(&e), &ga(&j))),
        ),
        (
            "Omega_22 = g(E., .) - g(J., .)".to_string(),
            om22 == sub(&ga(&e), &ga(&j)),
        ),
    ];
    // Omega_b^a = eta^{ac} Omega_{bc}
    let raised = |a: usize, b: usize| -> QMatrix {
        let mut acc = crate::linalg::zeros(d, d);
        for c in 1..=2 {
            let s = eta(a, c);
            if !s.is_zero() {
                let om = match (b, c) {
                    (1, 1) => &om11,
                    (1, 2) => &om12,
                    (2, 1) => &om21,
                    _ => &om22,
                };
                acc = add(&acc, &crate::linalg::mat_scale(om, &s));
            }
        }
        acc
    };
    rel.push((
        "sl2-valued form matches the E, F, J table".to_string(),
        raised(1, 1) == ga(&f)
            && raised(1, 2) == sub(&ga(&e), &ga(&j))
            && raised(2, 1) == add(&ga(&e), &ga(&j))
            && raised(2, 2) == neg(&ga(&f)),
    ));
    Ok(EfjReport { relations: rel })
}

#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Dims {
    pub n: usize,
    pub k: usize,
    pub dim_qk: usize,
    pub corank: usize,
    pub rank_c: usize,
}

pub fn dims(n: usize, k: usize) -> Result<Dims, FlatError> {
    if k == 0 || k > n {
        return Err(FlatError::KOutOfRange { n, k });
    }
    let corank = k * (k + 1) / 2;
    let rank_c = 2 * k * (n - k);
    Ok(Dims {
        n,
        k,
        dim_qk: corank + rank_c,
        corank,
        rank_c,
    })
}

/// Dimension of the Sp(n) orbit Q_k^{k-s} in Gr(k, V).
pub fn orbit_dim(n: usize, k: usize, s: usize) -> Result<usize, FlatError> {
    if k == 0 || k > n {
        return Err(FlatError::KOutOfRange { n, k });
    }
    if s > k || !(k - s).is_multiple_of(2) {
        return Err(FlatError::InvalidOrbit { k, s });
    }
    Ok((s + 1) * s / 2 + 2 * s * (n - s) + (k - s) * (2 * n - k - s))
}

/// All admissible s for (n, k) with their orbit dimensions.
pub fn orbit_dims(n: usize, k: usize) -> Result<Vec<(usize, usize)>, FlatError> {
    let mut out = Vec::new();
    let mut s = k as i64;
    while s >= 0 {
        out.push((s as usize, orbit_dim(n, k, s as usize)?));
        s -= 2;
    }
    Ok(out)
}

/// Convenience for generic coefficient types.
pub fn pairing_is_identity<S: Coeff>(m: &[Vec<S>]) -> bool {
    m.iter().enumerate().all(|(a, row)| {
        row.iter().enumerate().all(|(b, c)| {
            let want = if a == b { S::one() } else { S::zero() };
            c.sub(&want).is_zero()
        })
    })
}
