use pathgeom_core::graded_sp::{
    build, build_with_omega, standard_omega, AutomorphismParams, G0Element, GradedError,
    Parabolic, Rejection,
};
use pathgeom_core::linalg::{identity, mat_scale, q, qf, zeros, QMatrix, Q};
use num_traits::Zero;

#[test]
fn dimension_is_n_times_2n_plus_1() {
    for n in 3..=6 {
        let g = build(n, Parabolic::P12).unwrap();
        assert_eq!(g.dim(), n * (2 * n + 1));
        assert!(g.basis.iter().all(|b| g.in_sp(&b.matrix)));
    }
}

#[test]
fn n_two_is_refused() {
    assert_eq!(
        build(2, Parabolic::P12).unwrap_err(),
        GradedError::UnsupportedDimension(2)
    );
}

#[test]
fn nine_relations_hold() {
    for n in 3..=6 {
        let g = build(n, Parabolic::P12).unwrap();
        let r = g.verify_structure_constants();
        assert_eq!(r.total(), 9);
        assert!(r.all_pass(), "n={n}: {:?}", r.results);
    }
}

#[test]
fn nonstandard_omega_still_satisfies_relations() {
    let omega: QMatrix = vec![
        vec![q(0), q(2), q(1), q(0)],
        vec![q(-2), q(0), q(0), q(3)],
        vec![q(-1), q(0), q(0), q(-1)],
        vec![q(0), q(-3), q(1), q(0)],
    ];
    let g = build_with_omega(4, Parabolic::P12, Some(omega)).unwrap();
    assert!(g.verify_structure_constants().all_pass());
    let bad = vec![vec![q(0), q(1)], vec![q(1), q(0)]];
    assert!(build_with_omega(3, Parabolic::P12, Some(bad)).is_err());
}

#[test]
fn perturbed_structure_constant_is_detected() {
    let mut g = build(4, Parabolic::P12).unwrap();
    let k = g.index_of("t_{-1,-2}").unwrap();
    let m = g.basis[k].matrix.clone();
    g.basis[k].matrix = mat_scale(&m, &q(2));
    let r = g.verify_structure_constants();
    assert!(!r.all_pass());
}

#[test]
fn bigraded_dimensions() {
    let n = 5;
    let g = build(n, Parabolic::P12).unwrap();
    let d = g.bigraded_dims();
    assert_eq!(d[&(-1, 0)], 1);
    assert_eq!(d[&(0, -1)], 2 * n - 4);
    assert_eq!(d[&(-1, -1)], 2 * n - 4);
    assert_eq!(d[&(0, -2)], 1);
    assert_eq!(d[&(-1, -2)], 1);
    assert_eq!(d[&(-2, -2)], 1);
    // symmetric under negation
    for (k, v) in &d {
        assert_eq!(d[&(-k.0, -k.1)], *v);
    }
    assert!(g.grading_compatible().unwrap());
}

#[test]
fn contact_and_second_gradings() {
    let n = 4;
    let p1 = build(n, Parabolic::P1).unwrap().graded_dims();
    assert_eq!(p1[&vec![-2]], 1);
    assert_eq!(p1[&vec![-1]], 2 * n - 2);
    let p2 = build(n, Parabolic::P2).unwrap().graded_dims();
    assert_eq!(p2[&vec![-2]], 3);
    assert_eq!(p2[&vec![-1]], 4 * (n - 2));
}

#[test]
fn trace_form_pairs_opposite_degrees() {
    let g = build(3, Parabolic::P12).unwrap();
    for a in &g.basis {
        for b in &g.basis {
            let k = g.killing(&a.matrix, &b.matrix);
            if (a.bidegree.0 + b.bidegree.0, a.bidegree.1 + b.bidegree.1) != (0, 0) {
                assert!(k.is_zero(), "{} {}", a.name, b.name);
            }
        }
    }
}

fn sample_g0(m: usize, omega: &QMatrix) -> G0Element {
    // C = [[1, 1], [0, 1]] blocks on (x, y) pairs preserve the standard form
    let h = m / 2;
    let mut c = identity(m);
    c[0][h] = q(2);
    if h > 1 {
        c[1][h + 1] = qf(-1, 3);
    }
    G0Element::new(c, q(3), qf(1, 2), omega).unwrap()
}

#[test]
fn g0_action_matches_tabulated_scalings() {
    let n = 4;
    let m = 2 * n - 4;
    let g = build(n, Parabolic::P12).unwrap();
    let el = sample_g0(m, &g.omega);
    let (c, d) = (el.c.clone(), el.d.clone());
    let one = Q::from_integer(1.into());
    let coords = |name: &str| g.adjoint_g0(&el, g.element(name)).unwrap();
    let unit = |name: &str, s: Q| {
        let mut v = vec![Q::zero(); g.gminus_dim()];
        v[g.index_of(name).unwrap()] = s;
        v
    };
    assert_eq!(coords("t_{-2,-2}"), unit("t_{-2,-2}", &one / (&c * &c)));
    assert_eq!(coords("t_{-1,-2}"), unit("t_{-1,-2}", &one / (&c * &d)));
    assert_eq!(coords("t_{0,-2}"), unit("t_{0,-2}", &one / (&d * &d)));
    assert_eq!(coords("t_{-1,0}"), unit("t_{-1,0}", &d / &c));
    for i in 1..=m {
        let ai = coords(&format!("a_{i}"));
        let ei = coords(&format!("e_{i}"));
        for j in 1..=m {
            let cij = &el.big_c[i - 1][j - 1];
            assert_eq!(ai[g.index_of(&format!("a_{j}")).unwrap()], cij / &d);
            assert_eq!(ei[g.index_of(&format!("e_{j}")).unwrap()], cij / &c);
        }
    }
}

#[test]
fn g0_rejects_non_symplectic_c() {
    let omega = standard_omega(2);
    let c = vec![vec![q(2), q(0)], vec![q(0), q(1)]];
    assert!(G0Element::new(c, q(1), q(1), &omega).is_err());
    assert!(G0Element::new(identity(2), q(0), q(1), &omega).is_err());
}

#[test]
fn kernel_of_g0_action() {
    let g = build(3, Parabolic::P12).unwrap();
    let d = g.gminus_dim();
    let id = identity(d);
    let plus = G0Element::new(identity(2), q(1), q(1), &g.omega).unwrap();
    let minus = G0Element::new(mat_scale(&identity(2), &q(-1)), q(-1), q(-1), &g.omega).unwrap();
    assert_eq!(g.adjoint_g0_map(&plus).unwrap(), id);
    assert_eq!(g.adjoint_g0_map(&minus).unwrap(), id);
    // mismatched signs act nontrivially
    let mixed = G0Element::new(identity(2), q(-1), q(1), &g.omega).unwrap();
    assert_ne!(g.adjoint_g0_map(&mixed).unwrap(), id);
}

#[test]
fn automorphism_round_trip() {
    let n = 4;
    let m = 2 * n - 4;
    let g = build(n, Parabolic::P12).unwrap();
    let el = sample_g0(m, &g.omega);
    let ad = g.adjoint_g0_map(&el).unwrap();
    let params = g.solve_graded_automorphism(&ad).unwrap();
    assert!(params.is_conformally_symplectic(&g.omega));
    assert_eq!(g.automorphism_from_params(&params), ad);
    // b = 1/d^2 = 4 is a square, so the G0 element is recovered up to the kernel
    let back = params.to_g0().unwrap();
    assert_eq!(g.adjoint_g0_map(&back).unwrap(), ad);
}

#[test]
fn automorphism_solver_rejections() {
    let g = build(3, Parabolic::P12).unwrap();
    let d = g.gminus_dim();
    assert_eq!(
        g.solve_graded_automorphism(&zeros(d, d)).unwrap_err(),
        Rejection::NotInvertible
    );
    // scaling t alone breaks [a_i, t] = e_i
    let mut bad = identity(d);
    bad[0][0] = q(2);
    assert!(matches!(
        g.solve_graded_automorphism(&bad).unwrap_err(),
        Rejection::NotLieAutomorphism { .. }
    ));
    // mixing t with a_1 breaks the grading
    let mut mixed = identity(d);
    mixed[1][0] = q(1);
    assert!(g.solve_graded_automorphism(&mixed).is_err());
    // a valid parameter set is accepted
    let p = AutomorphismParams {
        a: q(2),
        b: q(3),
        big_a: vec![vec![q(3), q(0)], vec![q(0), q(1)]],
    };
    let map = g.automorphism_from_params(&p);
    assert_eq!(g.solve_graded_automorphism(&map).unwrap(), p);
    assert!(p.to_g0().is_none());
}

#[test]
fn printed_recovery_recipe_needs_a_squared_one() {
    // d = b^{-1/2}, c = d a, C = c a A only matches when a = +-1
    let g = build(3, Parabolic::P12).unwrap();
    let p = AutomorphismParams {
        a: q(2),
        b: q(4),
        big_a: mat_scale(&identity(2), &q(2)),
    };
    let target = g.automorphism_from_params(&p);
    let d = qf(1, 2);
    let c = &d * &p.a;
    let printed = G0Element::new(mat_scale(&p.big_a, &(&c * &p.a)), c, d, &g.omega);
    if let Ok(el) = printed {
        assert_ne!(g.adjoint_g0_map(&el).unwrap(), target);
    }
    let ours = p.to_g0().unwrap();
    assert_eq!(g.adjoint_g0_map(&ours).unwrap(), target);
}
