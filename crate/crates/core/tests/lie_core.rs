use pathgeom_core::lie_core::{build_root_system, is_positive_eps, LieError, Weight, WeylWord};
use pathgeom_core::linalg::q;
use proptest::prelude::*;

#[test]
fn cartan_matrix_rank_two() {
    let rs = build_root_system(2).unwrap();
    assert_eq!(rs.cartan, vec![vec![2, -1], vec![-2, 2]]);
}

#[test]
fn rank_one_is_rejected() {
    assert_eq!(build_root_system(1).unwrap_err(), LieError::InvalidRank(1));
}

#[test]
fn positive_root_count_is_n_squared() {
    for n in 2..=7 {
        let rs = build_root_system(n).unwrap();
        let roots = rs.positive_roots();
        assert_eq!(roots.len(), n * n);
        assert!(roots.iter().all(|r| is_positive_eps(r)));
    }
}

#[test]
fn weyl_group_order_by_exhaustion() {
    // |W(C_n)| = 2^n n!, the longest element has length n^2
    let rs = build_root_system(3).unwrap();
    let mut lengths = std::collections::HashMap::new();
    let mut frontier = vec![WeylWord::identity()];
    let mut seen = std::collections::HashSet::new();
    seen.insert(rs.signed_permutation(&WeylWord::identity()).unwrap());
    while let Some(w) = frontier.pop() {
        let l = rs.reduced_length(&w).unwrap();
        *lengths.entry(l).or_insert(0) += 1;
        for j in 1..=3 {
            let c = w.concat(&WeylWord::new(vec![j]));
            if seen.insert(rs.signed_permutation(&c).unwrap()) {
                frontier.push(c);
            }
        }
    }
    assert_eq!(seen.len(), 48);
    assert_eq!(lengths.keys().max(), Some(&9));
    assert_eq!(lengths[&9], 1);
}

#[test]
fn reflections_are_involutions_and_fix_rho_shift() {
    let rs = build_root_system(4).unwrap();
    let lam = Weight::new(vec![3, -1, 2, 5]);
    for i in 1..=4 {
        let s = rs.reflect(&lam, i).unwrap();
        assert_eq!(rs.reflect(&s, i).unwrap(), lam);
    }
    // s_i . (-rho) = -rho
    let minus_rho = rs.rho.neg();
    for i in 1..=4 {
        let w = WeylWord::new(vec![i]);
        assert_eq!(rs.affine_action(&w, &minus_rho).unwrap(), minus_rho);
    }
}

#[test]
fn grading_of_simple_roots() {
    let rs = build_root_system(5).unwrap();
    for i in 1..=5 {
        for node in 1..=5 {
            let g = rs.grade_eps(&rs.simple_roots[i - 1], node).unwrap();
            assert_eq!(g, q(if i == node { 1 } else { 0 }));
        }
    }
    // highest root 2e_1 = 2(a_1 + .. + a_4) + a_5
    let mut hr = vec![0; 5];
    hr[0] = 2;
    assert_eq!(rs.grade_eps(&hr, 1).unwrap(), q(2));
    assert_eq!(rs.grade_eps(&hr, 5).unwrap(), q(1));
    assert_eq!(rs.grade_eps(&hr, 2).unwrap(), q(2));
}

#[test]
fn hasse_diagram_sizes() {
    // |W^p| = |W| / |W_levi|; for P1 of C_3 the quotient has 6 elements,
    // for P12 of C_3 the Levi is <s_3>, so 48 / 2 = 24.
    let rs = build_root_system(3).unwrap();
    assert_eq!(rs.hasse_words(&[1], 9).unwrap().len(), 6);
    let p12 = rs.hasse_words(&[1, 2], 9).unwrap();
    assert_eq!(p12.len(), 24);
    assert_eq!(p12.iter().filter(|w| w.len() == 1).count(), 2);
    assert_eq!(p12.iter().filter(|w| w.len() == 2).count(), 3);
    assert_eq!(rs.hasse_words(&[], 2).unwrap_err(), LieError::EmptyParabolic);
}

#[test]
fn out_of_range_index() {
    let rs = build_root_system(3).unwrap();
    assert_eq!(
        rs.reflect(&Weight::zero(3), 4).unwrap_err(),
        LieError::IndexOutOfRange { index: 4, n: 3 }
    );
}

proptest! {
    #[test]
    fn weyl_action_preserves_norm(
        n in 2usize..7,
        coeffs in proptest::collection::vec(-5i64..6, 7),
        letters in proptest::collection::vec(1usize..8, 0..10),
    ) {
        let rs = build_root_system(n).unwrap();
        let lam = Weight::new(coeffs[..n].to_vec());
        let w = WeylWord::new(letters.into_iter().map(|l| 1 + (l - 1) % n).collect());
        let img = rs.apply_word(&w, &lam).unwrap();
        prop_assert_eq!(img.norm2_eps(), lam.norm2_eps());
        // the fundamental-basis and epsilon-basis actions agree
        prop_assert_eq!(img.to_eps(), rs.apply_word_eps(&w, &lam.to_eps()).unwrap());
        prop_assert_eq!(Weight::from_eps(&img.to_eps()), img);
    }

    #[test]
    fn length_is_bounded_and_parity_matches(
        n in 2usize..5,
        letters in proptest::collection::vec(1usize..5, 0..8),
    ) {
        let rs = build_root_system(n).unwrap();
        let w = WeylWord::new(letters.into_iter().map(|l| 1 + (l - 1) % n).collect());
        let l = rs.reduced_length(&w).unwrap();
        prop_assert!(l <= w.len());
        prop_assert_eq!(l % 2, w.len() % 2);
        prop_assert_eq!(rs.reduced_length(&w.inverse()).unwrap(), l);
    }
}
