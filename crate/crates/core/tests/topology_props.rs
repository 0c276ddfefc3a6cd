mod common;

use nalgebra::DMatrix;
use proptest::prelude::*;

use common::DenseComplex;
use scl_core::eval::{evaluate, nerr};
use scl_core::linalg::min_eigenvalue;
use scl_core::{ComplexSkeleton, Selection};

fn selection_strategy(n_max: usize) -> impl Strategy<Value = (usize, Vec<bool>, Vec<bool>)> {
    (3..=n_max).prop_flat_map(|n| {
        let e = n * (n - 1) / 2;
        let t = n * (n - 1) * (n - 2) / 6;
        (Just(n), prop::collection::vec(any::<bool>(), e), prop::collection::vec(any::<bool>(), t))
    })
}

fn closed(n: usize, w1: Vec<bool>, w2: Vec<bool>) -> (ComplexSkeleton, Selection) {
    let skel = ComplexSkeleton::new(n).unwrap();
    let mut sel = Selection { w1, w2 };
    sel.prune_unsupported_triangles(&skel);
    (skel, sel)
}

#[test]
fn skeleton_matches_dense_definition() {
    for n in 2..=9 {
        let skel = ComplexSkeleton::new(n).unwrap();
        let dense = DenseComplex::new(n);
        assert_eq!(skel.b1_full().map(|v| v as f64), dense.b1, "B1 at N={n}");
        assert_eq!(skel.b2_full().map(|v| v as f64), dense.b2, "B2 at N={n}");
        assert_eq!(skel.b2_unsigned().map(|v| v as f64), dense.b2.map(f64::abs));
    }
}

#[test]
fn full_incidence_product_vanishes() {
    for n in 2..=15 {
        let skel = ComplexSkeleton::new(n).unwrap();
        let p = skel.b1_full().map(|v| v as i64) * skel.b2_full().map(|v| v as i64);
        assert!(p.iter().all(|&v| v == 0), "N={n}");
    }
}

#[test]
fn supports_thirty_nodes() {
    let skel = ComplexSkeleton::new(30).unwrap();
    assert_eq!((skel.n_edges(), skel.n_triangles()), (435, 4060));
}

#[test]
fn random_flow_on_five_nodes_reconstructs() {
    let skel = ComplexSkeleton::new(5).unwrap();
    let mut r = common::rng(11);
    for _ in 0..20 {
        let mut sel = Selection {
            w1: common::random_mask(skel.n_edges(), 0.7, &mut r),
            w2: common::random_mask(skel.n_triangles(), 0.5, &mut r),
        };
        sel.prune_unsupported_triangles(&skel);
        if sel.n_active_edges() == 0 {
            continue;
        }
        let x = common::gaussian_matrix(sel.n_active_edges(), 1, &mut r).column(0).into_owned();
        let p = skel.hodge_decompose(&sel, &x).unwrap();
        let err = (&p.gradient + &p.curl + &p.harmonic - &x).norm() / x.norm();
        assert!(err <= 1e-8, "{err}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn restricted_incidences_compose_to_zero((n, w1, w2) in selection_strategy(8)) {
        let (skel, sel) = closed(n, w1, w2);
        let b1 = skel.restricted_b1(&sel).unwrap();
        let b2 = skel.restricted_b2(&sel).unwrap();
        let p = b1 * b2;
        prop_assert!(p.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn laplacians_are_well_formed((n, w1, w2) in selection_strategy(8)) {
        let skel = ComplexSkeleton::new(n).unwrap();
        let l0 = skel.node_laplacian(&w1).unwrap();
        for r in 0..n {
            prop_assert_eq!(l0.row(r).sum(), 0.0);
        }
        prop_assert_eq!(&l0, &l0.transpose());
        let lu = skel.upper_laplacian(&w2).unwrap();
        prop_assert!(min_eigenvalue(&lu) >= -1e-10);
        let dense = DenseComplex::new(n);
        prop_assert_eq!(l0, dense.l0(&w1));
        prop_assert_eq!(lu, dense.lu(&w2));
    }

    #[test]
    fn hodge_parts_are_orthogonal(
        (n, w1, w2) in selection_strategy(8),
        seed in any::<u64>(),
    ) {
        let (skel, sel) = closed(n, w1, w2);
        prop_assume!(sel.n_active_edges() > 0);
        let mut r = common::rng(seed);
        let x = common::gaussian_matrix(sel.n_active_edges(), 1, &mut r).column(0).into_owned();
        let p = skel.hodge_decompose(&sel, &x).unwrap();
        let s2 = x.norm_squared();
        prop_assert!((&p.gradient + &p.curl + &p.harmonic - &x).norm() <= 1e-8 * x.norm());
        prop_assert!(p.gradient.dot(&p.curl).abs() <= 1e-8 * s2);
        prop_assert!(p.gradient.dot(&p.harmonic).abs() <= 1e-8 * s2);
        prop_assert!(p.curl.dot(&p.harmonic).abs() <= 1e-8 * s2);

        let b1 = skel.restricted_b1(&sel).unwrap();
        let b2 = skel.restricted_b2(&sel).unwrap();
        if b2.ncols() > 0 {
            prop_assert!((b2.transpose() * &p.gradient).amax() <= 1e-10);
        }
        prop_assert!((b1 * &p.curl).amax() <= 1e-10);
    }

    #[test]
    fn indices_round_trip(n in 3usize..=20, a in 0usize..20, b in 0usize..20, c in 0usize..20) {
        let skel = ComplexSkeleton::new(n).unwrap();
        let mut v = [a % n, b % n, c % n];
        v.sort();
        if v[0] < v[1] {
            let l = skel.edge_index(v[0], v[1]).unwrap();
            prop_assert_eq!(skel.edges()[l], [v[0], v[1]]);
        }
        if v[0] < v[1] && v[1] < v[2] {
            let t = skel.triangle_index(v[0], v[1], v[2]).unwrap();
            prop_assert_eq!(skel.triangles()[t], v);
        } else {
            prop_assert!(skel.triangle_index(v[0], v[1], v[2]).is_err());
        }
    }

    #[test]
    fn nerr_is_permutation_invariant(n in 3usize..=7, seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let skel = ComplexSkeleton::new(n).unwrap();
        let d = DenseComplex::new(n);
        let wt = common::random_mask(skel.n_edges(), 0.5, &mut r);
        let we = common::random_mask(skel.n_edges(), 0.5, &mut r);
        prop_assume!(wt.iter().any(|&b| b));
        let (lt, le) = (d.l0(&wt), d.l0(&we));
        let perm = {
            use rand::seq::SliceRandom;
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut r);
            p
        };
        let pm = DMatrix::from_fn(n, n, |a, b| if perm[a] == b { 1.0 } else { 0.0 });
        let a = nerr(&le, &lt).unwrap();
        let b = nerr(&(&pm * &le * pm.transpose()), &(&pm * &lt * pm.transpose())).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        let direct = (&lt - &le).iter().map(|v| v * v).sum::<f64>() / lt.iter().map(|v| v * v).sum::<f64>();
        prop_assert!((a - direct).abs() <= 1e-12 * direct.max(1.0));
    }

    #[test]
    fn evaluating_truth_against_itself_is_ideal((n, w1, w2) in selection_strategy(7)) {
        let (skel, sel) = closed(n, w1, w2);
        let r = evaluate(&skel, &sel, &sel).unwrap();
        prop_assert!(r.nerr_l0.is_none_or(|v| v == 0.0));
        prop_assert!(r.nerr_lu.is_none_or(|v| v == 0.0));
        prop_assert_eq!(r.edge_precision, 1.0);
        prop_assert_eq!(r.edge_recall, 1.0);
        prop_assert_eq!(r.triangle_f1, 1.0);
        prop_assert_eq!(r.closure_violations, 0);
    }
}

#[test]
fn closure_count_matches_dense_penalty() {
    let mut r = common::rng(5);
    for n in 3..=7 {
        let skel = ComplexSkeleton::new(n).unwrap();
        let d = DenseComplex::new(n);
        for _ in 0..10 {
            let w1 = common::random_mask(skel.n_edges(), 0.5, &mut r);
            let w2 = common::random_mask(skel.n_triangles(), 0.4, &mut r);
            let rep = skel.closure_violations(&w1, &w2).unwrap();
            let total: usize = rep.offending.iter().map(|v| v.missing_edges).sum();
            assert_eq!(total as f64, d.closure_penalty(&w1, &w2));
            assert_eq!(rep.count, total);
        }
    }
}
