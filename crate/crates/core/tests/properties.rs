use hyperpolygon::branes::{fixed_locus_check, sign_involution};
use hyperpolygon::geometry::{polygon_sides, residue_sum_check};
use hyperpolygon::io::{to_json_string, RepresentationDoc};
use hyperpolygon::moment::{blocks_from_moments, hyperpolygon_blocks, hyperpolygon_residual, real_moment};
use hyperpolygon::quiver::{count_gt_hamiltonians, dim_polygon_space, CometQuiver};
use hyperpolygon::rep::{
    apply_gauge, circle_action, quaternion_apply, random_representation, GaugeElement, Quaternion,
};
use hyperpolygon::solver::{solve, SolveOptions};
use proptest::prelude::*;

/// Based quivers with rank 2 or 3, up to three arms and two loops.
fn quiver() -> impl Strategy<Value = CometQuiver> {
    (2usize..=3, 0usize..=3, 0usize..=2).prop_filter("need an arm or a loop", |(_, n, g)| n + g > 0).prop_flat_map(
        |(r, n, g)| {
            let arm = if r == 2 {
                Just(vec![1, 2]).boxed()
            } else {
                prop_oneof![Just(vec![1, 2, 3]), Just(vec![1, 3])].boxed()
            };
            prop::collection::vec(arm, n).prop_map(move |arms| CometQuiver::with_rank(r, arms, g, None).unwrap())
        },
    )
}

fn levels(n: usize, seed: u64) -> Vec<f64> {
    (0..n).map(|i| 1.0 + 0.37 * ((seed as usize + i) % 5) as f64).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn residual_is_unitary_gauge_invariant(q in quiver(), seed in 0u64..1000) {
        let rep = random_representation(&q, seed, 1.0);
        let alpha = levels(q.n_arms(), seed);
        let moved = apply_gauge(&q, &rep, &GaugeElement::random_unitary(&q, seed + 1)).unwrap();
        let a = hyperpolygon_residual(&q, &rep, &alpha).unwrap().aggregate;
        let b = hyperpolygon_residual(&q, &moved, &alpha).unwrap().aggregate;
        prop_assert!((a - b).abs() < 1e-11 * (1.0 + a));
    }

    #[test]
    fn residual_is_circle_invariant(q in quiver(), seed in 0u64..1000, theta in -7.0f64..7.0) {
        let rep = random_representation(&q, seed, 1.0);
        let alpha = levels(q.n_arms(), seed);
        let a = hyperpolygon_residual(&q, &rep, &alpha).unwrap().aggregate;
        let b = hyperpolygon_residual(&q, &circle_action(&rep, theta), &alpha).unwrap().aggregate;
        prop_assert!((a - b).abs() < 1e-12 * (1.0 + a));
    }

    #[test]
    fn direct_and_assembled_residuals_agree(q in quiver(), seed in 0u64..1000) {
        let rep = random_representation(&q, seed, 1.0);
        let alpha = levels(q.n_arms(), seed);
        let d = hyperpolygon_blocks(&q, &rep, &alpha).unwrap();
        let m = blocks_from_moments(&q, &rep, &alpha).unwrap();
        prop_assert!(d.max_abs_diff(&m) < 1e-13);
    }

    #[test]
    fn quaternion_relations(q in quiver(), seed in 0u64..1000) {
        let v = random_representation(&q, seed, 1.0);
        let ij = quaternion_apply(&quaternion_apply(&v, Quaternion::J), Quaternion::I);
        prop_assert_eq!(ij, quaternion_apply(&v, Quaternion::K));
        for s in Quaternion::ALL {
            let twice = quaternion_apply(&quaternion_apply(&v, s), s);
            prop_assert!(twice.add(&v).norm() == 0.0);
        }
    }

    #[test]
    fn involution_fixes_exactly_the_polygon_locus(q in quiver(), seed in 0u64..1000) {
        let v = random_representation(&q, seed, 1.0);
        prop_assert_eq!(sign_involution(&sign_involution(&v)), v.clone());
        let p = v.positions_only();
        prop_assert_eq!(sign_involution(&p), p.clone());
        prop_assert!(fixed_locus_check(&p, 1e-14));
        prop_assert_eq!(sign_involution(&v) == v, fixed_locus_check(&v, 0.0) || v.momentum_norm() == 0.0);
    }

    #[test]
    fn closure_defect_matches_central_moment(q in quiver(), seed in 0u64..1000) {
        let v = random_representation(&q, seed, 1.0);
        let fig = polygon_sides(&q, &v).unwrap();
        let mu = real_moment(&q, &v).unwrap();
        let central = hyperpolygon::linalg::frob(&mu.central);
        prop_assert!((fig.closure_defect - central).abs() < 1e-12 * (1.0 + central));
    }

    #[test]
    fn representation_json_round_trip(q in quiver(), seed in 0u64..1000, scale in 1e-6f64..1e6) {
        let v = random_representation(&q, seed, scale);
        let text = to_json_string(&RepresentationDoc::from_rep(&v), false).unwrap();
        let back: RepresentationDoc = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back.to_rep(&q).unwrap(), v);
    }

    #[test]
    fn tally_matches_polygon_dimension(r in 2usize..6, c in 0usize..5, m in 0usize..5, g in 0usize..3) {
        prop_assume!(c + m + g > 0);
        let arms: Vec<Vec<usize>> =
            (0..c).map(|_| (1..=r).collect()).chain((0..m).map(|_| vec![1, r])).collect();
        let q = CometQuiver::with_rank(r, arms, g, None).unwrap();
        prop_assert_eq!(count_gt_hamiltonians(&q).unwrap(), dim_polygon_space(&q));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn solved_points_stay_solved_under_symmetries(seed in 0u64..1000) {
        let q = CometQuiver::minimal(2, 4, 1).unwrap();
        let alpha = levels(4, seed);
        let sol = solve(&q, &alpha, &SolveOptions { seed, ..Default::default() }).unwrap();
        let rep = sol.representation;
        for moved in [sign_involution(&rep), circle_action(&rep, 0.7), apply_gauge(&q, &rep, &GaugeElement::random_unitary(&q, seed)).unwrap()] {
            prop_assert!(hyperpolygon_residual(&q, &moved, &alpha).unwrap().aggregate < 1e-10);
        }
        prop_assert!(residue_sum_check(&q, &rep).unwrap() < 1e-10);
    }
}
