use approx::assert_relative_eq;
use bregman_lab::actions::{ActionSpec, GeneratorMap};
use bregman_lab::bregman::{self, Generator, GeneratorKind};
use bregman_lab::classify::{self, ClassifyConfig};
use bregman_lab::matrix::{matrix_divergence, MatrixKind, PdMatrix};
use bregman_lab::means::{self, ApproximateMean};
use bregman_lab::numeric::{self, CompensatedSum};
use bregman_lab::projection::{self, ProjectionOptions};
use bregman_lab::semigroup::{IndexBox, SemigroupElement};
use bregman_lab::sets::{self, ConvexSet};
use proptest::prelude::*;

fn vec3(lo: f64, hi: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(lo..hi, 3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distances_are_nonnegative_and_vanish_on_the_diagonal(
        kind in prop::sample::select(GeneratorKind::ALL.to_vec()),
        x in vec3(0.05, 4.0),
        y in vec3(0.05, 4.0),
    ) {
        let g = Generator::new(kind, 3).unwrap();
        prop_assert!(bregman::bregman_distance(&g, &x, &y).unwrap() >= -1e-12);
        prop_assert!(bregman::bregman_distance(&g, &x, &x).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn three_point_identity_holds(
        kind in prop::sample::select(GeneratorKind::ALL.to_vec()),
        x in vec3(0.05, 4.0),
        y in vec3(0.05, 4.0),
        z in vec3(0.05, 4.0),
    ) {
        let g = Generator::new(kind, 3).unwrap();
        let t = bregman::three_point_terms(&g, &x, &y, &z).unwrap();
        prop_assert!(t.residual().abs() <= 1e-10 * (1.0 + t.scale()));
    }

    #[test]
    fn squared_norm_distance_is_squared_euclidean(x in vec3(-3.0, 3.0), y in vec3(-3.0, 3.0)) {
        let d = bregman::bregman_distance(&Generator::sq_norm(3), &x, &y).unwrap();
        assert_relative_eq!(d, numeric::dist(&x, &y).powi(2), epsilon = 1e-12, max_relative = 1e-12);
    }

    #[test]
    fn diagonal_matrices_match_the_vector_generators(a in vec3(0.1, 3.0), b in vec3(0.1, 3.0)) {
        let (ma, mb) = (PdMatrix::diagonal(&a).unwrap(), PdMatrix::diagonal(&b).unwrap());
        let g = Generator::new(GeneratorKind::MatClassical, 3).unwrap();
        let closed = matrix_divergence(MatrixKind::Classical, &ma, &mb).unwrap();
        assert_relative_eq!(closed, bregman::bregman_distance(&g, &a, &b).unwrap(), epsilon = 1e-10, max_relative = 1e-10);
    }

    #[test]
    fn euclidean_projection_onto_a_ball_is_a_certified_bregman_projection(
        x in vec3(-5.0, 5.0),
        c in vec3(-1.0, 1.0),
        r in 0.2..2.0f64,
    ) {
        let set = ConvexSet::ball(c, r);
        let g = Generator::sq_norm(3);
        let p = projection::bregman_project(&g, &set, &x, &ProjectionOptions::default()).unwrap();
        let e = set.euclid_project(&x).unwrap();
        prop_assert!(numeric::dist(&p.point, &e) <= 1e-6);
        prop_assert!(p.certificate_violation <= 1e-6);
        prop_assert!(set.contains(&p.point, 1e-9));
    }

    #[test]
    fn simplex_projection_lands_on_the_simplex(x in prop::collection::vec(-3.0..3.0f64, 1..8)) {
        let p = sets::project_simplex(&x);
        prop_assert!(p.iter().all(|&v| v >= 0.0));
        prop_assert!((numeric::sum(p.iter().copied()) - 1.0).abs() <= 1e-12);
        let again = sets::project_simplex(&p);
        prop_assert!(numeric::dist(&p, &again) <= 1e-12);
    }

    #[test]
    fn dykstra_output_satisfies_every_halfspace(x in vec3(-4.0, 4.0), b in vec3(0.0, 1.0)) {
        let normals = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![1.0, 1.0, 1.0]];
        let out = sets::dykstra(&normals, &b, &x, sets::DYKSTRA_MAX_SWEEPS);
        prop_assert!(out.max_violation <= 1e-9);
    }

    #[test]
    fn box_positions_round_trip(offset in prop::collection::vec(0u64..5, 2), side in 1u64..12, pos in 0usize..144) {
        let bx = IndexBox::new(SemigroupElement(offset), side);
        let pos = pos % bx.len();
        let s = bx.element_at(pos);
        prop_assert!(bx.contains(&s));
        prop_assert_eq!(bx.position(&s), Some(pos));
    }

    #[test]
    fn semigroup_law_holds_for_commuting_generators(
        a in 0u64..6, b in 0u64..6, c in 0u64..6, d in 0u64..6,
        x in prop::collection::vec(-1.0..1.0f64, 2),
    ) {
        let action = ActionSpec::new(
            vec![GeneratorMap::rotation_of_order(6), GeneratorMap::scaling(0.9)],
            ConvexSet::unit_ball(2),
            vec![0.5, 0.0],
        ).unwrap();
        let x = numeric::scale(&x, 0.5);
        let s = SemigroupElement(vec![a, b]);
        let t = SemigroupElement(vec![c, d]);
        let composed = action.apply_raw(&s, &action.apply_raw(&t, &x));
        let direct = action.apply_raw(&(&s + &t), &x);
        prop_assert!(numeric::dist(&composed, &direct) <= 1e-12);
    }

    #[test]
    fn hybrid_one_zero_is_nonexpansive(seed in 0u64..1000) {
        let g = Generator::sq_norm(2);
        let action = ActionSpec::new(vec![GeneratorMap::scaling(0.7)], ConvexSet::unit_ball(2), vec![1.0, 0.0]).unwrap();
        let cfg = ClassifyConfig { samples: 64, seed, ..Default::default() };
        let a = classify::check_nonexpansive(&g, &action, &cfg).unwrap();
        let b = classify::check_generalized_hybrid(&g, &action, 1.0, 0.0, &cfg).unwrap();
        prop_assert_eq!(a.max_violation.to_bits(), b.max_violation.to_bits());
        prop_assert_eq!(a.witness, b.witness);
    }

    #[test]
    fn folner_defect_is_bounded_by_the_boundary(n in 1u64..2000, t in 1u64..5) {
        let f = |s: &SemigroupElement| ((s.0[0] as f64) * 0.37).sin();
        let mean = ApproximateMean::new(IndexBox::origin(1, n));
        let d = mean.invariance_defect(f, &SemigroupElement(vec![t])).unwrap();
        prop_assert!(d <= 2.0 * t as f64 / n as f64 + 1e-12);
    }

    #[test]
    fn compensated_sums_are_order_independent(v in prop::collection::vec(-1e6..1e6f64, 1..200)) {
        let forward: CompensatedSum = v.iter().copied().collect();
        let backward: CompensatedSum = v.iter().rev().copied().collect();
        assert_relative_eq!(forward.value(), backward.value(), epsilon = 1e-6);
    }

    #[test]
    fn barycenters_of_rotations_lie_in_the_disk(order in 2u64..12, side in 1u64..300) {
        let action = ActionSpec::new(vec![GeneratorMap::rotation_of_order(order)], ConvexSet::unit_ball(2), vec![1.0, 0.0]).unwrap();
        let z = means::barycenter(&action, &ApproximateMean::new(IndexBox::origin(1, side))).unwrap();
        prop_assert!(numeric::norm(&z) <= 1.0 + 1e-12);
        if side % order == 0 {
            prop_assert!(numeric::norm(&z) <= 1e-12);
        }
    }
}
