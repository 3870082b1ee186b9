use nalgebra::{DMatrix, DVector};
use oslab_core::lie::{
    builtin_example, c_dual, check_hyperbolic_element, commutant_dimension, semigroup_membership_sample,
    split_by_involution, ConeCheckConfig, InvolutionData, LieAlgebraData, LieExample, Sl2SemigroupExample,
};
use oslab_core::reference::{commutant_instances, rational_commutant_dimension, rational_to_f64};
use proptest::prelude::*;

#[test]
fn commutant_matches_exact_oracle_on_builtin_instances() {
    for inst in commutant_instances() {
        let mats: Vec<DMatrix<f64>> = inst.matrices.iter().map(rational_to_f64).collect();
        assert_eq!(
            commutant_dimension(&mats).unwrap(),
            rational_commutant_dimension(&inst.matrices),
            "{}",
            inst.name
        );
    }
}

#[test]
fn c_dual_output_validates_for_every_builtin() {
    for name in ["sl2R-cartan", "sl2R-adH", "heisenberg", "abelian-5"] {
        let ex = builtin_example(name).unwrap();
        let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
        assert!(split.residuals.max() < 1e-12, "{name}");
        let dual = c_dual(&ex.algebra, &split).unwrap();
        assert!(dual.algebra.validate().jacobi_residual <= 1e-12, "{name}");
    }
}

#[test]
fn abelian_dual_is_abelian() {
    let ex = builtin_example("abelian-3").unwrap();
    let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
    let dual = c_dual(&ex.algebra, &split).unwrap();
    assert!(dual.algebra.structure().iter().all(|&c| c == 0.0));
}

#[test]
fn semigroup_sample_is_reproducible() {
    let a = semigroup_membership_sample(&Sl2SemigroupExample::invariant(), 40, 2);
    let b = semigroup_membership_sample(&Sl2SemigroupExample::invariant(), 40, 2);
    assert_eq!(a, b);
    assert_eq!(a.success_rate(), 1.0);
}

#[test]
fn text_fixture_with_cone_round_trips_through_checks() {
    let text = r#"
name = "sl2-adH"
labels = ["H", "E", "F"]
brackets = ["H E E 2", "H F F -2", "E F H 1"]
involution = ["1 0 0", "0 -1 0", "0 0 -1"]

[cone]
generators = ["0 1 0", "0 0 1"]
witness = "0 1 1"
samples = ["0 0.5 0.25", "0 2 3"]
"#;
    let ex = LieExample::from_text(text).unwrap();
    let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
    let rep = oslab_core::lie::hyperbolic_cone_check(&ex.algebra, &split, ex.cone.as_ref().unwrap(), &ConeCheckConfig::default());
    assert!(rep.passed(), "{:?}", rep.failures);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    // Conjugating by exp(ad Z), Z ∈ 𝔥, keeps hyperbolic elements hyperbolic
    // with the same spectrum.
    #[test]
    fn hyperbolicity_is_conjugation_invariant(a in 0.05f64..3.0, b in 0.05f64..3.0, z in -1.5f64..1.5) {
        let ex = builtin_example("sl2R-adH").unwrap();
        let cfg = ConeCheckConfig::default();
        let x = DVector::from_vec(vec![0.0, a, b]);
        let g = ex.algebra.ad(&DVector::from_vec(vec![z, 0.0, 0.0])).exp();
        let before = check_hyperbolic_element(&ex.algebra, &x, &cfg);
        let after = check_hyperbolic_element(&ex.algebra, &(&g * &x), &cfg);
        prop_assert!(before.passed() && after.passed());
        for (p, q) in before.eigenvalues.iter().zip(&after.eigenvalues) {
            prop_assert!((p - q).norm() <= 1e-6 * before.ad_norm);
        }
        // Oracle: ad(aE + bF) has eigenvalues 0, ±2√(ab).
        let r = 2.0 * (a * b).sqrt();
        prop_assert!((before.eigenvalues[2].re - r).abs() <= 1e-9 * r.max(1.0));
    }

    // τ = S diag(±1) S⁻¹ on an abelian algebra: any such τ splits cleanly and
    // c_dual is an involution.
    #[test]
    fn conjugated_sign_involutions_split(entries in proptest::collection::vec(-1.0f64..1.0, 9), signs in proptest::collection::vec(any::<bool>(), 3)) {
        let s = DMatrix::from_vec(3, 3, entries) + DMatrix::identity(3, 3) * 3.0;
        let d = DMatrix::from_diagonal(&DVector::from_iterator(3, signs.iter().map(|&p| if p { 1.0 } else { -1.0 })));
        let tau = InvolutionData::new(&s * d * s.clone().try_inverse().unwrap());
        let alg = LieAlgebraData::abelian(3).unwrap();
        prop_assume!(tau.square_residual() <= 1e-12);
        let split = split_by_involution(&alg, &tau).unwrap();
        prop_assert_eq!(split.dim_h(), signs.iter().filter(|&&p| p).count());
        let dual = c_dual(&alg, &split).unwrap();
        prop_assert!(dual.algebra.structure().iter().all(|&c| c.abs() <= 1e-12));
    }
}
