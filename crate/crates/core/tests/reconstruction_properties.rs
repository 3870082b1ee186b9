use oslab_core::linalg;
use oslab_core::reconstruction::{
    build_k0, extract_hamiltonian, multiplication_operator, transfer_operator, verify_npoint_identity, BasisSpec, McParams,
    PolyObservable, DEFAULT_NULL_TOLERANCE,
};
use oslab_core::reference::mehler_gaps;
use oslab_core::{Error, GaussianEuclideanMeasure, TestFunction, TimeLattice};
use proptest::prelude::*;

fn ou(n: usize, h: f64, m: f64) -> GaussianEuclideanMeasure {
    GaussianEuclideanMeasure::ou(m, TimeLattice::new(n, h).unwrap()).unwrap()
}

#[test]
fn gaps_match_mehler_grid_for_several_masses() {
    for mass in [0.5, 1.0, 2.0] {
        let m = ou(48, 0.04, mass);
        let fp = m.lattice().first_positive();
        let space = build_k0(&m, &BasisSpec::monomials(3, vec![fp, fp + 2]), DEFAULT_NULL_TOLERANCE).unwrap();
        let ham = extract_hamiltonian(&transfer_operator(&space, &m, 3).unwrap(), 0.12).unwrap();
        let oracle = mehler_gaps(mass, 0.12, 3);
        for k in 0..3 {
            let got = ham.shifted_spectrum[k + 1];
            assert!((got - oracle[k]).abs() <= 0.01 * oracle[k], "m={mass} level {}: {got} vs {}", k + 1, oracle[k]);
        }
        assert!(ham.shifted_spectrum[0] == 0.0);
        assert!(ham.raw_spectrum.iter().all(|e| *e >= -1e-8 * ham.raw_spectrum[3].abs()));
    }
}

#[test]
fn spectrum_does_not_depend_on_step() {
    let m = ou(40, 0.05, 1.0);
    let fp = m.lattice().first_positive();
    let space = build_k0(&m, &BasisSpec::monomials(2, vec![fp + 1]), DEFAULT_NULL_TOLERANCE).unwrap();
    let a = extract_hamiltonian(&transfer_operator(&space, &m, 1).unwrap(), 0.05).unwrap();
    let b = extract_hamiltonian(&transfer_operator(&space, &m, 7).unwrap(), 0.35).unwrap();
    for (x, y) in a.shifted_spectrum.iter().zip(&b.shifted_spectrum).skip(1) {
        assert!((x - y).abs() <= 1e-6 * x, "{x} vs {y}");
    }
}

#[test]
fn npoint_identity_three_ways() {
    let m = ou(64, 0.05, 1.0);
    let fp = m.lattice().first_positive();
    let space = build_k0(&m, &BasisSpec::monomials(3, vec![fp, fp + 1, fp + 2]), DEFAULT_NULL_TOLERANCE).unwrap();
    let ham = extract_hamiltonian(&transfer_operator(&space, &m, 1).unwrap(), 0.05).unwrap();
    let (t1, t2) = (fp + 3, fp + 9);
    let two = [PolyObservable::power(t1, 1), PolyObservable::power(t2, 1)];
    let mc = Some(McParams { samples: 100_000, seed: 17 });
    let rep = verify_npoint_identity(&space, &m, &ham, &two, mc, "2pt").unwrap();
    let c = |a: usize, b: usize| m.covariance()[(a, b)];
    let oracle = (-(m.lattice().time(t2) - m.lattice().time(t1))).exp() / 2.0;
    assert!((rep.rhs_exact - oracle).abs() < 1e-14);
    assert!((rep.lhs.re - oracle).abs() <= 0.01 * oracle);
    assert!(rep.mc_z_score().unwrap() <= 3.0);

    let idx = [fp + 1, fp + 2, fp + 5, fp + 8];
    let four: Vec<_> = idx.iter().map(|&j| PolyObservable::power(j, 1)).collect();
    let rep = verify_npoint_identity(&space, &m, &ham, &four, mc, "4pt").unwrap();
    let isserlis = c(idx[0], idx[1]) * c(idx[2], idx[3]) + c(idx[0], idx[2]) * c(idx[1], idx[3]) + c(idx[0], idx[3]) * c(idx[1], idx[2]);
    assert!((rep.rhs_exact - isserlis).abs() < 1e-14);
    assert!((rep.lhs.re - isserlis).abs() <= 0.01 * isserlis);
    assert!(rep.mc_z_score().unwrap() <= 3.0);

    // Odd total degree: zero on both sides, still reported.
    let odd = [PolyObservable::power(fp + 1, 1), PolyObservable::power(fp + 4, 2)];
    let rep = verify_npoint_identity(&space, &m, &ham, &odd, None, "odd").unwrap();
    assert_eq!(rep.rhs_exact, 0.0);
    assert!(rep.lhs.norm() < 1e-12);
}

#[test]
fn mc_arm_is_reproducible_and_table_has_fixed_columns() {
    let m = ou(32, 0.1, 1.0);
    let fp = m.lattice().first_positive();
    let space = build_k0(&m, &BasisSpec::monomials(2, vec![fp]), DEFAULT_NULL_TOLERANCE).unwrap();
    let ham = extract_hamiltonian(&transfer_operator(&space, &m, 1).unwrap(), 0.1).unwrap();
    let obs = [PolyObservable::power(fp, 1), PolyObservable::power(fp + 3, 1)];
    let mc = Some(McParams { samples: 5_000, seed: 3 });
    let a = verify_npoint_identity(&space, &m, &ham, &obs, mc, "x").unwrap();
    let b = verify_npoint_identity(&space, &m, &ham, &obs, mc, "x").unwrap();
    assert_eq!(a.csv_row(), b.csv_row());
    assert_eq!(a.csv_row().split(',').count(), 6);
}

#[test]
fn compressed_position_and_h_act_irreducibly() {
    let m = ou(32, 0.05, 1.0);
    let fp = m.lattice().first_positive();
    let space = build_k0(&m, &BasisSpec::monomials(3, vec![fp]), DEFAULT_NULL_TOLERANCE).unwrap();
    let q = multiplication_operator(&space, &m, &[0.0, 1.0]);
    let ham = extract_hamiltonian(&transfer_operator(&space, &m, 2).unwrap(), 0.1).unwrap();
    assert_eq!(oslab_core::lie::commutant_dimension_c(&[ham.matrix.clone(), q]).unwrap(), 1);
    assert_eq!(oslab_core::lie::commutant_dimension_c(&[ham.matrix]).unwrap(), 4);
}

#[test]
fn exponential_basis_gives_psd_gram_and_contraction() {
    let m = ou(16, 0.2, 1.0);
    let l = *m.lattice();
    let fp = l.first_positive();
    let exps: Vec<TestFunction> = (0..3)
        .map(|k| TestFunction::spike(l, fp + k, 0.8 + 0.3 * k as f64).unwrap())
        .collect();
    let spec = BasisSpec {
        max_degree: 1,
        times: vec![fp],
        exponentials: exps,
    };
    let space = build_k0(&m, &spec, DEFAULT_NULL_TOLERANCE).unwrap();
    assert!(space.j_eigenvalues[0] >= -1e-10 * space.j_eigenvalues.last().unwrap());
    let t = transfer_operator(&space, &m, 2).unwrap();
    assert!(linalg::spectral_norm_c(&t) <= 1.0 + 1e-10);
}

#[test]
fn free_field_instance_reports_finite_volume_effects() {
    // Not stationary near the Dirichlet ends, so the transfer matrix need not
    // be an exact contraction; construction itself must still succeed.
    let l = TimeLattice::new(32, 0.1).unwrap();
    let m = GaussianEuclideanMeasure::lattice_free_field(1.0, l).unwrap();
    let fp = l.first_positive();
    let space = build_k0(&m, &BasisSpec::monomials(2, vec![fp, fp + 1]), DEFAULT_NULL_TOLERANCE).unwrap();
    assert!(space.physical_dim >= 3);
    let t = transfer_operator(&space, &m, 1).unwrap();
    assert!(linalg::spectral_norm_c(&t).is_finite());
}

#[test]
fn range_error_reports_the_largest_step() {
    let m = ou(16, 0.1, 1.0);
    let space = build_k0(&m, &BasisSpec::monomials(1, vec![9, 11]), DEFAULT_NULL_TOLERANCE).unwrap();
    assert!(transfer_operator(&space, &m, 4).is_ok());
    assert!(matches!(
        transfer_operator(&space, &m, 5),
        Err(Error::Range { step: 5, max_step: 4 })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn transfer_is_a_contraction_semigroup(
        mass in 0.4f64..2.5,
        h in 0.02f64..0.25,
        degree in 1u32..=3,
        offsets in proptest::collection::vec(0usize..4, 1..=3),
        a in 1usize..4,
        b in 1usize..4,
    ) {
        let m = ou(24, h, mass);
        let fp = m.lattice().first_positive();
        let times: Vec<usize> = offsets.iter().map(|o| fp + o).collect();
        let space = build_k0(&m, &BasisSpec::monomials(degree, times), DEFAULT_NULL_TOLERANCE).unwrap();
        prop_assume!(a + b <= space.max_step());
        let ta = transfer_operator(&space, &m, a).unwrap();
        let tb = transfer_operator(&space, &m, b).unwrap();
        let tab = transfer_operator(&space, &m, a + b).unwrap();
        for t in [&ta, &tb, &tab] {
            prop_assert!(linalg::spectral_norm_c(t) <= 1.0 + 1e-10);
        }
        let rel = (&ta * &tb - &tab).norm() / tab.norm();
        prop_assert!(rel <= 1e-8, "semigroup residual {rel}");
    }
}
