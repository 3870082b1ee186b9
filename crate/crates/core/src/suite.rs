//! The acceptance checks, each returning a named outcome with its metrics.
//! Outcomes depend only on the configuration, so repeated runs with the same
//! seed produce identical reports.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::lattice::{GaussianEuclideanMeasure, TimeLattice};
use crate::lie::{
    builtin_example, c_dual, check_hyperbolic_element, commutant_dimension, commutant_dimension_c, hyperbolic_cone_check,
    split_by_involution, su2_basis_change, su2_table, ConeCheckConfig,
};
use crate::linalg::{self, C64};
use crate::positivity::{
    find_non_rp_omega, monte_carlo_pd_gram, non_rp_witness_family, pd_gram_certificate, random_complex_function,
    random_dplus_function, rp_gram_certificate,
};
use crate::reconstruction::{
    build_k0, check_r1_r2, extract_hamiltonian, multiplication_operator, transfer_operator, verify_npoint_identity,
    window_basis, BasisSpec, McParams, PolyObservable, DEFAULT_NULL_TOLERANCE,
};
use crate::reference;

/// Tolerances pinned by the acceptance criteria.
pub mod tol {
    pub const PSD_RELATIVE: f64 = 1e-10;
    pub const MC_SIGMAS: f64 = 3.0;
    pub const MC_ENTRY_FRACTION: f64 = 0.95;
    pub const SPECTRUM_RELATIVE: f64 = 0.01;
    pub const CONTRACTION: f64 = 1e-10;
    pub const SEMIGROUP_RELATIVE: f64 = 1e-8;
    pub const NPOINT_RELATIVE: f64 = 0.01;
    pub const R2_RESIDUAL: f64 = 1e-8;
    /// "O(1)" for the broken reflection.
    pub const BROKEN_R2_MIN: f64 = 0.1;
    pub const JACOBI: f64 = 1e-12;
    pub const INVOLUTION: f64 = 1e-12;
    pub const SU2_TABLE: f64 = 1e-10;
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Monte-Carlo sample size for the n-point identity.
    pub mc_samples: usize,
    /// Monte-Carlo sample size for the positive-definiteness cross-check.
    pub pd_mc_samples: usize,
    pub families: usize,
    pub max_family_size: usize,
    pub masses: Vec<f64>,
    pub psd_tolerance: f64,
    pub random_configurations: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            mc_samples: 100_000,
            pd_mc_samples: 20_000,
            families: 50,
            max_family_size: 16,
            masses: vec![0.5, 1.0, 2.0],
            psd_tolerance: tol::PSD_RELATIVE,
            random_configurations: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub metrics: Vec<(String, f64)>,
}

impl CheckOutcome {
    fn new(id: u32, passed: bool, detail: impl Into<String>, metrics: Vec<(String, f64)>) -> Self {
        Self {
            id,
            name: CRITERIA[(id - 1) as usize].1,
            passed,
            detail: detail.into(),
            metrics,
        }
    }

    fn errored(id: u32, err: crate::Error) -> Self {
        Self::new(id, false, format!("error: {err}"), Vec::new())
    }
}

pub const CRITERIA: [(u32, &str); 10] = [
    (1, "rp-certification"),
    (2, "pd-certification"),
    (3, "non-rp-negative-control"),
    (4, "reconstruction-spectrum"),
    (5, "contraction-semigroup"),
    (6, "npoint-identity"),
    (7, "r1-r2"),
    (8, "c-duality"),
    (9, "hyperbolic-cone"),
    (10, "commutant"),
];

pub fn run_suite(config: &SuiteConfig) -> Vec<CheckOutcome> {
    CRITERIA.par_iter().map(|&(id, _)| run_criterion(id, config)).collect()
}

pub fn run_criterion(id: u32, config: &SuiteConfig) -> CheckOutcome {
    let result = match id {
        1 => rp_certification(config),
        2 => pd_certification(config),
        3 => non_rp_control(config),
        4 => reconstruction_spectrum(config),
        5 => contraction_semigroup(config),
        6 => npoint_identity(config),
        7 => r1_r2(),
        8 => c_duality(),
        9 => hyperbolic_cone(),
        10 => commutant(),
        _ => panic!("no acceptance criterion {id}"),
    };
    result.unwrap_or_else(|e| CheckOutcome::errored(id, e))
}

fn rng_for(config: &SuiteConfig, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    rng
}

fn positivity_lattice() -> TimeLattice {
    TimeLattice::new(16, 0.2).expect("valid lattice")
}

fn rp_certification(config: &SuiteConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(config, 1);
    let mut worst = f64::INFINITY;
    let mut failures = 0;
    let mut count = 0;
    for &mass in &config.masses {
        let measure = GaussianEuclideanMeasure::ou(mass, positivity_lattice())?;
        for _ in 0..config.families {
            let size = rng.random_range(1..=config.max_family_size);
            let fam: Vec<_> = (0..size)
                .map(|_| {
                    let target = rng.random_range(0.05..2.0);
                    random_dplus_function(&measure, target, &mut rng)
                })
                .collect();
            let cert = rp_gram_certificate(|f| measure.generating_functional(f), &fam, config.psd_tolerance)?;
            let ratio = cert.min_eigenvalue / cert.spectral_norm;
            worst = worst.min(ratio);
            count += 1;
            if !cert.is_positive() || cert.min_eigenvalue < -tol::PSD_RELATIVE * cert.spectral_norm {
                failures += 1;
            }
        }
    }
    Ok(CheckOutcome::new(
        1,
        failures == 0,
        format!("{count} families, {failures} indefinite"),
        vec![("min_lambda_over_norm".into(), worst)],
    ))
}

fn pd_certification(config: &SuiteConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(config, 2);
    let mut failures = 0;
    let mut count = 0;
    let mut entries = 0usize;
    let mut within = 0usize;
    let mut worst = f64::INFINITY;
    for (mi, &mass) in config.masses.iter().enumerate() {
        let measure = GaussianEuclideanMeasure::ou(mass, positivity_lattice())?;
        let paths = measure.sample_paths(config.pd_mc_samples, config.seed.wrapping_add(100 + mi as u64))?;
        for _ in 0..config.families {
            let size = rng.random_range(1..=config.max_family_size);
            let fam: Vec<_> = (0..size)
                .map(|_| {
                    let target = rng.random_range(0.05..1.0);
                    random_complex_function(&measure, target, 0.2, &mut rng)
                })
                .collect();
            let cert = pd_gram_certificate(|f| measure.generating_functional(f), &fam, config.psd_tolerance)?;
            count += 1;
            worst = worst.min(cert.min_eigenvalue / cert.spectral_norm);
            if !cert.is_positive() {
                failures += 1;
            }
            let (mc, se) = monte_carlo_pd_gram(&paths, &fam)?;
            for a in 0..size {
                for b in 0..size {
                    entries += 1;
                    let diff = mc[(a, b)] - cert.gram[(a, b)];
                    let s = se[(a, b)];
                    if diff.re.abs() <= tol::MC_SIGMAS * s.re && diff.im.abs() <= tol::MC_SIGMAS * s.im {
                        within += 1;
                    }
                }
            }
        }
    }
    let fraction = within as f64 / entries as f64;
    Ok(CheckOutcome::new(
        2,
        failures == 0 && fraction >= tol::MC_ENTRY_FRACTION,
        format!("{count} families, {failures} indefinite; {within}/{entries} MC entries within 3 sigma"),
        vec![("min_lambda_over_norm".into(), worst), ("mc_fraction_within".into(), fraction)],
    ))
}

fn non_rp_control(config: &SuiteConfig) -> Result<CheckOutcome> {
    let lattice = TimeLattice::new(16, 0.25)?;
    let Some(omega) = find_non_rp_omega(1.0, lattice, 20.0, 0.5, config.psd_tolerance)? else {
        return Ok(CheckOutcome::new(3, false, "no damped-cosine frequency up to 20 breaks positivity", Vec::new()));
    };
    let measure = GaussianEuclideanMeasure::damped_cosine(1.0, omega, lattice)?;
    let run = || -> Result<_> {
        let fam = non_rp_witness_family(&measure, config.psd_tolerance)
            .ok_or_else(|| crate::Error::Precondition("no witness family".into()))?;
        rp_gram_certificate(|f| measure.generating_functional(f), &fam, config.psd_tolerance)
    };
    let first = run()?;
    let second = run()?;
    let reproducible = first.witness.is_some() && first.witness == second.witness && first.min_eigenvalue == second.min_eigenvalue;
    let residual = first.witness_residual().unwrap_or(f64::INFINITY);
    Ok(CheckOutcome::new(
        3,
        !first.is_positive() && reproducible,
        format!(
            "damped cosine omega={omega}: verdict {:?}, witness reproducible: {reproducible}",
            first.verdict
        ),
        vec![
            ("omega".into(), omega),
            ("min_eigenvalue".into(), first.min_eigenvalue),
            ("min_eigenvalue_over_norm".into(), first.min_eigenvalue / first.spectral_norm),
            ("witness_residual".into(), residual),
        ],
    ))
}

/// Default OU reconstruction instance: m = 1, 64 sites, spacing 0.05, cubic
/// monomials at the first three positive times.
pub fn default_reconstruction_instance(mass: f64) -> Result<(GaussianEuclideanMeasure, BasisSpec)> {
    let lattice = TimeLattice::new(64, 0.05)?;
    let measure = GaussianEuclideanMeasure::ou(mass, lattice)?;
    let fp = lattice.first_positive();
    Ok((measure, BasisSpec::monomials(3, vec![fp, fp + 1, fp + 2])))
}

fn reconstruction_spectrum(_config: &SuiteConfig) -> Result<CheckOutcome> {
    let mass = 1.0;
    let (measure, spec) = default_reconstruction_instance(mass)?;
    let space = build_k0(&measure, &spec, DEFAULT_NULL_TOLERANCE)?;
    let h = measure.lattice().spacing();
    let step = 2;
    let ham = extract_hamiltonian(&transfer_operator(&space, &measure, step)?, step as f64 * h)?;
    let oracle = reference::mehler_gaps(mass, step as f64 * h, 3);
    let mut worst = 0.0_f64;
    let gaps: Vec<f64> = ham.shifted_spectrum.iter().skip(1).copied().collect();
    let enough = gaps.len() >= 3;
    for (g, o) in gaps.iter().zip(&oracle) {
        worst = worst.max((g - o).abs() / o);
    }
    let other = extract_hamiltonian(&transfer_operator(&space, &measure, 5)?, 5.0 * h)?;
    let step_dev = ham
        .shifted_spectrum
        .iter()
        .zip(&other.shifted_spectrum)
        .skip(1)
        .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs() / x.abs()));
    let vacuum = ham.vacuum_residual(space.vacuum.as_ref().expect("constant in basis"));
    Ok(CheckOutcome::new(
        4,
        enough && worst <= tol::SPECTRUM_RELATIVE,
        format!(
            "dim K = {}, gaps [{}] vs oracle [{}]",
            space.physical_dim,
            six(&gaps),
            six(&oracle)
        ),
        vec![
            ("max_relative_gap_error".into(), worst),
            ("step_independence".into(), step_dev),
            ("vacuum_residual".into(), vacuum),
        ],
    ))
}

fn six(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6}")).collect::<Vec<_>>().join(", ")
}

fn relative_difference(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

fn contraction_semigroup(config: &SuiteConfig) -> Result<CheckOutcome> {
    let mut rng = rng_for(config, 5);
    let mut max_norm = 0.0_f64;
    let mut worst_semigroup = 0.0_f64;
    let mut pairs = 0;
    let mut operators = 0;
    for _ in 0..config.random_configurations {
        let mass = rng.random_range(0.5..2.0);
        let n = [16, 24, 32][rng.random_range(0..3)];
        let h = rng.random_range(0.02..0.2);
        let degree = rng.random_range(1..=3);
        let lattice = TimeLattice::new(n, h)?;
        let fp = lattice.first_positive();
        let count = rng.random_range(1..=3);
        let mut times: Vec<usize> = (0..count).map(|_| fp + rng.random_range(0..4)).collect();
        times.sort_unstable();
        times.dedup();
        let measure = GaussianEuclideanMeasure::ou(mass, lattice)?;
        let space = build_k0(&measure, &BasisSpec::monomials(degree, times), DEFAULT_NULL_TOLERANCE)?;
        let max_step = space.max_step().min(8);
        let ts: Vec<DMatrix<C64>> = (0..=max_step)
            .map(|s| transfer_operator(&space, &measure, s))
            .collect::<Result<_>>()?;
        for t in &ts[1..] {
            max_norm = max_norm.max(linalg::spectral_norm_c(t));
            operators += 1;
        }
        for a in 1..=max_step {
            for b in 1..=(max_step - a) {
                worst_semigroup = worst_semigroup.max(relative_difference(&(&ts[a] * &ts[b]), &ts[a + b]));
                pairs += 1;
            }
        }
    }
    Ok(CheckOutcome::new(
        5,
        max_norm <= 1.0 + tol::CONTRACTION && worst_semigroup <= tol::SEMIGROUP_RELATIVE,
        format!(
            "{} configurations, {operators} operators, {pairs} semigroup pairs",
            config.random_configurations
        ),
        vec![("max_norm".into(), max_norm), ("max_semigroup_residual".into(), worst_semigroup)],
    ))
}

/// The polynomial cases checked three ways.
pub fn npoint_cases(first_positive: usize) -> Vec<(String, Vec<PolyObservable>)> {
    let j = first_positive;
    let q = |i: usize| PolyObservable::power(i, 1);
    let q2 = |i: usize| PolyObservable::power(i, 2);
    vec![
        ("1pt-one".into(), vec![PolyObservable { index: j + 4, coeffs: vec![1.0] }]),
        ("2pt-q-q".into(), vec![q(j + 2), q(j + 10)]),
        ("2pt-q2-q2".into(), vec![q2(j + 3), q2(j + 9)]),
        ("3pt-q-q2-q".into(), vec![q(j + 1), q2(j + 5), q(j + 12)]),
        ("4pt-q-q-q-q".into(), vec![q(j + 1), q(j + 4), q(j + 6), q(j + 11)]),
        (
            "2pt-hermite".into(),
            vec![
                PolyObservable { index: j + 2, coeffs: vec![-1.0, 0.0, 2.0] },
                PolyObservable { index: j + 7, coeffs: vec![0.5, 1.0, 0.0, 1.0] },
            ],
        ),
    ]
}

fn npoint_identity(config: &SuiteConfig) -> Result<CheckOutcome> {
    let (measure, spec) = default_reconstruction_instance(1.0)?;
    let space = build_k0(&measure, &spec, DEFAULT_NULL_TOLERANCE)?;
    let h = measure.lattice().spacing();
    let ham = extract_hamiltonian(&transfer_operator(&space, &measure, 1)?, h)?;
    let mut worst_rel = 0.0_f64;
    let mut worst_z = 0.0_f64;
    let mut passed = true;
    let mut lines = Vec::new();
    for (k, (label, obs)) in npoint_cases(measure.lattice().first_positive()).into_iter().enumerate() {
        let mc = McParams {
            samples: config.mc_samples,
            seed: config.seed.wrapping_add(600 + k as u64),
        };
        let rep = verify_npoint_identity(&space, &measure, &ham, &obs, Some(mc), label.clone())?;
        let agree = if rep.rhs_exact.abs() > 1e-12 {
            let r = rep.relative_error();
            worst_rel = worst_rel.max(r);
            r <= tol::NPOINT_RELATIVE
        } else {
            rep.lhs.norm() <= 1e-10
        };
        let z = rep.mc_z_score().unwrap_or(f64::INFINITY);
        worst_z = worst_z.max(z);
        passed &= agree && z <= tol::MC_SIGMAS;
        lines.push(format!("{label}: lhs {:.6} exact {:.6} z {:.6}", rep.lhs.re, rep.rhs_exact, z));
    }
    Ok(CheckOutcome::new(
        6,
        passed,
        lines.join("; "),
        vec![("max_relative_error".into(), worst_rel), ("max_mc_z".into(), worst_z)],
    ))
}

fn r1_r2() -> Result<CheckOutcome> {
    let measure = GaussianEuclideanMeasure::ou(1.0, TimeLattice::new(32, 0.1)?)?;
    let half = 4;
    let rep = check_r1_r2(&measure, half, 2, &[0, 1, 2, 3], None)?;
    let fp = measure.lattice().first_positive();
    let window: Vec<usize> = (fp - half..fp + half).collect();
    let mut signs = vec![1.0; window_basis(&window, 2).len()];
    signs[1] = -1.0;
    let broken = check_r1_r2(&measure, half, 2, &[1], Some(&signs))?;
    let broken_res = broken.max_r2_residual();
    Ok(CheckOutcome::new(
        7,
        rep.r1_exact && rep.max_r2_residual() <= tol::R2_RESIDUAL && broken_res >= tol::BROKEN_R2_MIN,
        format!("J^2 = id exact: {}; broken-J residual {broken_res:.6}", rep.r1_exact),
        vec![
            ("r2_residual".into(), rep.max_r2_residual()),
            ("j_unitarity_residual".into(), rep.unitarity_residual),
            ("broken_r2_residual".into(), broken_res),
        ],
    ))
}

fn c_duality() -> Result<CheckOutcome> {
    let mut worst_jacobi = 0.0_f64;
    let mut worst_involution = 0.0_f64;
    let mut su2 = f64::INFINITY;
    for name in ["sl2R-cartan", "sl2R-adH", "heisenberg", "abelian-3"] {
        let ex = builtin_example(name)?;
        let split = split_by_involution(&ex.algebra, &ex.involution)?;
        let once = c_dual(&ex.algebra, &split)?;
        worst_jacobi = worst_jacobi.max(once.algebra.validate().jacobi_residual);
        let split2 = split_by_involution(&once.algebra, &once.involution)?;
        let twice = c_dual(&once.algebra, &split2)?;
        let aligned = ex.algebra.change_basis(&once.basis_change, once.algebra.labels().to_vec())?;
        worst_involution = worst_involution.max(twice.algebra.max_difference(&aligned));
        if name == "sl2R-cartan" {
            let labels = su2_table().labels().to_vec();
            su2 = once.algebra.change_basis(&su2_basis_change(), labels)?.max_difference(&su2_table());
        }
    }
    Ok(CheckOutcome::new(
        8,
        worst_jacobi <= tol::JACOBI && worst_involution <= tol::INVOLUTION && su2 <= tol::SU2_TABLE,
        "sl2R-cartan, sl2R-adH, heisenberg, abelian-3",
        vec![
            ("jacobi_residual".into(), worst_jacobi),
            ("involution_residual".into(), worst_involution),
            ("su2_table_residual".into(), su2),
        ],
    ))
}

fn hyperbolic_cone() -> Result<CheckOutcome> {
    let cfg = ConeCheckConfig::default();
    let mut passed = true;
    let mut samples = 0;
    let mut notes = Vec::new();
    for name in ["sl2R-cartan", "sl2R-adH"] {
        let ex = builtin_example(name)?;
        let split = split_by_involution(&ex.algebra, &ex.involution)?;
        let cone = ex.cone.as_ref().expect("built-in sl2 examples carry a cone");
        let rep = hyperbolic_cone_check(&ex.algebra, &split, cone, &cfg);
        samples += rep.samples.len() + 1;
        if !rep.passed() {
            passed = false;
            notes.push(format!(
                "{name}: {}",
                rep.failures.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ")
            ));
        }
    }
    let ex = builtin_example("sl2R-adH")?;
    let control = check_hyperbolic_element(&ex.algebra, &ex.algebra.basis_vector(1), &cfg);
    let control_name = control.failure.as_ref().map_or("none", |f| f.name());
    passed &= control_name == "nilpotent-part";
    notes.push(format!("{samples} cone points checked; control X=E fails with {control_name}"));
    Ok(CheckOutcome::new(9, passed, notes.join("; "), Vec::new()))
}

fn commutant() -> Result<CheckOutcome> {
    let mut mismatches = Vec::new();
    let mut count = 0;
    for inst in reference::commutant_instances() {
        let mats: Vec<DMatrix<f64>> = inst.matrices.iter().map(reference::rational_to_f64).collect();
        let numeric = commutant_dimension(&mats)?;
        let exact = reference::rational_commutant_dimension(&inst.matrices);
        count += 1;
        if numeric != exact {
            mismatches.push(format!("{}: {numeric} vs {exact}", inst.name));
        }
    }
    // The reconstructed oscillator: {Ĥ, compressed q} should be irreducible
    // like the rational oscillator instance.
    let (measure, spec) = default_reconstruction_instance(1.0)?;
    let space = build_k0(&measure, &spec, DEFAULT_NULL_TOLERANCE)?;
    let ham = extract_hamiltonian(&transfer_operator(&space, &measure, 1)?, measure.lattice().spacing())?;
    let q = multiplication_operator(&space, &measure, &[0.0, 1.0]);
    let reconstructed = commutant_dimension_c(&[ham.matrix.clone(), q])?;
    let oscillator = reference::rational_commutant_dimension(&reference::oscillator(space.physical_dim));
    count += 1;
    if reconstructed != oscillator {
        mismatches.push(format!("reconstructed oscillator: {reconstructed} vs {oscillator}"));
    }
    Ok(CheckOutcome::new(
        10,
        mismatches.is_empty(),
        if mismatches.is_empty() {
            format!("{count} instances match the exact oracle")
        } else {
            mismatches.join("; ")
        },
        vec![("reconstructed_commutant_dim".into(), reconstructed as f64)],
    ))
}
