use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{LieAlgebraData, SplitAlgebra};
use crate::linalg;

/// Polyhedral cone in `𝔮` given by generators, with an interior witness and
/// sample points.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeSample {
    pub generators: Vec<DVector<f64>>,
    pub interior_witness: DVector<f64>,
    pub sampled_points: Vec<DVector<f64>>,
}

impl ConeSample {
    /// Witness plus `count` random strictly positive combinations of the generators.
    pub fn with_random_points(generators: Vec<DVector<f64>>, interior_witness: DVector<f64>, count: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = interior_witness.len();
        let sampled_points = (0..count)
            .map(|_| {
                generators
                    .iter()
                    .fold(DVector::zeros(dim), |acc, g| acc + g * rng.random_range(0.05..1.0))
            })
            .collect();
        Self {
            generators,
            interior_witness,
            sampled_points,
        }
    }

    pub fn generator_matrix(&self) -> DMatrix<f64> {
        let dim = self.interior_witness.len();
        let mut m = DMatrix::zeros(dim, self.generators.len());
        for (k, g) in self.generators.iter().enumerate() {
            m.set_column(k, g);
        }
        m
    }

    /// NNLS residual of `x` against the generators, relative to `max(‖x‖, 1)`.
    pub fn membership_residual(&self, x: &DVector<f64>) -> f64 {
        let (_, r) = linalg::nnls(&self.generator_matrix(), x);
        r / x.norm().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConeCheckConfig {
    /// Imaginary parts must stay below this times `‖ad X‖`.
    pub imaginary_tolerance: f64,
    /// Eigenvalue cluster radius relative to `‖ad X‖`.
    pub cluster_radius: f64,
    /// Rank threshold relative to `‖ad X − λ‖` (and its square).
    pub rank_tolerance: f64,
    pub invariance_tolerance: f64,
    pub projection_tolerance: f64,
    /// Number of sampled `Z ∈ 𝔥` for the invariance test.
    pub h_samples: usize,
    pub seed: u64,
}

impl Default for ConeCheckConfig {
    fn default() -> Self {
        Self {
            imaginary_tolerance: 1e-8,
            cluster_radius: 1e-6,
            rank_tolerance: 1e-6,
            invariance_tolerance: 1e-6,
            projection_tolerance: 1e-12,
            h_samples: 8,
            seed: 7,
        }
    }
}

/// Why a cone check failed.
#[derive(Debug, Clone, PartialEq)]
pub enum ConeFailure {
    NotInQ { residual: f64 },
    ComplexEigenvalues { max_imaginary: f64 },
    NilpotentPart { eigenvalue: f64 },
    EmptyInterior,
    InvarianceExceeded { residual: f64 },
    ConjugationChangedSpectrum { deviation: f64 },
}

impl ConeFailure {
    pub fn name(&self) -> &'static str {
        match self {
            Self::NotInQ { .. } => "not-in-q",
            Self::ComplexEigenvalues { .. } => "complex-eigenvalues",
            Self::NilpotentPart { .. } => "nilpotent-part",
            Self::EmptyInterior => "empty-interior",
            Self::InvarianceExceeded { .. } => "invariance-exceeded",
            Self::ConjugationChangedSpectrum { .. } => "conjugation-changed-spectrum",
        }
    }
}

impl fmt::Display for ConeFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NotInQ { residual } => write!(f, "{}: h-component {residual:e}", self.name()),
            Self::ComplexEigenvalues { max_imaginary } => write!(f, "{}: max |Im| {max_imaginary:e}", self.name()),
            Self::NilpotentPart { eigenvalue } => write!(f, "{}: Jordan block at eigenvalue {eigenvalue:e}", self.name()),
            Self::EmptyInterior => write!(f, "{}: witness is not strictly inside the cone", self.name()),
            Self::InvarianceExceeded { residual } => write!(f, "{}: NNLS residual {residual:e}", self.name()),
            Self::ConjugationChangedSpectrum { deviation } => write!(f, "{}: relative deviation {deviation:e}", self.name()),
        }
    }
}

/// Spectral data of `ad X` for one cone point.
#[derive(Debug, Clone, PartialEq)]
pub struct ElementReport {
    pub label: String,
    /// Sorted by real part.
    pub eigenvalues: Vec<Complex64>,
    pub max_imaginary: f64,
    pub ad_norm: f64,
    pub failure: Option<ConeFailure>,
}

impl ElementReport {
    pub fn passed(&self) -> bool {
        self.failure.is_none()
    }
}

/// Is `ad X` diagonalizable with real spectrum?
pub fn check_hyperbolic_element(alg: &LieAlgebraData, x: &DVector<f64>, config: &ConeCheckConfig) -> ElementReport {
    let a = alg.ad(x);
    let d = a.nrows();
    let norm = linalg::spectral_norm(&a);
    let mut eigenvalues: Vec<Complex64> = a.clone().complex_eigenvalues().iter().copied().collect();
    eigenvalues.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
    let max_imaginary = eigenvalues.iter().fold(0.0_f64, |m, z| m.max(z.im.abs()));
    let label = alg.describe_vector(x);
    let mut report = ElementReport {
        label,
        eigenvalues: eigenvalues.clone(),
        max_imaginary,
        ad_norm: norm,
        failure: None,
    };
    if norm == 0.0 {
        return report;
    }
    if max_imaginary > config.imaginary_tolerance * norm {
        report.failure = Some(ConeFailure::ComplexEigenvalues { max_imaginary });
        return report;
    }
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for z in &eigenvalues {
        match clusters.last_mut() {
            Some(c) if (z.re - c[0]).abs() <= config.cluster_radius * norm => c.push(z.re),
            _ => clusters.push(vec![z.re]),
        }
    }
    let id = DMatrix::<f64>::identity(d, d);
    for c in &clusters {
        let lambda = c.iter().sum::<f64>() / c.len() as f64;
        let shifted = &a - &id * lambda;
        let scale = linalg::spectral_norm(&shifted).max(norm);
        let r1 = linalg::rank(&shifted, config.rank_tolerance * scale);
        let r2 = linalg::rank(&(&shifted * &shifted), config.rank_tolerance * scale * scale);
        if r1 != r2 {
            report.failure = Some(ConeFailure::NilpotentPart { eigenvalue: lambda });
            return report;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeReport {
    pub witness: ElementReport,
    pub samples: Vec<ElementReport>,
    pub witness_interior: bool,
    pub invariance_residual: f64,
    /// Max relative eigenvalue change of `exp(ad Z)·X` vs `X`.
    pub conjugation_deviation: f64,
    pub failures: Vec<ConeFailure>,
}

impl ConeReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks hyperbolicity of the witness and every sample point, that the
/// witness is interior, and sampled `exp(ad 𝔥)` invariance of the generators.
pub fn hyperbolic_cone_check(
    alg: &LieAlgebraData,
    split: &SplitAlgebra,
    cone: &ConeSample,
    config: &ConeCheckConfig,
) -> ConeReport {
    let mut failures = Vec::new();
    let points = std::iter::once(&cone.interior_witness)
        .chain(&cone.sampled_points)
        .chain(&cone.generators);
    for p in points {
        let r = split.q_residual(p);
        if r > config.projection_tolerance {
            failures.push(ConeFailure::NotInQ { residual: r });
        }
    }

    let witness = check_hyperbolic_element(alg, &cone.interior_witness, config);
    let samples: Vec<ElementReport> = cone
        .sampled_points
        .iter()
        .map(|x| check_hyperbolic_element(alg, x, config))
        .collect();
    failures.extend(witness.failure.iter().cloned());
    failures.extend(samples.iter().filter_map(|s| s.failure.clone()));

    let witness_interior = is_interior(cone, split);
    if !witness_interior {
        failures.push(ConeFailure::EmptyInterior);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut invariance_residual = 0.0_f64;
    let mut conjugation_deviation = 0.0_f64;
    for _ in 0..config.h_samples {
        let z = (0..split.dim_h()).fold(DVector::zeros(alg.dim()), |acc, k| {
            acc + split.h_basis.column(k) * rng.random_range(-1.0..1.0)
        });
        let g = alg.ad(&z).exp();
        for gen in &cone.generators {
            invariance_residual = invariance_residual.max(cone.membership_residual(&(&g * gen)));
        }
        for x in std::iter::once(&cone.interior_witness).chain(&cone.sampled_points) {
            let before = check_hyperbolic_element(alg, x, config);
            let after = check_hyperbolic_element(alg, &(&g * x), config);
            let scale = before.ad_norm.max(f64::MIN_POSITIVE);
            for (p, q) in before.eigenvalues.iter().zip(&after.eigenvalues) {
                conjugation_deviation = conjugation_deviation.max((p - q).norm() / scale);
            }
        }
    }
    if invariance_residual >= config.invariance_tolerance {
        failures.push(ConeFailure::InvarianceExceeded {
            residual: invariance_residual,
        });
    }
    if conjugation_deviation > config.cluster_radius {
        failures.push(ConeFailure::ConjugationChangedSpectrum {
            deviation: conjugation_deviation,
        });
    }
    ConeReport {
        witness,
        samples,
        witness_interior,
        invariance_residual,
        conjugation_deviation,
        failures,
    }
}

/// The generators span `𝔮` and `w − ε g` stays in the cone for every generator.
fn is_interior(cone: &ConeSample, split: &SplitAlgebra) -> bool {
    let gm = cone.generator_matrix();
    if linalg::rank(&gm, 1e-9 * gm.amax().max(1.0)) < split.dim_q() {
        return false;
    }
    let w = &cone.interior_witness;
    if cone.membership_residual(w) > 1e-9 {
        return false;
    }
    let gmax = cone.generators.iter().fold(0.0_f64, |m, g| m.max(g.norm()));
    let eps = 1e-3 * w.norm() / gmax.max(f64::MIN_POSITIVE);
    cone.generators
        .iter()
        .all(|g| cone.membership_residual(&(w - g * eps)) <= 1e-9)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{builtin_example, split_by_involution};

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn ad_h_has_spectrum_two_zero_minus_two() {
        let ex = builtin_example("sl2R-cartan").unwrap();
        let rep = check_hyperbolic_element(&ex.algebra, &v(&[1.0, 0.0, 0.0]), &ConeCheckConfig::default());
        assert!(rep.passed());
        let re: Vec<f64> = rep.eigenvalues.iter().map(|z| z.re).collect();
        for (got, want) in re.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn e_plus_f_is_conjugate_to_h() {
        let ex = builtin_example("sl2R-cartan").unwrap();
        let rep = check_hyperbolic_element(&ex.algebra, &v(&[0.0, 1.0, 1.0]), &ConeCheckConfig::default());
        assert!(rep.passed());
        for (z, want) in rep.eigenvalues.iter().zip([-2.0, 0.0, 2.0]) {
            assert!((z.re - want).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn nilpotent_e_is_flagged() {
        let ex = builtin_example("sl2R-adH").unwrap();
        let rep = check_hyperbolic_element(&ex.algebra, &v(&[0.0, 1.0, 0.0]), &ConeCheckConfig::default());
        assert_eq!(rep.failure.as_ref().map(ConeFailure::name), Some("nilpotent-part"));
    }

    #[test]
    fn compact_direction_has_complex_spectrum() {
        let ex = builtin_example("sl2R-cartan").unwrap();
        let rep = check_hyperbolic_element(&ex.algebra, &v(&[0.0, 1.0, -1.0]), &ConeCheckConfig::default());
        assert_eq!(rep.failure.as_ref().map(ConeFailure::name), Some("complex-eigenvalues"));
    }

    #[test]
    fn builtin_cones_pass() {
        for name in ["sl2R-cartan", "sl2R-adH"] {
            let ex = builtin_example(name).unwrap();
            let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
            let rep = hyperbolic_cone_check(&ex.algebra, &split, ex.cone.as_ref().unwrap(), &ConeCheckConfig::default());
            assert!(rep.passed(), "{name}: {:?}", rep.failures);
            assert!(rep.witness_interior);
        }
    }

    #[test]
    fn boundary_witness_and_foreign_points_fail() {
        let ex = builtin_example("sl2R-adH").unwrap();
        let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
        let mut cone = ex.cone.clone().unwrap();
        cone.interior_witness = v(&[0.0, 1.0, 0.0]);
        let rep = hyperbolic_cone_check(&ex.algebra, &split, &cone, &ConeCheckConfig::default());
        let names: Vec<&str> = rep.failures.iter().map(ConeFailure::name).collect();
        assert!(names.contains(&"nilpotent-part") && names.contains(&"empty-interior"), "{names:?}");

        let mut cone = ex.cone.clone().unwrap();
        cone.sampled_points.push(v(&[1.0, 1.0, 1.0]));
        let rep = hyperbolic_cone_check(&ex.algebra, &split, &cone, &ConeCheckConfig::default());
        assert!(rep.failures.iter().any(|f| f.name() == "not-in-q"));
    }

    #[test]
    fn non_invariant_wedge_is_detected() {
        let ex = builtin_example("sl2R-adH").unwrap();
        let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
        let gens = vec![v(&[0.0, 1.0, 0.5]), v(&[0.0, 0.5, 1.0])];
        let cone = ConeSample::with_random_points(gens, v(&[0.0, 1.0, 1.0]), 4, 3);
        let rep = hyperbolic_cone_check(&ex.algebra, &split, &cone, &ConeCheckConfig::default());
        assert!(rep.failures.iter().any(|f| f.name() == "invariance-exceeded"));
    }
}
