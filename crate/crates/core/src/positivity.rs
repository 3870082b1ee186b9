//! Gram-matrix certificates for positive-definiteness of the generating
//! functional and for reflection (Osterwalder–Schrader) positivity.
//!
//! Both inequalities are checked the same way: build the finite Gram matrix
//! of the double sum, verify it is Hermitian, and compare its smallest
//! eigenvalue against a tolerance. Deterministic certificates use
//! `λ_min ≥ -ε‖G‖₂`; sampled certificates use three propagated standard
//! errors of `λ_min`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{GaussianEuclideanMeasure, PathSample, TestFunction, TimeLattice};
use crate::linalg::{self, C64};
use crate::wick;

/// Maximum tolerated relative asymmetry of a Gram matrix.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// `(θf)(t) = f(-t)`.
pub fn reflect(f: &TestFunction) -> TestFunction {
    let lattice = *f.lattice();
    let coeffs = f.coeffs();
    f.map(|j, _| coeffs[lattice.reflect_index(j)])
}

/// Real part restricted to `t > 0`; the result lies in `𝒟₊`.
pub fn project_dplus(f: &TestFunction) -> TestFunction {
    let lattice = *f.lattice();
    f.map(|j, z| {
        if lattice.is_positive(j) {
            C64::new(z.re, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Positive,
    Indefinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ToleranceRule {
    /// Positive iff `λ_min ≥ -eps·‖G‖₂`.
    Relative { eps: f64 },
    /// Positive iff `λ_min ≥ -sigmas·σ(λ_min)`.
    Statistical { sigmas: f64, eigen_std_error: f64 },
}

#[derive(Debug, Clone)]
pub struct PsdCertificate {
    pub description: String,
    pub gram: DMatrix<C64>,
    pub min_eigenvalue: f64,
    pub spectral_norm: f64,
    pub rule: ToleranceRule,
    /// Absolute slack: the verdict is positive iff `min_eigenvalue ≥ -threshold`.
    pub threshold: f64,
    pub verdict: Verdict,
    /// Eigenvector of `min_eigenvalue`, present iff indefinite.
    pub witness: Option<DVector<C64>>,
    /// Entrywise standard errors for sampled certificates.
    pub std_errors: Option<DMatrix<f64>>,
}

impl PsdCertificate {
    /// Certifies a Hermitian Gram matrix with the relative rule.
    pub fn from_gram(description: impl Into<String>, gram: DMatrix<C64>, eps: f64) -> Result<Self> {
        let (min, norm, vec) = Self::spectrum(&gram)?;
        Ok(Self::assemble(
            description.into(),
            gram,
            min,
            norm,
            ToleranceRule::Relative { eps },
            eps * norm,
            vec,
            None,
        ))
    }

    fn spectrum(gram: &DMatrix<C64>) -> Result<(f64, f64, DVector<C64>)> {
        if gram.nrows() != gram.ncols() || gram.is_empty() {
            return Err(Error::Precondition("Gram matrix must be square and nonempty".into()));
        }
        let asymmetry = linalg::relative_asymmetry(gram);
        if asymmetry > HERMITIAN_TOLERANCE {
            return Err(Error::NotHermitian { asymmetry });
        }
        let (values, vectors) = linalg::hermitian_eigen(gram);
        let norm = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        Ok((values[0], norm, vectors.column(0).into_owned()))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        description: String,
        gram: DMatrix<C64>,
        min_eigenvalue: f64,
        spectral_norm: f64,
        rule: ToleranceRule,
        threshold: f64,
        min_vector: DVector<C64>,
        std_errors: Option<DMatrix<f64>>,
    ) -> Self {
        let verdict = if min_eigenvalue >= -threshold {
            Verdict::Positive
        } else {
            Verdict::Indefinite
        };
        Self {
            description,
            gram,
            min_eigenvalue,
            spectral_norm,
            rule,
            threshold,
            verdict,
            witness: (verdict == Verdict::Indefinite).then_some(min_vector),
            std_errors,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.verdict == Verdict::Positive
    }

    /// `c^H G c` for coefficient vector `c`.
    pub fn quadratic_form(&self, c: &DVector<C64>) -> C64 {
        (c.adjoint() * &self.gram * c)[(0, 0)]
    }

    /// Relative mismatch between the form on the witness and `λ_min`.
    pub fn witness_residual(&self) -> Option<f64> {
        self.witness.as_ref().map(|w| {
            let q = self.quadratic_form(w).re;
            (q - self.min_eigenvalue).abs() / self.min_eigenvalue.abs().max(f64::MIN_POSITIVE)
        })
    }

    /// Structured text report; decimals carry 17 significant digits.
    pub fn to_report(&self) -> String {
        let (rule, tolerance) = match self.rule {
            ToleranceRule::Relative { eps } => ("relative", eps),
            ToleranceRule::Statistical { sigmas, .. } => ("statistical", sigmas),
        };
        let gram_re = DMatrix::from_fn(self.gram.nrows(), self.gram.ncols(), |i, j| self.gram[(i, j)].re);
        let gram_im = DMatrix::from_fn(self.gram.nrows(), self.gram.ncols(), |i, j| self.gram[(i, j)].im);
        let report = CertificateReport {
            description: self.description.clone(),
            dimension: self.gram.nrows(),
            verdict: self.verdict,
            rule: rule.to_string(),
            tolerance: linalg::sci17(tolerance),
            threshold: linalg::sci17(self.threshold),
            min_eigenvalue: linalg::sci17(self.min_eigenvalue),
            spectral_norm: linalg::sci17(self.spectral_norm),
            gram_re: linalg::matrix_rows(&gram_re),
            gram_im: linalg::matrix_rows(&gram_im),
            std_errors: self.std_errors.as_ref().map(linalg::matrix_rows),
            witness_re: self
                .witness
                .as_ref()
                .map(|w| linalg::row_text(w.iter().map(|z| z.re))),
            witness_im: self
                .witness
                .as_ref()
                .map(|w| linalg::row_text(w.iter().map(|z| z.im))),
        };
        toml::to_string(&report).expect("certificate report serializes")
    }
}

#[derive(Serialize)]
struct CertificateReport {
    description: String,
    dimension: usize,
    verdict: Verdict,
    rule: String,
    tolerance: String,
    threshold: String,
    min_eigenvalue: String,
    spectral_norm: String,
    gram_re: Vec<String>,
    gram_im: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    std_errors: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_re: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    witness_im: Option<String>,
}

fn common_lattice(fs: &[TestFunction]) -> Result<TimeLattice> {
    let first = fs
        .first()
        .ok_or_else(|| Error::Precondition("test-function family is empty".into()))?;
    let lattice = *first.lattice();
    if fs.iter().any(|f| *f.lattice() != lattice) {
        return Err(Error::LatticeMismatch);
    }
    Ok(lattice)
}

/// Certificate for `Σ_k Σ_l c̄_k c_l S(f_k - f̄_l) ≥ 0`, with `f̄` the
/// coefficientwise conjugate.
pub fn pd_gram_certificate<S>(functional: S, fs: &[TestFunction], eps: f64) -> Result<PsdCertificate>
where
    S: Fn(&TestFunction) -> Result<C64>,
{
    common_lattice(fs)?;
    let n = fs.len();
    let conj: Vec<TestFunction> = fs.iter().map(TestFunction::conj).collect();
    let mut gram = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            gram[(k, l)] = functional(&fs[k].sub(&conj[l])?)?;
        }
    }
    PsdCertificate::from_gram(format!("positive-definiteness, {n} functions"), gram, eps)
}

/// Certificate for `Σ_k Σ_l c̄_k c_l S(θf_k - f_l) ≥ 0` over `f_k ∈ 𝒟₊`.
pub fn rp_gram_certificate<S>(functional: S, fs: &[TestFunction], eps: f64) -> Result<PsdCertificate>
where
    S: Fn(&TestFunction) -> Result<C64>,
{
    common_lattice(fs)?;
    if let Some(bad) = fs.iter().position(|f| !f.in_dplus()) {
        return Err(Error::Precondition(format!(
            "test function {bad} is not in D+ (real, supported at t > 0)"
        )));
    }
    let n = fs.len();
    let reflected: Vec<TestFunction> = fs.iter().map(reflect).collect();
    let mut gram = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            gram[(k, l)] = functional(&reflected[k].sub(&fs[l])?)?;
        }
    }
    PsdCertificate::from_gram(format!("reflection positivity, {n} functions"), gram, eps)
}

/// `S'(f) = S(f) + offset` for `f ≠ 0`: a deliberately broken functional used
/// as a negative control.
pub fn corrupted_functional(
    measure: &GaussianEuclideanMeasure,
    offset: f64,
) -> impl Fn(&TestFunction) -> Result<C64> + '_ {
    move |f| {
        let s = measure.generating_functional(f)?;
        Ok(if f.is_zero() { s } else { s + offset })
    }
}

/// Bounded single-variable functions allowed inside sampled observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DictFn {
    /// `x^p` with `p ≤ 4`.
    Power(u32),
    Tanh,
}

impl DictFn {
    pub fn eval(self, x: f64) -> f64 {
        match self {
            DictFn::Power(p) => x.powi(p as i32),
            DictFn::Tanh => x.tanh(),
        }
    }
}

/// `F(q) = Π_i f_i(q(t_i))` with every `t_i > 0`. Factors are lattice indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductObservable {
    pub factors: Vec<(usize, DictFn)>,
}

impl ProductObservable {
    pub fn one() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn single(index: usize, f: DictFn) -> Self {
        Self {
            factors: vec![(index, f)],
        }
    }

    fn validate(&self, lattice: &TimeLattice) -> Result<()> {
        for &(j, f) in &self.factors {
            if !lattice.is_positive(j) {
                return Err(Error::Precondition(format!(
                    "observable factor at index {j} is not at a positive time"
                )));
            }
            if let DictFn::Power(p) = f {
                if p > 4 {
                    return Err(Error::Precondition(format!("power {p} exceeds 4")));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, q: &[f64]) -> f64 {
        self.factors.iter().map(|&(j, f)| f.eval(q[j])).product()
    }

    /// `(ΘF)(q) = F(q ∘ θ)`.
    pub fn eval_reflected(&self, q: &[f64], lattice: &TimeLattice) -> f64 {
        self.factors
            .iter()
            .map(|&(j, f)| f.eval(q[lattice.reflect_index(j)]))
            .product()
    }

    /// Monomial exponents, or `None` if a `tanh` factor is present.
    pub fn powers(&self) -> Option<Vec<(usize, u32)>> {
        self.factors
            .iter()
            .map(|&(j, f)| match f {
                DictFn::Power(p) => Some((j, p)),
                DictFn::Tanh => None,
            })
            .collect()
    }
}

/// Monte-Carlo certificate of `E[Θ(F_k) F_l]`. The Gram is symmetrized per
/// sample; `λ_min` must clear `-3σ`, with `σ² = Σ_kl w_k² w_l² se_kl²` the
/// entrywise delta-method propagation along the min eigenvector `w`.
pub fn rp_sampled_certificate(paths: &[PathSample], observables: &[ProductObservable]) -> Result<PsdCertificate> {
    let first = paths
        .first()
        .ok_or_else(|| Error::Precondition("path ensemble is empty".into()))?;
    if observables.is_empty() {
        return Err(Error::Precondition("observable family is empty".into()));
    }
    let lattice = first.lattice;
    for obs in observables {
        obs.validate(&lattice)?;
    }
    let k = observables.len();
    let mut sum = DMatrix::<f64>::zeros(k, k);
    let mut sum_sq = DMatrix::<f64>::zeros(k, k);
    let mut u = vec![0.0; k];
    let mut v = vec![0.0; k];
    for path in paths {
        if path.lattice != lattice {
            return Err(Error::LatticeMismatch);
        }
        for (i, obs) in observables.iter().enumerate() {
            u[i] = obs.eval_reflected(&path.values, &lattice);
            v[i] = obs.eval(&path.values);
        }
        for a in 0..k {
            for b in 0..k {
                let x = 0.5 * (u[a] * v[b] + v[a] * u[b]);
                sum[(a, b)] += x;
                sum_sq[(a, b)] += x * x;
            }
        }
    }
    let n = paths.len() as f64;
    let mean = &sum / n;
    let std_errors = DMatrix::from_fn(k, k, |a, b| {
        if paths.len() < 2 {
            return 0.0;
        }
        let var = (sum_sq[(a, b)] / n - mean[(a, b)].powi(2)).max(0.0) * n / (n - 1.0);
        (var / n).sqrt()
    });
    let gram = linalg::to_complex(&mean);
    let (min, norm, w) = PsdCertificate::spectrum(&gram)?;
    let mut var_lambda = 0.0;
    for a in 0..k {
        for b in 0..k {
            var_lambda += w[a].norm_sqr() * w[b].norm_sqr() * std_errors[(a, b)].powi(2);
        }
    }
    let sigma = var_lambda.sqrt();
    let sigmas = 3.0;
    Ok(PsdCertificate::assemble(
        format!("sampled reflection positivity, {k} observables, {} paths", paths.len()),
        gram,
        min,
        norm,
        ToleranceRule::Statistical {
            sigmas,
            eigen_std_error: sigma,
        },
        sigmas * sigma,
        w,
        Some(std_errors),
    ))
}

/// Exact `E[Θ(F_k) F_l]` by Wick's theorem; `None` if any observable has a
/// `tanh` factor.
pub fn wick_observable_gram(
    measure: &GaussianEuclideanMeasure,
    observables: &[ProductObservable],
) -> Option<DMatrix<f64>> {
    let lattice = measure.lattice();
    let powers: Vec<Vec<(usize, u32)>> = observables.iter().map(|o| o.powers()).collect::<Option<_>>()?;
    let k = observables.len();
    Some(DMatrix::from_fn(k, k, |a, b| {
        let mut combined: Vec<(usize, u32)> = powers[a]
            .iter()
            .map(|&(j, p)| (lattice.reflect_index(j), p))
            .collect();
        combined.extend_from_slice(&powers[b]);
        wick::moment(measure.covariance(), &combined)
    }))
}

/// `R_jk = B(θe_j, e_k)` over positive-time indices; the Gaussian measure is
/// reflection positive iff this block is PSD.
/// Monte-Carlo estimate of the positive-definiteness Gram matrix,
/// `E[e^{iq(f_k)} conj(e^{iq(f_l)})] = S(f_k − conj f_l)` for real paths.
/// The second matrix holds the standard errors of the real and imaginary
/// parts as its real and imaginary parts.
pub fn monte_carlo_pd_gram(paths: &[PathSample], fs: &[TestFunction]) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    if paths.len() < 2 {
        return Err(Error::Precondition("need at least two paths".into()));
    }
    common_lattice(fs)?;
    let k = fs.len();
    let mut sum = DMatrix::<C64>::zeros(k, k);
    let mut sum_sq = DMatrix::<C64>::zeros(k, k);
    let mut phase = vec![C64::new(0.0, 0.0); k];
    for path in paths {
        for a in 0..k {
            phase[a] = (C64::i() * path.pairing(&fs[a])?).exp();
        }
        for a in 0..k {
            for b in 0..k {
                let x = phase[a] * phase[b].conj();
                sum[(a, b)] += x;
                sum_sq[(a, b)] += C64::new(x.re * x.re, x.im * x.im);
            }
        }
    }
    let n = paths.len() as f64;
    let mean = sum / C64::new(n, 0.0);
    let se_of = |sq: f64, m: f64| ((sq / n - m * m).max(0.0) / (n - 1.0)).sqrt();
    let se = DMatrix::from_fn(k, k, |a, b| {
        let (m, sq) = (mean[(a, b)], sum_sq[(a, b)]);
        C64::new(se_of(sq.re, m.re), se_of(sq.im, m.im))
    });
    Ok((mean, se))
}

pub fn reflected_covariance_block(measure: &GaussianEuclideanMeasure) -> DMatrix<f64> {
    let lattice = measure.lattice();
    let half = lattice.n_points() / 2;
    let start = lattice.first_positive();
    let h2 = lattice.spacing().powi(2);
    DMatrix::from_fn(half, half, |a, b| {
        h2 * measure.covariance()[(lattice.reflect_index(start + a), start + b)]
    })
}

/// Family `{f, -f}` with `B(θf, f) = -1`, built from the most negative
/// direction of the reflected block. `None` when the block is PSD within
/// `eps`.
pub fn non_rp_witness_family(measure: &GaussianEuclideanMeasure, eps: f64) -> Option<Vec<TestFunction>> {
    let block = reflected_covariance_block(measure);
    let (values, vectors) = linalg::symmetric_eigen(&block);
    let norm = values.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if values[0] >= -eps * norm {
        return None;
    }
    let lattice = *measure.lattice();
    let scale = 1.0 / values[0].abs().sqrt();
    let mut coeffs = vec![0.0; lattice.n_points()];
    for a in 0..block.nrows() {
        coeffs[lattice.first_positive() + a] = scale * vectors[(a, 0)];
    }
    let f = TestFunction::real(lattice, &coeffs).ok()?;
    let minus = f.scale(C64::new(-1.0, 0.0));
    Some(vec![f, minus])
}

/// Smallest `ω` on the grid `step, 2·step, … ≤ omega_max` for which the
/// damped-cosine kernel fails reflection positivity on `lattice`.
pub fn find_non_rp_omega(mass: f64, lattice: TimeLattice, omega_max: f64, step: f64, eps: f64) -> Result<Option<f64>> {
    let mut k = 1;
    loop {
        let omega = k as f64 * step;
        if omega > omega_max {
            return Ok(None);
        }
        let measure = GaussianEuclideanMeasure::damped_cosine(mass, omega, lattice)?;
        if non_rp_witness_family(&measure, eps).is_some() {
            return Ok(Some(omega));
        }
        k += 1;
    }
}

/// Real `𝒟₊` function with Gaussian coefficients on the positive half,
/// rescaled so `B(f,f)` equals `target`.
pub fn random_dplus_function<R: Rng + ?Sized>(
    measure: &GaussianEuclideanMeasure,
    target: f64,
    rng: &mut R,
) -> TestFunction {
    let lattice = *measure.lattice();
    let mut c = vec![0.0; lattice.n_points()];
    for slot in c.iter_mut().skip(lattice.first_positive()) {
        *slot = StandardNormal.sample(rng);
    }
    let f = TestFunction::real(lattice, &c).expect("length matches");
    let b = measure.bilinear(&f, &f).expect("same lattice").re;
    f.scale(C64::new((target / b).sqrt(), 0.0))
}

/// Complex function on the whole lattice: real part scaled to `B = target`,
/// imaginary part a fraction `imag_ratio` of that size.
pub fn random_complex_function<R: Rng + ?Sized>(
    measure: &GaussianEuclideanMeasure,
    target: f64,
    imag_ratio: f64,
    rng: &mut R,
) -> TestFunction {
    let lattice = *measure.lattice();
    let n = lattice.n_points();
    let re: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let im: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
    let fr = TestFunction::real(lattice, &re).expect("length matches");
    let fi = TestFunction::real(lattice, &im).expect("length matches");
    let br = measure.bilinear(&fr, &fr).expect("same lattice").re;
    let bi = measure.bilinear(&fi, &fi).expect("same lattice").re;
    let sr = (target / br).sqrt();
    let si = imag_ratio * (target / bi).sqrt();
    let coeffs = (0..n).map(|j| C64::new(sr * re[j], si * im[j])).collect();
    TestFunction::new(lattice, coeffs).expect("length matches")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::DEFAULT_PSD_TOLERANCE;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ou(n: usize, h: f64, m: f64) -> GaussianEuclideanMeasure {
        GaussianEuclideanMeasure::ou(m, TimeLattice::new(n, h).unwrap()).unwrap()
    }

    #[test]
    fn reflect_is_an_involution_and_moves_support() {
        let l = TimeLattice::new(6, 0.5).unwrap();
        let f = TestFunction::real(l, &[0.0, 0.0, 0.0, 1.0, 2.0, 3.0]).unwrap();
        let r = reflect(&f);
        assert_eq!(r.real_coeffs(), vec![3.0, 2.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(reflect(&r), f);
        let sym = TestFunction::real(l, &[1.0, 2.0, 3.0, 3.0, 2.0, 1.0]).unwrap();
        assert_eq!(reflect(&sym), sym);
    }

    #[test]
    fn projection_onto_dplus() {
        let l = TimeLattice::new(4, 1.0).unwrap();
        let f = TestFunction::new(
            l,
            vec![C64::new(1.0, 1.0), C64::new(2.0, 0.0), C64::new(3.0, -1.0), C64::new(4.0, 2.0)],
        )
        .unwrap();
        let p = project_dplus(&f);
        assert!(p.in_dplus());
        assert_eq!(p.real_coeffs(), vec![0.0, 0.0, 3.0, 4.0]);
        assert_eq!(project_dplus(&p), p);
        let neg = TestFunction::real(l, &[1.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(project_dplus(&neg).is_zero());
    }

    #[test]
    fn pd_of_zero_family_is_one() {
        let m = ou(8, 0.1, 1.0);
        let z = TestFunction::zero(*m.lattice());
        let cert = pd_gram_certificate(|f| m.generating_functional(f), &[z], DEFAULT_PSD_TOLERANCE).unwrap();
        assert_eq!(cert.gram[(0, 0)], C64::new(1.0, 0.0));
        assert!(cert.is_positive() && cert.witness.is_none());
    }

    #[test]
    fn pd_rejects_empty_and_mixed_lattices() {
        let m = ou(8, 0.1, 1.0);
        let s = |f: &TestFunction| m.generating_functional(f);
        assert!(matches!(pd_gram_certificate(s, &[], 1e-10), Err(Error::Precondition(_))));
        let a = TestFunction::zero(TimeLattice::new(8, 0.1).unwrap());
        let b = TestFunction::zero(TimeLattice::new(8, 0.2).unwrap());
        assert!(matches!(pd_gram_certificate(s, &[a, b], 1e-10), Err(Error::LatticeMismatch)));
    }

    #[test]
    fn corrupted_functional_is_caught_with_witness() {
        let m = ou(8, 0.1, 1.0);
        let l = *m.lattice();
        let f = TestFunction::spike(l, 5, 1.0).unwrap();
        let fam = vec![TestFunction::zero(l), f];
        let cert = pd_gram_certificate(corrupted_functional(&m, 0.5), &fam, 1e-10).unwrap();
        assert_eq!(cert.verdict, Verdict::Indefinite);
        // 2x2 oracle: [[1, s+0.5], [s+0.5, 1]] with s = S(f).
        let s = m.generating_functional(&fam[1]).unwrap().re + 0.5;
        assert!((cert.min_eigenvalue - (1.0 - s)).abs() < 1e-14);
        assert!(cert.witness_residual().unwrap() < 1e-8);
    }

    #[test]
    fn rp_single_function_and_precondition() {
        let m = ou(8, 0.1, 1.0);
        let l = *m.lattice();
        let f = TestFunction::real(l, &[0.0, 0.0, 0.0, 0.0, 1.0, -2.0, 0.5, 3.0]).unwrap();
        let cert = rp_gram_certificate(|g| m.generating_functional(g), std::slice::from_ref(&f), 1e-10).unwrap();
        assert!(cert.gram[(0, 0)].re > 0.0 && cert.is_positive());

        let bad = TestFunction::spike(l, 1, 1.0).unwrap();
        let err = rp_gram_certificate(|g| m.generating_functional(g), &[f, bad], 1e-10).unwrap_err();
        assert!(err.to_string().contains("test function 1"));
    }

    #[test]
    fn ou_random_families_are_reflection_positive() {
        let m = ou(16, 0.1, 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fam: Vec<_> = (0..8)
            .map(|_| {
                let target = rng.random_range(0.1..3.0);
                random_dplus_function(&m, target, &mut rng)
            })
            .collect();
        let cert = rp_gram_certificate(|g| m.generating_functional(g), &fam, 1e-10).unwrap();
        assert!(cert.is_positive());
        assert!(cert.min_eigenvalue >= -1e-10 * cert.spectral_norm);
        // Markov factorization: the reflected block is e^{-m t_j} e^{-m t_k}/2m,
        // rank one and PSD.
        let (vals, _) = linalg::symmetric_eigen(&reflected_covariance_block(&m));
        assert!(vals[0] >= -1e-14 * vals[vals.len() - 1]);
        assert!(vals[vals.len() - 2].abs() <= 1e-14 * vals[vals.len() - 1]);
        assert!(linalg::relative_asymmetry(&cert.gram) <= HERMITIAN_TOLERANCE);
    }

    #[test]
    fn damped_cosine_is_not_reflection_positive() {
        let l = TimeLattice::new(16, 0.25).unwrap();
        let omega = find_non_rp_omega(1.0, l, 20.0, 0.5, 1e-10).unwrap().expect("some omega fails");
        let m = GaussianEuclideanMeasure::damped_cosine(1.0, omega, l).unwrap();
        assert!(m.check_stationarity(1e-10).holds);
        assert!(m.check_time_reflection_symmetry(1e-10).holds);
        let fam = non_rp_witness_family(&m, 1e-10).unwrap();
        let cert = rp_gram_certificate(|g| m.generating_functional(g), &fam, 1e-10).unwrap();
        assert_eq!(cert.verdict, Verdict::Indefinite);
        assert!(cert.witness_residual().unwrap() < 1e-8);
        // Reproducible: same inputs, same witness.
        let again = rp_gram_certificate(|g| m.generating_functional(g), &fam, 1e-10).unwrap();
        assert_eq!(cert.witness, again.witness);
    }

    #[test]
    fn sampled_certificate_trivial_and_degenerate_cases() {
        let m = ou(8, 0.2, 1.0);
        let paths = m.sample_paths(20_000, 3).unwrap();
        let cert = rp_sampled_certificate(&paths, &[ProductObservable::one()]).unwrap();
        assert_eq!(cert.gram[(0, 0)].re, 1.0);
        assert!(cert.is_positive());

        let q = ProductObservable::single(5, DictFn::Power(1));
        let cert = rp_sampled_certificate(&paths, &[q.clone(), q]).unwrap();
        assert!(cert.min_eigenvalue.abs() < 1e-12);
        assert!(cert.is_positive());

        assert!(rp_sampled_certificate(&[], &[ProductObservable::one()]).is_err());
        let neg = ProductObservable::single(2, DictFn::Tanh);
        assert!(matches!(rp_sampled_certificate(&paths, &[neg]), Err(Error::Precondition(_))));
    }

    #[test]
    fn sampled_polynomial_entries_match_wick() {
        let m = ou(8, 0.25, 1.0);
        let paths = m.sample_paths(100_000, 9).unwrap();
        let mut obs = Vec::new();
        for j in [4, 5, 6] {
            obs.push(ProductObservable::single(j, DictFn::Power(1)));
            obs.push(ProductObservable::single(j, DictFn::Power(2)));
            obs.push(ProductObservable::single(j, DictFn::Tanh));
        }
        let cert = rp_sampled_certificate(&paths, &obs).unwrap();
        assert!(cert.is_positive(), "min {} thr {}", cert.min_eigenvalue, cert.threshold);
        let poly: Vec<_> = obs.iter().filter(|o| o.powers().is_some()).cloned().collect();
        let idx: Vec<usize> = (0..obs.len()).filter(|&i| obs[i].powers().is_some()).collect();
        let exact = wick_observable_gram(&m, &poly).unwrap();
        let se = cert.std_errors.as_ref().unwrap();
        let mut inside = 0;
        let mut total = 0;
        for (a, &ia) in idx.iter().enumerate() {
            for (b, &ib) in idx.iter().enumerate() {
                total += 1;
                if (cert.gram[(ia, ib)].re - exact[(a, b)]).abs() <= 3.0 * se[(ia, ib)] + 1e-15 {
                    inside += 1;
                }
            }
        }
        assert!(inside as f64 >= 0.9 * total as f64, "{inside}/{total}");
    }

    #[test]
    fn report_lists_verdict_and_witness() {
        let m = ou(8, 0.1, 1.0);
        let l = *m.lattice();
        let fam = vec![TestFunction::zero(l), TestFunction::spike(l, 5, 1.0).unwrap()];
        let cert = pd_gram_certificate(corrupted_functional(&m, 0.5), &fam, 1e-10).unwrap();
        let text = cert.to_report();
        assert!(text.contains("verdict = \"indefinite\""));
        assert!(text.contains("witness_re"));
        assert_eq!(text, cert.to_report());
    }
}
