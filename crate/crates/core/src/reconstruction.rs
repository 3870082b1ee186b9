//! Osterwalder–Schrader reconstruction on a finite basis of positive-time
//! functionals.
//!
//! The physical inner product is `⟨F, G⟩_J = E[conj(ΘF) G]`. Its Gram matrix
//! on the chosen basis is diagonalized, directions with eigenvalue at most
//! `null_tolerance · λ_max` are quotiented out, and the rest is rescaled to an
//! orthonormal basis of `K`. Operators on functionals (time shift,
//! multiplication) are compressed to `K` through the same form, so every
//! matrix entry is an exact Gaussian expectation.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{GaussianEuclideanMeasure, TestFunction, TimeLattice};
use crate::linalg::{self, C64};
use crate::positivity::reflect;
use crate::wick;

/// Default null-space cut for the J-Gram matrix, relative to its largest eigenvalue.
pub const DEFAULT_NULL_TOLERANCE: f64 = 1e-10;

/// `Π q(t_j)^{p_j}` over lattice indices, kept sorted with merged indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    factors: Vec<(usize, u32)>,
}

impl Monomial {
    pub fn one() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn new(factors: impl IntoIterator<Item = (usize, u32)>) -> Self {
        let mut merged: Vec<(usize, u32)> = Vec::new();
        for (j, p) in factors {
            if p == 0 {
                continue;
            }
            match merged.iter_mut().find(|(i, _)| *i == j) {
                Some(slot) => slot.1 += p,
                None => merged.push((j, p)),
            }
        }
        merged.sort_unstable();
        Self { factors: merged }
    }

    pub fn factors(&self) -> &[(usize, u32)] {
        &self.factors
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|f| f.1).sum()
    }

    pub fn shifted(&self, step: usize) -> Self {
        Self {
            factors: self.factors.iter().map(|&(j, p)| (j + step, p)).collect(),
        }
    }

    /// Shift towards earlier times; `None` if an index would go below zero.
    pub fn shifted_back(&self, step: usize) -> Option<Self> {
        let factors = self
            .factors
            .iter()
            .map(|&(j, p)| j.checked_sub(step).map(|i| (i, p)))
            .collect::<Option<Vec<_>>>()?;
        Some(Self { factors })
    }

    pub fn reflected(&self, lattice: &TimeLattice) -> Self {
        Self::new(self.factors.iter().map(|&(j, p)| (lattice.reflect_index(j), p)))
    }

    pub fn describe(&self) -> String {
        if self.factors.is_empty() {
            return "1".into();
        }
        self.factors
            .iter()
            .map(|&(j, p)| if p == 1 { format!("q[{j}]") } else { format!("q[{j}]^{p}") })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// A positive-time functional `F` of the path.
#[derive(Debug, Clone, PartialEq)]
pub enum ObservableFunctional {
    Monomial(Monomial),
    /// `F = e^{i q(f)}` with `f ∈ 𝒟₊`.
    Exponential(TestFunction),
}

impl ObservableFunctional {
    fn support(&self) -> Vec<usize> {
        match self {
            Self::Monomial(m) => m.factors.iter().map(|f| f.0).collect(),
            Self::Exponential(f) => f
                .coeffs()
                .iter()
                .enumerate()
                .filter(|(_, z)| z.norm() != 0.0)
                .map(|(j, _)| j)
                .collect(),
        }
    }

    fn validate(&self, lattice: &TimeLattice) -> Result<()> {
        if let Self::Exponential(f) = self {
            if f.lattice() != lattice {
                return Err(Error::LatticeMismatch);
            }
            if !f.in_dplus() || !f.is_real() {
                return Err(Error::Precondition("exponential functional needs a real f in D+".into()));
            }
        }
        if let Some(j) = self.support().into_iter().find(|&j| !lattice.is_positive(j)) {
            return Err(Error::Precondition(format!(
                "functional `{}` has support at non-positive time index {j}",
                self.describe()
            )));
        }
        Ok(())
    }

    fn shifted(&self, step: usize) -> Self {
        match self {
            Self::Monomial(m) => Self::Monomial(m.shifted(step)),
            Self::Exponential(f) => {
                let c = f.coeffs();
                Self::Exponential(f.map(|j, _| if j >= step { c[j - step] } else { C64::new(0.0, 0.0) }))
            }
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Monomial(m) => m.describe(),
            Self::Exponential(f) => format!(
                "exp(i q(f)), f = [{}]",
                linalg::row_text(f.real_coeffs())
            ),
        }
    }
}

/// Which functionals span `K₀`.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisSpec {
    pub max_degree: u32,
    /// Positive lattice indices at which monomials live.
    pub times: Vec<usize>,
    pub exponentials: Vec<TestFunction>,
}

impl BasisSpec {
    pub fn monomials(max_degree: u32, times: Vec<usize>) -> Self {
        Self {
            max_degree,
            times,
            exponentials: Vec::new(),
        }
    }

    /// Constant first, then monomials by total degree, then exponentials.
    pub fn functionals(&self) -> Vec<ObservableFunctional> {
        let mut times = self.times.clone();
        times.sort_unstable();
        times.dedup();
        let mut all: Vec<Monomial> = Vec::new();
        let mut exps = vec![0u32; times.len()];
        enumerate_exponents(&mut exps, 0, self.max_degree, &mut |e| {
            all.push(Monomial::new(times.iter().copied().zip(e.iter().copied())));
        });
        all.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| a.cmp(b)));
        all.dedup();
        let mut out: Vec<ObservableFunctional> = all.into_iter().map(ObservableFunctional::Monomial).collect();
        out.extend(self.exponentials.iter().cloned().map(ObservableFunctional::Exponential));
        out
    }
}

fn enumerate_exponents(exps: &mut Vec<u32>, pos: usize, budget: u32, emit: &mut impl FnMut(&[u32])) {
    if pos == exps.len() {
        emit(exps);
        return;
    }
    for p in 0..=budget {
        exps[pos] = p;
        enumerate_exponents(exps, pos + 1, budget - p, emit);
    }
    exps[pos] = 0;
}

/// `E[conj(Θ left) · middle · right]`.
fn j_pair(
    measure: &GaussianEuclideanMeasure,
    left: &ObservableFunctional,
    middle: &[(usize, u32)],
    right: &ObservableFunctional,
) -> C64 {
    let lattice = measure.lattice();
    let n = lattice.n_points();
    let h = lattice.spacing();
    let mut powers: Vec<(usize, u32)> = middle.to_vec();
    let mut phase = vec![0.0; n];
    match left {
        ObservableFunctional::Monomial(m) => {
            powers.extend(m.factors.iter().map(|&(j, p)| (lattice.reflect_index(j), p)));
        }
        ObservableFunctional::Exponential(f) => {
            for (j, z) in reflect(f).coeffs().iter().enumerate() {
                phase[j] -= h * z.re;
            }
        }
    }
    match right {
        ObservableFunctional::Monomial(m) => powers.extend_from_slice(&m.factors),
        ObservableFunctional::Exponential(f) => {
            for (j, z) in f.coeffs().iter().enumerate() {
                phase[j] += h * z.re;
            }
        }
    }
    wick::expectation_with_phase(measure.covariance(), &powers, &phase)
}

/// A polynomial `A(x) = Σ_p c_p x^p` evaluated at lattice index `index`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyObservable {
    pub index: usize,
    pub coeffs: Vec<f64>,
}

impl PolyObservable {
    /// `x^p` at `index`.
    pub fn power(index: usize, p: u32) -> Self {
        let mut coeffs = vec![0.0; p as usize + 1];
        coeffs[p as usize] = 1.0;
        Self { index, coeffs }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    fn describe(&self) -> String {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(p, c)| match p {
                0 => format!("{c}"),
                1 => format!("{c}*q[{}]", self.index),
                _ => format!("{c}*q[{}]^{p}", self.index),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReconstructedSpace {
    pub lattice: TimeLattice,
    pub basis: Vec<ObservableFunctional>,
    pub j_gram: DMatrix<C64>,
    /// Ascending eigenvalues of `j_gram`.
    pub j_eigenvalues: Vec<f64>,
    pub null_tolerance: f64,
    pub physical_dim: usize,
    /// `K₀` coefficients → orthonormal `K` coordinates (`physical_dim × |basis|`).
    pub metric_factor: DMatrix<C64>,
    /// Orthonormal `K` basis expressed in `K₀` coefficients (`|basis| × physical_dim`).
    pub embedding: DMatrix<C64>,
    /// `K` coordinates of the constant functional, when it is in the basis.
    pub vacuum: Option<DVector<C64>>,
}

/// Builds `K` from the functionals of `spec`.
pub fn build_k0(measure: &GaussianEuclideanMeasure, spec: &BasisSpec, null_tolerance: f64) -> Result<ReconstructedSpace> {
    build_k0_from_basis(measure, spec.functionals(), null_tolerance)
}

pub fn build_k0_from_basis(
    measure: &GaussianEuclideanMeasure,
    basis: Vec<ObservableFunctional>,
    null_tolerance: f64,
) -> Result<ReconstructedSpace> {
    if basis.is_empty() {
        return Err(Error::Precondition("basis must contain at least one functional".into()));
    }
    let lattice = *measure.lattice();
    for b in &basis {
        b.validate(&lattice)?;
    }
    let n = basis.len();
    let mut j_gram = DMatrix::zeros(n, n);
    for k in 0..n {
        for l in 0..n {
            j_gram[(k, l)] = j_pair(measure, &basis[k], &[], &basis[l]);
        }
    }
    let asymmetry = linalg::relative_asymmetry(&j_gram);
    if asymmetry > 1e-10 {
        return Err(Error::NotHermitian { asymmetry });
    }
    let (values, vectors) = linalg::hermitian_eigen(&j_gram);
    let max = values[n - 1];
    if max <= 0.0 {
        return Err(Error::DegenerateSpace);
    }
    if values[0] < -null_tolerance * max {
        return Err(Error::RpViolation {
            min_eigenvalue: values[0],
        });
    }
    let kept: Vec<usize> = (0..n).filter(|&k| values[k] > null_tolerance * max).collect();
    let dim = kept.len();
    if dim == 0 {
        return Err(Error::DegenerateSpace);
    }
    let mut embedding = DMatrix::zeros(n, dim);
    let mut metric_factor = DMatrix::zeros(dim, n);
    // Highest eigenvalue first so the K coordinates are ordered by weight.
    for (col, &k) in kept.iter().rev().enumerate() {
        let root = values[k].sqrt();
        for r in 0..n {
            embedding[(r, col)] = vectors[(r, k)] / root;
            metric_factor[(col, r)] = vectors[(r, k)].conj() * root;
        }
    }
    let vacuum = basis
        .iter()
        .position(|b| matches!(b, ObservableFunctional::Monomial(m) if m.factors.is_empty()))
        .map(|k| metric_factor.column(k).into_owned());
    Ok(ReconstructedSpace {
        lattice,
        basis,
        j_gram,
        j_eigenvalues: values,
        null_tolerance,
        physical_dim: dim,
        metric_factor,
        embedding,
        vacuum,
    })
}

impl ReconstructedSpace {
    fn max_support(&self) -> usize {
        self.basis
            .iter()
            .flat_map(ObservableFunctional::support)
            .max()
            .unwrap_or(self.lattice.first_positive())
    }

    fn min_support(&self) -> usize {
        self.basis
            .iter()
            .flat_map(ObservableFunctional::support)
            .min()
            .unwrap_or(self.lattice.first_positive())
    }

    /// Largest lattice shift that keeps every basis functional on the lattice.
    pub fn max_step(&self) -> usize {
        self.lattice.n_points() - 1 - self.max_support()
    }

    /// `E^H M E` with `M_kl = E[conj(Θb_k) · middle · b'_l]`, `b'_l = right(b_l)`.
    fn compress(
        &self,
        measure: &GaussianEuclideanMeasure,
        middle: &[(usize, u32)],
        right: impl Fn(&ObservableFunctional) -> ObservableFunctional,
    ) -> DMatrix<C64> {
        let n = self.basis.len();
        let moved: Vec<ObservableFunctional> = self.basis.iter().map(right).collect();
        let mut m = DMatrix::zeros(n, n);
        for k in 0..n {
            for l in 0..n {
                m[(k, l)] = j_pair(measure, &self.basis[k], middle, &moved[l]);
            }
        }
        self.embedding.adjoint() * m * &self.embedding
    }

    fn require_vacuum(&self) -> Result<&DVector<C64>> {
        self.vacuum
            .as_ref()
            .ok_or_else(|| Error::Precondition("basis does not contain the constant functional".into()))
    }

    /// Structured text: basis, J-Gram, its spectrum and, if given, the
    /// Hamiltonian spectrum.
    pub fn to_report(&self, hamiltonian: Option<&Hamiltonian>) -> String {
        let re = DMatrix::from_fn(self.j_gram.nrows(), self.j_gram.ncols(), |i, j| self.j_gram[(i, j)].re);
        let im = DMatrix::from_fn(self.j_gram.nrows(), self.j_gram.ncols(), |i, j| self.j_gram[(i, j)].im);
        let doc = SpaceReport {
            n_points: self.lattice.n_points(),
            spacing: linalg::sci17(self.lattice.spacing()),
            basis: self.basis.iter().map(ObservableFunctional::describe).collect(),
            null_tolerance: linalg::sci17(self.null_tolerance),
            physical_dim: self.physical_dim,
            j_eigenvalues: linalg::row_text(self.j_eigenvalues.iter().copied()),
            j_gram_re: linalg::matrix_rows(&re),
            j_gram_im: linalg::matrix_rows(&im),
            raw_spectrum: hamiltonian.map(|h| linalg::row_text(h.raw_spectrum.iter().copied())),
            shifted_spectrum: hamiltonian.map(|h| linalg::row_text(h.shifted_spectrum.iter().copied())),
        };
        toml::to_string(&doc).expect("space report serializes")
    }
}

#[derive(Serialize)]
struct SpaceReport {
    n_points: usize,
    spacing: String,
    basis: Vec<String>,
    null_tolerance: String,
    physical_dim: usize,
    j_eigenvalues: String,
    j_gram_re: Vec<String>,
    j_gram_im: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    raw_spectrum: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    shifted_spectrum: Option<String>,
}

/// Time shift by `step` lattice sites, compressed to `K`.
pub fn transfer_operator(space: &ReconstructedSpace, measure: &GaussianEuclideanMeasure, step: usize) -> Result<DMatrix<C64>> {
    if measure.lattice() != &space.lattice {
        return Err(Error::LatticeMismatch);
    }
    let max_step = space.max_step();
    if step > max_step {
        return Err(Error::Range { step, max_step });
    }
    if step == 0 {
        return Ok(DMatrix::identity(space.physical_dim, space.physical_dim));
    }
    Ok(space.compress(measure, &[], |b| b.shifted(step)))
}

/// Hermitian generator of the transfer semigroup.
#[derive(Debug, Clone)]
pub struct Hamiltonian {
    pub matrix: DMatrix<C64>,
    /// `-ln λ / τ` for the transfer eigenvalues, ascending.
    pub raw_spectrum: Vec<f64>,
    /// `raw_spectrum` minus its minimum.
    pub shifted_spectrum: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
    pub step_time: f64,
}

/// `Ĥ = -(1/τ) log T` for a transfer matrix over time `τ = step_time`.
pub fn extract_hamiltonian(transfer: &DMatrix<C64>, step_time: f64) -> Result<Hamiltonian> {
    if !(step_time.is_finite() && step_time > 0.0) {
        return Err(Error::Domain(format!("step time must be positive, got {step_time}")));
    }
    let asymmetry = linalg::relative_asymmetry(transfer);
    if asymmetry > 1e-8 {
        return Err(Error::NotHermitian { asymmetry });
    }
    let (values, vectors) = linalg::hermitian_eigen(transfer);
    if let Some(&bad) = values.iter().find(|&&v| v <= 0.0) {
        return Err(Error::NonPositiveTransfer(bad));
    }
    let d = values.len();
    // Largest transfer eigenvalue = lowest energy; reverse to ascending energy.
    let mut eigenvectors = DMatrix::zeros(d, d);
    let mut raw = Vec::with_capacity(d);
    for (dst, src) in (0..d).rev().enumerate() {
        raw.push(-values[src].ln() / step_time);
        eigenvectors.set_column(dst, &vectors.column(src));
    }
    let ground = raw.first().copied().unwrap_or(0.0);
    let shifted = raw.iter().map(|e| e - ground).collect();
    let diag = DMatrix::from_diagonal(&DVector::from_iterator(d, raw.iter().map(|&e| C64::new(e, 0.0))));
    let matrix = &eigenvectors * diag * eigenvectors.adjoint();
    Ok(Hamiltonian {
        matrix,
        raw_spectrum: raw,
        shifted_spectrum: shifted,
        eigenvectors,
        step_time,
    })
}

impl Hamiltonian {
    fn spectral_function(&self, f: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let d = self.raw_spectrum.len();
        let diag = DMatrix::from_diagonal(&DVector::from_iterator(d, self.raw_spectrum.iter().map(|&e| f(e))));
        &self.eigenvectors * diag * self.eigenvectors.adjoint()
    }

    /// `e^{-sĤ}`.
    pub fn evolve(&self, s: f64) -> DMatrix<C64> {
        self.spectral_function(|e| C64::new((-s * e).exp(), 0.0))
    }

    /// `e^{itĤ}`.
    pub fn unitary(&self, t: f64) -> DMatrix<C64> {
        self.spectral_function(|e| C64::new(0.0, t * e).exp())
    }

    /// `‖U^H U - I‖_max` for `U = e^{itĤ}`.
    pub fn unitarity_residual(&self, t: f64) -> f64 {
        let u = self.unitary(t);
        let d = u.nrows();
        (u.adjoint() * &u - DMatrix::<C64>::identity(d, d))
            .iter()
            .fold(0.0_f64, |a, z| a.max(z.norm()))
    }

    /// `‖Ĥ Ω‖` for a vacuum vector.
    pub fn vacuum_residual(&self, vacuum: &DVector<C64>) -> f64 {
        (&self.matrix * vacuum).norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    pub samples: usize,
    pub seed: u64,
}

/// The three evaluations of a time-ordered correlation.
#[derive(Debug, Clone, PartialEq)]
pub struct NpointReport {
    pub label: String,
    /// `⟨Ω, Â_1 e^{-(t_2-t_1)Ĥ} Â_2 ⋯ Â_n Ω⟩`.
    pub lhs: C64,
    /// Wick evaluation of `E[Π A_k(q(t_k))]`.
    pub rhs_exact: f64,
    /// Monte-Carlo mean and standard error.
    pub rhs_mc: Option<(f64, f64)>,
}

impl NpointReport {
    pub fn relative_error(&self) -> f64 {
        (self.lhs - self.rhs_exact).norm() / self.rhs_exact.abs().max(f64::MIN_POSITIVE)
    }

    /// `|mc - exact| / σ`.
    pub fn mc_z_score(&self) -> Option<f64> {
        self.rhs_mc.map(|(mean, se)| {
            let diff = (mean - self.rhs_exact).abs();
            if se > 0.0 {
                diff / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
    }

    pub const CSV_HEADER: &'static str = "case,lhs_re,lhs_im,rhs_exact,rhs_mc,sigma";
    pub const CSV_HEADER_EXACT: &'static str = "case,lhs_re,lhs_im,rhs_exact";

    /// Row matching `CSV_HEADER`, or `CSV_HEADER_EXACT` without an MC arm.
    pub fn csv_row(&self) -> String {
        let exact = format!(
            "{},{},{},{}",
            self.label,
            linalg::sci17(self.lhs.re),
            linalg::sci17(self.lhs.im),
            linalg::sci17(self.rhs_exact)
        );
        match self.rhs_mc {
            Some((m, s)) => format!("{exact},{},{}", linalg::sci17(m), linalg::sci17(s)),
            None => exact,
        }
    }
}

/// Wick evaluation of `E[Π_k A_k(q(t_k))]`.
pub fn wick_correlation(measure: &GaussianEuclideanMeasure, observables: &[PolyObservable]) -> f64 {
    fn expand(
        obs: &[PolyObservable],
        pos: usize,
        weight: f64,
        powers: &mut Vec<(usize, u32)>,
        cov: &DMatrix<f64>,
    ) -> f64 {
        if pos == obs.len() {
            return weight * wick::moment(cov, powers);
        }
        let mut acc = 0.0;
        for (p, &c) in obs[pos].coeffs.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            powers.push((obs[pos].index, p as u32));
            acc += expand(obs, pos + 1, weight * c, powers, cov);
            powers.pop();
        }
        acc
    }
    expand(observables, 0, 1.0, &mut Vec::new(), measure.covariance())
}

/// Multiplication by `A(q(t_ref))`, compressed to `K`, where `t_ref` is the
/// earliest basis time.
pub fn multiplication_operator(
    space: &ReconstructedSpace,
    measure: &GaussianEuclideanMeasure,
    coeffs: &[f64],
) -> DMatrix<C64> {
    let r = space.min_support();
    let d = space.physical_dim;
    let mut out = DMatrix::zeros(d, d);
    for (p, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let m = space.compress(measure, &[(r, p as u32)], |b| b.clone());
        out += m * C64::new(c, 0.0);
    }
    out
}

/// Evaluates both sides of the n-point identity. Observables must be ordered
/// by time; only time differences enter the left-hand side.
pub fn verify_npoint_identity(
    space: &ReconstructedSpace,
    measure: &GaussianEuclideanMeasure,
    hamiltonian: &Hamiltonian,
    observables: &[PolyObservable],
    mc: Option<McParams>,
    label: impl Into<String>,
) -> Result<NpointReport> {
    if observables.is_empty() {
        return Err(Error::Precondition("need at least one observable".into()));
    }
    if observables.windows(2).any(|w| w[1].index < w[0].index) {
        return Err(Error::Precondition("observable times must be ordered".into()));
    }
    let n_points = measure.lattice().n_points();
    if let Some(o) = observables.iter().find(|o| o.index >= n_points) {
        return Err(Error::Dimension {
            expected: n_points,
            got: o.index + 1,
        });
    }
    let omega = space.require_vacuum()?;
    let h = measure.lattice().spacing();
    let last = observables.len() - 1;
    let mut psi = multiplication_operator(space, measure, &observables[last].coeffs) * omega;
    for k in (0..last).rev() {
        let gap = (observables[k + 1].index - observables[k].index) as f64 * h;
        psi = hamiltonian.evolve(gap) * psi;
        psi = multiplication_operator(space, measure, &observables[k].coeffs) * psi;
    }
    let lhs = omega.dotc(&psi);
    let rhs_exact = wick_correlation(measure, observables);
    let rhs_mc = match mc {
        Some(params) => {
            let paths = measure.sample_paths(params.samples, params.seed)?;
            let values: Vec<f64> = paths
                .iter()
                .map(|p| observables.iter().map(|o| o.eval(p.values[o.index])).product())
                .collect();
            Some(mean_and_std_error(&values))
        }
        None => None,
    };
    Ok(NpointReport {
        label: label.into(),
        lhs,
        rhs_exact,
        rhs_mc,
    })
}

pub fn mean_and_std_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Describes an n-point case for tables.
pub fn describe_observables(observables: &[PolyObservable]) -> String {
    observables
        .iter()
        .map(PolyObservable::describe)
        .collect::<Vec<_>>()
        .join(" ")
}

/// R1/R2 for time shifts acting on single-time monomials in a symmetric window.
#[derive(Debug, Clone, PartialEq)]
pub struct R1R2Report {
    /// `J² = id` holds as an exact permutation of the basis.
    pub r1_exact: bool,
    /// `(shift, max|⟨b, JU(t)c⟩ - ⟨b, U(-t)Jc⟩| / max|⟨b, JU(t)c⟩|)`.
    pub r2_residuals: Vec<(usize, f64)>,
    /// Relative deviation of `⟨Jb, Jc⟩` from `⟨b, c⟩`.
    pub unitarity_residual: f64,
}

impl R1R2Report {
    pub fn max_r2_residual(&self) -> f64 {
        self.r2_residuals.iter().fold(0.0_f64, |a, r| a.max(r.1))
    }
}

/// Checks `J² = id` and `J U(t) = U(-t) J` on `L²(μ)` functionals `q(t_j)^d`,
/// `0 ≤ d ≤ max_degree`, for `j` within `half_width` sites of the origin on
/// either side. `j_signs`, if given, multiplies `J` basis-vector-wise (used
/// to build a broken reflection).
pub fn check_r1_r2(
    measure: &GaussianEuclideanMeasure,
    half_width: usize,
    max_degree: u32,
    shifts: &[usize],
    j_signs: Option<&[f64]>,
) -> Result<R1R2Report> {
    let lattice = *measure.lattice();
    let fp = lattice.first_positive();
    if half_width == 0 || half_width > fp {
        return Err(Error::Precondition(format!(
            "window half-width must be in 1..={fp}, got {half_width}"
        )));
    }
    let window: Vec<usize> = (fp - half_width..fp + half_width).collect();
    let basis = window_basis(&window, max_degree);
    if let Some(s) = j_signs {
        if s.len() != basis.len() {
            return Err(Error::Dimension {
                expected: basis.len(),
                got: s.len(),
            });
        }
    }
    let index_of = |m: &Monomial| basis.iter().position(|b| b == m);
    let sign = |m: &Monomial| -> f64 {
        match (j_signs, index_of(m)) {
            (Some(s), Some(i)) => s[i],
            _ => 1.0,
        }
    };
    let j_of = |m: &Monomial| m.reflected(&lattice);

    let r1_exact = basis
        .iter()
        .all(|b| index_of(&j_of(b)).is_some() && j_of(&j_of(b)) == *b);

    let cov = measure.covariance();
    let pair = |a: &Monomial, b: &Monomial| -> f64 {
        let mut powers = a.factors.clone();
        powers.extend_from_slice(&b.factors);
        wick::moment(cov, &powers)
    };
    let in_window = |m: &Monomial| m.factors.iter().all(|(j, _)| window.contains(j));

    let mut unitarity = 0.0_f64;
    let mut scale = 0.0_f64;
    for a in &basis {
        for b in &basis {
            let direct = pair(a, b);
            scale = scale.max(direct.abs());
            unitarity = unitarity.max((pair(&j_of(a), &j_of(b)) - direct).abs());
        }
    }

    let mut r2_residuals = Vec::with_capacity(shifts.len());
    for &k in shifts {
        let mut worst = 0.0_f64;
        let mut size = 0.0_f64;
        for c in &basis {
            let shifted = c.shifted(k);
            if !in_window(&shifted) {
                continue;
            }
            // J U(k) c
            let lhs_vec = j_of(&shifted);
            let lhs_sign = sign(&shifted);
            // U(-k) J c
            let Some(rhs_vec) = j_of(c).shifted_back(k) else { continue };
            let rhs_sign = sign(c);
            for a in &basis {
                let l = lhs_sign * pair(a, &lhs_vec);
                let r = rhs_sign * pair(a, &rhs_vec);
                size = size.max(l.abs());
                worst = worst.max((l - r).abs());
            }
        }
        r2_residuals.push((k, if size > 0.0 { worst / size } else { 0.0 }));
    }
    Ok(R1R2Report {
        r1_exact,
        r2_residuals,
        unitarity_residual: if scale > 0.0 { unitarity / scale } else { 0.0 },
    })
}

/// Basis used by [`check_r1_r2`]: the constant, then `q(t_j)^d` by site.
pub fn window_basis(window: &[usize], max_degree: u32) -> Vec<Monomial> {
    let mut basis = vec![Monomial::one()];
    for &j in window {
        for d in 1..=max_degree {
            basis.push(Monomial::new([(j, d)]));
        }
    }
    basis
}
