//! Finite time lattices, test functions and centered Gaussian path measures.
//!
//! The lattice `t_j = (j + 1/2 - n/2)·h` is symmetric under `t ↦ -t` and has
//! no point at the origin, so time reflection is the index permutation
//! `j ↦ n - 1 - j` and the positive half-line is exactly `j ≥ n/2`.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Relative PSD tolerance used for covariances and Gram matrices.
pub const DEFAULT_PSD_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeLattice {
    n_points: usize,
    spacing: f64,
}

impl TimeLattice {
    pub fn new(n_points: usize, spacing: f64) -> Result<Self> {
        if n_points == 0 || !n_points.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "lattice needs a positive even number of points, got {n_points}"
            )));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::Domain(format!(
                "lattice spacing must be positive, got {spacing}"
            )));
        }
        Ok(Self { n_points, spacing })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn time(&self, j: usize) -> f64 {
        (j as f64 + 0.5 - self.n_points as f64 / 2.0) * self.spacing
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.time(j)).collect()
    }

    /// Index of `-t_j`.
    pub fn reflect_index(&self, j: usize) -> usize {
        self.n_points - 1 - j
    }

    /// First index with `t_j > 0`.
    pub fn first_positive(&self) -> usize {
        self.n_points / 2
    }

    pub fn is_positive(&self, j: usize) -> bool {
        j >= self.first_positive() && j < self.n_points
    }

    /// `|t_j - t_k|`, computed from the index gap so Toeplitz kernels come out
    /// exactly shift-invariant.
    pub fn distance(&self, j: usize, k: usize) -> f64 {
        j.abs_diff(k) as f64 * self.spacing
    }
}

/// Coefficient vector on a lattice. `is_real` and `in_dplus` are derived
/// from the coefficients at construction so they cannot drift out of sync.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    lattice: TimeLattice,
    coeffs: Vec<C64>,
    is_real: bool,
    in_dplus: bool,
}

impl TestFunction {
    pub fn new(lattice: TimeLattice, coeffs: Vec<C64>) -> Result<Self> {
        if coeffs.len() != lattice.n_points() {
            return Err(Error::Dimension {
                expected: lattice.n_points(),
                got: coeffs.len(),
            });
        }
        let is_real = coeffs.iter().all(|z| z.im == 0.0);
        let in_dplus = is_real
            && coeffs
                .iter()
                .enumerate()
                .all(|(j, z)| lattice.is_positive(j) || z.re == 0.0);
        Ok(Self {
            lattice,
            coeffs,
            is_real,
            in_dplus,
        })
    }

    pub fn real(lattice: TimeLattice, coeffs: &[f64]) -> Result<Self> {
        Self::new(lattice, coeffs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zero(lattice: TimeLattice) -> Self {
        Self::new(lattice, vec![C64::new(0.0, 0.0); lattice.n_points()])
            .expect("length matches lattice")
    }

    /// Unit-height spike `value` at index `j`.
    pub fn spike(lattice: TimeLattice, j: usize, value: f64) -> Result<Self> {
        if j >= lattice.n_points() {
            return Err(Error::Dimension {
                expected: lattice.n_points(),
                got: j + 1,
            });
        }
        let mut c = vec![0.0; lattice.n_points()];
        c[j] = value;
        Self::real(lattice, &c)
    }

    pub fn lattice(&self) -> &TimeLattice {
        &self.lattice
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn is_real(&self) -> bool {
        self.is_real
    }

    pub fn in_dplus(&self) -> bool {
        self.in_dplus
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|z| *z == C64::new(0.0, 0.0))
    }

    /// Real parts; meaningful when `is_real()`.
    pub fn real_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(|z| z.re).collect()
    }

    pub fn map(&self, f: impl Fn(usize, C64) -> C64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &z)| f(j, z))
            .collect();
        Self::new(self.lattice, coeffs).expect("length preserved")
    }

    pub fn conj(&self) -> Self {
        self.map(|_, z| z.conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|_, z| z * s)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_lattice(other)?;
        Ok(self.map(|j, z| z - other.coeffs[j]))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_lattice(other)?;
        Ok(self.map(|j, z| z + other.coeffs[j]))
    }

    fn check_lattice(&self, other: &Self) -> Result<()> {
        if self.lattice != other.lattice {
            return Err(Error::LatticeMismatch);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub lattice: TimeLattice,
    pub values: Vec<f64>,
}

impl PathSample {
    /// `q(f) = h Σ_j f_j q(t_j)`.
    pub fn pairing(&self, f: &TestFunction) -> Result<C64> {
        if *f.lattice() != self.lattice {
            return Err(Error::LatticeMismatch);
        }
        let h = self.lattice.spacing();
        Ok(f
            .coeffs()
            .iter()
            .zip(&self.values)
            .map(|(c, q)| c * q)
            .sum::<C64>()
            * h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum KernelKind {
    /// `e^{-m|t-s|} / 2m`
    OrnsteinUhlenbeck,
    /// `h^{-1} (-Δ_h + m²)^{-1}` with Dirichlet ends.
    LatticeFreeField,
    /// `cos(ω|t-s|) e^{-m|t-s|} / 2m`: stationary, reflection symmetric, PSD,
    /// and not reflection positive once ω is large enough.
    DampedCosine { omega: f64 },
    /// Covariance supplied as a dense matrix.
    Dense,
}

/// Centered Gaussian measure on `ℝ^n` viewed as a path measure on the lattice.
#[derive(Debug, Clone)]
pub struct GaussianEuclideanMeasure {
    lattice: TimeLattice,
    kernel: KernelKind,
    mass: f64,
    covariance: DMatrix<f64>,
    factor: OnceLock<std::result::Result<DMatrix<f64>, f64>>,
}

fn check_mass(mass: f64) -> Result<()> {
    if !(mass.is_finite() && mass > 0.0) {
        return Err(Error::Domain(format!("mass must be positive, got {mass}")));
    }
    Ok(())
}

impl GaussianEuclideanMeasure {
    /// Ornstein–Uhlenbeck covariance `C(t,s) = e^{-m|t-s|}/(2m)` on the grid.
    pub fn ou(mass: f64, lattice: TimeLattice) -> Result<Self> {
        check_mass(mass)?;
        let n = lattice.n_points();
        let cov = DMatrix::from_fn(n, n, |j, k| {
            (-mass * lattice.distance(j, k)).exp() / (2.0 * mass)
        });
        Self::from_parts(lattice, KernelKind::OrnsteinUhlenbeck, mass, cov)
    }

    /// Nearest-neighbour lattice field with Dirichlet ends. The precision
    /// matrix is `h(-Δ_h + m²)`, so the covariance converges to the
    /// Ornstein–Uhlenbeck kernel as `h → 0` away from the ends.
    pub fn lattice_free_field(mass: f64, lattice: TimeLattice) -> Result<Self> {
        check_mass(mass)?;
        let n = lattice.n_points();
        let h = lattice.spacing();
        let mut precision = DMatrix::<f64>::zeros(n, n);
        for j in 0..n {
            precision[(j, j)] = h * (2.0 / (h * h) + mass * mass);
            if j + 1 < n {
                precision[(j, j + 1)] = -1.0 / h;
                precision[(j + 1, j)] = -1.0 / h;
            }
        }
        let chol = precision.cholesky().ok_or_else(|| {
            Error::Domain("free-field precision matrix failed Cholesky factorization".into())
        })?;
        let cov = chol.inverse();
        let cov = (&cov + cov.transpose()) * 0.5;
        Self::from_parts(lattice, KernelKind::LatticeFreeField, mass, cov)
    }

    pub fn damped_cosine(mass: f64, omega: f64, lattice: TimeLattice) -> Result<Self> {
        check_mass(mass)?;
        if !omega.is_finite() {
            return Err(Error::Domain("omega must be finite".into()));
        }
        let n = lattice.n_points();
        let cov = DMatrix::from_fn(n, n, |j, k| {
            let d = lattice.distance(j, k);
            (omega * d).cos() * (-mass * d).exp() / (2.0 * mass)
        });
        Self::from_parts(lattice, KernelKind::DampedCosine { omega }, mass, cov)
    }

    /// Wraps a caller-supplied covariance after checking symmetry and PSD.
    pub fn from_dense(lattice: TimeLattice, mass: f64, covariance: DMatrix<f64>) -> Result<Self> {
        check_mass(mass)?;
        Self::from_parts(lattice, KernelKind::Dense, mass, covariance)
    }

    fn from_parts(
        lattice: TimeLattice,
        kernel: KernelKind,
        mass: f64,
        covariance: DMatrix<f64>,
    ) -> Result<Self> {
        let n = lattice.n_points();
        if covariance.nrows() != n || covariance.ncols() != n {
            return Err(Error::Dimension {
                expected: n,
                got: covariance.nrows(),
            });
        }
        let measure = Self {
            lattice,
            kernel,
            mass,
            covariance,
            factor: OnceLock::new(),
        };
        measure.validate(DEFAULT_PSD_TOLERANCE)?;
        Ok(measure)
    }

    /// Symmetry to 1e-12 relative and `λ_min ≥ -tol·‖C‖₂`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let c = &self.covariance;
        let scale = c.amax();
        let asym = (c - c.transpose()).amax();
        if scale > 0.0 && asym > 1e-12 * scale {
            return Err(Error::NotHermitian {
                asymmetry: asym / scale,
            });
        }
        let min = self.min_eigenvalue();
        if min < -tol * self.norm() {
            return Err(Error::NotPsd {
                min_eigenvalue: min,
            });
        }
        Ok(())
    }

    pub fn lattice(&self) -> &TimeLattice {
        &self.lattice
    }

    pub fn kernel(&self) -> KernelKind {
        self.kernel
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    pub fn norm(&self) -> f64 {
        linalg::spectral_norm(&self.covariance)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::symmetric_eigen(&self.covariance).0[0]
    }

    /// Complex bilinear form `B(f,g) = h² Σ f_j C_jk g_k` (no conjugation).
    pub fn bilinear(&self, f: &TestFunction, g: &TestFunction) -> Result<C64> {
        if *f.lattice() != self.lattice || *g.lattice() != self.lattice {
            return Err(Error::LatticeMismatch);
        }
        let h = self.lattice.spacing();
        let n = self.lattice.n_points();
        let mut acc = C64::new(0.0, 0.0);
        for j in 0..n {
            let fj = f.coeffs()[j];
            if fj == C64::new(0.0, 0.0) {
                continue;
            }
            let mut row = C64::new(0.0, 0.0);
            for k in 0..n {
                row += g.coeffs()[k] * self.covariance[(j, k)];
            }
            acc += fj * row;
        }
        Ok(acc * (h * h))
    }

    /// `S(f) = ∫ e^{i q(f)} dμ(q) = exp(-B(f,f)/2)`.
    pub fn generating_functional(&self, f: &TestFunction) -> Result<C64> {
        if f.is_zero() {
            if *f.lattice() != self.lattice {
                return Err(Error::LatticeMismatch);
            }
            return Ok(C64::new(1.0, 0.0));
        }
        Ok((-0.5 * self.bilinear(f, f)?).exp())
    }

    /// Symmetric factor `L` with `L Lᵀ = C`: Cholesky when it succeeds, else
    /// the eigenvalue square root with round-off negatives clamped.
    fn factor(&self) -> Result<&DMatrix<f64>> {
        let cached = self.factor.get_or_init(|| {
            if let Some(ch) = self.covariance.clone().cholesky() {
                return Ok(ch.l());
            }
            let (values, vectors) = linalg::symmetric_eigen(&self.covariance);
            if values[0] < -DEFAULT_PSD_TOLERANCE * self.norm() {
                return Err(values[0]);
            }
            let roots = DVector::from_iterator(values.len(), values.iter().map(|v| v.max(0.0).sqrt()));
            Ok(vectors * DMatrix::from_diagonal(&roots))
        });
        cached.as_ref().map_err(|&min_eigenvalue| Error::NotPsd { min_eigenvalue })
    }

    /// Draws `count` paths. Path `i` uses a ChaCha8 stream `(seed, stream = i)`,
    /// so output is independent of thread count.
    pub fn sample_paths(&self, count: usize, seed: u64) -> Result<Vec<PathSample>> {
        if count == 0 {
            return Err(Error::Precondition("sample count must be at least 1".into()));
        }
        let l = self.factor()?;
        let n = self.lattice.n_points();
        let lattice = self.lattice;
        Ok((0..count)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let z = DVector::<f64>::from_iterator(
                    n,
                    (0..n).map(|_| StandardNormal.sample(&mut rng)),
                );
                PathSample {
                    lattice,
                    values: (l * z).iter().copied().collect(),
                }
            })
            .collect())
    }

    /// Shift invariance `C_{j,k} = C_{j+1,k+1}`.
    pub fn check_stationarity(&self, tol: f64) -> ShapeCheck {
        let n = self.lattice.n_points();
        let mut worst = 0.0_f64;
        for j in 0..n - 1 {
            for k in 0..n - 1 {
                worst = worst.max((self.covariance[(j, k)] - self.covariance[(j + 1, k + 1)]).abs());
            }
        }
        ShapeCheck::new(worst, tol * self.norm())
    }

    /// `C(θt_j, θt_k) = C(t_j, t_k)`.
    pub fn check_time_reflection_symmetry(&self, tol: f64) -> ShapeCheck {
        let n = self.lattice.n_points();
        let mut worst = 0.0_f64;
        for j in 0..n {
            for k in 0..n {
                let r = self.covariance[(self.lattice.reflect_index(j), self.lattice.reflect_index(k))];
                worst = worst.max((r - self.covariance[(j, k)]).abs());
            }
        }
        ShapeCheck::new(worst, tol * self.norm())
    }

    pub fn to_document(&self, include_covariance: bool) -> MeasureDocument {
        MeasureDocument {
            n_points: self.lattice.n_points(),
            spacing: self.lattice.spacing(),
            mass: self.mass,
            kernel: self.kernel,
            covariance: include_covariance.then(|| linalg::matrix_rows(&self.covariance)),
        }
    }

    pub fn from_document(doc: &MeasureDocument) -> Result<Self> {
        let lattice = TimeLattice::new(doc.n_points, doc.spacing)?;
        if let Some(rows) = &doc.covariance {
            let cov = linalg::matrix_from_rows(rows)?;
            check_mass(doc.mass)?;
            return Self::from_parts(lattice, doc.kernel, doc.mass, cov);
        }
        match doc.kernel {
            KernelKind::OrnsteinUhlenbeck => Self::ou(doc.mass, lattice),
            KernelKind::LatticeFreeField => Self::lattice_free_field(doc.mass, lattice),
            KernelKind::DampedCosine { omega } => Self::damped_cosine(doc.mass, omega, lattice),
            KernelKind::Dense => Err(Error::Parse(
                "dense kernel requires an explicit covariance".into(),
            )),
        }
    }
}

/// Outcome of an entrywise structural check on a covariance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShapeCheck {
    pub holds: bool,
    pub max_deviation: f64,
    pub threshold: f64,
}

impl ShapeCheck {
    fn new(max_deviation: f64, threshold: f64) -> Self {
        Self {
            holds: max_deviation <= threshold,
            max_deviation,
            threshold,
        }
    }
}

/// Text form of a measure. Covariance rows are space-separated decimals with
/// 17 significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureDocument {
    pub n_points: usize,
    pub spacing: f64,
    pub mass: f64,
    pub kernel: KernelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covariance: Option<Vec<String>>,
}

impl MeasureDocument {
    pub fn to_text(&self) -> String {
        toml::to_string(self).expect("measure document serializes")
    }

    pub fn from_text(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }
}
