//! Real Lie algebras given by structure constants, involutions and the
//! `𝔥 ⊕ 𝔮` splitting, the c-dual `𝔥 ⊕ i𝔮`, hyperbolic cones, sampled
//! semigroup membership and commutant dimensions.

mod builtin;
mod commutant;
mod cone;
mod involution;
mod semigroup;
mod text;

pub use builtin::{builtin_example, su2_basis_change, su2_table, BUILTIN_NAMES};
pub use commutant::{commutant_dimension, commutant_dimension_c, COMMUTANT_RELATIVE_TOLERANCE};
pub use cone::{check_hyperbolic_element, hyperbolic_cone_check, ConeCheckConfig, ConeFailure, ConeReport, ConeSample, ElementReport};
pub use involution::{c_dual, split_by_involution, BracketResiduals, CDual, InvolutionData, SplitAlgebra};
pub use semigroup::{factor_sl2, semigroup_membership_sample, Sl2Factorization, Sl2SemigroupExample, SemigroupReport};
pub use text::LieExample;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute tolerance for Jacobi and bracket-compatibility residuals.
pub const STRUCTURE_TOLERANCE: f64 = 1e-12;

/// `[X_i, X_j] = Σ_k c[i][j][k] X_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LieAlgebraData {
    labels: Vec<String>,
    structure: Vec<f64>,
}

impl LieAlgebraData {
    /// `structure` is indexed `(i * dim + j) * dim + k`.
    pub fn new(labels: Vec<String>, structure: Vec<f64>) -> Result<Self> {
        let d = labels.len();
        if d == 0 {
            return Err(Error::InvalidAlgebra("algebra needs at least one basis element".into()));
        }
        if structure.len() != d * d * d {
            return Err(Error::Dimension {
                expected: d * d * d,
                got: structure.len(),
            });
        }
        Ok(Self { labels, structure })
    }

    /// Builds from `[X_i, X_j] = value · X_k` entries; `[X_j, X_i]` is filled in.
    pub fn from_brackets(labels: &[&str], brackets: &[(usize, usize, usize, f64)]) -> Result<Self> {
        let d = labels.len();
        let mut alg = Self::new(labels.iter().map(|s| s.to_string()).collect(), vec![0.0; d * d * d])?;
        for &(i, j, k, v) in brackets {
            if i >= d || j >= d || k >= d {
                return Err(Error::InvalidAlgebra(format!("bracket index ({i}, {j}, {k}) out of range")));
            }
            if i == j && v != 0.0 {
                return Err(Error::InvalidAlgebra(format!("[{0}, {0}] must vanish", alg.labels[i])));
            }
            alg.set(i, j, k, v);
            alg.set(j, i, k, -v);
        }
        Ok(alg)
    }

    pub fn abelian(dim: usize) -> Result<Self> {
        let labels = (1..=dim).map(|i| format!("A{i}")).collect();
        Self::new(labels, vec![0.0; dim * dim * dim])
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let d = self.dim();
        self.structure[(i * d + j) * d + k] = value;
    }

    pub fn structure(&self) -> &[f64] {
        &self.structure
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        &self.ad(x) * y
    }

    /// Matrix of `Y ↦ [X, Y]`.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                for k in 0..d {
                    m[(k, j)] += x[i] * self.c(i, j, k);
                }
            }
        }
        m
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[i] = 1.0;
        v
    }

    /// Structure constants in the basis given by the columns of `basis`.
    pub fn change_basis(&self, basis: &DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let d = self.dim();
        if basis.nrows() != d || basis.ncols() != d || labels.len() != d {
            return Err(Error::Dimension {
                expected: d,
                got: basis.ncols(),
            });
        }
        let inv = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidAlgebra("basis change is singular".into()))?;
        let cols: Vec<DVector<f64>> = (0..d).map(|a| basis.column(a).into_owned()).collect();
        let mut out = Self::new(labels, vec![0.0; d * d * d])?;
        for a in 0..d {
            for b in (a + 1)..d {
                let coords = &inv * self.bracket(&cols[a], &cols[b]);
                for k in 0..d {
                    out.set(a, b, k, coords[k]);
                    out.set(b, a, k, -coords[k]);
                }
            }
        }
        Ok(out)
    }

    /// Antisymmetry and Jacobi residuals.
    pub fn validate(&self) -> AlgebraReport {
        let d = self.dim();
        let mut antisymmetry = 0.0_f64;
        let mut worst_antisymmetric = None;
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    let r = (self.c(i, j, k) + self.c(j, i, k)).abs();
                    if r > antisymmetry {
                        antisymmetry = r;
                        worst_antisymmetric = Some((i, j, k));
                    }
                }
            }
        }
        let mut jacobi = 0.0_f64;
        let mut worst_jacobi = None;
        for i in 0..d {
            for j in (i + 1)..d {
                for k in (j + 1)..d {
                    for m in 0..d {
                        let mut s = 0.0;
                        for l in 0..d {
                            s += self.c(j, k, l) * self.c(i, l, m)
                                + self.c(k, i, l) * self.c(j, l, m)
                                + self.c(i, j, l) * self.c(k, l, m);
                        }
                        if s.abs() > jacobi {
                            jacobi = s.abs();
                            worst_jacobi = Some((i, j, k));
                        }
                    }
                }
            }
        }
        AlgebraReport {
            antisymmetry_residual: antisymmetry,
            jacobi_residual: jacobi,
            worst_antisymmetric,
            worst_jacobi,
        }
    }

    /// [`Self::validate`], turned into an error naming the offending triple.
    pub fn validated(&self) -> Result<AlgebraReport> {
        let rep = self.validate();
        if let Some((i, j, k)) = rep.worst_antisymmetric.filter(|_| rep.antisymmetry_residual > 0.0) {
            return Err(Error::InvalidAlgebra(format!(
                "c[{}][{}][{}] is not antisymmetric (residual {:e})",
                self.labels[i], self.labels[j], self.labels[k], rep.antisymmetry_residual
            )));
        }
        if let Some((i, j, k)) = rep.worst_jacobi.filter(|_| rep.jacobi_residual > STRUCTURE_TOLERANCE) {
            return Err(Error::InvalidAlgebra(format!(
                "Jacobi identity fails on ({}, {}, {}) with residual {:e}",
                self.labels[i], self.labels[j], self.labels[k], rep.jacobi_residual
            )));
        }
        Ok(rep)
    }

    /// Largest absolute difference of structure constants.
    pub fn max_difference(&self, other: &Self) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        self.structure
            .iter()
            .zip(&other.structure)
            .fold(0.0_f64, |a, (x, y)| a.max((x - y).abs()))
    }

    /// Human-readable name of a coordinate vector, e.g. `E-F` or `0.5*E+F`.
    pub fn describe_vector(&self, v: &DVector<f64>) -> String {
        let mut out = String::new();
        for (i, &c) in v.iter().enumerate() {
            if c.abs() < 1e-14 {
                continue;
            }
            let sign = if c < 0.0 { "-" } else if out.is_empty() { "" } else { "+" };
            let mag = c.abs();
            if (mag - 1.0).abs() < 1e-14 {
                out.push_str(&format!("{sign}{}", self.labels[i]));
            } else {
                out.push_str(&format!("{sign}{mag}*{}", self.labels[i]));
            }
        }
        if out.is_empty() {
            "0".into()
        } else {
            out
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraReport {
    pub antisymmetry_residual: f64,
    pub jacobi_residual: f64,
    pub worst_antisymmetric: Option<(usize, usize, usize)>,
    pub worst_jacobi: Option<(usize, usize, usize)>,
}

impl AlgebraReport {
    pub fn is_valid(&self) -> bool {
        self.antisymmetry_residual == 0.0 && self.jacobi_residual <= STRUCTURE_TOLERANCE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// 2×2 matrices for H, E, F.
    fn sl2_matrices() -> [DMatrix<f64>; 3] {
        [
            DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]),
        ]
    }

    /// Coordinates of a traceless 2×2 matrix in (H, E, F).
    fn coords(m: &DMatrix<f64>) -> [f64; 3] {
        [m[(0, 0)], m[(0, 1)], m[(1, 0)]]
    }

    #[test]
    fn sl2_structure_matches_matrix_commutators() {
        let alg = builtin_example("sl2R-cartan").unwrap().algebra;
        let mats = sl2_matrices();
        for i in 0..3 {
            for j in 0..3 {
                let comm = &mats[i] * &mats[j] - &mats[j] * &mats[i];
                let want = coords(&comm);
                for k in 0..3 {
                    assert_eq!(alg.c(i, j, k), want[k], "[{i},{j}] component {k}");
                }
            }
        }
        assert!(alg.validated().unwrap().is_valid());
    }

    #[test]
    fn abelian_is_valid() {
        let rep = LieAlgebraData::abelian(4).unwrap().validate();
        assert!(rep.is_valid());
        assert_eq!(rep.jacobi_residual, 0.0);
    }

    #[test]
    fn perturbed_constant_breaks_jacobi() {
        let mut alg = builtin_example("sl2R-cartan").unwrap().algebra;
        alg.set(0, 1, 1, 2.001);
        alg.set(1, 0, 1, -2.001);
        let rep = alg.validate();
        assert!((rep.jacobi_residual - 0.001).abs() < 1e-12);
        assert_eq!(rep.worst_jacobi, Some((0, 1, 2)));
        match alg.validated() {
            Err(Error::InvalidAlgebra(msg)) => assert!(msg.contains("(H, E, F)"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn broken_antisymmetry_is_named() {
        let mut alg = LieAlgebraData::abelian(2).unwrap();
        alg.set(0, 1, 0, 1.0);
        assert!(matches!(alg.validated(), Err(Error::InvalidAlgebra(_))));
    }

    #[test]
    fn ad_is_the_bracket() {
        let alg = builtin_example("sl2R-cartan").unwrap().algebra;
        let h = alg.basis_vector(0);
        let ad = alg.ad(&h);
        let want = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, -2.0]);
        assert_eq!(ad, want);
    }

    #[test]
    fn vector_names() {
        let alg = builtin_example("sl2R-cartan").unwrap().algebra;
        assert_eq!(alg.describe_vector(&DVector::from_vec(vec![0.0, 1.0, -1.0])), "E-F");
        assert_eq!(alg.describe_vector(&DVector::from_vec(vec![0.0, 0.5, 1.0])), "0.5*E+F");
        assert_eq!(alg.describe_vector(&DVector::zeros(3)), "0");
    }
}
