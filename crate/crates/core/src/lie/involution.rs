use nalgebra::{DMatrix, DVector};

use super::{LieAlgebraData, STRUCTURE_TOLERANCE};
use crate::error::{Error, Result};

/// `τ` as a matrix acting on coordinate vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct InvolutionData {
    pub matrix: DMatrix<f64>,
}

impl InvolutionData {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(signs: &[f64]) -> Self {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(signs)))
    }

    /// `‖τ² − I‖_max`.
    pub fn square_residual(&self) -> f64 {
        let d = self.matrix.nrows();
        (&self.matrix * &self.matrix - DMatrix::<f64>::identity(d, d)).amax()
    }

    /// `max_{i,j} ‖τ[X_i, X_j] − [τX_i, τX_j]‖_max`.
    pub fn automorphism_residual(&self, alg: &LieAlgebraData) -> f64 {
        let d = alg.dim();
        let mut worst = 0.0_f64;
        for i in 0..d {
            for j in (i + 1)..d {
                let xi = alg.basis_vector(i);
                let xj = alg.basis_vector(j);
                let lhs = &self.matrix * alg.bracket(&xi, &xj);
                let rhs = alg.bracket(&(&self.matrix * xi), &(&self.matrix * xj));
                worst = worst.max((lhs - rhs).amax());
            }
        }
        worst
    }

    pub fn check(&self, alg: &LieAlgebraData) -> Result<()> {
        let d = alg.dim();
        if self.matrix.nrows() != d || self.matrix.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                got: self.matrix.nrows(),
            });
        }
        let sq = self.square_residual();
        if sq > STRUCTURE_TOLERANCE {
            return Err(Error::InvalidInvolution(format!(
                "tau^2 differs from the identity by {sq:e}; eigenvalues are not +-1"
            )));
        }
        let auto = self.automorphism_residual(alg);
        if auto > STRUCTURE_TOLERANCE {
            return Err(Error::InvalidInvolution(format!("tau is not an automorphism (residual {auto:e})")));
        }
        Ok(())
    }
}

/// Residuals of `[𝔥,𝔥] ⊂ 𝔥`, `[𝔥,𝔮] ⊂ 𝔮`, `[𝔮,𝔮] ⊂ 𝔥`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketResiduals {
    pub hh: f64,
    pub hq: f64,
    pub qq: f64,
}

impl BracketResiduals {
    pub fn max(&self) -> f64 {
        self.hh.max(self.hq).max(self.qq)
    }
}

/// `𝔤 = 𝔥 ⊕ 𝔮` with `𝔥` the `+1` and `𝔮` the `−1` eigenspace of `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitAlgebra {
    /// Columns span `𝔥`.
    pub h_basis: DMatrix<f64>,
    /// Columns span `𝔮`.
    pub q_basis: DMatrix<f64>,
    pub project_h: DMatrix<f64>,
    pub project_q: DMatrix<f64>,
    pub residuals: BracketResiduals,
}

impl SplitAlgebra {
    pub fn dim_h(&self) -> usize {
        self.h_basis.ncols()
    }

    pub fn dim_q(&self) -> usize {
        self.q_basis.ncols()
    }

    /// `‖P_𝔥 x‖_max`, the distance of `x` from `𝔮` in coordinates.
    pub fn q_residual(&self, x: &DVector<f64>) -> f64 {
        (&self.project_h * x).amax()
    }

    /// `[h | q]`.
    pub fn basis(&self) -> DMatrix<f64> {
        let d = self.h_basis.nrows();
        let mut b = DMatrix::zeros(d, d);
        b.columns_mut(0, self.dim_h()).copy_from(&self.h_basis);
        b.columns_mut(self.dim_h(), self.dim_q()).copy_from(&self.q_basis);
        b
    }
}

/// Greedy column selection from a projector, each column scaled to max-abs 1.
fn column_basis(p: &DMatrix<f64>) -> DMatrix<f64> {
    let d = p.nrows();
    let mut chosen: Vec<DVector<f64>> = Vec::new();
    let mut orthonormal: Vec<DVector<f64>> = Vec::new();
    for j in 0..p.ncols() {
        let col = p.column(j).into_owned();
        let norm = col.norm();
        if norm <= 1e-9 {
            continue;
        }
        let mut r = col.clone();
        for q in &orthonormal {
            r -= q * q.dot(&r);
        }
        if r.norm() > 1e-9 * norm {
            orthonormal.push(r.normalize());
            chosen.push(&col / col.amax());
        }
    }
    let mut out = DMatrix::zeros(d, chosen.len());
    for (k, c) in chosen.iter().enumerate() {
        out.set_column(k, c);
    }
    out
}

pub fn split_by_involution(alg: &LieAlgebraData, tau: &InvolutionData) -> Result<SplitAlgebra> {
    tau.check(alg)?;
    let d = alg.dim();
    let id = DMatrix::<f64>::identity(d, d);
    let project_h = (&id + &tau.matrix) * 0.5;
    let project_q = (&id - &tau.matrix) * 0.5;
    let h_basis = column_basis(&project_h);
    let q_basis = column_basis(&project_q);
    if h_basis.ncols() + q_basis.ncols() != d {
        return Err(Error::InvalidInvolution(format!(
            "eigenspaces have dimensions {} + {} != {d}",
            h_basis.ncols(),
            q_basis.ncols()
        )));
    }
    let cols = |m: &DMatrix<f64>| -> Vec<DVector<f64>> { (0..m.ncols()).map(|k| m.column(k).into_owned()).collect() };
    let hs = cols(&h_basis);
    let qs = cols(&q_basis);
    let worst = |xs: &[DVector<f64>], ys: &[DVector<f64>], wrong: &DMatrix<f64>| -> f64 {
        let mut r = 0.0_f64;
        for x in xs {
            for y in ys {
                r = r.max((wrong * alg.bracket(x, y)).amax());
            }
        }
        r
    };
    let residuals = BracketResiduals {
        hh: worst(&hs, &hs, &project_q),
        hq: worst(&hs, &qs, &project_h),
        qq: worst(&qs, &qs, &project_q),
    };
    Ok(SplitAlgebra {
        h_basis,
        q_basis,
        project_h,
        project_q,
        residuals,
    })
}

/// `𝔤^c = 𝔥 ⊕ i𝔮` in the basis `(h_1, …, i q_1, …)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CDual {
    pub algebra: LieAlgebraData,
    /// Columns are the split basis `[h | q]` in original coordinates.
    pub basis_change: DMatrix<f64>,
    /// `+1` on `𝔥`, `−1` on `i𝔮`; the same splitting seen from `𝔤^c`.
    pub involution: InvolutionData,
}

pub fn c_dual(alg: &LieAlgebraData, split: &SplitAlgebra) -> Result<CDual> {
    if split.residuals.max() > STRUCTURE_TOLERANCE {
        return Err(Error::InvalidInvolution(format!(
            "split bracket residual {:e} exceeds tolerance",
            split.residuals.max()
        )));
    }
    let basis = split.basis();
    let dh = split.dim_h();
    let d = alg.dim();
    let mut labels = Vec::with_capacity(d);
    for a in 0..d {
        let name = alg.describe_vector(&basis.column(a).into_owned());
        labels.push(if a < dh {
            name
        } else if name.contains(['+', '-', '*']) {
            format!("i*({name})")
        } else {
            format!("i*{name}")
        });
    }
    let mut dual = alg.change_basis(&basis, labels)?;
    for a in dh..d {
        for b in dh..d {
            for k in 0..d {
                let v = dual.c(a, b, k);
                dual.set(a, b, k, -v);
            }
        }
    }
    dual.validated()?;
    let signs: Vec<f64> = (0..d).map(|a| if a < dh { 1.0 } else { -1.0 }).collect();
    Ok(CDual {
        algebra: dual,
        basis_change: basis,
        involution: InvolutionData::diagonal(&signs),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::builtin_example;

    #[test]
    fn identity_involution_puts_everything_in_h() {
        let ex = builtin_example("sl2R-cartan").unwrap();
        let split = split_by_involution(&ex.algebra, &InvolutionData::identity(3)).unwrap();
        assert_eq!((split.dim_h(), split.dim_q()), (3, 0));
    }

    #[test]
    fn cartan_split_of_sl2() {
        let ex = builtin_example("sl2R-cartan").unwrap();
        let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
        assert_eq!(split.h_basis, DMatrix::from_column_slice(3, 1, &[0.0, 1.0, -1.0]));
        assert_eq!(split.q_basis, DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 1.0, 1.0]));
        assert!(split.residuals.max() < 1e-12);
    }

    #[test]
    fn conjugation_split_of_sl2() {
        let ex = builtin_example("sl2R-adH").unwrap();
        let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
        assert_eq!(split.h_basis, DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]));
        assert_eq!(split.q_basis, DMatrix::from_column_slice(3, 2, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn non_involution_is_rejected() {
        let ex = builtin_example("sl2R-cartan").unwrap();
        let tau = InvolutionData::new(DMatrix::identity(3, 3) * 2.0);
        assert!(matches!(split_by_involution(&ex.algebra, &tau), Err(Error::InvalidInvolution(_))));
        // An order-2 linear map that is not an automorphism.
        let swap = InvolutionData::diagonal(&[1.0, -1.0, 1.0]);
        assert!(matches!(split_by_involution(&ex.algebra, &swap), Err(Error::InvalidInvolution(_))));
    }

    #[test]
    fn cartan_dual_brackets() {
        let ex = builtin_example("sl2R-cartan").unwrap();
        let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
        let dual = c_dual(&ex.algebra, &split).unwrap();
        let g = &dual.algebra;
        assert_eq!(g.labels(), ["E-F", "i*H", "i*(E+F)"]);
        // [Xh, Y1] = -2 Y2, [Xh, Y2] = 2 Y1, [Y1, Y2] = -2 Xh.
        assert_eq!((g.c(0, 1, 2), g.c(0, 2, 1), g.c(1, 2, 0)), (-2.0, 2.0, -2.0));
        assert_eq!(g.c(0, 1, 1) + g.c(0, 1, 0) + g.c(0, 2, 0) + g.c(0, 2, 2) + g.c(1, 2, 1) + g.c(1, 2, 2), 0.0);
    }

    #[test]
    fn dual_of_dual_is_the_original_in_split_basis() {
        for name in ["sl2R-cartan", "sl2R-adH", "heisenberg", "abelian-3"] {
            let ex = builtin_example(name).unwrap();
            let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
            let once = c_dual(&ex.algebra, &split).unwrap();
            let split2 = split_by_involution(&once.algebra, &once.involution).unwrap();
            let twice = c_dual(&once.algebra, &split2).unwrap();
            let aligned = ex
                .algebra
                .change_basis(&once.basis_change, once.algebra.labels().to_vec())
                .unwrap();
            assert!(twice.algebra.max_difference(&aligned) <= 1e-12, "{name}");
        }
    }
}
