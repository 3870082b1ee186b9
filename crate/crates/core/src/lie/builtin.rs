use nalgebra::{DMatrix, DVector};

use super::{ConeSample, InvolutionData, LieAlgebraData, LieExample};
use crate::error::{Error, Result};

pub const BUILTIN_NAMES: [&str; 4] = ["sl2R-cartan", "sl2R-adH", "heisenberg", "abelian-n"];

fn v(x: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(x)
}

fn sl2() -> LieAlgebraData {
    // [H,E] = 2E, [H,F] = -2F, [E,F] = H.
    LieAlgebraData::from_brackets(&["H", "E", "F"], &[(0, 1, 1, 2.0), (0, 2, 2, -2.0), (1, 2, 0, 1.0)])
        .expect("sl2 brackets are in range")
}

/// Built-in algebra, involution and (where meaningful) cone. `abelian-n`
/// takes a dimension suffix, e.g. `abelian-3`.
pub fn builtin_example(name: &str) -> Result<LieExample> {
    match name {
        "sl2R-cartan" => {
            // τ(X) = −Xᵀ: H ↦ −H, E ↦ −F, F ↦ −E. 𝔮 = span{H, E+F}; the
            // SO(2)-invariant cone is all of 𝔮.
            let involution = InvolutionData::new(DMatrix::from_row_slice(
                3,
                3,
                &[-1.0, 0.0, 0.0, 0.0, 0.0, -1.0, 0.0, -1.0, 0.0],
            ));
            let gens = vec![v(&[1.0, 0.0, 0.0]), v(&[-1.0, 0.0, 0.0]), v(&[0.0, 1.0, 1.0]), v(&[0.0, -1.0, -1.0])];
            Ok(LieExample {
                name: name.into(),
                algebra: sl2(),
                involution,
                cone: Some(ConeSample::with_random_points(gens, v(&[1.0, 0.0, 0.0]), 16, 1)),
            })
        }
        "sl2R-adH" => {
            // τ = Ad(diag(1, −1)): H ↦ H, E ↦ −E, F ↦ −F.
            let gens = vec![v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])];
            Ok(LieExample {
                name: name.into(),
                algebra: sl2(),
                involution: InvolutionData::diagonal(&[1.0, -1.0, -1.0]),
                cone: Some(ConeSample::with_random_points(gens, v(&[0.0, 1.0, 1.0]), 16, 2)),
            })
        }
        "heisenberg" => Ok(LieExample {
            name: name.into(),
            algebra: LieAlgebraData::from_brackets(&["X", "Y", "Z"], &[(0, 1, 2, 1.0)])?,
            involution: InvolutionData::diagonal(&[-1.0, 1.0, -1.0]),
            cone: None,
        }),
        _ => {
            let dim = name
                .strip_prefix("abelian-")
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| Error::UnknownExample(name.into()))?;
            Ok(LieExample {
                name: name.into(),
                algebra: LieAlgebraData::abelian(dim)?,
                involution: InvolutionData::new(-DMatrix::<f64>::identity(dim, dim)),
                cone: None,
            })
        }
    }
}

/// Columns express `Z_1, Z_2, Z_3` in the c-dual basis `(E−F, i·H, i·(E+F))`
/// of the Cartan example, chosen so that `[Z_i, Z_j] = ε_ijk Z_k`.
pub fn su2_basis_change() -> DMatrix<f64> {
    DMatrix::from_row_slice(3, 3, &[0.0, 0.0, -0.5, 0.5, 0.0, 0.0, 0.0, 0.5, 0.0])
}

/// `[Z_i, Z_j] = ε_ijk Z_k`.
pub fn su2_table() -> LieAlgebraData {
    LieAlgebraData::from_brackets(&["Z1", "Z2", "Z3"], &[(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)])
        .expect("su2 brackets are in range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{c_dual, split_by_involution};

    #[test]
    fn every_builtin_is_a_valid_symmetric_pair() {
        for name in ["sl2R-cartan", "sl2R-adH", "heisenberg", "abelian-1", "abelian-4"] {
            let ex = builtin_example(name).unwrap();
            ex.algebra.validated().unwrap();
            ex.involution.check(&ex.algebra).unwrap();
        }
        assert!(matches!(builtin_example("abelian-0"), Err(Error::UnknownExample(_))));
        assert!(matches!(builtin_example("so3"), Err(Error::UnknownExample(_))));
    }

    #[test]
    fn cartan_dual_is_su2() {
        let ex = builtin_example("sl2R-cartan").unwrap();
        let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
        let dual = c_dual(&ex.algebra, &split).unwrap();
        let labels = vec!["Z1".into(), "Z2".into(), "Z3".into()];
        let changed = dual.algebra.change_basis(&su2_basis_change(), labels).unwrap();
        assert!(changed.max_difference(&su2_table()) <= 1e-10);
    }

    #[test]
    fn heisenberg_split() {
        let ex = builtin_example("heisenberg").unwrap();
        let split = split_by_involution(&ex.algebra, &ex.involution).unwrap();
        assert_eq!((split.dim_h(), split.dim_q()), (1, 2));
        let dual = c_dual(&ex.algebra, &split).unwrap();
        // [iX, iZ]-type brackets vanish; [Y, iX] = −i[X, Y] = −iZ.
        assert!(dual.algebra.validate().is_valid());
    }
}
