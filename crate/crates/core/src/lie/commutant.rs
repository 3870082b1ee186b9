use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{to_complex, C64};

/// Singular values at most this times `σ_max` count as kernel.
pub const COMMUTANT_RELATIVE_TOLERANCE: f64 = 1e-8;

/// `dim {A : AM = MA for all M}` over the reals.
pub fn commutant_dimension(matrices: &[DMatrix<f64>]) -> Result<usize> {
    let c: Vec<DMatrix<C64>> = matrices.iter().map(to_complex).collect();
    commutant_dimension_c(&c)
}

/// Complex counterpart of [`commutant_dimension`].
pub fn commutant_dimension_c(matrices: &[DMatrix<C64>]) -> Result<usize> {
    let first = matrices
        .first()
        .ok_or_else(|| Error::Precondition("need at least one matrix".into()))?;
    let d = first.nrows();
    for m in matrices {
        if m.nrows() != d || m.ncols() != d {
            return Err(Error::Dimension {
                expected: d,
                got: if m.nrows() != d { m.nrows() } else { m.ncols() },
            });
        }
    }
    let dd = d * d;
    // vec(AM − MA) = (Mᵀ ⊗ I − I ⊗ M) vec(A), column-major vec.
    let id = DMatrix::<C64>::identity(d, d);
    let mut stacked = DMatrix::<C64>::zeros(dd * matrices.len(), dd);
    for (b, m) in matrices.iter().enumerate() {
        let block = m.transpose().kronecker(&id) - id.kronecker(m);
        stacked.rows_mut(b * dd, dd).copy_from(&block);
    }
    let sv = stacked.svd(false, false).singular_values;
    let smax = sv.max();
    if smax == 0.0 {
        return Ok(dd);
    }
    let rank = sv.iter().filter(|&&s| s > COMMUTANT_RELATIVE_TOLERANCE * smax).count();
    Ok(dd - rank)
}
