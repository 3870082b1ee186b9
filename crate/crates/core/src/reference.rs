//! Independent oracles: a grid discretization of the Ornstein–Uhlenbeck
//! transition kernel and exact rational commutant computation.

use nalgebra::DMatrix;
use num_rational::Ratio;

use crate::linalg;

/// Eigenvalues (descending) of the symmetrized OU transition kernel over
/// time `delta`, discretized on `points` nodes spanning `±half_width`
/// stationary standard deviations.
pub fn mehler_transfer_eigenvalues(mass: f64, delta: f64, points: usize, half_width: f64) -> Vec<f64> {
    let var = 1.0 / (2.0 * mass);
    let sd = var.sqrt();
    let decay = (-mass * delta).exp();
    let tvar = (1.0 - (-2.0 * mass * delta).exp()) / (2.0 * mass);
    let l = half_width * sd;
    let dx = 2.0 * l / (points - 1) as f64;
    let xs: Vec<f64> = (0..points).map(|i| -l + i as f64 * dx).collect();
    let log_rho = |x: f64| -x * x / (2.0 * var);
    let kernel = DMatrix::from_fn(points, points, |i, j| {
        let (x, y) = (xs[i], xs[j]);
        let log_p = -(y - x * decay).powi(2) / (2.0 * tvar) - 0.5 * (2.0 * std::f64::consts::PI * tvar).ln();
        (0.5 * (log_rho(x) - log_rho(y)) + log_p).exp() * dx
    });
    let (mut values, _) = linalg::symmetric_eigen(&kernel);
    values.reverse();
    values
}

/// `−ln(λ_k/λ_0)/delta` for the first `count` excitations.
pub fn mehler_gaps(mass: f64, delta: f64, count: usize) -> Vec<f64> {
    let values = mehler_transfer_eigenvalues(mass, delta, 600, 10.0);
    (1..=count).map(|k| -(values[k] / values[0]).ln() / delta).collect()
}

pub type Rational = Ratio<i64>;
pub type RationalMatrix = Vec<Vec<Rational>>;

pub fn rational_from_ints(rows: &[&[i64]]) -> RationalMatrix {
    rows.iter()
        .map(|r| r.iter().map(|&x| Rational::from_integer(x)).collect())
        .collect()
}

pub fn rational_to_f64(m: &RationalMatrix) -> DMatrix<f64> {
    let d = m.len();
    DMatrix::from_fn(d, d, |i, j| *m[i][j].numer() as f64 / *m[i][j].denom() as f64)
}

fn rational_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let ncols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != Rational::from_integer(0)) else {
            continue;
        };
        rows.swap(rank, pivot);
        let pivot_row = rows[rank].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && row[col] != Rational::from_integer(0) {
                let f = row[col] / pivot_row[col];
                for (dst, src) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                    *dst -= src * f;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Exact `dim {A : AM = MA ∀M}` by elimination over ℚ.
pub fn rational_commutant_dimension(matrices: &[RationalMatrix]) -> usize {
    let d = matrices[0].len();
    let zero = Rational::from_integer(0);
    let mut rows = Vec::new();
    // Unknown A[a][b] sits at column a*d + b; one equation per (M, i, j).
    for m in matrices {
        for i in 0..d {
            for j in 0..d {
                let mut row = vec![zero; d * d];
                for k in 0..d {
                    // (AM)_ij = Σ_k A_ik M_kj ; (MA)_ij = Σ_k M_ik A_kj
                    row[i * d + k] += m[k][j];
                    row[k * d + j] -= m[i][k];
                }
                rows.push(row);
            }
        }
    }
    d * d - rational_rank(rows)
}

/// `(H, E, F)` of the `d`-dimensional irreducible `sl(2)` module, normalized
/// so every entry is an integer.
pub fn sl2_irrep(d: usize) -> [RationalMatrix; 3] {
    let zero = Rational::from_integer(0);
    let mut h = vec![vec![zero; d]; d];
    let mut e = vec![vec![zero; d]; d];
    let mut f = vec![vec![zero; d]; d];
    for k in 0..d {
        h[k][k] = Rational::from_integer(d as i64 - 1 - 2 * k as i64);
        if k + 1 < d {
            f[k + 1][k] = Rational::from_integer(1);
            e[k][k + 1] = Rational::from_integer(((k + 1) * (d - k - 1)) as i64);
        }
    }
    [h, e, f]
}

pub fn block_diagonal(a: &RationalMatrix, b: &RationalMatrix) -> RationalMatrix {
    let (da, db) = (a.len(), b.len());
    let zero = Rational::from_integer(0);
    let mut out = vec![vec![zero; da + db]; da + db];
    for i in 0..da {
        out[i][..da].copy_from_slice(&a[i]);
    }
    for i in 0..db {
        out[da + i][da..].copy_from_slice(&b[i]);
    }
    out
}

/// Number operator and position operator of a truncated oscillator, the
/// latter rescaled to `q[k][k+1] = k+1`, `q[k+1][k] = 1` (similar to the
/// symmetric form, so commutants agree).
pub fn oscillator(d: usize) -> [RationalMatrix; 2] {
    let zero = Rational::from_integer(0);
    let mut n = vec![vec![zero; d]; d];
    let mut q = vec![vec![zero; d]; d];
    for k in 0..d {
        n[k][k] = Rational::from_integer(k as i64);
        if k + 1 < d {
            q[k][k + 1] = Rational::from_integer(k as i64 + 1);
            q[k + 1][k] = Rational::from_integer(1);
        }
    }
    [n, q]
}

/// Named commutant instances with `d ≤ 4`.
pub struct CommutantInstance {
    pub name: &'static str,
    pub matrices: Vec<RationalMatrix>,
}

pub fn commutant_instances() -> Vec<CommutantInstance> {
    let direct_sum = |a: usize, b: usize| -> Vec<RationalMatrix> {
        let (x, y) = (sl2_irrep(a), sl2_irrep(b));
        (0..3).map(|i| block_diagonal(&x[i], &y[i])).collect()
    };
    vec![
        CommutantInstance {
            name: "identity-3",
            matrices: vec![rational_from_ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])],
        },
        CommutantInstance {
            name: "spin-1",
            matrices: sl2_irrep(3).to_vec(),
        },
        CommutantInstance {
            name: "spin-3/2",
            matrices: sl2_irrep(4).to_vec(),
        },
        CommutantInstance {
            name: "diagonal+all-ones-4",
            matrices: vec![
                rational_from_ints(&[&[1, 0, 0, 0], &[0, 2, 0, 0], &[0, 0, 3, 0], &[0, 0, 0, 4]]),
                rational_from_ints(&[&[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 1, 1, 1]]),
            ],
        },
        CommutantInstance {
            name: "spin-1/2+spin-0",
            matrices: direct_sum(2, 1),
        },
        CommutantInstance {
            name: "spin-1/2+spin-1/2",
            matrices: direct_sum(2, 2),
        },
        CommutantInstance {
            name: "spin-1+spin-0",
            matrices: direct_sum(3, 1),
        },
        CommutantInstance {
            name: "oscillator-4",
            matrices: oscillator(4).to_vec(),
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mul(a: &RationalMatrix, b: &RationalMatrix) -> RationalMatrix {
        let d = a.len();
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| (0..d).fold(Rational::from_integer(0), |s, k| s + a[i][k] * b[k][j]))
                    .collect()
            })
            .collect()
    }

    #[test]
    fn irreps_satisfy_sl2_relations() {
        for d in 1..=4 {
            let [h, e, f] = sl2_irrep(d);
            let comm = |x: &RationalMatrix, y: &RationalMatrix| -> RationalMatrix {
                let (p, q) = (mul(x, y), mul(y, x));
                p.iter().zip(&q).map(|(r, s)| r.iter().zip(s).map(|(a, b)| a - b).collect()).collect()
            };
            let two = Rational::from_integer(2);
            let scale = |m: &RationalMatrix, s: Rational| -> RationalMatrix {
                m.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
            };
            assert_eq!(comm(&h, &e), scale(&e, two));
            assert_eq!(comm(&h, &f), scale(&f, -two));
            assert_eq!(comm(&e, &f), h);
        }
    }

    #[test]
    fn known_commutant_dimensions() {
        let want = [9, 1, 1, 1, 2, 4, 2, 1];
        for (inst, w) in commutant_instances().iter().zip(want) {
            assert_eq!(rational_commutant_dimension(&inst.matrices), w, "{}", inst.name);
        }
    }

    #[test]
    fn mehler_grid_reproduces_oscillator_ladder() {
        for mass in [0.5, 1.0, 2.0] {
            let gaps = mehler_gaps(mass, 0.1, 3);
            for (k, g) in gaps.iter().enumerate() {
                let want = (k + 1) as f64 * mass;
                assert!((g - want).abs() < 1e-3 * want, "m={mass} k={k}: {g}");
            }
        }
    }
}
