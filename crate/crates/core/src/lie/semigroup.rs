use nalgebra::{DMatrix, DVector, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg;

/// `SL(2,ℝ)` with `τ(g) = D g D`, `D = diag(1, −1)`: `H` is the positive
/// diagonal subgroup and `𝔮 = span{E, F}`. The cone is given by generators
/// in `(E, F)` coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Sl2SemigroupExample {
    pub name: String,
    pub cone_generators: Vec<[f64; 2]>,
}

impl Sl2SemigroupExample {
    /// The invariant cone `{aE + bF : a, b ≥ 0}`.
    pub fn invariant() -> Self {
        Self {
            name: "sl2R-adH".into(),
            cone_generators: vec![[1.0, 0.0], [0.0, 1.0]],
        }
    }

    /// A wedge strictly inside the invariant cone, not stable under `H`.
    pub fn wedge() -> Self {
        Self {
            name: "sl2R-adH-wedge".into(),
            cone_generators: vec![[1.0, 0.5], [0.5, 1.0]],
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "sl2R-adH" => Ok(Self::invariant()),
            "sl2R-adH-wedge" => Ok(Self::wedge()),
            other => Err(Error::UnknownExample(other.into())),
        }
    }

    fn generator_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(2, self.cone_generators.len(), |i, k| self.cone_generators[k][i])
    }

    fn random_cone_element(&self, rng: &mut ChaCha8Rng) -> Matrix2<f64> {
        let (a, b) = self.cone_generators.iter().fold((0.0, 0.0), |(a, b), g| {
            let w: f64 = rng.random_range(0.0..1.0);
            (a + w * g[0], b + w * g[1])
        });
        Matrix2::new(0.0, a, b, 0.0)
    }
}

fn tau(g: &Matrix2<f64>) -> Matrix2<f64> {
    Matrix2::new(g[(0, 0)], -g[(0, 1)], -g[(1, 0)], g[(1, 1)])
}

/// `g = h · exp(X)` with `τ(h) = h`, `τ(X) = −X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sl2Factorization {
    pub h: Matrix2<f64>,
    pub x: Matrix2<f64>,
    /// `‖h exp X − g‖ / ‖g‖`.
    pub reconstruction_residual: f64,
    /// Off-diagonal part of `h` relative to `‖h‖`.
    pub h_residual: f64,
    /// Diagonal part of `X` relative to `max(‖X‖, 1)`.
    pub q_residual: f64,
}

/// `X = ½ log(τ(g)⁻¹ g)`, `h = g exp(−X)`.
pub fn factor_sl2(g: &Matrix2<f64>) -> Result<Sl2Factorization> {
    let tg_inv = tau(g)
        .try_inverse()
        .ok_or_else(|| Error::Domain("singular matrix in factorization".into()))?;
    let p = tg_inv * g;
    let log = linalg::logm(&DMatrix::from_column_slice(2, 2, p.as_slice()))?;
    let x = Matrix2::from_column_slice(log.as_slice()) * 0.5;
    let h = g * (-x).exp();
    let rebuilt = h * x.exp();
    Ok(Sl2Factorization {
        h,
        x,
        reconstruction_residual: (rebuilt - g).norm() / g.norm(),
        h_residual: (h[(0, 1)].abs() + h[(1, 0)].abs()) / h.norm(),
        q_residual: (x[(0, 0)].abs() + x[(1, 1)].abs()) / x.norm().max(1.0),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupReport {
    pub example: String,
    pub samples: usize,
    pub members: usize,
    /// Worst of factorization, `τ`-compatibility and cone NNLS residuals.
    pub worst_residual: f64,
    /// `(sample index, reason)` for every non-member.
    pub failures: Vec<(usize, String)>,
}

impl SemigroupReport {
    pub fn success_rate(&self) -> f64 {
        if self.samples == 0 {
            1.0
        } else {
            self.members as f64 / self.samples as f64
        }
    }
}

pub const MEMBERSHIP_TOLERANCE: f64 = 1e-6;

/// Draws `s_i = h_i exp(X_i)` with `X_i` in the cone and tests whether
/// `s_1 s_2` factors back into `H exp(C)`.
pub fn semigroup_membership_sample(example: &Sl2SemigroupExample, samples: usize, seed: u64) -> SemigroupReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gens = example.generator_matrix();
    let mut members = 0;
    let mut worst = 0.0_f64;
    let mut failures = Vec::new();
    for idx in 0..samples {
        let draw = |rng: &mut ChaCha8Rng| {
            let s: f64 = rng.random_range(-1.0..1.0);
            let h = Matrix2::new(s.exp(), 0.0, 0.0, (-s).exp());
            h * example.random_cone_element(rng).exp()
        };
        let s1 = draw(&mut rng);
        let s2 = draw(&mut rng);
        let product = s1 * s2;
        let f = match factor_sl2(&product) {
            Ok(f) => f,
            Err(e) => {
                failures.push((idx, format!("factorization did not converge: {e}")));
                continue;
            }
        };
        let (_, cone_res) = linalg::nnls(&gens, &DVector::from_vec(vec![f.x[(0, 1)], f.x[(1, 0)]]));
        let cone_res = cone_res / f.x.norm().max(1.0);
        let residual = f.reconstruction_residual.max(f.h_residual).max(f.q_residual).max(cone_res);
        worst = worst.max(residual);
        if f.h[(0, 0)] <= 0.0 {
            failures.push((idx, "h outside the identity component".into()));
        } else if residual >= MEMBERSHIP_TOLERANCE {
            failures.push((idx, format!("residual {residual:e} (cone {cone_res:e})")));
        } else {
            members += 1;
        }
    }
    SemigroupReport {
        example: example.name.clone(),
        samples,
        members,
        worst_residual: worst,
        failures,
    }
}
