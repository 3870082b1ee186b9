//! Gaussian moments by the Isserlis/Wick recursion
//! `E[x_i F(x)] = μ_i E[F] + Σ_j C_ij E[∂_j F]`, memoized on exponent vectors.

use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::linalg::C64;

/// Exponents keyed by variable index; repeated indices are merged.
fn collect(powers: &[(usize, u32)]) -> (Vec<usize>, Vec<u32>) {
    let mut vars: Vec<usize> = Vec::new();
    let mut exps: Vec<u32> = Vec::new();
    for &(i, p) in powers {
        if p == 0 {
            continue;
        }
        match vars.iter().position(|&v| v == i) {
            Some(k) => exps[k] += p,
            None => {
                vars.push(i);
                exps.push(p);
            }
        }
    }
    (vars, exps)
}

/// `E[Π x_i^{p_i}]` for the centered Gaussian with covariance `cov`.
pub fn moment(cov: &DMatrix<f64>, powers: &[(usize, u32)]) -> f64 {
    let (vars, exps) = collect(powers);
    let total: u32 = exps.iter().sum();
    if total % 2 == 1 {
        return 0.0;
    }
    let c: Vec<Vec<f64>> = vars
        .iter()
        .map(|&a| vars.iter().map(|&b| cov[(a, b)]).collect())
        .collect();
    let mut memo = HashMap::new();
    centered(&mut exps.clone(), &c, &mut memo)
}

fn centered(e: &mut Vec<u32>, c: &[Vec<f64>], memo: &mut HashMap<Vec<u32>, f64>) -> f64 {
    let Some(i) = e.iter().position(|&p| p > 0) else {
        return 1.0;
    };
    if e.iter().sum::<u32>() % 2 == 1 {
        return 0.0;
    }
    if let Some(&v) = memo.get(e.as_slice()) {
        return v;
    }
    let key = e.clone();
    e[i] -= 1;
    let mut acc = 0.0;
    for j in 0..e.len() {
        if e[j] == 0 || c[i][j] == 0.0 {
            continue;
        }
        let mult = e[j] as f64;
        e[j] -= 1;
        acc += mult * c[i][j] * centered(e, c, memo);
        e[j] += 1;
    }
    e[i] += 1;
    memo.insert(key, acc);
    acc
}

/// `E[Π x_i^{p_i}]` for `x ~ N(mean, cov)` with a complex mean (analytic
/// continuation of the real formula). `mean` is indexed like `cov`.
pub fn shifted_moment(cov: &DMatrix<f64>, mean: &[C64], powers: &[(usize, u32)]) -> C64 {
    let (vars, exps) = collect(powers);
    let c: Vec<Vec<f64>> = vars
        .iter()
        .map(|&a| vars.iter().map(|&b| cov[(a, b)]).collect())
        .collect();
    let mu: Vec<C64> = vars.iter().map(|&a| mean[a]).collect();
    let mut memo = HashMap::new();
    shifted(&mut exps.clone(), &c, &mu, &mut memo)
}

fn shifted(
    e: &mut Vec<u32>,
    c: &[Vec<f64>],
    mu: &[C64],
    memo: &mut HashMap<Vec<u32>, C64>,
) -> C64 {
    let Some(i) = e.iter().position(|&p| p > 0) else {
        return C64::new(1.0, 0.0);
    };
    if let Some(&v) = memo.get(e.as_slice()) {
        return v;
    }
    let key = e.clone();
    e[i] -= 1;
    let mut acc = mu[i] * shifted(e, c, mu, memo);
    for j in 0..e.len() {
        if e[j] == 0 || c[i][j] == 0.0 {
            continue;
        }
        let mult = e[j] as f64;
        e[j] -= 1;
        acc += shifted(e, c, mu, memo) * (mult * c[i][j]);
        e[j] += 1;
    }
    e[i] += 1;
    memo.insert(key, acc);
    acc
}

/// `E[Π x_i^{p_i} · exp(i Σ_j g_j x_j)]` for the centered Gaussian:
/// `exp(-gᵀCg/2) · E_{N(iCg, C)}[Π x_i^{p_i}]`.
pub fn expectation_with_phase(cov: &DMatrix<f64>, powers: &[(usize, u32)], phase: &[f64]) -> C64 {
    let n = cov.nrows();
    debug_assert_eq!(phase.len(), n);
    if phase.iter().all(|&g| g == 0.0) {
        return C64::new(moment(cov, powers), 0.0);
    }
    let g = nalgebra::DVector::from_column_slice(phase);
    let cg = cov * &g;
    let quad = g.dot(&cg);
    let mean: Vec<C64> = cg.iter().map(|&v| C64::new(0.0, v)).collect();
    shifted_moment(cov, &mean, powers) * (-0.5 * quad).exp()
}
