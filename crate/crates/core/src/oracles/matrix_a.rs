//! The matrix `A_ij = m/4 - |i - j|/2` and its inverse `B`, minus the
//! discrete Laplacian with antiperiodic boundary condition.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatrixAReport {
    pub m: usize,
    /// `A B = I` holds exactly.
    pub inverse_exact: bool,
    /// Largest `|B v - lambda v|` over the stated eigenpairs.
    pub max_residual: f64,
    pub eigenpairs_ok: bool,
    /// Stated eigenvalues have the stated multiplicities.
    pub degeneracy_ok: bool,
    /// Stated eigenvalues match a numerical diagonalization of `B`.
    pub spectrum_ok: bool,
}

impl MatrixAReport {
    pub fn passed(&self) -> bool {
        self.inverse_exact && self.eigenpairs_ok && self.degeneracy_ok && self.spectrum_ok
    }
}

/// `4 A`, integer valued.
pub fn matrix_a_times_four(m: usize) -> Vec<Vec<i64>> {
    (0..m)
        .map(|i| (0..m).map(|j| m as i64 - 2 * (i as i64 - j as i64).abs()).collect())
        .collect()
}

/// `B`: 2 on the diagonal, -1 next to it, +1 in the two corners.
pub fn matrix_b(m: usize) -> Vec<Vec<i64>> {
    let mut b = vec![vec![0i64; m]; m];
    for i in 0..m {
        b[i][i] += 2;
        if i + 1 < m {
            b[i][i + 1] -= 1;
            b[i + 1][i] -= 1;
        }
    }
    b[0][m - 1] += 1;
    b[m - 1][0] += 1;
    b
}

/// Stated eigenpairs of `B`, 1-based component `j` in the vectors.
pub fn stated_eigenpairs(m: usize) -> Vec<(f64, Vec<f64>)> {
    let mut out = Vec::with_capacity(m);
    for q in 1..=m / 2 {
        let k = (2 * q - 1) as f64 * PI / m as f64;
        let lambda = 2.0 * (1.0 - k.cos());
        let sin: Vec<f64> = (1..=m).map(|j| (k * j as f64).sin()).collect();
        let cos: Vec<f64> = (1..=m).map(|j| (k * j as f64).cos()).collect();
        out.push((lambda, sin));
        out.push((lambda, cos));
    }
    if m % 2 == 1 {
        let alt: Vec<f64> = (1..=m).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 }).collect();
        out.push((4.0, alt));
    }
    out
}

pub fn matrix_a_check(m: usize) -> Result<MatrixAReport> {
    if m < 2 {
        return Err(Error::Domain(format!("matrix size must be at least 2, got {m}")));
    }
    let a4 = matrix_a_times_four(m);
    let b = matrix_b(m);
    let mut inverse_exact = true;
    for i in 0..m {
        for j in 0..m {
            let v: i64 = (0..m).map(|k| a4[i][k] * b[k][j]).sum();
            if v != if i == j { 4 } else { 0 } {
                inverse_exact = false;
            }
        }
    }

    let pairs = stated_eigenpairs(m);
    let mut max_residual: f64 = 0.0;
    for (lambda, v) in &pairs {
        for i in 0..m {
            let bv: f64 = (0..m).map(|k| b[i][k] as f64 * v[k]).sum();
            max_residual = max_residual.max((bv - lambda * v[i]).abs());
        }
    }
    let eigenpairs_ok = pairs.len() == m && max_residual < 1e-12;

    let mut distinct: Vec<(f64, usize)> = Vec::new();
    for (lambda, _) in &pairs {
        match distinct.iter_mut().find(|(l, _)| (l - lambda).abs() < 1e-9) {
            Some(entry) => entry.1 += 1,
            None => distinct.push((*lambda, 1)),
        }
    }
    let doubles = distinct.iter().filter(|(_, c)| *c == 2).count();
    let singles = distinct.iter().filter(|(_, c)| *c == 1).count();
    let degeneracy_ok = doubles == m / 2 && singles == m % 2 && distinct.len() == m / 2 + m % 2;

    let dense = DMatrix::from_fn(m, m, |i, j| b[i][j] as f64);
    let mut numeric: Vec<f64> = SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
    numeric.sort_by(f64::total_cmp);
    let mut stated: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    stated.sort_by(f64::total_cmp);
    let spectrum_ok = numeric.len() == stated.len()
        && numeric.iter().zip(&stated).all(|(a, b)| (a - b).abs() < 1e-10);

    Ok(MatrixAReport {
        m,
        inverse_exact,
        max_residual,
        eigenpairs_ok,
        degeneracy_ok,
        spectrum_ok,
    })
}
