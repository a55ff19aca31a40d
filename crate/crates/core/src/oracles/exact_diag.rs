//! Two-particle trace of `exp(-beta H)` by diagonalizing `H` in plane waves.
//!
//! The basis is `|n_1, n_2>` with `|n_i|` bounded componentwise by the
//! cutoff. The interaction conserves `P = n_1 + n_2`, so each total-momentum
//! block is diagonalized separately.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::potential::{DualPotential, LatticeCube};
use crate::thermal::{Statistics, SystemParams};

/// Relative change between cutoffs `K - 2` and `K` accepted as converged.
pub const CONVERGENCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactDiagResult {
    pub q: f64,
    /// The same trace at cutoff `K - 2`.
    pub q_coarse: f64,
    pub converged: bool,
}

fn trace_at(params: &SystemParams, pot: &DualPotential, cutoff: usize) -> Result<f64> {
    let dim = params.dim;
    let k = cutoff as i64;
    let c = params.kinetic_scale();
    let coupling = params.beta / params.volume();
    let momenta: Vec<Vec<i64>> = LatticeCube::new(dim, k).collect();
    let totals: Vec<Vec<i64>> = LatticeCube::new(dim, 2 * k).collect();
    let mut u = std::collections::BTreeMap::new();
    for z in LatticeCube::new(dim, 2 * k) {
        let v = pot.u_hat_supported(&z, params.side)?;
        u.insert(z, v);
    }
    let sign = match params.statistics {
        Statistics::Bose => 1.0,
        Statistics::Fermi => -1.0,
    };
    let parts: Vec<(f64, f64)> = totals
        .par_iter()
        .map(|p| {
            let states: Vec<&Vec<i64>> = momenta
                .iter()
                .filter(|n1| n1.iter().zip(p).all(|(&a, &b)| (b - a).abs() <= k))
                .collect();
            let b = states.len();
            let mut h = DMatrix::<f64>::zeros(b, b);
            for (r, n1) in states.iter().enumerate() {
                let kin: f64 = n1
                    .iter()
                    .zip(p)
                    .map(|(&a, &b)| (a * a + (b - a) * (b - a)) as f64)
                    .sum();
                h[(r, r)] += c * kin;
                for (s, n1p) in states.iter().enumerate() {
                    let z: Vec<i64> = n1.iter().zip(n1p.iter()).map(|(&a, &b)| a - b).collect();
                    h[(r, s)] += coupling * u[&z];
                }
            }
            let eig = SymmetricEigen::new(h);
            let weights: Vec<f64> = eig.eigenvalues.iter().map(|&l| (-l).exp()).collect();
            let direct = NeumaierSum::sum_iter(weights.iter().copied());
            let mut exchange = NeumaierSum::new();
            for (r, n1) in states.iter().enumerate() {
                let n2: Vec<i64> = n1.iter().zip(p).map(|(&a, &b)| b - a).collect();
                let s = states.iter().position(|x| **x == n2).expect("swapped state in block");
                let mut v = 0.0;
                for (col, w) in weights.iter().enumerate() {
                    v += eig.eigenvectors[(r, col)] * w * eig.eigenvectors[(s, col)];
                }
                exchange.add(v);
            }
            (direct, exchange.value())
        })
        .collect();
    let mut direct = NeumaierSum::new();
    let mut exchange = NeumaierSum::new();
    for (d, x) in parts {
        direct.add(d);
        exchange.add(x);
    }
    Ok(0.5 * (direct.value() + sign * exchange.value()))
}

/// `Tr P exp(-beta H)` for two particles, with the same trace at cutoff
/// `K - 2` as a convergence check.
pub fn exact_q2(params: &SystemParams, pot: &DualPotential, cutoff: usize) -> Result<ExactDiagResult> {
    if params.particles != 2 {
        return Err(Error::Domain("exact diagonalization is implemented for N = 2".into()));
    }
    if cutoff < 3 {
        return Err(Error::config("momentum_cutoff", "must be at least 3"));
    }
    let q = trace_at(params, pot, cutoff)?;
    let q_coarse = trace_at(params, pot, cutoff - 2)?;
    Ok(ExactDiagResult {
        q,
        q_coarse,
        converged: (q - q_coarse).abs() <= CONVERGENCE_TOL * q.abs(),
    })
}
