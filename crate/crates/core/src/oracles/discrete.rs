//! Discrete-time two-particle formulas with `m` time slices.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::potential::{DualPotential, LatticeCube, PotentialKind};
use crate::thermal::{LatticeTheta, Statistics, SystemParams, DEFAULT_THETA_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EHatMode {
    /// `delta(z, 0) - beta u_hat(z / L) / (m L^d)`.
    Taylor,
    /// Fourier coefficient of `exp(-(beta / m) u_L)` by quadrature.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TwoBodyPartition {
    /// One cycle of length two.
    Pair,
    /// Two cycles of length one.
    Singles,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DiscretePolicy {
    pub m: usize,
    pub z_cutoff: usize,
    pub alpha_max: usize,
}

impl DiscretePolicy {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(Error::config("m", "needs at least one time slice"));
        }
        if self.alpha_max > self.m {
            return Err(Error::config("alpha_max", "cannot exceed the number of slices"));
        }
        Ok(())
    }
}

const EXACT_GRID: usize = 256;

fn periodized(pot: &DualPotential, x: &[f64], side: f64, images: i64) -> f64 {
    let dim = x.len();
    let mut acc = 0.0;
    let mut shifted = vec![0.0; dim];
    for n in LatticeCube::new(dim, images) {
        for i in 0..dim {
            shifted[i] = x[i] + n[i] as f64 * side;
        }
        acc += pot.direct(&shifted).unwrap_or(0.0);
    }
    acc
}

/// `E_m(z)`, the Fourier coefficient of one slice's interaction factor.
pub fn e_hat_m(
    z: &[i64],
    m: usize,
    pot: &DualPotential,
    params: &SystemParams,
    mode: EHatMode,
) -> Result<f64> {
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    if z.len() != params.dim {
        return Err(Error::Domain(format!("{z:?} is not a {}-vector", params.dim)));
    }
    let delta = if z.iter().all(|&c| c == 0) { 1.0 } else { 0.0 };
    let side = params.side;
    match mode {
        EHatMode::Taylor => {
            let u = pot.u_hat_supported(z, side)?;
            Ok(delta - params.beta * u / (m as f64 * params.volume()))
        }
        EHatMode::Exact => {
            let range = match pot.kind() {
                PotentialKind::Zero => return Ok(delta),
                PotentialKind::Gaussian { range, .. } => *range,
                PotentialKind::Tabulated(_) => {
                    return Err(Error::Domain(
                        "exact slice coefficients need a potential known in position space".into(),
                    ))
                }
            };
            // images beyond ~7 ranges contribute below 1e-60
            let images = (7.0 * range / side).ceil() as i64 + 1;
            let dim = params.dim;
            let h = side / EXACT_GRID as f64;
            let mut acc = NeumaierSum::new();
            let mut x = vec![0.0; dim];
            for idx in LatticeCube::new(dim, (EXACT_GRID / 2) as i64) {
                // grid points 0..EXACT_GRID per axis, shifted to be symmetric
                if idx.contains(&((EXACT_GRID / 2) as i64)) {
                    continue;
                }
                let mut phase = 0.0;
                for i in 0..dim {
                    x[i] = idx[i] as f64 * h;
                    phase += z[i] as f64 * x[i];
                }
                let u = periodized(pot, &x, side, images);
                acc.add((-(params.beta / m as f64) * u).exp() * (2.0 * PI * phase / side).cos());
            }
            Ok(acc.value() * h.powi(dim as i32) / params.volume())
        }
    }
}

fn nonzero_vectors(dim: usize, r: usize) -> Vec<Vec<i64>> {
    LatticeCube::new(dim, r as i64)
        .filter(|z| z.iter().any(|&c| c != 0))
        .collect()
}

fn dot(a: &[i64], b: &[i64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x * y) as f64).sum()
}

/// Ordered slice indices `1 <= i_1 < ... < i_a <= m`.
fn slice_tuples(m: usize, a: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (1..=a).collect();
    if a == 0 {
        return vec![Vec::new()];
    }
    loop {
        out.push(cur.clone());
        let mut i = a;
        while i > 0 && cur[i - 1] == m - a + i {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        cur[i - 1] += 1;
        for j in i..a {
            cur[j] = cur[j - 1] + 1;
        }
    }
    out
}

/// Two-particle `G_m` for one cycle structure, summed over up to `alpha_max`
/// slices carrying a nonzero momentum transfer.
pub fn discrete_g2(
    partition: TwoBodyPartition,
    params: &SystemParams,
    pot: &DualPotential,
    policy: &DiscretePolicy,
    mode: EHatMode,
) -> Result<f64> {
    policy.validate()?;
    if params.particles != 2 {
        return Err(Error::Domain("discrete two-body formula needs N = 2".into()));
    }
    let dim = params.dim;
    let m = policy.m;
    let c = PI * params.lambda * params.lambda / (params.side * params.side);
    let e0 = e_hat_m(&vec![0; dim], m, pot, params, mode)?;
    let vectors: Vec<(Vec<i64>, f64)> = nonzero_vectors(dim, policy.z_cutoff)
        .into_iter()
        .map(|z| e_hat_m(&z, m, pot, params, mode).map(|e| (z, e)))
        .filter(|r| !matches!(r, Ok((_, e)) if *e == 0.0))
        .collect::<Result<_>>()?;
    let theta_pair = LatticeTheta::new(2.0 * c, dim, DEFAULT_THETA_TOL)?;
    let theta_single = LatticeTheta::new(c, dim, DEFAULT_THETA_TOL)?;

    let mut total = NeumaierSum::new();
    for a in 0..=policy.alpha_max {
        let tuples = slice_tuples(m, a);
        // all a-tuples of vector indices
        let count = vectors.len().pow(a as u32);
        let partials: Vec<f64> = (0..count)
            .into_par_iter()
            .map(|flat| {
                let mut idx = flat;
                let mut zs: Vec<&[i64]> = Vec::with_capacity(a);
                let mut weight = 1.0;
                for _ in 0..a {
                    let (z, e) = &vectors[idx % vectors.len()];
                    idx /= vectors.len();
                    zs.push(z);
                    weight *= e;
                }
                let mut sum = vec![0i64; dim];
                for z in &zs {
                    for (s, &v) in sum.iter_mut().zip(z.iter()) {
                        *s += v;
                    }
                }
                if partition == TwoBodyPartition::Singles && sum.iter().any(|&s| s != 0) {
                    return 0.0;
                }
                let gram: Vec<f64> = (0..a * a).map(|k| dot(zs[k / a], zs[k % a])).collect();
                let mut acc = NeumaierSum::new();
                let mut shift = vec![0.0; dim];
                for slots in &tuples {
                    let t: Vec<f64> = slots.iter().map(|&i| i as f64 / m as f64).collect();
                    let f = match partition {
                        TwoBodyPartition::Pair => {
                            let mut q = 0.0;
                            for r in 0..a {
                                for s in 0..a {
                                    q += (0.5 - (t[r] - t[s]).abs()) * gram[r * a + s];
                                }
                            }
                            let half: Vec<f64> = sum.iter().map(|&v| -0.5 * v as f64).collect();
                            (-c * q).exp() * theta_pair.eval(&half)
                        }
                        TwoBodyPartition::Singles => {
                            let mut q = 0.0;
                            for r in 0..a {
                                for s in 0..a {
                                    q += (t[r].min(t[s]) - t[r] * t[s]) * gram[r * a + s];
                                }
                            }
                            shift.iter_mut().for_each(|v| *v = 0.0);
                            for (r, z) in zs.iter().enumerate() {
                                for (sv, &zv) in shift.iter_mut().zip(z.iter()) {
                                    *sv += t[r] * zv as f64;
                                }
                            }
                            let th = theta_single.eval(&shift);
                            (-2.0 * c * q).exp() * th * th
                        }
                    };
                    acc.add(f);
                }
                weight * acc.value()
            })
            .collect();
        let inner = NeumaierSum::sum_iter(partials);
        total.add(e0.powi((m - a) as i32) * inner);
    }
    Ok(total.value())
}

/// `(1/2) [Tr (D M)^m +- Tr X (D M)^m]` in a plane-wave basis with
/// `|n_i| <= cutoff`, where `D` is one slice of kinetic factor, `M` one
/// slice of interaction with entries `E_m(z)` and `X` exchanges the particles.
pub fn trotter_q2(
    params: &SystemParams,
    pot: &DualPotential,
    m: usize,
    cutoff: usize,
    mode: EHatMode,
) -> Result<f64> {
    if params.particles != 2 {
        return Err(Error::Domain("Trotter product is implemented for N = 2".into()));
    }
    if m == 0 {
        return Err(Error::Domain("m must be at least 1".into()));
    }
    let dim = params.dim;
    let k = cutoff as i64;
    let c = params.kinetic_scale() / m as f64;
    let momenta: Vec<Vec<i64>> = LatticeCube::new(dim, k).collect();
    let totals: Vec<Vec<i64>> = LatticeCube::new(dim, 2 * k).collect();
    let mut e_cache = std::collections::BTreeMap::new();
    for z in LatticeCube::new(dim, 2 * k) {
        let e = e_hat_m(&z, m, pot, params, mode)?;
        e_cache.insert(z, e);
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
            let mut t = DMatrix::<f64>::zeros(b, b);
            for (r, n1) in states.iter().enumerate() {
                let n2: Vec<i64> = n1.iter().zip(p).map(|(&a, &b)| b - a).collect();
                let kin: f64 = n1.iter().chain(&n2).map(|&v| (v * v) as f64).sum();
                let d = (-c * kin).exp();
                for (s, n1p) in states.iter().enumerate() {
                    let z: Vec<i64> = n1.iter().zip(n1p.iter()).map(|(&a, &b)| a - b).collect();
                    t[(r, s)] = d * e_cache[&z];
                }
            }
            let mut pow = DMatrix::<f64>::identity(b, b);
            for _ in 0..m {
                pow = &pow * &t;
            }
            let direct = pow.trace();
            let mut exchange = 0.0;
            for (r, n1) in states.iter().enumerate() {
                let n2: Vec<i64> = n1.iter().zip(p).map(|(&a, &b)| b - a).collect();
                let s = states.iter().position(|x| **x == n2).expect("swapped state in block");
                exchange += pow[(r, s)];
            }
            (direct, exchange)
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
