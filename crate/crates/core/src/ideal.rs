//! Interaction-free cycle sums evaluated as exact power series.
//!
//! With `x = exp(-pi lambda^2 / L^2)` every cycle factor
//! `theta(pi n lambda^2 / L^2, 0)` is a power series in `x` with integer
//! coefficients, so `N!` times the sum over cycle types is an integer series.
//! Summing coefficients before evaluating avoids the cancellation between
//! cycle types that the fermionic signs would otherwise cause.

use std::collections::BTreeMap;

use num_traits::ToPrimitive;

use crate::cycles::{class_size, enumerate_cycle_types, statistics_sign};
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::thermal::{theta_sum, Statistics, SystemParams};

/// Series longer than this are evaluated in floating point instead.
pub const MAX_SERIES_DEGREE: usize = 20_000;

/// Interaction-free cycle sum, total and split by cycle count `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealSums {
    pub total: f64,
    pub by_cycle_count: BTreeMap<usize, f64>,
    /// False when the integer series was abandoned for plain products.
    pub exact: bool,
    pub degree: usize,
}

/// Number of `z` in `Z^d` with `|z|^2 = e`, for `e <= max`.
pub fn lattice_shell_counts(dim: usize, max: usize) -> Vec<i128> {
    let mut one = vec![0i128; max + 1];
    let mut k = 0usize;
    while k * k <= max {
        one[k * k] += if k == 0 { 1 } else { 2 };
        k += 1;
    }
    let mut acc = vec![0i128; max + 1];
    acc[0] = 1;
    for _ in 0..dim {
        let mut next = vec![0i128; max + 1];
        for (a, &ca) in acc.iter().enumerate() {
            if ca == 0 {
                continue;
            }
            for (b, &cb) in one.iter().enumerate().take(max + 1 - a) {
                if cb != 0 {
                    next[a + b] += ca * cb;
                }
            }
        }
        acc = next;
    }
    acc
}

/// Sum of the `count` smallest values of `|z|^2` over `Z^d`.
pub fn lowest_shell_energy(dim: usize, count: usize) -> usize {
    let mut max = 1;
    loop {
        let shells = lattice_shell_counts(dim, max);
        let available: i128 = shells.iter().sum();
        if available >= count as i128 {
            let mut left = count as i128;
            let mut energy = 0usize;
            for (e, &c) in shells.iter().enumerate() {
                let take = c.min(left);
                energy += e * take as usize;
                left -= take;
                if left == 0 {
                    break;
                }
            }
            return energy;
        }
        max *= 2;
    }
}

fn bose_recursion(n: usize, dim: usize, c: f64) -> Result<f64> {
    let origin = vec![0.0; dim];
    let q: Vec<f64> = (1..=n)
        .map(|k| theta_sum(k as f64 * c, &origin))
        .collect::<Result<_>>()?;
    let mut z = vec![1.0];
    for m in 1..=n {
        let s: f64 = (1..=m).map(|k| q[k - 1] * z[m - k]).sum();
        z.push(s / m as f64);
    }
    Ok(z[n])
}

/// Truncation degree so the dropped coefficients weigh less than `tol`
/// relative to the ground-state term.
///
/// The `N`-particle state counts are bounded by `Q_B(c/2) x^{-E/2}`, with
/// `Q_B` the bosonic sum at half the exponent, which bounds the tail by a
/// geometric series.
pub fn series_degree(params: &SystemParams, tol: f64) -> Result<usize> {
    let c = params.kinetic_scale();
    let qb = bose_recursion(params.particles, params.dim, 0.5 * c)?;
    let ground = match params.statistics {
        Statistics::Bose => 0,
        Statistics::Fermi => lowest_shell_energy(params.dim, params.particles),
    };
    let log_tail = qb.ln() - tol.ln() - (1.0 - (-0.5 * c).exp()).ln();
    let d = 2.0 * log_tail / c + 2.0 * ground as f64;
    if !d.is_finite() || d < 0.0 {
        return Err(Error::Range(format!("cannot size ideal series for c = {c}")));
    }
    Ok(d.ceil() as usize)
}

/// `theta(n c, 0)` in `d` dimensions as a series in `x`, truncated at `degree`.
fn theta_series(shells: &[i128], n: usize, degree: usize) -> Vec<(usize, i128)> {
    shells
        .iter()
        .enumerate()
        .take_while(|(e, _)| e * n <= degree)
        .filter(|(_, &c)| c != 0)
        .map(|(e, &c)| (e * n, c))
        .collect()
}

fn mul_sparse(dense: &[i128], sparse: &[(usize, i128)], degree: usize) -> Option<Vec<i128>> {
    let mut out = vec![0i128; degree + 1];
    for (a, &ca) in dense.iter().enumerate() {
        if ca == 0 {
            continue;
        }
        for &(b, cb) in sparse {
            if a + b > degree {
                break;
            }
            out[a + b] = out[a + b].checked_add(ca.checked_mul(cb)?)?;
        }
    }
    Some(out)
}

/// `sum_E coeffs[E] x^E / denom` by compensated summation.
pub fn eval_series(coeffs: &[i128], c: f64, denom: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    for (e, &b) in coeffs.iter().enumerate() {
        if b != 0 {
            acc.add(b as f64 * (-c * e as f64).exp());
        }
    }
    acc.value() / denom
}

/// Integer series of `N!` times the signed cycle-type sum, keyed by `p`,
/// or `None` if a coefficient overflows.
fn exact_series(params: &SystemParams, degree: usize) -> Result<Option<BTreeMap<usize, Vec<i128>>>> {
    let n = params.particles;
    let shells = lattice_shell_counts(params.dim, degree);
    let thetas: Vec<_> = (1..=n).map(|k| theta_series(&shells, k, degree)).collect();
    let mut by_p: BTreeMap<usize, Vec<i128>> = BTreeMap::new();
    for (cycles, _) in enumerate_cycle_types(n)? {
        let p = cycles.cycle_count();
        let Some(size) = class_size(cycles.lengths()).to_i128() else {
            return Ok(None);
        };
        let sign = statistics_sign(p, n, params.statistics) as i128;
        let mut poly = vec![0i128; degree + 1];
        poly[0] = sign * size;
        for &len in cycles.lengths() {
            match mul_sparse(&poly, &thetas[len - 1], degree) {
                Some(next) => poly = next,
                None => return Ok(None),
            }
        }
        let slot = by_p.entry(p).or_insert_with(|| vec![0i128; degree + 1]);
        for (s, v) in slot.iter_mut().zip(&poly) {
            match s.checked_add(*v) {
                Some(x) => *s = x,
                None => return Ok(None),
            }
        }
    }
    Ok(Some(by_p))
}

fn float_sums(params: &SystemParams) -> Result<IdealSums> {
    let n = params.particles;
    let c = params.kinetic_scale();
    let origin = vec![0.0; params.dim];
    let mut total = NeumaierSum::new();
    let mut parts: BTreeMap<usize, NeumaierSum> = BTreeMap::new();
    for (cycles, w) in enumerate_cycle_types(n)? {
        let p = cycles.cycle_count();
        let sign = statistics_sign(p, n, params.statistics) as f64;
        let mut v = sign * w.to_f64().unwrap_or(0.0);
        for &len in cycles.lengths() {
            v *= theta_sum(len as f64 * c, &origin)?;
        }
        total.add(v);
        parts.entry(p).or_default().add(v);
    }
    Ok(IdealSums {
        total: total.value(),
        by_cycle_count: parts.into_iter().map(|(p, s)| (p, s.value())).collect(),
        exact: false,
        degree: 0,
    })
}

/// `sum over cycle types of weight * sign * prod_l theta(pi n_l lambda^2 / L^2, 0)`.
pub fn ideal_cycle_sums(params: &SystemParams, tol: f64) -> Result<IdealSums> {
    let degree = series_degree(params, tol)?;
    if degree > MAX_SERIES_DEGREE {
        return float_sums(params);
    }
    let Some(by_p) = exact_series(params, degree)? else {
        return float_sums(params);
    };
    let c = params.kinetic_scale();
    let denom = (1..=params.particles).map(|k| k as f64).product::<f64>();
    let mut total = vec![0i128; degree + 1];
    for poly in by_p.values() {
        for (t, v) in total.iter_mut().zip(poly) {
            *t += v;
        }
    }
    Ok(IdealSums {
        total: eval_series(&total, c, denom),
        by_cycle_count: by_p
            .iter()
            .map(|(&p, poly)| (p, eval_series(poly, c, denom)))
            .collect(),
        exact: true,
        degree,
    })
}
