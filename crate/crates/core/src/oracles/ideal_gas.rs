//! Canonical recursion for the free gas,
//! `Q_N = (1/N) sum_k (+-1)^{k-1} q_k Q_{N-k}` with `q_k = theta(pi k lambda^2 / L^2)`.
//!
//! `q_k` is a power series in `x = exp(-pi lambda^2 / L^2)` whose coefficients
//! count lattice points, so `N! Q_N` is run through the recursion as an
//! integer series. The series is lengthened until its last half adds nothing
//! at double precision.

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::potential::LatticeCube;
use crate::thermal::{theta_sum, Statistics, SystemParams};

pub const MAX_ORACLE_PARTICLES: usize = 12;
const MAX_DEGREE: usize = 1 << 15;

fn lattice_counts(dim: usize, degree: usize) -> Vec<i128> {
    let r = (degree as f64).sqrt().floor() as i64;
    let mut counts = vec![0i128; degree + 1];
    for z in LatticeCube::new(dim, r) {
        let e: i64 = z.iter().map(|c| c * c).sum();
        if (e as usize) <= degree {
            counts[e as usize] += 1;
        }
    }
    counts
}

fn recursion_series(params: &SystemParams, degree: usize) -> Option<Vec<i128>> {
    let n = params.particles;
    let counts = lattice_counts(params.dim, degree);
    let q: Vec<Vec<(usize, i128)>> = (1..=n)
        .map(|k| {
            counts
                .iter()
                .enumerate()
                .filter(|&(e, &c)| c != 0 && e * k <= degree)
                .map(|(e, &c)| (e * k, c))
                .collect()
        })
        .collect();
    // s[m] = m! Q_m
    let mut s: Vec<Vec<i128>> = vec![{
        let mut one = vec![0i128; degree + 1];
        one[0] = 1;
        one
    }];
    for m in 1..=n {
        let mut next = vec![0i128; degree + 1];
        let mut falling: i128 = 1; // (m-1)! / (m-k)!
        for k in 1..=m {
            if k > 1 {
                falling = falling.checked_mul((m - k + 1) as i128)?;
            }
            let sign: i128 = match params.statistics {
                Statistics::Bose => 1,
                Statistics::Fermi if k % 2 == 1 => 1,
                Statistics::Fermi => -1,
            };
            let scale = sign.checked_mul(falling)?;
            let prev = &s[m - k];
            for (a, &ca) in prev.iter().enumerate() {
                if ca == 0 {
                    continue;
                }
                let base = ca.checked_mul(scale)?;
                for &(b, cb) in &q[k - 1] {
                    if a + b > degree {
                        break;
                    }
                    next[a + b] = next[a + b].checked_add(base.checked_mul(cb)?)?;
                }
            }
        }
        s.push(next);
    }
    s.pop()
}

fn float_recursion(params: &SystemParams) -> Result<f64> {
    let c = params.kinetic_scale();
    let origin = vec![0.0; params.dim];
    let q: Vec<f64> = (1..=params.particles)
        .map(|k| theta_sum(k as f64 * c, &origin))
        .collect::<Result<_>>()?;
    let mut z = vec![1.0];
    for m in 1..=params.particles {
        let mut acc = NeumaierSum::new();
        for k in 1..=m {
            let sign = match params.statistics {
                Statistics::Fermi if k % 2 == 0 => -1.0,
                _ => 1.0,
            };
            acc.add(sign * q[k - 1] * z[m - k]);
        }
        z.push(acc.value() / m as f64);
    }
    Ok(z[params.particles])
}

/// Free-gas canonical partition function for `N <= 12`.
pub fn ideal_gas_q(params: &SystemParams) -> Result<f64> {
    let n = params.particles;
    if n > MAX_ORACLE_PARTICLES {
        return Err(Error::Domain(format!(
            "ideal-gas oracle supports N <= {MAX_ORACLE_PARTICLES}, got {n}"
        )));
    }
    let c = params.kinetic_scale();
    let nfact: f64 = (1..=n).map(|k| k as f64).product();
    let mut degree = 64;
    while degree <= MAX_DEGREE {
        let Some(series) = recursion_series(params, degree) else {
            break;
        };
        let mut head = NeumaierSum::new();
        let mut tail = NeumaierSum::new();
        for (e, &b) in series.iter().enumerate() {
            let v = b as f64 * (-c * e as f64).exp();
            if 2 * e <= degree {
                head.add(v);
            } else {
                tail.add(v);
            }
        }
        let total = head.value() + tail.value();
        if total > 0.0 && tail.value().abs() <= 1e-17 * total {
            return Ok(total / nfact);
        }
        degree *= 2;
    }
    float_recursion(params)
}
