//! Momentum-shift profiles of interaction events and the per-cycle moments
//! and Boltzmann factors built from them.
//!
//! Particles and cycles are 0-based. An event on the pair `j < k` at time `t`
//! with vector `z` affects the cycles containing `j` and `k`. Inside cycle `l`
//! starting at particle `s`, particle `q` at time `t` sits at position
//! `tau = (q - s) + t` of the cycle's closed trajectory, and its shift is
//!
//! ```text
//! Z_q(t) = sum over roles of sigma * z * 1{pos >= tau}
//! ```
//!
//! where an event contributes a `k`-role (`sigma = -1`, `pos = k - s + t`) if
//! `k` lies in the cycle and a `j`-role (`sigma = +1`, `pos = j - s + t`) if `j`
//! does. Intra-cycle events carry both roles.

use std::f64::consts::PI;

use serde::Serialize;

use crate::cycles::CycleStructure;
use crate::error::{Error, Result};
use crate::graph::AlphaConfig;
use crate::thermal::{theta_sum, SystemParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub j: usize,
    pub k: usize,
    pub time: f64,
    pub z: Vec<i64>,
}

/// Interaction events, kept sorted by pair; events of one pair keep their
/// given order, which is their index `r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EventSet {
    particles: usize,
    dim: usize,
    events: Vec<Event>,
}

impl EventSet {
    pub fn new(particles: usize, dim: usize, mut events: Vec<Event>) -> Result<Self> {
        for e in &events {
            if !(e.j < e.k && e.k < particles) {
                return Err(Error::Domain(format!(
                    "event pair ({}, {}) must satisfy j < k < {particles}",
                    e.j, e.k
                )));
            }
            if !(0.0..=1.0).contains(&e.time) {
                return Err(Error::Domain(format!("event time {} outside [0, 1]", e.time)));
            }
            if e.z.len() != dim {
                return Err(Error::Domain(format!(
                    "event vector {:?} is not {dim}-dimensional",
                    e.z
                )));
            }
            if e.z.iter().all(|&c| c == 0) {
                return Err(Error::Domain("event vectors must be nonzero".into()));
            }
        }
        events.sort_by_key(|e| (e.j, e.k));
        Ok(Self {
            particles,
            dim,
            events,
        })
    }

    pub fn empty(particles: usize, dim: usize) -> Self {
        Self {
            particles,
            dim,
            events: Vec::new(),
        }
    }

    /// Events for `alpha` in `(j, k, r)` order, taking times and vectors in
    /// that same order.
    pub fn from_alpha(
        alpha: &AlphaConfig,
        dim: usize,
        times: &[f64],
        vectors: &[Vec<i64>],
    ) -> Result<Self> {
        let total = alpha.total_order() as usize;
        if times.len() != total || vectors.len() != total {
            return Err(Error::Domain(format!(
                "configuration has {total} events, got {} times and {} vectors",
                times.len(),
                vectors.len()
            )));
        }
        let mut events = Vec::with_capacity(total);
        let mut idx = 0;
        for ((j, k), a) in alpha.iter() {
            for _ in 0..a {
                events.push(Event {
                    j,
                    k,
                    time: times[idx],
                    z: vectors[idx].clone(),
                });
                idx += 1;
            }
        }
        Self::new(alpha.particles(), dim, events)
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn alpha(&self) -> AlphaConfig {
        let mut a = AlphaConfig::new(self.particles);
        for e in &self.events {
            let cur = a.get(e.j, e.k);
            a.set(e.j, e.k, cur + 1).expect("validated pair");
        }
        a
    }
}

fn check_cycles(events: &EventSet, cycles: &CycleStructure, l: usize) {
    assert_eq!(
        events.particles(),
        cycles.particles(),
        "event set and cycle structure disagree on N"
    );
    assert!(l < cycles.cycle_count(), "cycle index {l} out of range");
}

/// A signed appearance of an event in one cycle's shift profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Role {
    pub sigma: i64,
    pub pos: f64,
    pub event: usize,
}

pub(crate) fn cycle_roles(events: &EventSet, cycles: &CycleStructure, l: usize) -> Vec<Role> {
    let block = cycles.block(l);
    let s = block.start;
    let mut roles = Vec::new();
    for (idx, e) in events.events.iter().enumerate() {
        if block.contains(&e.j) {
            roles.push(Role {
                sigma: 1,
                pos: (e.j - s) as f64 + e.time,
                event: idx,
            });
        }
        if block.contains(&e.k) {
            roles.push(Role {
                sigma: -1,
                pos: (e.k - s) as f64 + e.time,
                event: idx,
            });
        }
    }
    roles
}

/// `Z^l_1`, the shift of the first particle of cycle `l` at time 0.
pub fn z_l1(events: &EventSet, cycles: &CycleStructure, l: usize) -> Vec<i64> {
    check_cycles(events, cycles, l);
    let block = cycles.block(l);
    let mut out = vec![0i64; events.dim];
    for e in &events.events {
        let sign = match (block.contains(&e.j), block.contains(&e.k)) {
            (false, true) => -1,
            (true, false) => 1,
            _ => 0,
        };
        if sign != 0 {
            for (o, &c) in out.iter_mut().zip(&e.z) {
                *o += sign * c;
            }
        }
    }
    out
}

/// `Z_q(t)` from its four-sum definition with the literal `>=` / `<`
/// comparisons of event times against `t`.
pub fn shift_at(events: &EventSet, cycles: &CycleStructure, q: usize, t: f64) -> Vec<i64> {
    assert!(q < cycles.particles(), "particle {q} out of range");
    let l = cycles.cycle_of(q);
    check_cycles(events, cycles, l);
    let end = cycles.block(l).end;
    let mut out = vec![0i64; events.dim];
    for e in &events.events {
        let later = e.time >= t;
        let sign = if later {
            if e.j < q && q <= e.k && e.k < end {
                -1
            } else if q <= e.j && e.j < end && e.k >= end {
                1
            } else {
                0
            }
        } else if e.j <= q && q < e.k && e.k < end {
            -1
        } else if q < e.j && e.j < end && e.k >= end {
            1
        } else {
            0
        };
        if sign != 0 {
            for (o, &c) in out.iter_mut().zip(&e.z) {
                *o += sign * c;
            }
        }
    }
    out
}

/// Piecewise-constant `Z_q` on `[0, 1]`: `values[i]` holds on
/// `(breakpoints[i], breakpoints[i + 1])`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftProfile {
    pub particle: usize,
    pub breakpoints: Vec<f64>,
    pub values: Vec<Vec<i64>>,
}

impl ShiftProfile {
    /// `int_0^1 Z_q(t) dt` and `int_0^1 |Z_q(t)|^2 dt`.
    pub fn integrals(&self) -> (Vec<f64>, f64) {
        let dim = self.values.first().map_or(0, |v| v.len());
        let mut first = vec![0.0; dim];
        let mut second = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let len = self.breakpoints[i + 1] - self.breakpoints[i];
            for (f, &c) in first.iter_mut().zip(v) {
                *f += len * c as f64;
            }
            second += len * v.iter().map(|&c| (c * c) as f64).sum::<f64>();
        }
        (first, second)
    }
}

pub fn shift_profile(events: &EventSet, cycles: &CycleStructure, q: usize) -> ShiftProfile {
    let mut cuts: Vec<f64> = events.events.iter().map(|e| e.time).collect();
    cuts.push(0.0);
    cuts.push(1.0);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let values = cuts
        .windows(2)
        .map(|w| shift_at(events, cycles, q, 0.5 * (w[0] + w[1])))
        .collect();
    ShiftProfile {
        particle: q,
        breakpoints: cuts,
        values,
    }
}

/// Mean shift, mean squared shift and their difference for one cycle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleMoments {
    pub zbar: Vec<f64>,
    pub z2bar: f64,
    pub variance: f64,
}

fn dot(a: &[i64], b: &[i64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x * y) as f64).sum()
}

/// Moments from the min-coefficient closed forms: with roles `(sigma, pos, z)`,
/// `n zbar = sum sigma pos z`, `n z2bar = sum sigma sigma' z.z' min(pos, pos')`
/// and `n var = sum sigma sigma' z.z' (min(pos, pos') - pos pos' / n)`.
pub fn cycle_moments_closed(events: &EventSet, cycles: &CycleStructure, l: usize) -> CycleMoments {
    check_cycles(events, cycles, l);
    let n = cycles.len_of(l) as f64;
    let roles = cycle_roles(events, cycles, l);
    let mut zbar = vec![0.0; events.dim];
    for r in &roles {
        let z = &events.events[r.event].z;
        for (m, &c) in zbar.iter_mut().zip(z) {
            *m += r.sigma as f64 * r.pos * c as f64;
        }
    }
    let mut second = 0.0;
    let mut var = 0.0;
    for a in &roles {
        let za = &events.events[a.event].z;
        for b in &roles {
            let zb = &events.events[b.event].z;
            let w = (a.sigma * b.sigma) as f64 * dot(za, zb);
            let m = a.pos.min(b.pos);
            second += w * m;
            var += w * (m - a.pos * b.pos / n);
        }
    }
    for m in zbar.iter_mut() {
        *m /= n;
    }
    CycleMoments {
        zbar,
        z2bar: second / n,
        variance: var / n,
    }
}

/// Moments by exact integration of the piecewise-constant profiles.
pub fn cycle_moments_direct(events: &EventSet, cycles: &CycleStructure, l: usize) -> CycleMoments {
    check_cycles(events, cycles, l);
    let n = cycles.len_of(l) as f64;
    let mut zbar = vec![0.0; events.dim];
    let mut z2bar = 0.0;
    for q in cycles.block(l) {
        let (first, second) = shift_profile(events, cycles, q).integrals();
        for (m, f) in zbar.iter_mut().zip(first) {
            *m += f;
        }
        z2bar += second;
    }
    for m in zbar.iter_mut() {
        *m /= n;
    }
    z2bar /= n;
    let variance = z2bar - zbar.iter().map(|m| m * m).sum::<f64>();
    CycleMoments {
        zbar,
        z2bar,
        variance,
    }
}

/// `n zbar` split by event class: inter-cycle events entering at `k`,
/// intra-cycle events (weighted by `k - j`), inter-cycle events leaving at `j`.
pub fn mean_shift_split_form(events: &EventSet, cycles: &CycleStructure, l: usize) -> Vec<f64> {
    check_cycles(events, cycles, l);
    let block = cycles.block(l);
    let s = block.start;
    let mut out = vec![0.0; events.dim];
    for e in &events.events {
        let (inj, ink) = (block.contains(&e.j), block.contains(&e.k));
        let w = match (inj, ink) {
            (false, true) => -((e.k - s) as f64 + e.time),
            (true, true) => -((e.k - e.j) as f64),
            (true, false) => (e.j - s) as f64 + e.time,
            (false, false) => 0.0,
        };
        for (o, &c) in out.iter_mut().zip(&e.z) {
            *o += w * c as f64;
        }
    }
    out
}

/// Which difference of min-coefficients to evaluate; the first event is
/// `(j, k, t)` and the second `(j', k', t')`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoefficientCase {
    /// `min(k + t, k' + t') - min(k + t, j' + t')`
    KJpKp,
    /// `min(j + t, k' + t') - min(j + t, j' + t')`
    JJpKp,
    /// `min(k + t, j' + t') - min(j + t, j' + t')`
    JpJK,
}

/// Piecewise closed form of a min-coefficient difference; particle indices
/// are absolute, and the cycle offset cancels.
pub fn coefficient_difference(
    case: CoefficientCase,
    first: (usize, usize, f64),
    second: (usize, usize, f64),
) -> Result<f64> {
    let (j, k, t) = first;
    let (jp, kp, tp) = second;
    if j >= k || jp >= kp {
        return Err(Error::Domain(format!(
            "index pairs must satisfy j < k and j' < k', got ({j}, {k}) and ({jp}, {kp})"
        )));
    }
    let mn = t.min(tp);
    let (j, k, jp, kp) = (j as f64, k as f64, jp as f64, kp as f64);
    let v = match case {
        CoefficientCase::KJpKp => table(k, jp, kp, t, tp, mn),
        CoefficientCase::JJpKp => table(j, jp, kp, t, tp, mn),
        CoefficientCase::JpJK => {
            if k < jp {
                k - j
            } else if k == jp {
                k - j + mn - t
            } else if j < jp {
                jp - j + tp - t
            } else if j == jp {
                tp - mn
            } else {
                0.0
            }
        }
    };
    Ok(v)
}

/// Shared five-case table of `min(x + t, k' + t') - min(x + t, j' + t')`.
fn table(x: f64, jp: f64, kp: f64, t: f64, tp: f64, mn: f64) -> f64 {
    if kp < x {
        kp - jp
    } else if kp == x {
        kp - jp + mn - tp
    } else if jp < x {
        x - jp + t - tp
    } else if jp == x {
        t - mn
    } else {
        0.0
    }
}

/// Below this a negative variance is treated as rounding.
pub const VARIANCE_SLACK: f64 = 1e-12;

/// `exp(-c var) * theta(c, zbar)` with `c = pi n lambda^2 / L^2`.
pub fn cycle_boltzmann_factor(
    moments: &CycleMoments,
    cycle_len: usize,
    params: &SystemParams,
) -> Result<f64> {
    if moments.variance < -VARIANCE_SLACK {
        return Err(Error::Internal(format!(
            "negative shift variance {}",
            moments.variance
        )));
    }
    if moments.zbar.len() != params.dim {
        return Err(Error::Domain(format!(
            "mean shift has {} components, system dimension is {}",
            moments.zbar.len(),
            params.dim
        )));
    }
    let c = PI * cycle_len as f64 * params.lambda * params.lambda / (params.side * params.side);
    let var = moments.variance.max(0.0);
    Ok((-c * var).exp() * theta_sum(c, &moments.zbar)?)
}

/// The bracket of the series for fixed events: the product over cycles of
/// `delta(Z^l_1, 0)` times the cycle Boltzmann factor.
pub fn inner_bracket(events: &EventSet, cycles: &CycleStructure, params: &SystemParams) -> Result<f64> {
    let mut out = 1.0;
    for l in 0..cycles.cycle_count() {
        if z_l1(events, cycles, l).iter().any(|&c| c != 0) {
            return Ok(0.0);
        }
        let m = cycle_moments_closed(events, cycles, l);
        out *= cycle_boltzmann_factor(&m, cycles.len_of(l), params)?;
    }
    Ok(out)
}
