//! Truncated series for the interacting partition function.
//!
//! `Q = exp(-beta u_hat(0) N (N-1) / (2 L^d)) * sum over cycle types of
//! weight * sign * G`, where `G` expands in the interaction orders
//! `alpha_{jk}` of all particle pairs. Each order contributes
//! `prod (-beta / L^d)^alpha / alpha!` times a sum over event vectors of
//! `prod u_hat(z / L)` times the time integral of the cycle Boltzmann
//! factors, restricted to vectors with `Z^l_1 = 0` in every cycle.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::cycles::{enumerate_cycle_types, statistics_sign, CycleStructure, MAX_PARTICLES};
use crate::error::{Error, Result};
use crate::graph::{build_coupling_graph, is_valid_merger, nullspace_basis, AlphaConfig};
use crate::ideal::{ideal_cycle_sums, IdealSums};
use crate::numeric::{permutations, NeumaierSum, SimplexRule};
use crate::potential::{dual_l1_bound, DualPotential, LatticeCube};
use crate::thermal::{LatticeTheta, Statistics, SystemParams, DEFAULT_THETA_TOL};

/// Relative accuracy requested from the interaction-free series.
pub const IDEAL_SERIES_TOL: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationPolicy {
    /// Largest total interaction order `A`.
    pub alpha_max: u32,
    /// Radius of the cube of free event vectors.
    pub z_radius: usize,
    /// Bound on each component of the nullspace coefficients.
    pub coeff_bound: usize,
    /// Gauss–Legendre nodes per time dimension.
    pub quad_nodes: usize,
    pub theta_tol: f64,
}

impl Default for TruncationPolicy {
    fn default() -> Self {
        Self {
            alpha_max: 2,
            z_radius: 8,
            coeff_bound: 8,
            quad_nodes: 12,
            theta_tol: DEFAULT_THETA_TOL,
        }
    }
}

impl TruncationPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.alpha_max > 0 && self.z_radius == 0 {
            return Err(Error::config("z_radius", "must be positive when alpha_max > 0"));
        }
        if self.alpha_max > 0 && self.coeff_bound == 0 {
            return Err(Error::config("coeff_bound", "must be positive when alpha_max > 0"));
        }
        if self.alpha_max > 0 && self.quad_nodes == 0 {
            return Err(Error::config("quad_nodes", "must be positive when alpha_max > 0"));
        }
        if !(self.theta_tol > 0.0 && self.theta_tol < 1.0) {
            return Err(Error::config("theta_tol", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvaluationResult {
    pub q: f64,
    /// Contributions keyed by `(p, A)`, prefactor included.
    pub breakdown: BTreeMap<(usize, u32), f64>,
    /// Number of event-vector assignments summed.
    pub term_count: u64,
    /// `(cycle type, alpha)` pairs dropped because the coupling graph has a bridge.
    pub skipped_invalid_alpha: u64,
    pub tail_bound_estimate: f64,
    /// Part of `Q` linear in the potential strength.
    pub first_order: f64,
    pub ideal_series_exact: bool,
}

/// Contribution of one interaction configuration to `G`, prefactor excluded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AlphaTerm {
    pub value: f64,
    pub terms: u64,
    pub valid: bool,
}

/// `exp(-beta u_hat(0) N (N - 1) / (2 L^d))`.
pub fn mean_field_prefactor(params: &SystemParams, pot: &DualPotential) -> f64 {
    let n = params.particles as f64;
    (-params.beta * pot.u_hat_zero(params.dim) * n * (n - 1.0) / (2.0 * params.volume())).exp()
}

/// The `alpha = 0` part of `Q`.
pub fn mean_field_q(params: &SystemParams, pot: &DualPotential) -> Result<f64> {
    let sums = ideal_cycle_sums(params, IDEAL_SERIES_TOL)?;
    Ok(mean_field_prefactor(params, pot) * sums.total)
}

/// All configurations with total order `1..=alpha_max`, by total order and
/// then lexicographically (descending) in the flattened pair grid.
pub fn alpha_configs(particles: usize, alpha_max: u32) -> Vec<AlphaConfig> {
    let pairs: Vec<(usize, usize)> = (0..particles)
        .flat_map(|j| (j + 1..particles).map(move |k| (j, k)))
        .collect();
    let mut out = Vec::new();
    if pairs.is_empty() {
        return out;
    }
    fn fill(
        pairs: &[(usize, usize)],
        idx: usize,
        left: u32,
        counts: &mut Vec<u32>,
        particles: usize,
        out: &mut Vec<AlphaConfig>,
    ) {
        if idx + 1 == pairs.len() {
            counts.push(left);
            let mut cfg = AlphaConfig::new(particles);
            for (&(j, k), &a) in pairs.iter().zip(counts.iter()) {
                cfg.set(j, k, a).expect("generated pairs are ordered");
            }
            out.push(cfg);
            counts.pop();
            return;
        }
        for a in (0..=left).rev() {
            counts.push(a);
            fill(pairs, idx + 1, left - a, counts, particles, out);
            counts.pop();
        }
    }
    for total in 1..=alpha_max {
        fill(&pairs, 0, total, &mut Vec::new(), particles, &mut out);
    }
    out
}

struct EventSlot {
    j: usize,
    k: usize,
    cj: usize,
    ck: usize,
}

/// Event vectors for every allowed assignment, flattened `A * d`, with
/// their potential weights and pairwise dot products.
struct Assignments {
    z: Vec<i64>,
    gram: Vec<f64>,
    weight: Vec<f64>,
}

impl Assignments {
    fn len(&self) -> usize {
        self.weight.len()
    }
}

fn nonzero_cube(dim: usize, r: usize) -> impl Iterator<Item = Vec<i64>> {
    LatticeCube::new(dim, r as i64).filter(|z| z.iter().any(|&c| c != 0))
}

fn enumerate_assignments(
    slots: &[EventSlot],
    alpha: &AlphaConfig,
    cycles: &CycleStructure,
    params: &SystemParams,
    pot: &DualPotential,
    policy: &TruncationPolicy,
) -> Result<Assignments> {
    let dim = params.dim;
    let a = slots.len();
    let graph = build_coupling_graph(alpha, cycles)?;
    let basis = nullspace_basis(&graph);
    // slot index of each graph edge, in edge order
    let inter_slots: Vec<usize> = (0..a).filter(|&e| slots[e].cj != slots[e].ck).collect();
    debug_assert_eq!(inter_slots.len(), graph.edge_count());
    let intra_slots: Vec<usize> = (0..a).filter(|&e| slots[e].cj == slots[e].ck).collect();

    let mut intra_choices: Vec<(Vec<i64>, f64)> = Vec::new();
    if !intra_slots.is_empty() {
        for z in nonzero_cube(dim, policy.z_radius) {
            let u = pot.u_hat_supported(&z, params.side)?;
            if u != 0.0 {
                intra_choices.push((z, u));
            }
        }
    }

    let mut inter_choices: Vec<(Vec<Vec<i64>>, f64)> = Vec::new();
    if inter_slots.is_empty() {
        inter_choices.push((Vec::new(), 1.0));
    } else {
        let k = basis.dimension();
        'coeffs: for coeffs in LatticeCube::new(dim * k, policy.coeff_bound as i64) {
            let mut vectors = Vec::with_capacity(inter_slots.len());
            let mut w = 1.0;
            for e in 0..inter_slots.len() {
                let z: Vec<i64> = (0..dim)
                    .map(|c| (0..k).map(|i| basis.vectors[i][e] * coeffs[i * dim + c]).sum())
                    .collect();
                if z.iter().all(|&c| c == 0) {
                    continue 'coeffs;
                }
                w *= pot.u_hat_supported(&z, params.side)?;
                if w == 0.0 {
                    continue 'coeffs;
                }
                vectors.push(z);
            }
            inter_choices.push((vectors, w));
        }
    }

    let mut out = Assignments {
        z: Vec::new(),
        gram: Vec::new(),
        weight: Vec::new(),
    };
    if !intra_slots.is_empty() && intra_choices.is_empty() {
        return Ok(out);
    }
    let mut flat = vec![0i64; a * dim];
    let mut idx = vec![0usize; intra_slots.len()];
    for (inter_z, inter_w) in &inter_choices {
        for (e, z) in inter_slots.iter().zip(inter_z) {
            flat[e * dim..(e + 1) * dim].copy_from_slice(z);
        }
        idx.iter_mut().for_each(|i| *i = 0);
        loop {
            let mut w = *inter_w;
            for (s, &i) in intra_slots.iter().zip(&idx) {
                let (z, u) = &intra_choices[i];
                flat[s * dim..(s + 1) * dim].copy_from_slice(z);
                w *= u;
            }
            check_constraints(slots, &flat, cycles.cycle_count(), dim)?;
            out.z.extend_from_slice(&flat);
            for e in 0..a {
                for f in 0..a {
                    let d: i64 = (0..dim).map(|c| flat[e * dim + c] * flat[f * dim + c]).sum();
                    out.gram.push(d as f64);
                }
            }
            out.weight.push(w);
            // odometer over intra choices
            let mut pos = 0;
            while pos < idx.len() {
                idx[pos] += 1;
                if idx[pos] < intra_choices.len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                break;
            }
        }
    }
    Ok(out)
}

fn check_constraints(slots: &[EventSlot], flat: &[i64], p: usize, dim: usize) -> Result<()> {
    let mut sums = vec![0i64; p * dim];
    for (e, s) in slots.iter().enumerate() {
        if s.cj == s.ck {
            continue;
        }
        for c in 0..dim {
            sums[s.cj * dim + c] += flat[e * dim + c];
            sums[s.ck * dim + c] -= flat[e * dim + c];
        }
    }
    if sums.iter().any(|&v| v != 0) {
        return Err(Error::Internal(format!(
            "enumerated event vectors violate a cycle constraint: {flat:?}"
        )));
    }
    Ok(())
}

/// Time-dependent coefficients of one cycle: `mean[e]` multiplies `z_e` in
/// the mean shift, `cov[e][f]` multiplies `z_e . z_f` in the variance.
struct CycleKernel {
    c: f64,
    theta: LatticeTheta,
    mean: Vec<f64>,
    cov: Vec<f64>,
}

fn cycle_kernel(
    slots: &[EventSlot],
    times: &[f64],
    cycles: &CycleStructure,
    l: usize,
    theta: LatticeTheta,
) -> CycleKernel {
    let a = slots.len();
    let block = cycles.block(l);
    let n = block.len() as f64;
    let mut roles: Vec<(f64, f64, usize)> = Vec::new();
    for (e, s) in slots.iter().enumerate() {
        if block.contains(&s.j) {
            roles.push((1.0, (s.j - block.start) as f64 + times[e], e));
        }
        if block.contains(&s.k) {
            roles.push((-1.0, (s.k - block.start) as f64 + times[e], e));
        }
    }
    let mut mean = vec![0.0; a];
    let mut cov = vec![0.0; a * a];
    for &(sa, pa, ea) in &roles {
        mean[ea] += sa * pa / n;
        for &(sb, pb, eb) in &roles {
            cov[ea * a + eb] += sa * sb * (pa.min(pb) - pa * pb / n) / n;
        }
    }
    CycleKernel {
        c: theta.c(),
        theta,
        mean,
        cov,
    }
}

fn touched_cycles(slots: &[EventSlot]) -> Vec<usize> {
    let mut out: Vec<usize> = slots.iter().flat_map(|s| [s.cj, s.ck]).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn cycle_thetas(cycles: &CycleStructure, params: &SystemParams, tol: f64) -> Result<Vec<LatticeTheta>> {
    let base = params.kinetic_scale();
    cycles
        .lengths()
        .iter()
        .map(|&n| LatticeTheta::new(base * n as f64, params.dim, tol))
        .collect()
}

/// Contribution of one configuration `alpha` to `G[cycles]`, including
/// `prod (-beta / L^d)^alpha / alpha!` but not the mean-field prefactor.
pub fn alpha_term(
    cycles: &CycleStructure,
    alpha: &AlphaConfig,
    params: &SystemParams,
    pot: &DualPotential,
    policy: &TruncationPolicy,
) -> Result<AlphaTerm> {
    if alpha.particles() != cycles.particles() || cycles.particles() != params.particles {
        return Err(Error::Domain(
            "configuration, cycle structure and system disagree on N".into(),
        ));
    }
    let graph = build_coupling_graph(alpha, cycles)?;
    if !is_valid_merger(&graph) {
        return Ok(AlphaTerm {
            value: 0.0,
            terms: 0,
            valid: false,
        });
    }
    let thetas = cycle_thetas(cycles, params, policy.theta_tol)?;
    let slots: Vec<EventSlot> = alpha
        .iter()
        .flat_map(|((j, k), a)| (0..a).map(move |_| (j, k)))
        .map(|(j, k)| EventSlot {
            j,
            k,
            cj: cycles.cycle_of(j),
            ck: cycles.cycle_of(k),
        })
        .collect();
    let a = slots.len();
    let dim = params.dim;
    let assignments = enumerate_assignments(&slots, alpha, cycles, params, pot, policy)?;
    if assignments.len() == 0 || a == 0 {
        let value = if a == 0 {
            thetas.iter().map(|t| t.centered(dim)).product()
        } else {
            0.0
        };
        return Ok(AlphaTerm {
            value,
            terms: assignments.len() as u64,
            valid: true,
        });
    }

    let touched = touched_cycles(&slots);
    let untouched: f64 = (0..cycles.cycle_count())
        .filter(|l| !touched.contains(l))
        .map(|l| thetas[l].centered(dim))
        .product();

    let rule = SimplexRule::new(a, policy.quad_nodes);
    let perms = permutations(a);
    let points: Vec<(usize, usize)> = (0..perms.len())
        .flat_map(|p| (0..rule.len()).map(move |i| (p, i)))
        .collect();

    let node_sums: Vec<f64> = points
        .par_iter()
        .map(|&(p, i)| {
            let (sorted, w) = rule.node(i);
            let mut times = vec![0.0; a];
            for (slot, &t) in perms[p].iter().zip(sorted) {
                times[*slot] = t;
            }
            let kernels: Vec<CycleKernel> = touched
                .iter()
                .map(|&l| cycle_kernel(&slots, &times, cycles, l, thetas[l]))
                .collect();
            let mut acc = NeumaierSum::new();
            let mut zbar = vec![0.0; dim];
            for t in 0..assignments.len() {
                let z = &assignments.z[t * a * dim..(t + 1) * a * dim];
                let gram = &assignments.gram[t * a * a..(t + 1) * a * a];
                let mut f = assignments.weight[t];
                for k in &kernels {
                    let var: f64 = k.cov.iter().zip(gram).map(|(c, g)| c * g).sum();
                    zbar.iter_mut().for_each(|v| *v = 0.0);
                    for e in 0..a {
                        let m = k.mean[e];
                        if m != 0.0 {
                            for c in 0..dim {
                                zbar[c] += m * z[e * dim + c] as f64;
                            }
                        }
                    }
                    f *= (-k.c * var.max(0.0)).exp() * k.theta.eval(&zbar);
                }
                acc.add(f);
            }
            w * acc.value()
        })
        .collect();
    let integral = NeumaierSum::sum_iter(node_sums);

    let scale = -params.beta / params.volume();
    let mut coef = 1.0;
    for (_, order) in alpha.iter() {
        for i in 1..=order {
            coef *= scale / i as f64;
        }
    }
    Ok(AlphaTerm {
        value: coef * untouched * integral,
        terms: assignments.len() as u64,
        valid: true,
    })
}

/// `G[cycles]` truncated at `policy.alpha_max`, prefactor included.
pub fn evaluate_g(
    cycles: &CycleStructure,
    params: &SystemParams,
    pot: &DualPotential,
    policy: &TruncationPolicy,
) -> Result<f64> {
    policy.validate()?;
    if cycles.particles() != params.particles {
        return Err(Error::Domain(format!(
            "cycle lengths sum to {}, system has {} particles",
            cycles.particles(),
            params.particles
        )));
    }
    let zero = AlphaConfig::new(params.particles);
    let mut acc = NeumaierSum::new();
    acc.add(alpha_term(cycles, &zero, params, pot, policy)?.value);
    let terms: Vec<AlphaTerm> = alpha_configs(params.particles, policy.alpha_max)
        .par_iter()
        .map(|alpha| alpha_term(cycles, alpha, params, pot, policy))
        .collect::<Result<_>>()?;
    for t in terms {
        acc.add(t.value);
    }
    Ok(mean_field_prefactor(params, pot) * acc.value())
}

fn tail_bound(
    params: &SystemParams,
    pot: &DualPotential,
    policy: &TruncationPolicy,
    prefactor: f64,
) -> Result<f64> {
    if pot.is_zero() {
        return Ok(0.0);
    }
    let n = params.particles;
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    if pairs == 0.0 {
        return Ok(0.0);
    }
    let x = params.beta * dual_l1_bound(pot, params.side, params.dim, policy.z_radius.max(1))?;
    let bose = SystemParams {
        statistics: Statistics::Bose,
        ..*params
    };
    let b = ideal_cycle_sums(&bose, IDEAL_SERIES_TOL)?.total;
    let y = pairs * x;
    let mut term = 1.0;
    let mut tail = NeumaierSum::new();
    let mut a = 0u32;
    loop {
        a += 1;
        term *= y / a as f64;
        if a > policy.alpha_max {
            tail.add(term);
            if term < 1e-18 * tail.value() || term == 0.0 {
                break;
            }
        }
        if a > 10_000 {
            break;
        }
    }
    Ok(prefactor * b * tail.value())
}

/// `Q` truncated at `policy.alpha_max`.
pub fn evaluate_q(
    params: &SystemParams,
    pot: &DualPotential,
    policy: &TruncationPolicy,
) -> Result<EvaluationResult> {
    policy.validate()?;
    let n = params.particles;
    if n > MAX_PARTICLES {
        return Err(Error::config("N", format!("at most {MAX_PARTICLES} particles supported")));
    }
    let prefactor = mean_field_prefactor(params, pot);
    let IdealSums {
        total: ideal_total,
        by_cycle_count,
        exact,
        ..
    } = ideal_cycle_sums(params, IDEAL_SERIES_TOL)?;

    let types = enumerate_cycle_types(n)?;
    let configs = alpha_configs(n, policy.alpha_max);
    let jobs: Vec<(usize, usize)> = (0..types.len())
        .flat_map(|t| (0..configs.len()).map(move |c| (t, c)))
        .collect();
    let terms: Vec<AlphaTerm> = jobs
        .par_iter()
        .map(|&(t, c)| alpha_term(&types[t].0, &configs[c], params, pot, policy))
        .collect::<Result<_>>()?;

    let mut parts: BTreeMap<(usize, u32), NeumaierSum> = BTreeMap::new();
    let mut first = NeumaierSum::new();
    let mut term_count = 0u64;
    let mut skipped = 0u64;
    for (&(t, c), term) in jobs.iter().zip(&terms) {
        let (cycles, weight) = &types[t];
        let p = cycles.cycle_count();
        let order = configs[c].total_order();
        term_count += term.terms;
        if !term.valid {
            skipped += 1;
        }
        let sign = statistics_sign(p, n, params.statistics) as f64;
        let v = weight.to_f64().unwrap_or(0.0) * sign * term.value;
        parts.entry((p, order)).or_default().add(prefactor * v);
        if order == 1 {
            first.add(v);
        }
    }
    let mut breakdown: BTreeMap<(usize, u32), f64> =
        parts.into_iter().map(|(k, s)| (k, s.value())).collect();
    for (&p, &v) in &by_cycle_count {
        breakdown.insert((p, 0), prefactor * v);
    }

    let mut q = NeumaierSum::new();
    q.add(prefactor * ideal_total);
    for (&(_, order), &v) in &breakdown {
        if order > 0 {
            q.add(v);
        }
    }
    let nf = n as f64;
    let mean_field_slope = -params.beta * pot.u_hat_zero(params.dim) * nf * (nf - 1.0)
        / (2.0 * params.volume());
    first.add(mean_field_slope * ideal_total);

    Ok(EvaluationResult {
        q: q.value(),
        breakdown,
        term_count,
        skipped_invalid_alpha: skipped,
        tail_bound_estimate: tail_bound(params, pot, policy, prefactor)?,
        first_order: first.value(),
        ideal_series_exact: exact,
    })
}

/// `pi n lambda^2 / L^2` for a cycle of length `n`.
pub fn cycle_exponent(params: &SystemParams, n: usize) -> f64 {
    PI * n as f64 * params.lambda * params.lambda / (params.side * params.side)
}
