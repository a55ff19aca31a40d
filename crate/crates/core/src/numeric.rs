//! Small numerical building blocks: compensated summation and Gauss–Legendre
//! rules on the unit interval and on the ordered simplex.

use std::f64::consts::PI;

/// Neumaier's variant of Kahan summation.
///
/// Accumulation order is whatever order `add` is called in; callers that need
/// bit-stable results fold in a fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn sum_iter<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc.value()
    }
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut rule = Vec::with_capacity(n);
    let nf = n as f64;
    for i in 0..n {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((0.5 * (1.0 - x), 0.5 * w));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Quadrature rule on the ordered simplex `0 <= u_1 <= ... <= u_dim <= 1`.
///
/// Built by collapsing the unit cube (`u_dim = x_dim`, `u_i = u_{i+1} x_i`)
/// and taking the tensor product of `n`-point Gauss–Legendre rules; the
/// Jacobian `prod_i x_i^(i-1)` is folded into the weights, which sum to
/// `1/dim!`.
#[derive(Debug, Clone)]
pub struct SimplexRule {
    dim: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl SimplexRule {
    pub fn new(dim: usize, n: usize) -> Self {
        if dim == 0 {
            return Self {
                dim,
                nodes: Vec::new(),
                weights: vec![1.0],
            };
        }
        let line = gauss_legendre_unit(n);
        let count = n.pow(dim as u32);
        let mut nodes = Vec::with_capacity(count * dim);
        let mut weights = Vec::with_capacity(count);
        let mut idx = vec![0usize; dim];
        let mut u = vec![0.0; dim];
        for _ in 0..count {
            let mut w = 1.0;
            let mut scale = 1.0;
            for i in (0..dim).rev() {
                let (x, wx) = line[idx[i]];
                scale *= x;
                u[i] = scale;
                w *= wx * x.powi(i as i32);
            }
            nodes.extend_from_slice(&u);
            weights.push(w);
            for slot in idx.iter_mut() {
                *slot += 1;
                if *slot < n {
                    break;
                }
                *slot = 0;
            }
        }
        Self {
            dim,
            nodes,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Node `i` (sorted coordinates) and its weight.
    pub fn node(&self, i: usize) -> (&[f64], f64) {
        (&self.nodes[i * self.dim..(i + 1) * self.dim], self.weights[i])
    }
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current: Vec<usize> = (0..n).collect();
    loop {
        out.push(current.clone());
        // next lexicographic permutation
        let Some(i) = (1..n).rev().find(|&i| current[i - 1] < current[i]) else {
            break;
        };
        let j = (i..n).rev().find(|&j| current[j] > current[i - 1]).unwrap();
        current.swap(i - 1, j);
        current[i..].reverse();
    }
    out
}
