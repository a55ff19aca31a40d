//! Permutation cycle types of `S_N` and their weights.

use std::ops::Range;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::thermal::Statistics;

/// Largest particle count accepted by the enumerators.
pub const MAX_PARTICLES: usize = 16;

/// Cycle lengths `n_1..n_p` with the particles of cycle `l` occupying the
/// consecutive block `prefix[l]..prefix[l + 1]` (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CycleStructure {
    lengths: Vec<usize>,
    prefix: Vec<usize>,
}

impl CycleStructure {
    pub fn new(lengths: Vec<usize>) -> Result<Self> {
        if lengths.is_empty() || lengths.contains(&0) {
            return Err(Error::Domain(format!(
                "cycle lengths must be a nonempty list of positive integers, got {lengths:?}"
            )));
        }
        let mut prefix = Vec::with_capacity(lengths.len() + 1);
        prefix.push(0);
        for &n in &lengths {
            prefix.push(prefix.last().unwrap() + n);
        }
        Ok(Self { lengths, prefix })
    }

    /// Number of cycles `p`.
    pub fn cycle_count(&self) -> usize {
        self.lengths.len()
    }

    /// Number of particles `N`.
    pub fn particles(&self) -> usize {
        *self.prefix.last().unwrap()
    }

    pub fn lengths(&self) -> &[usize] {
        &self.lengths
    }

    pub fn len_of(&self, l: usize) -> usize {
        self.lengths[l]
    }

    /// `N_0 = 0, N_1, ..., N_p`.
    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    pub fn start(&self, l: usize) -> usize {
        self.prefix[l]
    }

    pub fn block(&self, l: usize) -> Range<usize> {
        self.prefix[l]..self.prefix[l + 1]
    }

    /// Cycle containing particle `q`.
    pub fn cycle_of(&self, q: usize) -> usize {
        debug_assert!(q < self.particles());
        self.prefix.partition_point(|&s| s <= q) - 1
    }
}

fn check_range(n: usize) -> Result<()> {
    if n == 0 || n > MAX_PARTICLES {
        return Err(Error::Domain(format!(
            "particle count must lie in 1..={MAX_PARTICLES}, got {n}"
        )));
    }
    Ok(())
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Integer partitions of `n` as non-increasing sequences, in lexicographic order.
fn partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in 1..=max.min(rest) {
            cur.push(part);
            rec(rest - part, part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Ordered compositions of `n`, in lexicographic order.
fn compositions(n: usize) -> Vec<Vec<usize>> {
    fn rec(rest: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest == 0 {
            out.push(cur.clone());
            return;
        }
        for part in 1..=rest {
            cur.push(part);
            rec(rest - part, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut out);
    out
}

fn sort_by_count_then_lengths(items: &mut [(CycleStructure, BigRational)]) {
    items.sort_by(|a, b| {
        a.0.cycle_count()
            .cmp(&b.0.cycle_count())
            .then_with(|| a.0.lengths.cmp(&b.0.lengths))
    });
}

/// Number of permutations of `S_N` whose cycle type is the multiset `lengths`.
pub fn class_size(lengths: &[usize]) -> BigInt {
    let n: usize = lengths.iter().sum();
    let mut denom = BigInt::one();
    let mut sorted = lengths.to_vec();
    sorted.sort_unstable();
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        let mult = j - i;
        denom *= BigInt::from(sorted[i]).pow(mult as u32) * factorial(mult);
        i = j;
    }
    factorial(n) / denom
}

/// Cycle types of `S_N` (non-increasing lengths), each with the fraction of
/// permutations having that type. Ordered by cycle count, then lengths.
pub fn enumerate_cycle_types(n: usize) -> Result<Vec<(CycleStructure, BigRational)>> {
    check_range(n)?;
    let total = factorial(n);
    let mut out: Vec<_> = partitions(n)
        .into_iter()
        .map(|lengths| {
            let w = BigRational::new(class_size(&lengths), total.clone());
            (CycleStructure::new(lengths).expect("partition parts are positive"), w)
        })
        .collect();
    sort_by_count_then_lengths(&mut out);
    Ok(out)
}

/// Ordered cycle-length sequences with weight `1 / (N (N - N_1) ... (N - N_{p-1}))`.
pub fn enumerate_compositions(n: usize) -> Result<Vec<(CycleStructure, BigRational)>> {
    check_range(n)?;
    let mut out: Vec<_> = compositions(n)
        .into_iter()
        .map(|lengths| {
            let mut denom = BigInt::one();
            let mut used = 0;
            for &len in &lengths {
                denom *= BigInt::from(n - used);
                used += len;
            }
            let w = BigRational::new(BigInt::one(), denom);
            (CycleStructure::new(lengths).expect("composition parts are positive"), w)
        })
        .collect();
    sort_by_count_then_lengths(&mut out);
    Ok(out)
}

/// `+1` for bosons, `(-1)^(N - p)` for fermions.
pub fn statistics_sign(p: usize, n: usize, statistics: Statistics) -> i32 {
    debug_assert!(p >= 1 && p <= n);
    match statistics {
        Statistics::Bose => 1,
        Statistics::Fermi => {
            if (n - p).is_multiple_of(2) {
                1
            } else {
                -1
            }
        }
    }
}

/// Exact totals of the partition-form and composition-form weights.
pub fn unity_check(n: usize) -> Result<(BigRational, BigRational)> {
    let sum = |items: Vec<(CycleStructure, BigRational)>| {
        items
            .into_iter()
            .fold(BigRational::zero(), |acc, (_, w)| acc + w)
    };
    Ok((sum(enumerate_cycle_types(n)?), sum(enumerate_compositions(n)?)))
}
