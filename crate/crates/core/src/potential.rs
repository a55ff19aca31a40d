//! Pair potentials, represented by their Fourier transform.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialKind {
    Zero,
    /// `u(x) = g exp(-pi |x|^2 / a^2)`, so `u_hat(v) = g a^d exp(-pi a^2 |v|^2)`.
    Gaussian { strength: f64, range: f64 },
    /// Values of `u_hat(z / L)` at dual lattice points `z` for one fixed side `L`.
    Tabulated(DualTable),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualTable {
    dim: usize,
    side: f64,
    values: BTreeMap<Vec<i64>, f64>,
}

impl DualTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest `max_i |z_i|` over stored points.
    pub fn radius(&self) -> i64 {
        self.values
            .keys()
            .map(|z| z.iter().map(|c| c.abs()).max().unwrap_or(0))
            .max()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualPotential {
    kind: PotentialKind,
    decay_exponent: Option<f64>,
}

impl DualPotential {
    pub fn zero() -> Self {
        Self {
            kind: PotentialKind::Zero,
            decay_exponent: None,
        }
    }

    pub fn gaussian(strength: f64, range: f64) -> Result<Self> {
        if !strength.is_finite() {
            return Err(Error::config("strength", "must be finite"));
        }
        if !(range > 0.0 && range.is_finite()) {
            return Err(Error::config("range", format!("must be positive, got {range}")));
        }
        Ok(Self {
            kind: PotentialKind::Gaussian { strength, range },
            decay_exponent: None,
        })
    }

    /// Builds a table of `u_hat(z / side)` values. Every point must come with
    /// its negative carrying the same value, and `z = 0` must be present.
    pub fn tabulated(dim: usize, side: f64, entries: Vec<(Vec<i64>, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::config("d", "dimension must be at least 1"));
        }
        if !(side > 0.0) {
            return Err(Error::config("L", "table side must be positive"));
        }
        let mut values = BTreeMap::new();
        for (z, v) in entries {
            if z.len() != dim {
                return Err(Error::config(
                    "table",
                    format!("point {z:?} has {} coordinates, expected {dim}", z.len()),
                ));
            }
            if !v.is_finite() {
                return Err(Error::config("table", format!("value at {z:?} is not finite")));
            }
            if values.insert(z.clone(), v).is_some() {
                return Err(Error::config("table", format!("point {z:?} listed twice")));
            }
        }
        for (z, v) in &values {
            let neg: Vec<i64> = z.iter().map(|c| -c).collect();
            match values.get(&neg) {
                Some(w) if w == v => {}
                Some(w) => {
                    return Err(Error::config(
                        "table",
                        format!("table is not even: {z:?} -> {v} but {neg:?} -> {w}"),
                    ))
                }
                None => {
                    return Err(Error::config(
                        "table",
                        format!("table is not even: {neg:?} missing (mirror of {z:?})"),
                    ))
                }
            }
        }
        if !values.contains_key(&vec![0; dim]) {
            return Err(Error::config("table", "table must contain z = 0"));
        }
        Ok(Self {
            kind: PotentialKind::Tabulated(DualTable { dim, side, values }),
            decay_exponent: None,
        })
    }

    /// Parses lines `z_1 ... z_d value`; blank lines and `#` comments are skipped.
    pub fn parse_table(text: &str, dim: usize, side: f64) -> Result<Self> {
        let mut entries = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim + 1 {
                return Err(Error::Parse {
                    line: idx + 1,
                    message: format!("expected {} fields, found {}", dim + 1, fields.len()),
                });
            }
            let mut z = Vec::with_capacity(dim);
            for f in &fields[..dim] {
                z.push(f.parse::<i64>().map_err(|e| Error::Parse {
                    line: idx + 1,
                    message: format!("bad lattice coordinate `{f}`: {e}"),
                })?);
            }
            let v = fields[dim].parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 1,
                message: format!("bad value `{}`: {e}", fields[dim]),
            })?;
            entries.push((z, v));
        }
        Self::tabulated(dim, side, entries)
    }

    pub fn with_decay_exponent(mut self, eta: f64) -> Result<Self> {
        if !(eta > 0.0) {
            return Err(Error::config("decay_exponent", "must be positive"));
        }
        self.decay_exponent = Some(eta);
        Ok(self)
    }

    pub fn kind(&self) -> &PotentialKind {
        &self.kind
    }

    /// Decay exponent of the direct-space potential, carried as metadata.
    pub fn decay_exponent(&self) -> Option<f64> {
        self.decay_exponent
    }

    pub fn is_zero(&self) -> bool {
        match &self.kind {
            PotentialKind::Zero => true,
            PotentialKind::Gaussian { strength, .. } => *strength == 0.0,
            PotentialKind::Tabulated(t) => t.values.values().all(|v| *v == 0.0),
        }
    }

    /// `u_hat(0)` in `dim` dimensions.
    pub fn u_hat_zero(&self, dim: usize) -> f64 {
        match &self.kind {
            PotentialKind::Zero => 0.0,
            PotentialKind::Gaussian { strength, range } => strength * range.powi(dim as i32),
            PotentialKind::Tabulated(t) => t.values[&vec![0; t.dim]],
        }
    }

    /// `u_hat(v)`.
    pub fn u_hat(&self, v: &[f64]) -> Result<f64> {
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("dual point must be finite".into()));
        }
        match &self.kind {
            PotentialKind::Zero => Ok(0.0),
            PotentialKind::Gaussian { strength, range } => {
                let v2: f64 = v.iter().map(|c| c * c).sum();
                Ok(strength * range.powi(v.len() as i32) * (-PI * range * range * v2).exp())
            }
            PotentialKind::Tabulated(t) => {
                if v.len() != t.dim {
                    return Err(Error::Domain(format!(
                        "table has dimension {}, got a {}-vector",
                        t.dim,
                        v.len()
                    )));
                }
                let mut z = Vec::with_capacity(v.len());
                for &c in v {
                    let scaled = c * t.side;
                    let r = scaled.round();
                    if (scaled - r).abs() > 1e-9 * scaled.abs().max(1.0) {
                        return Err(Error::Range(format!(
                            "{v:?} is not a dual lattice point for side {}",
                            t.side
                        )));
                    }
                    z.push(r as i64);
                }
                t.values
                    .get(&z)
                    .copied()
                    .ok_or_else(|| Error::Range(format!("lattice point {z:?} is outside the table")))
            }
        }
    }

    /// `u_hat(z / side)` at an integer point.
    pub fn u_hat_lattice(&self, z: &[i64], side: f64) -> Result<f64> {
        match &self.kind {
            PotentialKind::Zero => Ok(0.0),
            PotentialKind::Gaussian { strength, range } => {
                let z2: f64 = z.iter().map(|&c| (c * c) as f64).sum();
                let s = range / side;
                Ok(strength * range.powi(z.len() as i32) * (-PI * s * s * z2).exp())
            }
            PotentialKind::Tabulated(t) => {
                if (t.side - side).abs() > 1e-12 * side {
                    return Err(Error::Range(format!(
                        "table was built for side {}, queried with side {side}",
                        t.side
                    )));
                }
                t.values
                    .get(z)
                    .copied()
                    .ok_or_else(|| Error::Range(format!("lattice point {z:?} is outside the table")))
            }
        }
    }

    /// Like [`Self::u_hat_lattice`], but a table is taken to vanish outside
    /// the points it lists.
    pub fn u_hat_supported(&self, z: &[i64], side: f64) -> Result<f64> {
        if let PotentialKind::Tabulated(t) = &self.kind {
            if (t.side - side).abs() <= 1e-12 * side && !t.values.contains_key(z) {
                return Ok(0.0);
            }
        }
        self.u_hat_lattice(z, side)
    }

    /// Direct-space `u(x)` where it is known in closed form.
    pub fn direct(&self, x: &[f64]) -> Option<f64> {
        match &self.kind {
            PotentialKind::Zero => Some(0.0),
            PotentialKind::Gaussian { strength, range } => {
                let x2: f64 = x.iter().map(|c| c * c).sum();
                Some(strength * (-PI * x2 / (range * range)).exp())
            }
            PotentialKind::Tabulated(_) => None,
        }
    }

}

/// `sum_{z != 0, |z_i| <= cutoff} |u_hat(z / L)| / L^d`.
pub fn dual_l1_bound(pot: &DualPotential, side: f64, dim: usize, cutoff: usize) -> Result<f64> {
    if cutoff == 0 {
        return Err(Error::Domain("cutoff must be at least 1".into()));
    }
    if let PotentialKind::Zero = pot.kind() {
        return Ok(0.0);
    }
    let r = cutoff as i64;
    let mut acc = crate::numeric::NeumaierSum::new();
    for z in LatticeCube::new(dim, r) {
        if z.iter().all(|&c| c == 0) {
            continue;
        }
        acc.add(pot.u_hat_lattice(&z, side)?.abs());
    }
    Ok(acc.value() / side.powi(dim as i32))
}

/// All points of `[-r, r]^dim` in lexicographic order.
#[derive(Debug, Clone)]
pub struct LatticeCube {
    r: i64,
    current: Option<Vec<i64>>,
}

impl LatticeCube {
    pub fn new(dim: usize, r: i64) -> Self {
        Self {
            r,
            current: if r >= 0 { Some(vec![-r; dim]) } else { None },
        }
    }
}

impl Iterator for LatticeCube {
    type Item = Vec<i64>;

    fn next(&mut self) -> Option<Vec<i64>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if cur[i] < self.r {
                cur[i] += 1;
                break;
            }
            cur[i] = -self.r;
        }
        Some(out)
    }
}
