//! System parameters and the Gaussian lattice sums every term of the series
//! is built from.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default relative tolerance for truncated lattice sums.
pub const DEFAULT_THETA_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Bose,
    Fermi,
}

impl std::str::FromStr for Statistics {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bose" | "boson" | "bosons" => Ok(Statistics::Bose),
            "fermi" | "fermion" | "fermions" => Ok(Statistics::Fermi),
            other => Err(Error::config(
                "statistics",
                format!("expected `bose` or `fermi`, got `{other}`"),
            )),
        }
    }
}

/// N particles in a d-dimensional periodic box of side L at inverse
/// temperature beta, with thermal wavelength lambda.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub particles: usize,
    pub dim: usize,
    pub side: f64,
    pub beta: f64,
    pub lambda: f64,
    pub statistics: Statistics,
}

impl SystemParams {
    pub fn new(
        particles: usize,
        dim: usize,
        side: f64,
        beta: f64,
        lambda: f64,
        statistics: Statistics,
    ) -> Result<Self> {
        if particles == 0 {
            return Err(Error::config("N", "particle count must be at least 1"));
        }
        if dim == 0 {
            return Err(Error::config("d", "dimension must be at least 1"));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::config("L", format!("side must be positive, got {side}")));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::config(
                "beta",
                format!("inverse temperature must be positive, got {beta}"),
            ));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::config(
                "lambda",
                format!("thermal wavelength must be positive, got {lambda}"),
            ));
        }
        Ok(Self {
            particles,
            dim,
            side,
            beta,
            lambda,
            statistics,
        })
    }

    /// Builds the parameters from a particle mass, deriving lambda.
    pub fn from_mass(
        particles: usize,
        dim: usize,
        side: f64,
        beta: f64,
        mass: f64,
        hbar: f64,
        statistics: Statistics,
    ) -> Result<Self> {
        let lambda = thermal_wavelength_with_hbar(beta, mass, hbar)?;
        Self::new(particles, dim, side, beta, lambda, statistics)
    }

    /// Gaussian width `pi lambda^2 / L^2` of a single-particle cycle factor.
    pub fn kinetic_scale(&self) -> f64 {
        PI * self.lambda * self.lambda / (self.side * self.side)
    }

    /// `L^d`.
    pub fn volume(&self) -> f64 {
        self.side.powi(self.dim as i32)
    }
}

/// `sqrt(2 pi hbar^2 beta / mass)` with `hbar = 1`.
pub fn thermal_wavelength(beta: f64, mass: f64) -> Result<f64> {
    thermal_wavelength_with_hbar(beta, mass, 1.0)
}

pub fn thermal_wavelength_with_hbar(beta: f64, mass: f64, hbar: f64) -> Result<f64> {
    if !(beta > 0.0) || !(mass > 0.0) || !(hbar > 0.0) {
        return Err(Error::Domain(format!(
            "thermal wavelength needs beta, mass, hbar > 0 (got {beta}, {mass}, {hbar})"
        )));
    }
    Ok((2.0 * PI * hbar * hbar * beta / mass).sqrt())
}

/// Smallest `R >= 1` with `2 e^{-c R^2} / (1 - e^{-c (2R+1)}) < tol`.
///
/// The left side bounds `sum_{|z| >= R} e^{-c z^2}` from above by a
/// geometric series, so truncating at `|z| <= R` leaves a tail below `tol`.
pub fn theta_truncation_radius(c: f64, tol: f64) -> Result<usize> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(Error::Domain(format!("lattice sum needs c > 0, got {c}")));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::Domain(format!("tolerance must lie in (0, 1), got {tol}")));
    }
    let mut r: usize = 1;
    loop {
        let rf = r as f64;
        let head = (-c * rf * rf).exp();
        let ratio = 1.0 - (-c * (2.0 * rf + 1.0)).exp();
        if ratio > 0.0 && 2.0 * head / ratio < tol {
            return Ok(r);
        }
        r += 1;
    }
}

/// Truncated `sum_{z in Z^d} exp(-c (z + s)^2)` with a fixed radius.
///
/// The sum factorizes over axes, so it is evaluated as a product of
/// one-dimensional sums over `|z_i| <= R + 1` after reducing each shift to
/// `[-1/2, 1/2]`.
#[derive(Debug, Clone, Copy)]
pub struct LatticeTheta {
    c: f64,
    radius: usize,
}

impl LatticeTheta {
    pub fn new(c: f64, dim: usize, tol: f64) -> Result<Self> {
        let per_axis = tol / dim.max(1) as f64;
        let radius = theta_truncation_radius(c, per_axis)?;
        Ok(Self { c, radius })
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    #[inline]
    pub fn axis(&self, shift: f64) -> f64 {
        let r = shift - shift.round();
        let c = self.c;
        let mut acc = 0.0;
        for k in (1..=self.radius + 1).rev() {
            let kf = k as f64;
            let a = kf + r;
            let b = -kf + r;
            acc += (-c * a * a).exp() + (-c * b * b).exp();
        }
        acc + (-c * r * r).exp()
    }

    #[inline]
    pub fn eval(&self, shift: &[f64]) -> f64 {
        shift.iter().map(|&s| self.axis(s)).product()
    }

    /// The unshifted sum in `dim` dimensions.
    pub fn centered(&self, dim: usize) -> f64 {
        self.axis(0.0).powi(dim as i32)
    }
}

/// `sum_{z in Z^d} exp(-c (z + s)^2)` with `d = s.len()` at the default tolerance.
pub fn theta_sum(c: f64, shift: &[f64]) -> Result<f64> {
    theta_sum_with_tol(c, shift, DEFAULT_THETA_TOL)
}

pub fn theta_sum_with_tol(c: f64, shift: &[f64], tol: f64) -> Result<f64> {
    if shift.is_empty() {
        return Err(Error::Domain("lattice sum needs dimension >= 1".into()));
    }
    if shift.iter().any(|s| !s.is_finite()) {
        return Err(Error::Domain("lattice sum shift must be finite".into()));
    }
    Ok(LatticeTheta::new(c, shift.len(), tol)?.eval(shift))
}
